//! Estimates of the Kobayashi–Royden metric `F_Ω(z, v)`: inscribed-ball upper
//! bounds, psh lower brackets, closed forms on the disc and ball, and a
//! direct search over polynomial discs.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::Rng;
use serde::Serialize;

use crate::distance::DistanceOptions;
use crate::domains::DomainSpec;
use crate::error::{Error, Result};
use crate::exec::{map_indexed, substream, Exec};
use crate::jet::{to_real, RealJet, RealJet2, RealPoly};
use crate::linalg::{bilinear, cmat_mul_vec, cnorm, hermitian_dot, hermitian_min_eigenvalue};
use std::sync::Arc;

use crate::maps::{BallAutomorphism, HolomorphicMap, Identity, Linear, MapUnderTest, Power, Scale};

/// A point of `Ω` and a tangent vector. `v = 0` is allowed; every estimator
/// vanishes there.
#[derive(Debug, Clone)]
pub struct MetricQuery {
    pub domain: DomainSpec,
    pub z: Vec<Complex64>,
    pub v: Vec<Complex64>,
}

impl MetricQuery {
    pub fn new(domain: DomainSpec, z: Vec<Complex64>, v: Vec<Complex64>) -> Result<Self> {
        if z.len() != domain.n || v.len() != domain.n {
            return Err(Error::DimensionMismatch {
                expected: domain.n,
                actual: if z.len() != domain.n {
                    z.len()
                } else {
                    v.len()
                },
            });
        }
        if !(domain.value(&z) < 0.0) {
            return Err(Error::Precondition(
                "query point must lie in the domain".into(),
            ));
        }
        Ok(Self { domain, z, v })
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct MetricEstimate {
    pub lower: f64,
    pub upper: f64,
    pub exact: Option<f64>,
    /// Coefficients `(z, v/λ, a_2, …)` of the disc realising `upper`, in real
    /// coordinates.
    pub upper_witness: Vec<Vec<f64>>,
    /// Fitted constant multiplying the lower bracket.
    pub lower_constant: f64,
}

impl MetricEstimate {
    pub fn consistent(&self) -> bool {
        let ok = self.lower <= self.upper + 1e-9;
        match self.exact {
            Some(e) => ok && self.lower <= e + 1e-9 && e <= self.upper + 1e-9,
            None => ok,
        }
    }
}

/// `|v| / dist(z, bΩ)`: the metric of the inscribed ball at its centre.
pub fn upper_bound_inscribed(q: &MetricQuery, opts: &DistanceOptions) -> Result<f64> {
    let d = q.domain.distance_to_boundary(&q.z, opts)?;
    Ok(cnorm(&q.v) / d)
}

/// `|v|/(1 - |z|²)`.
pub fn exact_metric_disc(z: Complex64, v: Complex64) -> Result<f64> {
    let r2 = z.norm_sqr();
    if !(r2 < 1.0) {
        return Err(Error::Precondition(format!(
            "|z| = {} is not inside the disc",
            z.norm()
        )));
    }
    Ok(v.norm() / (1.0 - r2))
}

/// `sqrt((1 - |z|²)|v|² + |⟨v, z⟩|²)/(1 - |z|²)` on the unit ball.
pub fn exact_metric_ball(z: &[Complex64], v: &[Complex64]) -> Result<f64> {
    if z.len() != v.len() {
        return Err(Error::DimensionMismatch {
            expected: z.len(),
            actual: v.len(),
        });
    }
    let r2: f64 = z.iter().map(|c| c.norm_sqr()).sum();
    if !(r2 < 1.0) {
        return Err(Error::Precondition("point is not inside the ball".into()));
    }
    let d = 1.0 - r2;
    let v2: f64 = v.iter().map(|c| c.norm_sqr()).sum();
    let p = hermitian_dot(v, z).norm_sqr();
    Ok((d * v2 + p).sqrt() / d)
}

/// Closed form when the domain is a ball about the origin (radius `R`):
/// `F_{R𝔹}(z, v) = F_𝔹(z/R, v/R)`.
pub fn exact_metric(q: &MetricQuery) -> Option<f64> {
    let r = q.domain.as_ball()?;
    let z: Vec<Complex64> = q.z.iter().map(|c| c / r).collect();
    let v: Vec<Complex64> = q.v.iter().map(|c| c / r).collect();
    exact_metric_ball(&z, &v).ok()
}

/// Probe points for hypothesis checks: `r·p` with `p` on `bΩ`.
fn interior_probes(d: &DomainSpec, seed: u64) -> Result<Vec<Vec<Complex64>>> {
    let boundary = d.boundary_samples(16, seed, Exec::Sequential)?;
    let mut out = Vec::new();
    for p in &boundary {
        for r in [0.0, 0.3, 0.6, 0.9, 0.99] {
            out.push(p.iter().map(|c| c * r).collect());
        }
    }
    Ok(out)
}

fn check_levi_lower(psh: &RealPoly, c1: f64, probes: &[Vec<Complex64>]) -> Result<()> {
    let mut bad = Vec::new();
    for p in probes {
        let m = hermitian_min_eigenvalue(&psh.levi_matrix(p));
        if m < c1 - 1e-12 {
            bad.push(to_real(p));
        }
    }
    if bad.is_empty() {
        Ok(())
    } else {
        Err(Error::Hypothesis {
            reason: format!(
                "Levi form of the psh function is below {c1} on {} probes",
                bad.len()
            ),
            witnesses: bad,
        })
    }
}

fn sibony_parts(q: &MetricQuery, psh: &RealPoly, c1: f64) -> Result<(f64, f64, f64)> {
    let r = psh.value(&q.z);
    if !(r < 0.0) {
        return Err(Error::Hypothesis {
            reason: format!("psh function is not negative at z (value {r})"),
            witnesses: vec![to_real(&q.z)],
        });
    }
    let mut probes = interior_probes(&q.domain, 0)?;
    probes.push(q.z.clone());
    check_levi_lower(psh, c1, &probes)?;
    let pair = bilinear(&psh.dz(&q.z), &q.v).norm_sqr();
    let v2: f64 = q.v.iter().map(|c| c.norm_sqr()).sum();
    Ok((pair, v2, r.abs()))
}

/// Quadratic form of the bracket: `C₁²|⟨∂ρ(z), v⟩|²/|ρ(z)|² + C₁|v|²/|ρ(z)|²`.
pub fn sibony_lower_bracket(q: &MetricQuery, psh: &RealPoly, c1: f64) -> Result<f64> {
    let (pair, v2, r) = sibony_parts(q, psh, c1)?;
    Ok(c1 * c1 * pair / (r * r) + c1 * v2 / (r * r))
}

/// Homogeneous form `sqrt(C₁²|⟨∂ρ(z), v⟩|²/|ρ(z)|² + C₁|v|²/|ρ(z)|)`, linear
/// in `|v|`; equals the metric on the disc and ball for `ρ = |z|² - 1`, `C₁ = 1`.
pub fn sibony_homogeneous_bracket(q: &MetricQuery, psh: &RealPoly, c1: f64) -> Result<f64> {
    let (pair, v2, r) = sibony_parts(q, psh, c1)?;
    Ok((c1 * c1 * pair / (r * r) + c1 * v2 / r).sqrt())
}

/// Hypotheses of the localization estimate, verified once on probes.
#[derive(Debug, Clone)]
pub struct Localization {
    pub domain: DomainSpec,
    pub u: RealPoly,
    pub epsilon: f64,
    pub bound: f64,
}

/// Uniform points of `D ∩ R𝔹` by rejection from the ball of radius `R`.
fn probes_in(d: &DomainSpec, radius: f64, count: usize, seed: u64) -> Vec<Vec<Complex64>> {
    let n = d.n;
    let mut rng = substream(seed, 0);
    let mut out = Vec::new();
    let mut tries = 0;
    while out.len() < count && tries < 1_000_000 {
        tries += 1;
        let g: Vec<f64> = (0..2 * n).map(|_| gaussian(&mut rng)).collect();
        let ng = g.iter().map(|v| v * v).sum::<f64>().sqrt();
        let s = radius * rng.gen::<f64>().powf(1.0 / (2 * n) as f64) / ng;
        let z: Vec<Complex64> = (0..n)
            .map(|k| Complex64::new(g[k] * s, g[n + k] * s))
            .collect();
        if d.contains(&z) {
            out.push(z);
        }
    }
    out
}

fn gaussian(rng: &mut impl Rng) -> f64 {
    let u1: f64 = rng.gen::<f64>().max(1e-300);
    let u2: f64 = rng.gen();
    (-2.0 * u1.ln()).sqrt() * (2.0 * PI * u2).cos()
}

impl Localization {
    /// Checks `u - ε|z|²` psh on probes of `D ∩ 3𝔹` and `|u| ≤ B` on probes
    /// of `D ∩ 2𝔹`.
    pub fn certify(
        domain: DomainSpec,
        u: RealPoly,
        epsilon: f64,
        bound: f64,
        seed: u64,
    ) -> Result<Self> {
        if u.n != domain.n {
            return Err(Error::DimensionMismatch {
                expected: domain.n,
                actual: u.n,
            });
        }
        let mut bad = Vec::new();
        for p in probes_in(&domain, 3.0, 64, seed) {
            if hermitian_min_eigenvalue(&u.levi_matrix(&p)) - epsilon < -1e-12 {
                bad.push(to_real(&p));
            }
        }
        if !bad.is_empty() {
            return Err(Error::Hypothesis {
                reason: format!("u - {epsilon}|z|^2 fails to be psh on {} probes", bad.len()),
                witnesses: bad,
            });
        }
        for p in probes_in(&domain, 2.0, 64, seed.wrapping_add(1)) {
            let v = u.value(&p);
            if !(v < 0.0) || v.abs() > bound {
                bad.push(to_real(&p));
            }
        }
        if !bad.is_empty() {
            return Err(Error::Hypothesis {
                reason: format!(
                    "u is not negative with |u| <= {bound} on {} probes",
                    bad.len()
                ),
                witnesses: bad,
            });
        }
        Ok(Self {
            domain,
            u,
            epsilon,
            bound,
        })
    }

    /// `|ξ| |u(w)|^{-1/2}` for `w ∈ D ∩ 2𝔹`.
    pub fn bracket(&self, w: &[Complex64], xi: &[Complex64]) -> Result<f64> {
        let r: f64 = w.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        if !self.domain.contains(w) || r >= 2.0 {
            return Err(Error::Precondition("w must lie in D ∩ 2B".into()));
        }
        let uw = self.u.value(w);
        if !(uw < 0.0) {
            return Err(Error::Hypothesis {
                reason: "u is not negative at w".into(),
                witnesses: vec![to_real(w)],
            });
        }
        Ok(cnorm(xi) / uw.abs().sqrt())
    }
}

/// One-shot form of [`Localization::certify`] followed by the bracket.
pub fn localization_lower_bracket(
    domain: &DomainSpec,
    u: &RealPoly,
    epsilon: f64,
    bound: f64,
    w: &[Complex64],
    xi: &[Complex64],
) -> Result<f64> {
    Localization::certify(domain.clone(), u.clone(), epsilon, bound, 0)?.bracket(w, xi)
}

/// Options of the polynomial-disc search.
#[derive(Debug, Clone, Copy)]
pub struct SearchOptions {
    pub boundary_samples: usize,
    /// Feasibility requires `ρ(h(e^{iθ_k})) ≤ -margin`.
    pub margin: f64,
    pub certify_samples: usize,
    pub bisection_steps: usize,
    pub bfgs_iters: usize,
    pub exec: Exec,
}

impl Default for SearchOptions {
    fn default() -> Self {
        Self {
            boundary_samples: 256,
            margin: 1e-6,
            certify_samples: 4096,
            bisection_steps: 40,
            bfgs_iters: 400,
            exec: Exec::Parallel,
        }
    }
}

/// A competitor `h(ζ) = z + s v ζ + Σ_{k=2..d} a_k ζ^k`, `λ = 1/s`.
#[derive(Debug, Clone, Serialize)]
pub struct DiscWitness {
    pub lambda: f64,
    pub degree: usize,
    /// `a_2, …, a_d`, each in `ℂⁿ`.
    pub coeffs: Vec<Vec<Complex64>>,
    /// True when no feasible disc was found and `lambda` is the inscribed bound.
    pub fallback: bool,
}

impl DiscWitness {
    pub fn eval(&self, q: &MetricQuery, zeta: Complex64) -> Vec<Complex64> {
        let s = 1.0 / self.lambda;
        let mut h: Vec<Complex64> =
            q.z.iter()
                .zip(&q.v)
                .map(|(z, v)| z + v * s * zeta)
                .collect();
        let mut p = zeta;
        for a in &self.coeffs {
            p *= zeta;
            for (hj, aj) in h.iter_mut().zip(a) {
                *hj += aj * p;
            }
        }
        h
    }
}

struct Boundary {
    powers: Vec<Vec<Complex64>>,
}

impl Boundary {
    fn new(samples: usize, degree: usize) -> Self {
        let powers = (0..samples)
            .map(|k| {
                let w = Complex64::from_polar(1.0, 2.0 * PI * k as f64 / samples as f64);
                (0..=degree).map(|j| w.powu(j as u32)).collect()
            })
            .collect();
        Self { powers }
    }
}

/// `h(e^{iθ_k})` with free coefficients packed as real `(Re a, Im a)` pairs.
fn disc_values(q: &MetricQuery, s: f64, a: &[f64], w: &[Complex64]) -> Vec<Complex64> {
    let n = q.z.len();
    let mut h: Vec<Complex64> = (0..n).map(|j| q.z[j] + q.v[j] * s * w[1]).collect();
    for (k, chunk) in a.chunks(2 * n).enumerate() {
        for j in 0..n {
            h[j] += Complex64::new(chunk[2 * j], chunk[2 * j + 1]) * w[k + 2];
        }
    }
    h
}

/// Soft maximum `β⁻¹ log Σ exp(β ρ(h_k))` of the boundary values, its
/// gradient in `a`, and the true maximum.
fn soft_max(q: &MetricQuery, s: f64, a: &[f64], bd: &Boundary, beta: f64) -> (f64, Vec<f64>, f64) {
    let n = q.z.len();
    let hs: Vec<Vec<Complex64>> = bd.powers.iter().map(|w| disc_values(q, s, a, w)).collect();
    let rhos: Vec<f64> = hs.iter().map(|h| q.domain.value(h)).collect();
    let top = rhos.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let weights: Vec<f64> = rhos.iter().map(|r| (beta * (r - top)).exp()).collect();
    let total: f64 = weights.iter().sum();
    let val = top + total.ln() / beta;
    let mut grad = vec![0.0; a.len()];
    for ((h, w), wt) in hs.iter().zip(&bd.powers).zip(&weights) {
        let p = wt / total;
        if p < 1e-300 {
            continue;
        }
        let dz = q.domain.dz(h);
        for k in 0..a.len() / (2 * n) {
            for j in 0..n {
                let e = dz[j] * w[k + 2];
                // dρ = 2 Re(ρ_z dh)
                grad[k * 2 * n + 2 * j] += p * 2.0 * e.re;
                grad[k * 2 * n + 2 * j + 1] -= p * 2.0 * e.im;
            }
        }
    }
    (val, grad, top)
}

fn max_rho(q: &MetricQuery, s: f64, a: &[f64], bd: &Boundary) -> f64 {
    bd.powers
        .iter()
        .map(|w| q.domain.value(&disc_values(q, s, a, w)))
        .fold(f64::NEG_INFINITY, f64::max)
}

/// Minimises the largest boundary value of `ρ∘h` over `a` by BFGS on the soft
/// maximum, sharpening `β` in stages; stops once `max ρ ≤ goal`, or once the
/// converged soft maximum shows the goal is out of reach (the soft maximum
/// exceeds the true one by at most `ln N/β`, and is convex in `a` when `ρ` is).
fn minimax(
    q: &MetricQuery,
    s: f64,
    start: &[f64],
    bd: &Boundary,
    goal: f64,
    iters: usize,
) -> Vec<f64> {
    let mut x = start.to_vec();
    if x.is_empty() {
        return x;
    }
    let log_n = (bd.powers.len() as f64).ln();
    for beta in [1e2, 1e3, 1e4, 1e5] {
        let (done, next, f) = bfgs(q, s, &x, bd, beta, goal, iters);
        x = next;
        if done || f - log_n / beta > goal {
            break;
        }
    }
    x
}

fn bfgs(
    q: &MetricQuery,
    s: f64,
    start: &[f64],
    bd: &Boundary,
    beta: f64,
    goal: f64,
    iters: usize,
) -> (bool, Vec<f64>, f64) {
    let dim = start.len();
    let mut x = start.to_vec();
    let (mut f, mut g, top) = soft_max(q, s, &x, bd, beta);
    if top <= goal {
        return (true, x, f);
    }
    let mut h = vec![vec![0.0; dim]; dim];
    for (i, row) in h.iter_mut().enumerate() {
        row[i] = 1.0;
    }
    for _ in 0..iters {
        let mut d: Vec<f64> = (0..dim)
            .map(|i| -(0..dim).map(|j| h[i][j] * g[j]).sum::<f64>())
            .collect();
        let mut slope: f64 = d.iter().zip(&g).map(|(a, b)| a * b).sum();
        if slope >= 0.0 {
            for (i, row) in h.iter_mut().enumerate() {
                row.iter_mut().for_each(|v| *v = 0.0);
                row[i] = 1.0;
            }
            d = g.iter().map(|v| -v).collect();
            slope = -g.iter().map(|v| v * v).sum::<f64>();
        }
        if slope.abs() < 1e-30 {
            break;
        }
        let mut step = 1.0;
        let mut accepted = None;
        for _ in 0..50 {
            let xn: Vec<f64> = x.iter().zip(&d).map(|(a, b)| a + step * b).collect();
            let (fv, gv, tv) = soft_max(q, s, &xn, bd, beta);
            if fv <= f + 1e-4 * step * slope {
                accepted = Some((xn, fv, gv, tv));
                break;
            }
            step *= 0.5;
        }
        let Some((xn, fn_, gn, tn)) = accepted else {
            break;
        };
        let sv: Vec<f64> = xn.iter().zip(&x).map(|(a, b)| a - b).collect();
        let yv: Vec<f64> = gn.iter().zip(&g).map(|(a, b)| a - b).collect();
        let sy: f64 = sv.iter().zip(&yv).map(|(a, b)| a * b).sum();
        if sy > 1e-300 {
            let hy: Vec<f64> = (0..dim)
                .map(|i| (0..dim).map(|j| h[i][j] * yv[j]).sum())
                .collect();
            let yhy: f64 = yv.iter().zip(&hy).map(|(a, b)| a * b).sum();
            for i in 0..dim {
                for j in 0..dim {
                    h[i][j] += (sy + yhy) * sv[i] * sv[j] / (sy * sy)
                        - (hy[i] * sv[j] + sv[i] * hy[j]) / sy;
                }
            }
        }
        let decrease = f - fn_;
        x = xn;
        f = fn_;
        g = gn;
        if tn <= goal {
            return (true, x, f);
        }
        if decrease <= 1e-15 * f.abs().max(1e-3) {
            break;
        }
    }
    (false, x, f)
}

/// Bisection on `s` from a feasible `(s_lo, a_lo)`; returns the best feasible pair.
fn bisect(
    q: &MetricQuery,
    mut s_lo: f64,
    mut a_lo: Vec<f64>,
    bd: &Boundary,
    dense: &Boundary,
    opts: &SearchOptions,
) -> (f64, Vec<f64>) {
    let mut s_hi = 2.0 * s_lo;
    // grow the bracket until infeasible
    for _ in 0..30 {
        let a = minimax(q, s_hi, &a_lo, bd, -2.0 * opts.margin, opts.bfgs_iters);
        if max_rho(q, s_hi, &a, bd) <= -opts.margin && max_rho(q, s_hi, &a, dense) < 0.0 {
            s_lo = s_hi;
            a_lo = a;
            s_hi *= 2.0;
        } else {
            break;
        }
    }
    for _ in 0..opts.bisection_steps {
        let mid = 0.5 * (s_lo + s_hi);
        let a = minimax(q, mid, &a_lo, bd, -2.0 * opts.margin, opts.bfgs_iters);
        if max_rho(q, mid, &a, bd) <= -opts.margin && max_rho(q, mid, &a, dense) < 0.0 {
            s_lo = mid;
            a_lo = a;
        } else {
            s_hi = mid;
        }
        if (s_hi - s_lo) <= 1e-8 * s_lo {
            break;
        }
    }
    (s_lo, a_lo)
}

/// Minimises `λ` over polynomial discs of degree `d` through `z` with
/// `h'(0) = v/λ`, feasibility enforced on boundary samples and re-checked on
/// a dense grid. `warm` seeds the search with a lower-degree competitor, which
/// makes the value non-increasing along a chain of degrees.
pub fn extremal_disc_search_warm(
    q: &MetricQuery,
    degree: usize,
    restarts: usize,
    seed: u64,
    opts: &SearchOptions,
    warm: Option<&DiscWitness>,
) -> Result<DiscWitness> {
    if degree == 0 {
        return Err(Error::Precondition("degree must be at least 1".into()));
    }
    let n = q.z.len();
    let vnorm = cnorm(&q.v);
    if vnorm == 0.0 {
        return Ok(DiscWitness {
            lambda: 0.0,
            degree,
            coeffs: vec![vec![Complex64::new(0.0, 0.0); n]; degree - 1],
            fallback: false,
        });
    }
    let bd = Boundary::new(opts.boundary_samples, degree);
    let dense = Boundary::new(opts.certify_samples, degree);
    let dim = 2 * n * (degree - 1);
    let dist = q
        .domain
        .distance_to_boundary(&q.z, &DistanceOptions::default())?;
    // the linear disc inside the inscribed ball is feasible
    let s0 = 0.9 * dist / vnorm;
    let mut starts: Vec<(f64, Vec<f64>)> = Vec::new();
    let zero = vec![0.0; dim];
    if max_rho(q, s0, &zero, &bd) <= -opts.margin {
        starts.push((s0, zero.clone()));
    }
    if let Some(w) = warm {
        if w.degree <= degree && !w.fallback && w.lambda > 0.0 {
            let mut a = Vec::with_capacity(dim);
            for k in 0..degree - 1 {
                for j in 0..n {
                    let c = w.coeffs.get(k).map_or(Complex64::new(0.0, 0.0), |v| v[j]);
                    a.push(c.re);
                    a.push(c.im);
                }
            }
            let s = 1.0 / w.lambda;
            if max_rho(q, s, &a, &bd) <= -opts.margin && max_rho(q, s, &a, &dense) < 0.0 {
                starts.push((s, a));
            }
        }
    }
    if starts.is_empty() {
        return Ok(DiscWitness {
            lambda: vnorm / dist,
            degree,
            coeffs: vec![vec![Complex64::new(0.0, 0.0); n]; degree - 1],
            fallback: true,
        });
    }
    let base = starts.iter().cloned().fold(
        (0.0, zero.clone()),
        |acc, x| if x.0 > acc.0 { x } else { acc },
    );
    let results = map_indexed(opts.exec, restarts.max(1), |r| {
        let (s, mut a) = base.clone();
        if r > 0 {
            // perturbed restart: shrink the disc and jitter its coefficients
            let mut rng = substream(seed, r as u64);
            let jitter = 0.1 * dist;
            for v in a.iter_mut() {
                *v += jitter * (2.0 * rng.gen::<f64>() - 1.0);
            }
            let shrink = 0.5;
            let a_shrunk: Vec<f64> = a.iter().map(|v| v * shrink).collect();
            if max_rho(q, s * shrink, &a_shrunk, &bd) <= -opts.margin
                && max_rho(q, s * shrink, &a_shrunk, &dense) < 0.0
            {
                return bisect(q, s * shrink, a_shrunk, &bd, &dense, opts);
            }
            return bisect(q, base.0, base.1.clone(), &bd, &dense, opts);
        }
        a.truncate(dim);
        bisect(q, s, a, &bd, &dense, opts)
    });
    let (s, a) = results
        .into_iter()
        .fold((0.0, zero), |acc, x| if x.0 > acc.0 { x } else { acc });
    let coeffs = a
        .chunks(2 * n)
        .map(|c| {
            (0..n)
                .map(|j| Complex64::new(c[2 * j], c[2 * j + 1]))
                .collect()
        })
        .collect();
    Ok(DiscWitness {
        lambda: 1.0 / s,
        degree,
        coeffs,
        fallback: false,
    })
}

pub fn extremal_disc_search(
    q: &MetricQuery,
    degree: usize,
    restarts: usize,
    seed: u64,
    opts: &SearchOptions,
) -> Result<DiscWitness> {
    extremal_disc_search_warm(q, degree, restarts, seed, opts, None)
}

/// Source and target values used by [`decreasing_property_check`].
#[derive(Debug, Clone, Serialize)]
pub struct DecreasingCheck {
    pub source: f64,
    pub target: f64,
    pub holds: bool,
}

/// `F_{Ω'}(f(z), df(z)v) ≤ F_Ω(z, v)`. Uses closed forms where available;
/// a target without a closed form is bounded above by the inscribed ball.
pub fn decreasing_property_check(f: &MapUnderTest, q: &MetricQuery) -> Result<DecreasingCheck> {
    let source = exact_metric(q)
        .ok_or_else(|| Error::Precondition("no closed-form metric on the source domain".into()))?;
    let fz = f.eval(&q.z);
    let dv = cmat_mul_vec(&f.jacobian(&q.z), &q.v);
    let tq = MetricQuery::new(f.target.clone(), fz, dv)?;
    let target = match exact_metric(&tq) {
        Some(t) => t,
        None => upper_bound_inscribed(&tq, &DistanceOptions::default())?,
    };
    Ok(DecreasingCheck {
        source,
        target,
        holds: target <= source + 1e-9 * source.max(1.0),
    })
}

/// One row of a sandwich sweep.
#[derive(Debug, Clone, Serialize)]
pub struct SandwichRow {
    pub z: Vec<Complex64>,
    pub v: Vec<Complex64>,
    pub sibony: f64,
    pub sibony_quadratic: f64,
    pub localization: f64,
    pub exact: f64,
    pub inscribed: f64,
    pub disc_upper: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SandwichReport {
    pub rows: Vec<SandwichRow>,
    /// `min exact/bracket` over the rows.
    pub sibony_constant: f64,
    pub sibony_quadratic_constant: f64,
    pub localization_constant: f64,
    /// Rows with `exact > inscribed` (expected 0).
    pub upper_violations: usize,
}

/// Random query `(z, v)`: `z` uniform in the unit ball, `v` uniform on the sphere.
pub fn random_query(n: usize, rng: &mut impl Rng) -> (Vec<Complex64>, Vec<Complex64>) {
    let dir = |rng: &mut _| -> Vec<Complex64> {
        let g: Vec<f64> = (0..2 * n).map(|_| gaussian(rng)).collect();
        let ng = g.iter().map(|v| v * v).sum::<f64>().sqrt();
        (0..n)
            .map(|k| Complex64::new(g[k] / ng, g[n + k] / ng))
            .collect()
    };
    let r = rng.gen::<f64>().powf(1.0 / (2 * n) as f64);
    let z = dir(rng).into_iter().map(|c| c * r).collect();
    (z, dir(rng))
}

/// Sandwich sweep on the unit ball in `ℂⁿ` (`n = 1` is the disc) with
/// `ρ = u = |z|² - 1`, `C₁ = ε = B = 1`.
pub fn sandwich_sweep(
    n: usize,
    samples: usize,
    seed: u64,
    disc_degree: Option<usize>,
    exec: Exec,
) -> Result<SandwichReport> {
    let domain = DomainSpec::ball(n);
    let rho = domain.rho.clone();
    let loc = Localization::certify(domain.clone(), rho.clone(), 1.0, 1.0, seed)?;
    let rows = map_indexed(exec, samples, |i| -> Result<SandwichRow> {
        let mut rng = substream(seed, i as u64);
        let (z, v) = random_query(n, &mut rng);
        let q = MetricQuery::new(domain.clone(), z.clone(), v.clone())?;
        let exact = exact_metric(&q).expect("ball has a closed form");
        let sibony = sibony_homogeneous_bracket(&q, &rho, 1.0)?;
        let sibony_quadratic = sibony_lower_bracket(&q, &rho, 1.0)?;
        let localization = loc.bracket(&z, &v)?;
        let inscribed = upper_bound_inscribed(&q, &DistanceOptions::default())?;
        let disc_upper = match disc_degree {
            Some(d) => {
                let opts = SearchOptions {
                    exec: Exec::Sequential,
                    ..Default::default()
                };
                Some(extremal_disc_search(&q, d, 1, seed ^ i as u64, &opts)?.lambda)
            }
            None => None,
        };
        Ok(SandwichRow {
            z,
            v,
            sibony,
            sibony_quadratic,
            localization,
            exact,
            inscribed,
            disc_upper,
        })
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    let min_ratio = |f: &dyn Fn(&SandwichRow) -> f64| -> f64 {
        rows.iter()
            .map(|r| r.exact / f(r))
            .fold(f64::INFINITY, f64::min)
    };
    let sibony_constant = min_ratio(&|r| r.sibony);
    let sibony_quadratic_constant = min_ratio(&|r| r.sibony_quadratic);
    let localization_constant = min_ratio(&|r| r.localization);
    let upper_violations = rows
        .iter()
        .filter(|r| r.exact > r.inscribed * (1.0 + 1e-9))
        .count();
    Ok(SandwichReport {
        rows,
        sibony_constant,
        sibony_quadratic_constant,
        localization_constant,
        upper_violations,
    })
}

/// One decreasing-property evaluation.
#[derive(Debug, Clone, Serialize)]
pub struct DecreasingRow {
    pub map: String,
    pub z: Vec<Complex64>,
    pub v: Vec<Complex64>,
    pub source: f64,
    pub target: f64,
    pub holds: bool,
}

/// The control maps of [`decreasing_sweep`] on the unit ball in `ℂⁿ`.
pub fn control_maps(n: usize, seed: u64) -> Result<Vec<(String, MapUnderTest)>> {
    let ball = DomainSpec::ball(n);
    let mut rng = substream(seed, u64::MAX);
    let mut out: Vec<(String, MapUnderTest)> = Vec::new();
    for k in 0..3 {
        let (dir, _) = random_query(n, &mut rng);
        let a: Vec<Complex64> = dir.iter().map(|c| c * 0.9).collect();
        let f: Arc<dyn HolomorphicMap> = Arc::new(BallAutomorphism::new(a)?);
        out.push((
            format!("automorphism-{k}"),
            MapUnderTest::new(f, ball.clone(), ball.clone())?,
        ));
    }
    let angles: Vec<f64> = (0..2 * n).map(|_| rng.gen::<f64>() * 2.0 * PI).collect();
    out.push((
        "unitary".into(),
        MapUnderTest::new(
            Arc::new(Linear::rotation(n, &angles)),
            ball.clone(),
            ball.clone(),
        )?,
    ));
    out.push((
        "scale-0.7".into(),
        MapUnderTest::new(
            Arc::new(Scale {
                n,
                s: Complex64::new(0.7, 0.0),
            }),
            ball.clone(),
            ball.clone(),
        )?,
    ));
    out.push((
        "inclusion-half-ball".into(),
        MapUnderTest::new(
            Arc::new(Identity { n }),
            DomainSpec::ball_radius(n, 0.5)?,
            ball.clone(),
        )?,
    ));
    if n == 1 {
        out.push((
            "square".into(),
            MapUnderTest::new(Arc::new(Power { k: 2 }), ball.clone(), ball)?,
        ));
    }
    Ok(out)
}

/// Decreasing-property checks of the control maps at `samples` random
/// queries each.
pub fn decreasing_sweep(
    n: usize,
    samples: usize,
    seed: u64,
    exec: Exec,
) -> Result<Vec<DecreasingRow>> {
    let maps = control_maps(n, seed)?;
    let mut rows = Vec::new();
    for (m, (name, f)) in maps.iter().enumerate() {
        let r = f.source.as_ball().unwrap_or(1.0);
        let part = map_indexed(exec, samples, |i| -> Result<DecreasingRow> {
            let mut rng = substream(seed, ((m as u64) << 32) | i as u64);
            let (z, v) = random_query(n, &mut rng);
            let z: Vec<Complex64> = z.iter().map(|c| c * r).collect();
            let q = MetricQuery::new(f.source.clone(), z.clone(), v.clone())?;
            let c = decreasing_property_check(f, &q)?;
            Ok(DecreasingRow {
                map: name.clone(),
                z,
                v,
                source: c.source,
                target: c.target,
                holds: c.holds,
            })
        });
        for row in part {
            rows.push(row?);
        }
    }
    Ok(rows)
}

/// `F_𝔹(w, ξ)·|u(w)|^{1/2}` along `w = (1 - s)p`, `ξ ⊥ p` complex-tangential,
/// for `s = 10^{-1} … 10^{-5}`; returns `(s, product)` per ray.
pub fn localization_rate_rays(n: usize, rays: usize, seed: u64) -> Result<Vec<Vec<(f64, f64)>>> {
    if n < 2 {
        return Err(Error::Precondition(
            "complex-tangential directions need n >= 2".into(),
        ));
    }
    let domain = DomainSpec::ball(n);
    let u = domain.rho.clone();
    let ps = domain.boundary_samples(rays, seed, Exec::Sequential)?;
    ps.iter()
        .map(|p| {
            let xi = crate::linalg::kernel_of_functional(
                &p.iter().map(|c| c.conj()).collect::<Vec<_>>(),
            )
            .into_iter()
            .next()
            .ok_or(Error::NoConvergence)?;
            (0..=16)
                .map(|k| {
                    let s = 0.1 * 10f64.powf(-(k as f64) / 4.0);
                    let w: Vec<Complex64> = p.iter().map(|c| c * (1.0 - s)).collect();
                    let f = exact_metric_ball(&w, &xi)?;
                    Ok((s, f * u.value(&w).abs().sqrt()))
                })
                .collect()
        })
        .collect()
}
