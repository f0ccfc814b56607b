//! The generalized Bishop equation `u = r(u, T(u) + c) + tψ`, discs attached
//! to a totally real graph along the upper semicircle, and checks on the
//! resulting families (filling, foliation, smoothness of the centre map).

use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::circle::{
    analytic_completion, grid_angle, hilbert_transform, AnalyticDisc, CircleFunction,
};
use crate::error::{Error, Result};
use crate::exec::{map_indexed, substream, Exec};
use crate::linalg::solve_real;
use crate::wedge::{in_wedge, TotallyRealGraph, WedgeSpec};

/// `ψ(e^{iθ}) = 0` on `[0, π]`, `-exp(-1/((θ-π)(2π-θ)))` on `(π, 2π)`.
pub fn bump(theta: f64) -> f64 {
    let t = theta.rem_euclid(2.0 * PI);
    if t <= PI {
        0.0
    } else {
        -(-1.0 / ((t - PI) * (2.0 * PI - t))).exp()
    }
}

/// The same bump in each of the `n` components.
pub fn default_bump(n: usize, samples: usize) -> Result<Vec<CircleFunction>> {
    let psi = CircleFunction::from_fn_real(samples, bump)?;
    Ok(vec![psi; n])
}

/// Upper semicircle `S⁺ = {0 ≤ θ ≤ π}` on the sample grid.
pub fn upper_indices(samples: usize) -> impl Iterator<Item = usize> {
    (0..=samples / 2).map(move |k| k % samples)
}

#[derive(Debug, Clone)]
pub struct BishopProblem {
    pub graph: TotallyRealGraph,
    pub psi: Vec<CircleFunction>,
    pub c: Vec<f64>,
    pub t: Vec<f64>,
    pub tol: f64,
    pub max_iter: usize,
    /// Iterates must keep `|x_j|, |y_j| ≤ box_radius`.
    pub box_radius: f64,
}

impl BishopProblem {
    pub fn new(graph: TotallyRealGraph, samples: usize, c: Vec<f64>, t: Vec<f64>) -> Result<Self> {
        let n = graph.n();
        let psi = default_bump(n, samples)?;
        let p = Self {
            graph,
            psi,
            c,
            t,
            tol: 1e-12,
            max_iter: 100,
            box_radius: 1.0,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn samples(&self) -> usize {
        self.psi[0].len()
    }

    pub fn with_params(&self, c: &[f64], t: &[f64]) -> Self {
        Self {
            c: c.to_vec(),
            t: t.to_vec(),
            ..self.clone()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.graph.n();
        for len in [self.psi.len(), self.c.len(), self.t.len()] {
            if len != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    actual: len,
                });
            }
        }
        let samples = self.samples();
        if self.psi.iter().any(|p| p.len() != samples || !p.is_real()) {
            return Err(Error::InvalidSpec(
                "psi components must be real with a common grid".into(),
            ));
        }
        for p in &self.psi {
            for k in 0..samples {
                let v = p.samples()[k].re;
                let upper = 2 * k <= samples;
                if (upper && v != 0.0) || (!upper && !(v < 0.0)) {
                    return Err(Error::InvalidSpec(
                        "psi must vanish on the closed upper semicircle and be negative on the lower one".into(),
                    ));
                }
            }
        }
        if self.t.iter().any(|v| !(*v >= 0.0)) {
            return Err(Error::InvalidSpec(
                "t must be componentwise nonnegative".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct BishopSolution {
    pub u: Vec<CircleFunction>,
    pub residual: f64,
    pub iterations: usize,
    pub history: Vec<f64>,
    pub damping: f64,
}

/// `F(u) = r(u, T(u) + c) + tψ` sampled on the grid, together with `T(u)`.
fn picard_map(p: &BishopProblem, u: &[Vec<f64>]) -> Result<(Vec<Vec<f64>>, Vec<Vec<f64>>)> {
    let n = u.len();
    let samples = p.samples();
    let tu: Vec<Vec<f64>> = u
        .iter()
        .map(|uj| Ok(hilbert_transform(&CircleFunction::from_real(uj.clone())?)?.real_parts()))
        .collect::<Result<_>>()?;
    let mut out = vec![vec![0.0; samples]; n];
    let mut x = vec![0.0; n];
    let mut y = vec![0.0; n];
    for k in 0..samples {
        for j in 0..n {
            x[j] = u[j][k];
            y[j] = tu[j][k] + p.c[j];
        }
        let r = p.graph.r.eval(&x, &y);
        for j in 0..n {
            out[j][k] = r[j] + p.t[j] * p.psi[j].samples()[k].re;
        }
    }
    Ok((out, tu))
}

fn sup_diff(a: &[Vec<f64>], b: &[Vec<f64>]) -> f64 {
    a.iter()
        .flatten()
        .zip(b.iter().flatten())
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

fn picard(p: &BishopProblem, damping: f64, start: Option<&[Vec<f64>]>) -> Result<BishopSolution> {
    let n = p.graph.n();
    let samples = p.samples();
    let mut u = match start {
        Some(u0) => u0.to_vec(),
        None => vec![vec![0.0; samples]; n],
    };
    let (mut fu, _) = picard_map(p, &u)?;
    let mut history = Vec::new();
    let mut growth = 0;
    for it in 1..=p.max_iter {
        for j in 0..n {
            for k in 0..samples {
                u[j][k] += damping * (fu[j][k] - u[j][k]);
            }
        }
        let (next, tu) = picard_map(p, &u)?;
        let sup_x = u.iter().flatten().map(|v| v.abs()).fold(0.0, f64::max);
        let sup_y = tu
            .iter()
            .zip(&p.c)
            .flat_map(|(row, c)| row.iter().map(move |v| (v + c).abs()))
            .fold(0.0, f64::max);
        let modulus = sup_x.max(sup_y);
        if !(modulus <= p.box_radius) {
            return Err(Error::DomainEscape {
                iteration: it,
                modulus,
            });
        }
        let residual = sup_diff(&u, &next);
        history.push(residual);
        if !residual.is_finite() {
            return Err(Error::Divergence {
                iterations: it,
                last_residual: residual,
                history,
            });
        }
        if residual <= p.tol {
            return Ok(BishopSolution {
                u: u.into_iter()
                    .map(CircleFunction::from_real)
                    .collect::<Result<_>>()?,
                residual,
                iterations: it,
                history,
                damping,
            });
        }
        if it > 1 && residual > history[it - 2] {
            growth += 1;
            if growth >= 3 {
                return Err(Error::Divergence {
                    iterations: it,
                    last_residual: residual,
                    history,
                });
            }
        } else {
            growth = 0;
        }
        fu = next;
    }
    let last_residual = *history.last().unwrap_or(&f64::NAN);
    Err(Error::Divergence {
        iterations: p.max_iter,
        last_residual,
        history,
    })
}

/// Picard iteration from `u₀ = 0`; `iterations` counts the updates applied.
/// A diverging run is retried once with damping 1/2.
pub fn solve_bishop(p: &BishopProblem) -> Result<BishopSolution> {
    p.validate()?;
    if !(p.graph.lipschitz_bound < 0.5) {
        return Err(Error::Precondition(format!(
            "Lipschitz bound {} of r is not below 1/2",
            p.graph.lipschitz_bound
        )));
    }
    let inside = p.c.iter().chain(&p.t).all(|v| v.abs() <= p.box_radius);
    if !inside {
        return Err(Error::Precondition("(c, t) outside the working box".into()));
    }
    match picard(p, 1.0, None) {
        Err(Error::Divergence { .. }) => picard(p, 0.5, None),
        other => other,
    }
}

/// Picard iteration started from `u0`, typically the solution at nearby
/// parameters. Falls back to [`solve_bishop`] if that run fails.
pub fn solve_bishop_from(p: &BishopProblem, u0: &[CircleFunction]) -> Result<BishopSolution> {
    let start: Vec<Vec<f64>> = u0.iter().map(|f| f.real_parts()).collect();
    let shaped = start.len() == p.graph.n() && start.iter().all(|row| row.len() == p.samples());
    let admissible =
        p.graph.lipschitz_bound < 0.5 && p.c.iter().chain(&p.t).all(|v| v.abs() <= p.box_radius);
    if !shaped || !admissible || p.validate().is_err() {
        return solve_bishop(p);
    }
    picard(p, 1.0, Some(&start)).or_else(|_| solve_bishop(p))
}

/// The disc `u + i(T(u) + c)` of a solved problem.
pub fn attached_disc(p: &BishopProblem) -> Result<(AnalyticDisc, BishopSolution)> {
    let sol = solve_bishop(p)?;
    let disc = analytic_completion(&sol.u, &p.c)?;
    Ok((disc, sol))
}

/// `sup_{θ ∈ S⁺} ‖x(e^{iθ}) - r(x, y)(e^{iθ})‖` over the disc's sample grid.
pub fn attachment_residual(d: &AnalyticDisc, g: &TotallyRealGraph) -> Result<f64> {
    if d.dimension() != g.n() {
        return Err(Error::DimensionMismatch {
            expected: g.n(),
            actual: d.dimension(),
        });
    }
    let bd = d.boundary();
    let samples = d.sample_count();
    let mut worst: f64 = 0.0;
    for k in upper_indices(samples) {
        let x: Vec<f64> = bd.iter().map(|c| c.samples()[k].re).collect();
        let y: Vec<f64> = bd.iter().map(|c| c.samples()[k].im).collect();
        let r = g.r.eval(&x, &y);
        let e = x
            .iter()
            .zip(&r)
            .map(|(a, b)| (a - b).powi(2))
            .sum::<f64>()
            .sqrt();
        worst = worst.max(e);
    }
    Ok(worst)
}

/// Angle between `∂h/∂r` at `e^{iθ}` and `T_{h(e^{iθ})}E`; `π/2` means
/// the radial direction is orthogonal to the edge.
pub fn transversality_margin(d: &AnalyticDisc, g: &TotallyRealGraph, theta: f64) -> Result<f64> {
    if !(theta > 0.0 && theta < PI) {
        return Err(Error::Precondition(
            "theta must lie inside the upper semicircle".into(),
        ));
    }
    let v = d.radial_derivative(theta);
    let vr: Vec<f64> = v
        .iter()
        .map(|c| c.re)
        .chain(v.iter().map(|c| c.im))
        .collect();
    let norm = vr.iter().map(|a| a * a).sum::<f64>().sqrt();
    if norm < 1e-10 {
        return Err(Error::DegenerateDifferential(norm));
    }
    let p = d.boundary_value(theta);
    let basis = g.tangent_basis(&p)?;
    let q = basis.qr().q();
    let coeffs = q.transpose() * nalgebra::DVector::from_column_slice(&vr);
    let along = coeffs.norm();
    let perp = (nalgebra::DVector::from_column_slice(&vr) - &q * coeffs).norm();
    Ok(perp.atan2(along))
}

/// Uniform grid over `|c_j| ≤ c_max`, `0 ≤ t_j ≤ t_max`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParameterGrid {
    #[serde(default = "default_extent")]
    pub c_max: f64,
    #[serde(default = "default_extent")]
    pub t_max: f64,
    #[serde(default = "default_points")]
    pub points: usize,
}

fn default_extent() -> f64 {
    0.3
}

fn default_points() -> usize {
    9
}

impl Default for ParameterGrid {
    fn default() -> Self {
        Self {
            c_max: 0.3,
            t_max: 0.3,
            points: 9,
        }
    }
}

impl ParameterGrid {
    pub fn c_values(&self) -> Vec<f64> {
        linspace(-self.c_max, self.c_max, self.points)
    }

    pub fn t_values(&self) -> Vec<f64> {
        linspace(0.0, self.t_max, self.points)
    }

    /// All `(c, t)` in lexicographic order, `points^(2n)` members.
    pub fn members(&self, n: usize) -> Vec<(Vec<f64>, Vec<f64>)> {
        let cv = self.c_values();
        let tv = self.t_values();
        let total = self.points.pow(2 * n as u32);
        (0..total)
            .map(|mut idx| {
                let mut digits = vec![0; 2 * n];
                for d in digits.iter_mut().rev() {
                    *d = idx % self.points;
                    idx /= self.points;
                }
                let c = digits[..n].iter().map(|&i| cv[i]).collect();
                let t = digits[n..].iter().map(|&i| tv[i]).collect();
                (c, t)
            })
            .collect()
    }
}

fn linspace(a: f64, b: f64, points: usize) -> Vec<f64> {
    if points == 1 {
        return vec![0.5 * (a + b)];
    }
    (0..points)
        .map(|i| a + (b - a) * i as f64 / (points - 1) as f64)
        .collect()
}

#[derive(Debug, Clone)]
pub struct Member {
    pub c: Vec<f64>,
    pub t: Vec<f64>,
    pub disc: AnalyticDisc,
    pub iterations: usize,
    pub residual: f64,
    pub attachment_residual: f64,
}

#[derive(Debug, Clone)]
pub struct DiscFamily {
    pub template: BishopProblem,
    pub grid: ParameterGrid,
    pub members: Vec<std::result::Result<Member, Error>>,
}

impl DiscFamily {
    /// Solves every grid member, in parallel when `exec` allows.
    pub fn solve(template: &BishopProblem, grid: ParameterGrid, exec: Exec) -> Self {
        let params = grid.members(template.graph.n());
        let members = solve_members(template, &params, exec);
        Self {
            template: template.clone(),
            grid,
            members,
        }
    }

    pub fn solved(&self) -> impl Iterator<Item = &Member> {
        self.members.iter().filter_map(|m| m.as_ref().ok())
    }

    /// Solves the member at arbitrary parameters.
    pub fn disc_at(&self, c: &[f64], t: &[f64]) -> Result<AnalyticDisc> {
        Ok(attached_disc(&self.template.with_params(c, t))?.0)
    }
}

pub fn solve_members(
    template: &BishopProblem,
    params: &[(Vec<f64>, Vec<f64>)],
    exec: Exec,
) -> Vec<std::result::Result<Member, Error>> {
    map_indexed(exec, params.len(), |i| {
        let (c, t) = &params[i];
        let p = template.with_params(c, t);
        let (disc, sol) = attached_disc(&p)?;
        let attachment_residual = attachment_residual(&disc, &p.graph)?;
        Ok(Member {
            c: c.clone(),
            t: t.clone(),
            disc,
            iterations: sol.iterations,
            residual: sol.residual,
            attachment_residual,
        })
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct FillReport {
    pub coverage: f64,
    pub attempted: usize,
    pub covered: usize,
    /// Real coordinates of samples that could not be inverted.
    pub failures: Vec<Vec<f64>>,
    /// Every attempted sample in draw order with whether it was covered.
    pub outcomes: Vec<(Vec<f64>, bool)>,
}

#[derive(Debug, Clone, Copy)]
pub struct FillOptions {
    /// Samples are drawn from `W_δ ∩ {|x_j|, |y_j| ≤ sample_radius}`.
    pub sample_radius: f64,
    pub newton_steps: usize,
    pub fd_step: f64,
    pub accept: f64,
}

impl Default for FillOptions {
    fn default() -> Self {
        Self {
            sample_radius: 0.05,
            newton_steps: 40,
            fd_step: 1e-6,
            accept: 1e-6,
        }
    }
}

/// Coarse `ζ` grid used to pick Newton starting members.
fn coarse_zetas() -> Vec<Complex64> {
    let mut z = vec![Complex64::new(0.0, 0.0)];
    for r in [0.3, 0.6, 0.85] {
        for k in 0..8 {
            z.push(Complex64::from_polar(r, 2.0 * PI * k as f64 / 8.0));
        }
    }
    z
}

fn pack(zeta: Complex64, c: &[f64], t: &[f64]) -> Vec<f64> {
    let mut v = vec![zeta.re, zeta.im];
    v.extend_from_slice(c);
    v.extend_from_slice(t);
    v
}

/// Evaluates `H(ζ, c, t) = h_{c,t}(ζ)` in real coordinates.
fn eval_h(fam: &DiscFamily, v: &[f64], n: usize) -> Result<(Vec<f64>, AnalyticDisc)> {
    let zeta = Complex64::new(v[0], v[1]);
    let (c, t) = (&v[2..2 + n], &v[2 + n..]);
    let p = fam.template.with_params(c, t);
    let sol = solve_bishop(&p)?;
    let disc = analytic_completion(&sol.u, c)?;
    let h = disc.evaluate(zeta)?;
    Ok((
        h.iter()
            .map(|c| c.re)
            .chain(h.iter().map(|c| c.im))
            .collect(),
        disc,
    ))
}

fn clamp_params(v: &mut [f64], n: usize, grid: &ParameterGrid) {
    let r = v[0].hypot(v[1]);
    if r > 0.999 {
        v[0] *= 0.999 / r;
        v[1] *= 0.999 / r;
    }
    for j in 0..n {
        v[2 + j] = v[2 + j].clamp(-grid.c_max, grid.c_max);
        v[2 + n + j] = v[2 + n + j].clamp(0.0, grid.t_max);
    }
}

/// Indices not yet frozen that sit on a box bound and whose step points outward.
fn blocked(v: &[f64], step: &[f64], n: usize, grid: &ParameterGrid, frozen: &[bool]) -> Vec<usize> {
    let mut out = Vec::new();
    let r = v[0].hypot(v[1]);
    if r >= 0.999 - 1e-12 && v[0] * step[0] + v[1] * step[1] > 0.0 && !frozen[0] {
        out.extend([0, 1]);
    }
    for j in 0..n {
        let (a, b) = (2 + j, 2 + n + j);
        if !frozen[a]
            && ((v[a] >= grid.c_max && step[a] > 0.0) || (v[a] <= -grid.c_max && step[a] < 0.0))
        {
            out.push(a);
        }
        if !frozen[b] && ((v[b] >= grid.t_max && step[b] > 0.0) || (v[b] <= 0.0 && step[b] < 0.0)) {
            out.push(b);
        }
    }
    out
}

/// Inverts `(ζ, c, t) ↦ h_{c,t}(ζ)` at `z` by least-norm damped Newton.
/// Returns the parameters on success.
pub fn invert_point(
    fam: &DiscFamily,
    z: &[Complex64],
    start: Vec<f64>,
    opts: &FillOptions,
) -> Option<Vec<f64>> {
    let n = fam.template.graph.n();
    let target: Vec<f64> = z
        .iter()
        .map(|c| c.re)
        .chain(z.iter().map(|c| c.im))
        .collect();
    let mut v = start;
    let err = |h: &[f64]| -> f64 {
        h.iter()
            .zip(&target)
            .map(|(a, b)| (a - b).powi(2))
            .sum::<f64>()
            .sqrt()
    };
    let (mut hv, mut disc) = eval_h(fam, &v, n).ok()?;
    let mut e = err(&hv);
    for _ in 0..opts.newton_steps {
        if e <= opts.accept && v[0].hypot(v[1]) < 1.0 {
            return Some(v);
        }
        let dim = v.len();
        let mut jac = DMatrix::zeros(2 * n, dim);
        // ζ-columns from the holomorphic derivative
        let d = disc.derivative(Complex64::new(v[0], v[1]));
        for j in 0..n {
            jac[(j, 0)] = d[j].re;
            jac[(n + j, 0)] = d[j].im;
            jac[(j, 1)] = -d[j].im;
            jac[(n + j, 1)] = d[j].re;
        }
        for a in 2..dim {
            let mut w = v.clone();
            w[a] += opts.fd_step;
            let (hw, _) = eval_h(fam, &w, n).ok()?;
            for r in 0..2 * n {
                jac[(r, a)] = (hw[r] - hv[r]) / opts.fd_step;
            }
        }
        let resid: Vec<f64> = target.iter().zip(&hv).map(|(a, b)| a - b).collect();
        // Active set: freeze variables sitting on a bound that the step pushes past.
        let mut frozen = vec![false; dim];
        let mut step = vec![0.0; dim];
        for _ in 0..=dim {
            let mut jf = jac.clone();
            for (a, f) in frozen.iter().enumerate() {
                if *f {
                    jf.column_mut(a).fill(0.0);
                }
            }
            let jjt = &jf * jf.transpose();
            let Some(lambda) = solve_real(jjt, &resid) else {
                break;
            };
            step = (0..dim)
                .map(|a| (0..2 * n).map(|r| jf[(r, a)] * lambda[r]).sum())
                .collect();
            let newly = blocked(&v, &step, n, &fam.grid, &frozen);
            if newly.is_empty() {
                break;
            }
            for a in newly {
                frozen[a] = true;
            }
        }
        let mut scale = 1.0;
        let mut accepted = false;
        for _ in 0..12 {
            let mut w: Vec<f64> = v.iter().zip(&step).map(|(a, s)| a + scale * s).collect();
            clamp_params(&mut w, n, &fam.grid);
            if let Ok((hw, dw)) = eval_h(fam, &w, n) {
                let ew = err(&hw);
                if ew < e {
                    v = w;
                    hv = hw;
                    disc = dw;
                    e = ew;
                    accepted = true;
                    break;
                }
            }
            scale *= 0.5;
        }
        if !accepted {
            break;
        }
    }
    (e <= opts.accept && v[0].hypot(v[1]) < 1.0).then_some(v)
}

/// Fraction of seeded samples of `W_δ` that are values `h_{c,t}(ζ)` of the
/// family with `|ζ| < 1` and `(c, t)` in the grid box.
pub fn fill_wedge_check(
    fam: &DiscFamily,
    w: &WedgeSpec,
    samples: usize,
    seed: u64,
    opts: &FillOptions,
    exec: Exec,
) -> Result<FillReport> {
    if !(w.delta > 0.0) {
        return Err(Error::Precondition(
            "filling is checked on a shrunken wedge (delta > 0)".into(),
        ));
    }
    let n = fam.template.graph.n();
    if w.edge.n != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            actual: w.edge.n,
        });
    }
    let zetas = coarse_zetas();
    let solved: Vec<&Member> = fam.solved().collect();
    if solved.is_empty() {
        return Err(Error::Precondition(
            "disc family has no solved members".into(),
        ));
    }
    let table: Vec<Vec<Vec<Complex64>>> = map_indexed(exec, solved.len(), |i| {
        zetas
            .iter()
            .map(|z| {
                solved[i]
                    .disc
                    .evaluate(*z)
                    .expect("coarse grid is interior")
            })
            .collect()
    });
    let outcomes = map_indexed(exec, samples, |i| {
        let mut rng = substream(seed, i as u64);
        let z = crate::wedge::sample_shrunken(w, opts.sample_radius, &mut rng, 1_000_000)?;
        let mut best = (f64::INFINITY, 0, 0);
        for (m, row) in table.iter().enumerate() {
            for (k, hz) in row.iter().enumerate() {
                let d: f64 = hz.iter().zip(&z).map(|(a, b)| (a - b).norm_sqr()).sum();
                if d < best.0 {
                    best = (d, m, k);
                }
            }
        }
        let mem = solved[best.1];
        let start = pack(zetas[best.2], &mem.c, &mem.t);
        Some((invert_point(fam, &z, start, opts).is_some(), z))
    });
    let mut attempted = 0;
    let mut covered = 0;
    let mut failures = Vec::new();
    let mut rows = Vec::new();
    for o in outcomes.into_iter().flatten() {
        attempted += 1;
        let x = crate::jet::to_real(&o.1);
        if o.0 {
            covered += 1;
        } else {
            failures.push(x.clone());
        }
        rows.push((x, o.0));
    }
    Ok(FillReport {
        coverage: if attempted == 0 {
            0.0
        } else {
            covered as f64 / attempted as f64
        },
        attempted,
        covered,
        failures,
        outcomes: rows,
    })
}

/// A sub-family with fixed `t₀` and `c = Σ σ_k b_k` over an orthonormal basis
/// `b_k` of `t₀^⊥`, split into half-open cells in `σ`.
#[derive(Debug, Clone)]
pub struct FoliationGrid {
    pub t0: Vec<f64>,
    pub basis: Vec<Vec<f64>>,
    /// `(lo, hi)` corners of each cell; cells are `lo ≤ σ < hi`.
    pub cells: Vec<(Vec<f64>, Vec<f64>)>,
}

impl FoliationGrid {
    /// Uniform cells over `[-sigma_max, sigma_max]^{n-1}`, `points` nodes per axis.
    pub fn uniform(t0: Vec<f64>, sigma_max: f64, points: usize) -> Result<Self> {
        let n = t0.len();
        if points < 2 {
            return Err(Error::InvalidSpec(
                "foliation grid needs at least 2 nodes per axis".into(),
            ));
        }
        let norm = t0.iter().map(|v| v * v).sum::<f64>().sqrt();
        if !(norm > 0.0) || t0.iter().any(|v| *v < 0.0) {
            return Err(Error::InvalidSpec(
                "t0 must be nonzero and nonnegative".into(),
            ));
        }
        let basis = orthonormal_complement(&t0);
        let nodes = linspace(-sigma_max, sigma_max, points);
        let per = points - 1;
        let total = per.pow((n - 1) as u32);
        let cells = (0..total)
            .map(|mut idx| {
                let mut lo = vec![0.0; n - 1];
                let mut hi = vec![0.0; n - 1];
                for k in (0..n - 1).rev() {
                    let i = idx % per;
                    idx /= per;
                    lo[k] = nodes[i];
                    hi[k] = nodes[i + 1];
                }
                (lo, hi)
            })
            .collect();
        Ok(Self { t0, basis, cells })
    }

    pub fn c_of(&self, sigma: &[f64]) -> Vec<f64> {
        let n = self.t0.len();
        let mut c = vec![0.0; n];
        for (s, b) in sigma.iter().zip(&self.basis) {
            for j in 0..n {
                c[j] += s * b[j];
            }
        }
        c
    }
}

/// Orthonormal basis of `v^⊥ ⊂ ℝⁿ` by Gram–Schmidt.
fn orthonormal_complement(v: &[f64]) -> Vec<Vec<f64>> {
    let n = v.len();
    let nv = v.iter().map(|a| a * a).sum::<f64>().sqrt();
    let mut basis: Vec<Vec<f64>> = vec![v.iter().map(|a| a / nv).collect()];
    for k in 0..n {
        let mut e = vec![0.0; n];
        e[k] = 1.0;
        for _ in 0..2 {
            for b in &basis {
                let p: f64 = e.iter().zip(b).map(|(x, y)| x * y).sum();
                for (x, y) in e.iter_mut().zip(b) {
                    *x -= p * y;
                }
            }
        }
        let ne = e.iter().map(|a| a * a).sum::<f64>().sqrt();
        if ne > 1e-8 {
            basis.push(e.iter().map(|a| a / ne).collect());
        }
        if basis.len() == n {
            break;
        }
    }
    basis.into_iter().skip(1).collect()
}

#[derive(Debug, Clone, Serialize)]
pub struct FoliationReport {
    pub multiplicities: Vec<usize>,
    pub max_multiplicity: usize,
    /// Fraction of samples covered by exactly one cell.
    pub fraction_single: f64,
    /// Samples not reached by any cell.
    pub gaps: usize,
}

#[derive(Debug, Clone, Copy)]
pub struct FoliationOptions {
    pub tol: f64,
    pub fd_step: f64,
    pub max_steps: usize,
}

impl Default for FoliationOptions {
    fn default() -> Self {
        Self {
            tol: 1e-7,
            fd_step: 1e-6,
            max_steps: 30,
        }
    }
}

/// Boundary point `h_σ(e^{iθ})` in real coordinates and its `θ`-derivative.
fn arc_point(
    template: &BishopProblem,
    grid: &FoliationGrid,
    sigma: &[f64],
    theta: f64,
) -> Result<(Vec<f64>, Vec<f64>, AnalyticDisc)> {
    let c = grid.c_of(sigma);
    let (disc, _) = attached_disc(&template.with_params(&c, &grid.t0))?;
    let h = disc.boundary_value(theta);
    // ∂_θ h = i ∂_r h on the circle
    let dr = disc.radial_derivative(theta);
    let dt: Vec<Complex64> = dr.iter().map(|v| v * Complex64::new(0.0, 1.0)).collect();
    Ok((
        h.iter()
            .map(|c| c.re)
            .chain(h.iter().map(|c| c.im))
            .collect(),
        dt.iter()
            .map(|c| c.re)
            .chain(dt.iter().map(|c| c.im))
            .collect(),
        disc,
    ))
}

/// Smallest distance from `p` to the arcs of the cell, by projected
/// Gauss–Newton in `(σ, θ)` with `σ` clamped to the cell and `θ` to `[0, π]`.
fn cell_distance(
    template: &BishopProblem,
    grid: &FoliationGrid,
    cell: &(Vec<f64>, Vec<f64>),
    p: &[f64],
    opts: &FoliationOptions,
) -> Result<(f64, Vec<f64>)> {
    let m = cell.0.len();
    let mid: Vec<f64> = cell
        .0
        .iter()
        .zip(&cell.1)
        .map(|(a, b)| 0.5 * (a + b))
        .collect();
    let (_, _, disc) = arc_point(template, grid, &mid, 0.0)?;
    // start from the nearest of 65 points on the middle arc
    let theta0 = (0..=64)
        .map(|k| PI * k as f64 / 64.0)
        .map(|th| {
            let h = disc.boundary_value(th);
            let d: f64 = h
                .iter()
                .map(|c| c.re)
                .chain(h.iter().map(|c| c.im))
                .zip(p)
                .map(|(a, b)| (a - b).powi(2))
                .sum();
            (d, th)
        })
        .fold((f64::INFINITY, 0.0), |a, b| if b.0 < a.0 { b } else { a })
        .1;
    let mut sigma = mid;
    let mut theta = theta0;
    let mut dist = f64::INFINITY;
    for _ in 0..opts.max_steps {
        let (h, dth, _) = arc_point(template, grid, &sigma, theta)?;
        let resid: Vec<f64> = p.iter().zip(&h).map(|(a, b)| a - b).collect();
        dist = resid.iter().map(|v| v * v).sum::<f64>().sqrt();
        if dist < opts.tol * 1e-3 {
            break;
        }
        let rows = h.len();
        let mut jac = DMatrix::zeros(rows, m + 1);
        for k in 0..m {
            let mut s = sigma.clone();
            s[k] += opts.fd_step;
            let (hs, _, _) = arc_point(template, grid, &s, theta)?;
            for r in 0..rows {
                jac[(r, k)] = (hs[r] - h[r]) / opts.fd_step;
            }
        }
        for r in 0..rows {
            jac[(r, m)] = dth[r];
        }
        let jt = jac.transpose();
        let rhs = &jt * nalgebra::DVector::from_column_slice(&resid);
        let Some(step) = solve_real(&jt * &jac, rhs.as_slice()) else {
            break;
        };
        let mut moved = 0.0f64;
        for k in 0..m {
            let ns = (sigma[k] + step[k]).clamp(cell.0[k], cell.1[k]);
            moved = moved.max((ns - sigma[k]).abs());
            sigma[k] = ns;
        }
        let nt = (theta + step[m]).clamp(0.0, PI);
        moved = moved.max((nt - theta).abs());
        theta = nt;
        if moved < 1e-14 {
            let (h, _, _) = arc_point(template, grid, &sigma, theta)?;
            dist = p
                .iter()
                .zip(&h)
                .map(|(a, b)| (a - b).powi(2))
                .sum::<f64>()
                .sqrt();
            break;
        }
    }
    Ok((dist, sigma))
}

/// Counts, for each edge sample, the cells whose arcs `h_σ(S⁺)` pass within
/// `opts.tol`. A foliation shows up as multiplicity 1 everywhere.
pub fn foliation_check(
    template: &BishopProblem,
    grid: &FoliationGrid,
    edge_samples: &[Vec<Complex64>],
    opts: &FoliationOptions,
    exec: Exec,
) -> Result<FoliationReport> {
    let n = template.graph.n();
    if grid.t0.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            actual: grid.t0.len(),
        });
    }
    // Prefilter: the σ-projection of an arc point stays close to its cell
    let spread = template.graph.lipschitz_bound + 1.0;
    let t_norm = grid.t0.iter().map(|v| v * v).sum::<f64>().sqrt();
    let multiplicities = map_indexed(exec, edge_samples.len(), |i| -> Result<usize> {
        let z = &edge_samples[i];
        let p: Vec<f64> = z
            .iter()
            .map(|c| c.re)
            .chain(z.iter().map(|c| c.im))
            .collect();
        let y: Vec<f64> = z.iter().map(|c| c.im).collect();
        let proj: Vec<f64> = grid
            .basis
            .iter()
            .map(|b| b.iter().zip(&y).map(|(a, c)| a * c).sum())
            .collect();
        let mut count = 0;
        for cell in &grid.cells {
            let width: f64 = cell
                .0
                .iter()
                .zip(&cell.1)
                .map(|(a, b)| b - a)
                .fold(0.0, f64::max);
            let near = proj
                .iter()
                .zip(cell.0.iter().zip(&cell.1))
                .all(|(s, (lo, hi))| {
                    *s >= lo - spread * t_norm - width && *s <= hi + spread * t_norm + width
                });
            if !near {
                continue;
            }
            let (d, sigma) = cell_distance(template, grid, cell, &p, opts)?;
            let half_open = sigma.iter().zip(&cell.1).all(|(s, hi)| *s < hi - 1e-12);
            if d <= opts.tol && half_open {
                count += 1;
            }
        }
        Ok(count)
    })
    .into_iter()
    .collect::<Result<Vec<usize>>>()?;
    let single = multiplicities.iter().filter(|&&m| m == 1).count();
    Ok(FoliationReport {
        max_multiplicity: multiplicities.iter().copied().max().unwrap_or(0),
        fraction_single: if multiplicities.is_empty() {
            0.0
        } else {
            single as f64 / multiplicities.len() as f64
        },
        gaps: multiplicities.iter().filter(|&&m| m == 0).count(),
        multiplicities,
    })
}

/// Seeded edge points lying on arcs of the interior of the foliation grid:
/// `σ` uniform in the middle 80% of the σ-box, `θ` uniform in `[0.1π, 0.9π]`.
pub fn foliation_edge_samples(
    template: &BishopProblem,
    grid: &FoliationGrid,
    sigma_max: f64,
    count: usize,
    seed: u64,
    exec: Exec,
) -> Result<Vec<Vec<Complex64>>> {
    map_indexed(exec, count, |i| {
        let mut rng = substream(seed, i as u64);
        let sigma: Vec<f64> = (0..grid.basis.len())
            .map(|_| 0.8 * sigma_max * (2.0 * rng.gen::<f64>() - 1.0))
            .collect();
        let theta = PI * (0.1 + 0.8 * rng.gen::<f64>());
        let c = grid.c_of(&sigma);
        let (disc, _) = attached_disc(&template.with_params(&c, &grid.t0))?;
        Ok(disc.boundary_value(theta))
    })
    .into_iter()
    .collect()
}

#[derive(Debug, Clone, Serialize)]
pub struct SmoothnessReport {
    /// `(h, max |Δ²_h f(0)|/h²)` over all parameter axes and centre coordinates.
    pub levels: Vec<(f64, f64)>,
    pub bounded: bool,
}

/// Second-difference quotients of `(c, t) ↦ h_{c,t}(0)` at the middle of the
/// parameter box with spacing `h`, `h/2`, `h/4` (`h` the grid spacing).
pub fn center_map_smoothness(fam: &DiscFamily, exec: Exec) -> Result<SmoothnessReport> {
    let g = fam.grid;
    if g.points < 3 {
        return Err(Error::Precondition(
            "centre-map smoothness needs at least 3 grid points per axis".into(),
        ));
    }
    let n = fam.template.graph.n();
    let hc = 2.0 * g.c_max / (g.points - 1) as f64;
    let ht = g.t_max / (g.points - 1) as f64;
    let base_c = vec![0.0; n];
    let base_t = vec![0.5 * g.t_max; n];
    let center =
        |c: &[f64], t: &[f64]| -> Result<Vec<Complex64>> { Ok(fam.disc_at(c, t)?.center()) };
    let f0 = center(&base_c, &base_t)?;
    let levels = map_indexed(exec, 3, |lvl| -> Result<(f64, f64)> {
        let scale = 0.5f64.powi(lvl as i32);
        let mut worst: f64 = 0.0;
        for axis in 0..2 * n {
            let h = if axis < n { hc } else { ht } * scale;
            let shift = |s: f64| {
                let mut c = base_c.clone();
                let mut t = base_t.clone();
                if axis < n {
                    c[axis] += s;
                } else {
                    t[axis - n] += s;
                }
                (c, t)
            };
            let (cp, tp) = shift(h);
            let (cm, tm) = shift(-h);
            let fp = center(&cp, &tp)?;
            let fm = center(&cm, &tm)?;
            for j in 0..n {
                worst = worst.max(((fp[j] - 2.0 * f0[j] + fm[j]) / (h * h)).norm());
            }
        }
        Ok((hc * scale, worst))
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    let floor = 1e-6;
    let bounded = levels.windows(2).all(|w| w[1].1 <= 2.0 * w[0].1.max(floor));
    Ok(SmoothnessReport { levels, bounded })
}

/// Checks that `h(ζ) ∈ W` on a polar grid of radius `radius`.
pub fn disc_in_wedge(
    d: &AnalyticDisc,
    w: &WedgeSpec,
    radius: f64,
    rings: usize,
    spokes: usize,
) -> bool {
    (1..=rings).all(|i| {
        let r = radius * i as f64 / rings as f64;
        (0..spokes).all(|k| {
            let z = Complex64::from_polar(r, grid_angle(k, spokes));
            d.evaluate(z).map(|h| in_wedge(w, &h)).unwrap_or(false)
        })
    })
}
