//! Boundary-rate measurements: power-law fits along inward rays for vanishing
//! rates, Hopf-type ratios, gradient blow-up and moduli of continuity, plus the
//! exponent arithmetic of the Hölder bootstrap.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::Rng;
use serde::Serialize;

use crate::bishop::DiscFamily;
use crate::distance::DistanceOptions;
use crate::domains::DomainSpec;
use crate::error::{Error, Result};
use crate::exec::{map_indexed, substream, Exec};
use crate::jet::{to_real, RealJet2};
use crate::linalg::{cnorm, hermitian_min_eigenvalue, max_singular_value};
use crate::maps::{MapUnderTest, PointMap};

/// Samples `g(s_i)` at points `base + s_i·direction`.
#[derive(Debug, Clone, Serialize)]
pub struct RayProfile {
    pub base: Vec<Complex64>,
    pub direction: Vec<Complex64>,
    pub s: Vec<f64>,
    pub values: Vec<f64>,
}

impl RayProfile {
    pub fn point(&self, i: usize) -> Vec<Complex64> {
        self.base
            .iter()
            .zip(&self.direction)
            .map(|(b, d)| b + d * self.s[i])
            .collect()
    }

    pub fn validate(&self) -> Result<()> {
        if self.s.len() != self.values.len() {
            return Err(Error::DimensionMismatch {
                expected: self.s.len(),
                actual: self.values.len(),
            });
        }
        if self.s.windows(2).any(|w| !(w[1] < w[0])) || self.s.iter().any(|s| !(*s > 0.0)) {
            return Err(Error::InvalidSpec(
                "ray distances must be positive and strictly decreasing".into(),
            ));
        }
        if self.values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidSpec("ray values must be finite".into()));
        }
        Ok(())
    }
}

/// `s_i = s₀ 2^{-i}`, `i = 0..count`.
pub fn geometric_distances(s0: f64, count: usize) -> Vec<f64> {
    (0..count).map(|i| s0 * 0.5f64.powi(i as i32)).collect()
}

/// Least-squares fit of `log g = log C + γ log s`.
#[derive(Debug, Clone, Copy, Serialize, PartialEq)]
pub struct ExponentFit {
    pub exponent: f64,
    pub constant: f64,
    pub r2: f64,
    pub s_min: f64,
    pub s_max: f64,
    /// Every sampled value was exactly zero; `exponent` is `+∞`, `constant` 0.
    pub exact_zero: bool,
}

/// Fits `g ≈ C s^γ` on the positive values. All-zero data is the exact-zero case.
pub fn fit_power_law(s: &[f64], g: &[f64]) -> Result<ExponentFit> {
    if s.len() != g.len() {
        return Err(Error::DimensionMismatch {
            expected: s.len(),
            actual: g.len(),
        });
    }
    if g.iter().any(|v| !v.is_finite() || *v < 0.0) || s.iter().any(|v| !(*v > 0.0)) {
        return Err(Error::Precondition(
            "power-law fit needs s > 0 and finite g >= 0".into(),
        ));
    }
    let s_min = s.iter().cloned().fold(f64::INFINITY, f64::min);
    let s_max = s.iter().cloned().fold(0.0, f64::max);
    if g.iter().all(|v| *v == 0.0) {
        return Ok(ExponentFit {
            exponent: f64::INFINITY,
            constant: 0.0,
            r2: 1.0,
            s_min,
            s_max,
            exact_zero: true,
        });
    }
    let pts: Vec<(f64, f64)> = s
        .iter()
        .zip(g)
        .filter(|(_, v)| **v > 0.0)
        .map(|(a, b)| (a.ln(), b.ln()))
        .collect();
    if pts.len() < 2 {
        return Err(Error::Precondition(
            "power-law fit needs two positive samples".into(),
        ));
    }
    let m = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / m;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / m;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let syy: f64 = pts.iter().map(|p| (p.1 - my).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::Precondition(
            "power-law fit needs distinct distances".into(),
        ));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_res: f64 = pts
        .iter()
        .map(|p| (p.1 - intercept - slope * p.0).powi(2))
        .sum();
    let r2 = if syy <= 1e-300 {
        1.0
    } else {
        (1.0 - ss_res / syy).clamp(0.0, 1.0)
    };
    Ok(ExponentFit {
        exponent: slope,
        constant: intercept.exp(),
        r2,
        s_min,
        s_max,
        exact_zero: false,
    })
}

impl ExponentFit {
    /// Fits one profile.
    pub fn of_profile(p: &RayProfile) -> Result<Self> {
        p.validate()?;
        fit_power_law(&p.s, &p.values)
    }
}

/// Worst case over per-ray fits: smallest exponent, largest constant, smallest r².
fn worst_case(fits: &[ExponentFit]) -> Option<ExponentFit> {
    let live: Vec<&ExponentFit> = fits.iter().filter(|f| !f.exact_zero).collect();
    if live.is_empty() {
        return fits.first().copied();
    }
    Some(ExponentFit {
        exponent: live
            .iter()
            .map(|f| f.exponent)
            .fold(f64::INFINITY, f64::min),
        constant: live.iter().map(|f| f.constant).fold(0.0, f64::max),
        r2: live.iter().map(|f| f.r2).fold(1.0, f64::min),
        s_min: live.iter().map(|f| f.s_min).fold(f64::INFINITY, f64::min),
        s_max: live.iter().map(|f| f.s_max).fold(0.0, f64::max),
        exact_zero: false,
    })
}

/// Ray layout for [`vanishing_rate_fit`].
#[derive(Debug, Clone, Copy)]
pub struct RayOptions {
    pub rays: usize,
    pub s0: f64,
    pub points: usize,
}

impl Default for RayOptions {
    fn default() -> Self {
        Self {
            rays: 8,
            s0: 0.1,
            points: 20,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct VanishingFit {
    pub profiles: Vec<RayProfile>,
    pub fits: Vec<ExponentFit>,
    pub worst: ExponentFit,
}

/// Checks that `φ` is non-negative, vanishes on the arc and satisfies the
/// sub-mean-value inequality at interior probes.
fn check_subharmonic(phi: &(dyn Fn(Complex64) -> f64 + Sync), arc: (f64, f64)) -> Result<()> {
    let mut negative = Vec::new();
    let mut super_mean = Vec::new();
    for i in 0..8 {
        for k in 0..16 {
            let r = 0.1 * i as f64 + 0.05;
            let z = Complex64::from_polar(r, 2.0 * PI * k as f64 / 16.0);
            let v = phi(z);
            if !(v >= 0.0) {
                negative.push(vec![z.re, z.im]);
            }
            let radius = 0.04;
            let mean = (0..64)
                .map(|j| phi(z + Complex64::from_polar(radius, 2.0 * PI * j as f64 / 64.0)))
                .sum::<f64>()
                / 64.0;
            if v > mean + 1e-9 * (1.0 + v.abs()) {
                super_mean.push(vec![z.re, z.im]);
            }
        }
    }
    if !negative.is_empty() {
        return Err(Error::Hypothesis {
            reason: format!("test function is negative at {} probes", negative.len()),
            witnesses: negative,
        });
    }
    if !super_mean.is_empty() {
        return Err(Error::Hypothesis {
            reason: format!(
                "sub-mean-value inequality fails at {} probes",
                super_mean.len()
            ),
            witnesses: super_mean,
        });
    }
    let mut nonzero = Vec::new();
    for k in 0..16 {
        let th = arc.0 + (arc.1 - arc.0) * (k as f64 + 0.5) / 16.0;
        let z = Complex64::from_polar(1.0 - 1e-9, th);
        if phi(z) > 1e-6 {
            nonzero.push(vec![z.re, z.im]);
        }
    }
    if !nonzero.is_empty() {
        return Err(Error::Hypothesis {
            reason: format!(
                "test function does not vanish on the arc at {} probes",
                nonzero.len()
            ),
            witnesses: nonzero,
        });
    }
    Ok(())
}

/// Fits `φ((1-s)e^{iθ}) ≈ C s^β` along rays landing on the middle half of the
/// arc `(θ₀, θ₁)`.
pub fn vanishing_rate_fit(
    phi: &(dyn Fn(Complex64) -> f64 + Sync),
    arc: (f64, f64),
    opts: &RayOptions,
) -> Result<VanishingFit> {
    if !(arc.1 > arc.0) || opts.rays == 0 {
        return Err(Error::Precondition("arc must have positive length".into()));
    }
    check_subharmonic(phi, arc)?;
    let s = geometric_distances(opts.s0, opts.points);
    let profiles: Vec<RayProfile> = (0..opts.rays)
        .map(|k| {
            let th = arc.0 + (arc.1 - arc.0) * (0.25 + 0.5 * (k as f64 + 0.5) / opts.rays as f64);
            let e = Complex64::from_polar(1.0, th);
            RayProfile {
                base: vec![e],
                direction: vec![-e],
                s: s.clone(),
                values: s.iter().map(|si| phi(e * (1.0 - si))).collect(),
            }
        })
        .collect();
    let fits = profiles
        .iter()
        .map(ExponentFit::of_profile)
        .collect::<Result<Vec<_>>>()?;
    let worst = worst_case(&fits).expect("at least one ray");
    Ok(VanishingFit {
        profiles,
        fits,
        worst,
    })
}

/// Harmonic measure of the arc `{e^{iθ} : a < θ < b}` at `ζ ∈ 𝔻`.
pub fn harmonic_measure(a: f64, b: f64, zeta: Complex64) -> f64 {
    let ea = Complex64::from_polar(1.0, a);
    let eb = Complex64::from_polar(1.0, b);
    ((eb - zeta) / (ea - zeta)).arg().rem_euclid(2.0 * PI) / PI - (b - a) / (2.0 * PI)
}

/// One family member's transported fit.
#[derive(Debug, Clone, Serialize)]
pub struct MemberRate {
    pub c: Vec<f64>,
    pub t: Vec<f64>,
    /// `ψ(h_t(ζ)) ≈ C (1-|ζ|)^β`.
    pub disc_fit: ExponentFit,
    /// `ψ(h_t(ζ)) ≈ C dist(h_t(ζ), E)^β`.
    pub edge_fit: ExponentFit,
    /// `max ψ/dist` over the samples.
    pub linear_constant: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct EdgeRateReport {
    pub members: Vec<MemberRate>,
    /// Members whose disc lies in `E` (`ψ∘h_t ≡ 0`).
    pub exact_zero_members: usize,
    pub worst_disc: Option<ExponentFit>,
    pub worst_edge: Option<ExponentFit>,
    /// `(max C - min C)/max C` for the edge-distance fits.
    pub constant_spread: f64,
    pub max_linear_constant: f64,
}

/// Applies the vanishing fit to `ψ∘h_t` for every solved member, measuring
/// both against `1-|ζ|` and against the distance of `h_t(ζ)` to the edge.
pub fn edge_vanishing_rate(
    psi: &(dyn Fn(&[Complex64]) -> f64 + Sync),
    edge_distance: &(dyn Fn(&[Complex64]) -> Result<f64> + Sync),
    family: &DiscFamily,
    opts: &RayOptions,
    exec: Exec,
) -> Result<EdgeRateReport> {
    let solved: Vec<&crate::bishop::Member> = family.solved().collect();
    if solved.is_empty() {
        return Err(Error::Precondition(
            "disc family has no solved members".into(),
        ));
    }
    let s = geometric_distances(opts.s0, opts.points);
    let rows = map_indexed(exec, solved.len(), |i| -> Result<Option<MemberRate>> {
        let m = solved[i];
        let mut disc_fits = Vec::new();
        let mut edge_fits = Vec::new();
        let mut linear: f64 = 0.0;
        let mut all_zero = true;
        for k in 0..opts.rays {
            let th = PI * (0.25 + 0.5 * (k as f64 + 0.5) / opts.rays as f64);
            let mut vals = Vec::with_capacity(s.len());
            let mut dists = Vec::with_capacity(s.len());
            for si in &s {
                let z = m.disc.evaluate(Complex64::from_polar(1.0 - si, th))?;
                let v = psi(&z);
                if !(v >= 0.0) {
                    return Err(Error::Hypothesis {
                        reason: format!("psi is negative ({v}) on the wedge"),
                        witnesses: vec![to_real(&z)],
                    });
                }
                vals.push(v);
                dists.push(edge_distance(&z)?);
            }
            if vals.iter().any(|v| *v != 0.0) {
                all_zero = false;
            }
            disc_fits.push(fit_power_law(&s, &vals)?);
            let pairs: Vec<(f64, f64)> = dists
                .iter()
                .zip(&vals)
                .filter(|(d, _)| **d > 0.0)
                .map(|(d, v)| (*d, *v))
                .collect();
            if pairs.len() >= 2 {
                let d: Vec<f64> = pairs.iter().map(|p| p.0).collect();
                let v: Vec<f64> = pairs.iter().map(|p| p.1).collect();
                edge_fits.push(fit_power_law(&d, &v)?);
                linear = pairs.iter().map(|(d, v)| v / d).fold(linear, f64::max);
            }
        }
        if all_zero {
            return Ok(None);
        }
        Ok(Some(MemberRate {
            c: m.c.clone(),
            t: m.t.clone(),
            disc_fit: worst_case(&disc_fits).expect("rays"),
            edge_fit: worst_case(&edge_fits)
                .ok_or(Error::Precondition("disc stays on the edge".into()))?,
            linear_constant: linear,
        }))
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    let exact_zero_members = rows.iter().filter(|r| r.is_none()).count();
    let members: Vec<MemberRate> = rows.into_iter().flatten().collect();
    let worst_disc = worst_case(&members.iter().map(|m| m.disc_fit).collect::<Vec<_>>());
    let worst_edge = worst_case(&members.iter().map(|m| m.edge_fit).collect::<Vec<_>>());
    let consts: Vec<f64> = members.iter().map(|m| m.edge_fit.constant).collect();
    let cmax = consts.iter().cloned().fold(0.0, f64::max);
    let cmin = consts.iter().cloned().fold(f64::INFINITY, f64::min);
    let constant_spread = if cmax > 0.0 {
        (cmax - cmin) / cmax
    } else {
        0.0
    };
    let max_linear_constant = members
        .iter()
        .map(|m| m.linear_constant)
        .fold(0.0, f64::max);
    Ok(EdgeRateReport {
        members,
        exact_zero_members,
        worst_disc,
        worst_edge,
        constant_spread,
        max_linear_constant,
    })
}

/// Boundary samples with unit inward normals.
pub fn inward_normals(
    d: &DomainSpec,
    count: usize,
    seed: u64,
    exec: Exec,
) -> Result<Vec<(Vec<Complex64>, Vec<Complex64>)>> {
    let pts = d.boundary_samples(count, seed, exec)?;
    pts.into_iter()
        .map(|p| {
            let g = d.dz(&p);
            // real gradient (2 Re ρ_z, -2 Im ρ_z) as a complex vector is 2 conj(ρ_z)
            let normal: Vec<Complex64> = g.iter().map(|c| -c.conj()).collect();
            let nn = cnorm(&normal);
            if nn < 1e-12 {
                return Err(Error::DegenerateBoundary(format!("{p:?}")));
            }
            Ok((p, normal.iter().map(|c| c / nn).collect()))
        })
        .collect()
}

/// Distance to `bΩ`, in closed form on balls.
fn boundary_distance(d: &DomainSpec, z: &[Complex64]) -> Result<f64> {
    match d.as_ball() {
        Some(r) => Ok(r - cnorm(z)),
        None => d.distance_to_boundary(z, &DistanceOptions::default()),
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct HopfReport {
    /// `(s, sup |ρ₂(f(z))|/dist(z, bΩ₁))` per refinement level.
    pub levels: Vec<(f64, f64)>,
    /// No level exceeds four times the previous one.
    pub bounded: bool,
    pub sup_ratio: f64,
}

/// `sup |ρ₂∘f|/dist(·, bΩ₁)` at inward offsets `s = 10^{-1} … 10^{-levels}`
/// from seeded boundary points.
pub fn hopf_ratio(
    f: &MapUnderTest,
    samples: usize,
    levels: usize,
    seed: u64,
    exec: Exec,
) -> Result<HopfReport> {
    let bases = inward_normals(&f.source, samples, seed, exec)?;
    let mut out = Vec::with_capacity(levels);
    for l in 1..=levels {
        let s = 10f64.powi(-(l as i32));
        let ratios = map_indexed(exec, bases.len(), |i| -> Result<Option<f64>> {
            let (p, nrm) = &bases[i];
            let z: Vec<Complex64> = p.iter().zip(nrm).map(|(a, b)| a + b * s).collect();
            let r2 = f.target.value(&f.eval(&z));
            if !(r2 < 0.0) {
                return Ok(None);
            }
            Ok(Some(r2.abs() / boundary_distance(&f.source, &z)?))
        })
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
        let escaped = ratios.iter().filter(|r| r.is_none()).count();
        if escaped > 0 {
            return Err(Error::Properness(escaped));
        }
        let sup = ratios.into_iter().flatten().fold(0.0, f64::max);
        out.push((s, sup));
    }
    let bounded = out.windows(2).all(|w| w[1].1 <= 4.0 * w[0].1.max(1e-300));
    let sup_ratio = out.iter().map(|l| l.1).fold(0.0, f64::max);
    Ok(HopfReport {
        levels: out,
        bounded,
        sup_ratio,
    })
}

/// Rays `p + s·n` from seeded boundary points along inward normals.
pub fn normal_rays(
    d: &DomainSpec,
    count: usize,
    s0: f64,
    points: usize,
    seed: u64,
    exec: Exec,
) -> Result<Vec<RayProfile>> {
    let s = geometric_distances(s0, points);
    Ok(inward_normals(d, count, seed, exec)?
        .into_iter()
        .map(|(p, n)| RayProfile {
            base: p,
            direction: n,
            s: s.clone(),
            values: vec![0.0; points],
        })
        .collect())
}

/// Blow-up fit `g ≈ A s^{-β}`; the returned `exponent` is `β`.
pub fn fit_blowup(s: &[f64], g: &[f64]) -> Result<ExponentFit> {
    let mut fit = fit_power_law(s, g)?;
    fit.exponent = -fit.exponent;
    Ok(fit)
}

/// Fills the rays with `‖df‖` (operator norm) and fits `‖df‖ ≈ A d^{-β}` on the
/// pooled samples; `exponent` is `β`.
pub fn gradient_exponent_fit(
    f: &MapUnderTest,
    rays: &mut [RayProfile],
    exec: Exec,
) -> Result<ExponentFit> {
    let filled = map_indexed(exec, rays.len(), |i| -> Result<Vec<f64>> {
        let r = &rays[i];
        (0..r.s.len())
            .map(|k| {
                let z = r.point(k);
                let norm = max_singular_value(&f.jacobian(&z));
                if !norm.is_finite() {
                    return Err(Error::Singular(norm));
                }
                Ok(norm)
            })
            .collect()
    });
    let mut s = Vec::new();
    let mut g = Vec::new();
    for (r, vals) in rays.iter_mut().zip(filled) {
        r.values = vals?;
        s.extend(
            r.s.iter()
                .map(|si| {
                    boundary_distance(
                        &f.source,
                        &r.base
                            .iter()
                            .zip(&r.direction)
                            .map(|(b, d)| b + d * si)
                            .collect::<Vec<_>>(),
                    )
                })
                .collect::<Result<Vec<_>>>()?,
        );
        g.extend(&r.values);
    }
    fit_blowup(&s, &g)
}

/// Hardy–Littlewood: `‖df‖ ≲ d^{-β}` with `0 ≤ β < 1` integrates to Hölder `1 - β`.
pub fn holder_from_gradient(beta: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&beta) {
        return Err(Error::Precondition(format!(
            "no Hölder conclusion for gradient exponent {beta}"
        )));
    }
    Ok(1.0 - beta)
}

#[derive(Debug, Clone, Copy, Serialize, PartialEq)]
pub struct BootstrapStep {
    pub theta: f64,
    /// `ρ∘f ≲ d^{p}`, `p = 1/θ`.
    pub power: f64,
    /// `‖df‖ ≲ d^{-β}`, `β = 1 - 1/(2θ)`.
    pub beta: f64,
    /// `α = 1/(2θ)`.
    pub alpha: f64,
}

/// Exponent chain for one power `θ ∈ (1/2, 1)`; `extended` admits `θ ∈ (0, 1)`.
pub fn bootstrap_schedule(theta: f64, extended: bool) -> Result<BootstrapStep> {
    let lo = if extended { 0.0 } else { 0.5 };
    if !(theta > lo && theta < 1.0) {
        return Err(Error::Precondition(format!(
            "theta = {theta} outside ({lo}, 1)"
        )));
    }
    Ok(BootstrapStep {
        theta,
        power: 1.0 / theta,
        beta: 1.0 - 1.0 / (2.0 * theta),
        alpha: 1.0 / (2.0 * theta),
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct PowerCertificate {
    pub theta: f64,
    pub min_eigenvalue: f64,
    pub passed: bool,
    /// Probe attaining the minimum.
    pub witness: Vec<f64>,
}

/// Complex Hessian of `ρ^θ`: `θρ^{θ-1} ∂∂̄ρ + θ(θ-1)ρ^{θ-2} ∂ρ ⊗ ∂̄ρ`.
pub fn power_levi_matrix(rho: &dyn RealJet2, theta: f64, z: &[Complex64]) -> crate::jet::CMatrix {
    let r = rho.value(z);
    let a = rho.dz(z);
    let l = rho.levi_matrix(z);
    let n = a.len();
    crate::jet::CMatrix::from_fn(n, n, |j, k| {
        l[(j, k)] * (theta * r.powf(theta - 1.0))
            + a[j] * a[k].conj() * (theta * (theta - 1.0) * r.powf(theta - 2.0))
    })
}

/// Minimum eigenvalue of the complex Hessian of `ρ^θ` over probes, which must
/// keep `ρ ≥ 10⁻⁶`. Passes when it is at least `-10⁻⁸`.
pub fn psh_power_check(
    rho: &dyn RealJet2,
    theta: f64,
    probes: &[Vec<Complex64>],
    extended: bool,
) -> Result<PowerCertificate> {
    let lo = if extended { 0.0 } else { 0.5 };
    if !(theta > lo && theta <= 1.0) {
        return Err(Error::Precondition(format!(
            "theta = {theta} outside ({lo}, 1]"
        )));
    }
    let band: Vec<Vec<f64>> = probes
        .iter()
        .filter(|p| !(rho.value(p) >= 1e-6))
        .map(|p| to_real(p))
        .collect();
    if !band.is_empty() {
        return Err(Error::Hypothesis {
            reason: format!(
                "{} probes fall in the exclusion band rho < 1e-6",
                band.len()
            ),
            witnesses: band,
        });
    }
    let mut min = f64::INFINITY;
    let mut witness = Vec::new();
    for p in probes {
        let e = hermitian_min_eigenvalue(&power_levi_matrix(rho, theta, p));
        if e < min {
            min = e;
            witness = to_real(p);
        }
    }
    Ok(PowerCertificate {
        theta,
        min_eigenvalue: min,
        passed: min >= -1e-8,
        witness,
    })
}

/// Options of [`modulus_of_continuity_fit`].
#[derive(Debug, Clone, Copy)]
pub struct ModulusOptions {
    pub bases: usize,
    pub directions: usize,
    /// Separations `0.1·2^{-k}`, `k = 0..levels`.
    pub levels: usize,
    pub inward_offset: f64,
}

impl Default for ModulusOptions {
    fn default() -> Self {
        Self {
            bases: 16,
            directions: 16,
            levels: 17,
            inward_offset: 1e-8,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ModulusReport {
    /// `(separation, sup |f(z) - f(w)|)`.
    pub levels: Vec<(f64, f64)>,
    pub fit: ExponentFit,
}

/// Fits `sup |f(z) - f(w)| ≈ C|z - w|^α` over pairs with `z` at the inward
/// offset from a boundary point and `w = z + δu`, `u` from a fixed seeded set
/// of unit directions pointing into the domain.
pub fn modulus_of_continuity_fit(
    f: &dyn PointMap,
    domain: &DomainSpec,
    seed: u64,
    opts: &ModulusOptions,
    exec: Exec,
) -> Result<ModulusReport> {
    let n = domain.n;
    if f.source_dim() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            actual: f.source_dim(),
        });
    }
    let bases = inward_normals(domain, opts.bases, seed, exec)?;
    let mut rng = substream(seed, 1 << 32);
    let dirs: Vec<Vec<Complex64>> = (0..opts.directions)
        .map(|_| {
            let g: Vec<f64> = (0..2 * n).map(|_| rng.gen::<f64>() * 2.0 - 1.0).collect();
            let ng = g.iter().map(|v| v * v).sum::<f64>().sqrt();
            (0..n)
                .map(|k| Complex64::new(g[k] / ng, g[n + k] / ng))
                .collect()
        })
        .collect();
    let mut levels = Vec::with_capacity(opts.levels);
    for k in 0..opts.levels {
        let delta = 0.1 * 0.5f64.powi(k as i32);
        let sups = map_indexed(exec, bases.len(), |i| {
            let (p, nrm) = &bases[i];
            let z: Vec<Complex64> = p
                .iter()
                .zip(nrm)
                .map(|(a, b)| a + b * opts.inward_offset)
                .collect();
            let fz = f.eval(&z);
            let mut sup: f64 = 0.0;
            for u in &dirs {
                // flip into the inward half-space
                let dot: f64 = u.iter().zip(nrm).map(|(a, b)| (a * b.conj()).re).sum();
                let sign = if dot < 0.0 { -1.0 } else { 1.0 };
                let w: Vec<Complex64> = z
                    .iter()
                    .zip(u)
                    .map(|(a, b)| a + b * (sign * delta))
                    .collect();
                if !domain.contains(&w) {
                    continue;
                }
                let fw = f.eval(&w);
                let diff: f64 = fz
                    .iter()
                    .zip(&fw)
                    .map(|(a, b)| (a - b).norm_sqr())
                    .sum::<f64>()
                    .sqrt();
                sup = sup.max(
                    diff / cnorm(&z.iter().zip(&w).map(|(a, b)| a - b).collect::<Vec<_>>()) * delta,
                );
            }
            sup
        });
        levels.push((delta, sups.into_iter().fold(0.0, f64::max)));
    }
    let s: Vec<f64> = levels.iter().map(|l| l.0).collect();
    let g: Vec<f64> = levels.iter().map(|l| l.1).collect();
    Ok(ModulusReport {
        fit: fit_power_law(&s, &g)?,
        levels,
    })
}
