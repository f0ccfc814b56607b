//! Model domains `Ω = {ρ < 0}` with polynomial defining functions: Levi form,
//! holomorphic tangent hyperplanes, and the tangent-bundle chart.

use std::sync::Arc;

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::distance::{nearest_point, DistanceOptions};
use crate::error::{Error, Result};
use crate::exec::{map_indexed, substream, Exec};
use crate::jet::{to_real, CMatrix, RealJet, RealJet2, RealPoly};
use crate::linalg::{
    cnorm, hermitian_dot, hermitian_min_eigenvalue, kernel_of_functional, normalized,
};
use crate::wedge::{EdgeConfig, EdgeSpec};

/// JSON description of a domain.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum DomainConfig {
    /// Ball of radius `radius` (default 1) about the origin.
    Ball {
        n: usize,
        #[serde(default = "one")]
        radius: f64,
    },
    /// `Σ a_j |z_j|² - 1`.
    Ellipsoid {
        a: Vec<f64>,
    },
    Polynomial {
        rho: RealPoly,
    },
    /// `ρ_base + ε q`, accepted only when strictly pseudoconvex on samples.
    Perturbed {
        base: Box<DomainConfig>,
        epsilon: f64,
        q: RealPoly,
    },
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone)]
pub struct DomainSpec {
    pub n: usize,
    pub rho: RealPoly,
    pub name: String,
    pub config: DomainConfig,
}

/// Boundary points used to certify perturbed domains.
const PERTURBATION_PROBES: usize = 64;

impl DomainSpec {
    pub fn ball(n: usize) -> Self {
        Self::from_config(&DomainConfig::Ball { n, radius: 1.0 }).expect("ball is valid")
    }

    pub fn ball_radius(n: usize, radius: f64) -> Result<Self> {
        Self::from_config(&DomainConfig::Ball { n, radius })
    }

    pub fn ellipsoid(a: &[f64]) -> Result<Self> {
        Self::from_config(&DomainConfig::Ellipsoid { a: a.to_vec() })
    }

    pub fn from_config(cfg: &DomainConfig) -> Result<Self> {
        let (n, rho, name) = match cfg {
            DomainConfig::Ball { n, radius } => {
                if *n == 0 || !(*radius > 0.0) {
                    return Err(Error::InvalidSpec(
                        "ball needs n >= 1 and radius > 0".into(),
                    ));
                }
                let w = vec![1.0 / (radius * radius); *n];
                let rho = RealPoly::weighted_norm_sq(&w).add(&RealPoly::constant(*n, -1.0));
                (*n, rho, "ball".to_string())
            }
            DomainConfig::Ellipsoid { a } => {
                if a.is_empty() || a.iter().any(|v| !(*v > 0.0)) {
                    return Err(Error::InvalidSpec(
                        "ellipsoid weights must be positive".into(),
                    ));
                }
                let n = a.len();
                let rho = RealPoly::weighted_norm_sq(a).add(&RealPoly::constant(n, -1.0));
                (n, rho, "ellipsoid".to_string())
            }
            DomainConfig::Polynomial { rho } => {
                rho.validate()?;
                (rho.n, rho.clone(), "polynomial".to_string())
            }
            DomainConfig::Perturbed { base, epsilon, q } => {
                let b = Self::from_config(base)?;
                q.validate()?;
                if q.n != b.n {
                    return Err(Error::DimensionMismatch {
                        expected: b.n,
                        actual: q.n,
                    });
                }
                let rho = b.rho.add(&q.scale(*epsilon));
                let d = Self {
                    n: b.n,
                    rho,
                    name: "perturbed".into(),
                    config: cfg.clone(),
                };
                let margin = strict_psc_margin(&d, PERTURBATION_PROBES, 0, Exec::Sequential)?;
                if !(margin > 0.0) {
                    return Err(Error::InvalidSpec(format!(
                        "perturbed domain is not strictly pseudoconvex on probes (margin {margin:e})"
                    )));
                }
                return Ok(d);
            }
        };
        Ok(Self {
            n,
            rho,
            name,
            config: cfg.clone(),
        })
    }

    pub fn value(&self, z: &[Complex64]) -> f64 {
        self.rho.value(z)
    }

    pub fn contains(&self, z: &[Complex64]) -> bool {
        self.value(z) < 0.0
    }

    pub fn dz(&self, z: &[Complex64]) -> Vec<Complex64> {
        self.rho.dz(z)
    }

    pub fn levi_matrix(&self, z: &[Complex64]) -> CMatrix {
        self.rho.levi_matrix(z)
    }

    /// Radius when the domain is a ball about the origin.
    pub fn as_ball(&self) -> Option<f64> {
        match &self.config {
            DomainConfig::Ball { radius, .. } => Some(*radius),
            DomainConfig::Ellipsoid { a } if a.iter().all(|v| *v == a[0]) => {
                Some(1.0 / a[0].sqrt())
            }
            _ => None,
        }
    }

    /// Newton projection onto `{ρ = 0}` along the gradient.
    pub fn project_to_boundary(&self, z: &[Complex64]) -> Result<Vec<Complex64>> {
        let mut p = z.to_vec();
        for _ in 0..100 {
            let r = self.value(&p);
            if r.abs() <= 1e-13 {
                return Ok(p);
            }
            let g = self.rho.real_gradient(&p);
            let g2: f64 = g.iter().map(|v| v * v).sum();
            if g2 < 1e-20 {
                return Err(Error::DegenerateBoundary(format!("{p:?}")));
            }
            let n = self.n;
            for k in 0..n {
                p[k] -= Complex64::new(g[k], g[n + k]) * (r / g2);
            }
        }
        if self.value(&p).abs() <= 1e-8 {
            Ok(p)
        } else {
            Err(Error::NoConvergence)
        }
    }

    /// Seeded boundary sample: a random direction from the origin, bisected to
    /// the first sign change of `ρ` when the origin is interior, then polished.
    pub fn boundary_sample(&self, rng: &mut impl Rng) -> Result<Vec<Complex64>> {
        let n = self.n;
        let origin = vec![Complex64::new(0.0, 0.0); n];
        for _ in 0..32 {
            let dir: Vec<f64> = (0..2 * n).map(|_| gaussian(rng)).collect();
            let nd = dir.iter().map(|v| v * v).sum::<f64>().sqrt();
            if nd < 1e-12 {
                continue;
            }
            let at = |s: f64| -> Vec<Complex64> {
                (0..n)
                    .map(|k| Complex64::new(s * dir[k] / nd, s * dir[n + k] / nd))
                    .collect()
            };
            let start = if self.value(&origin) < 0.0 {
                let mut hi = 1.0;
                while self.value(&at(hi)) < 0.0 && hi < 1e3 {
                    hi *= 2.0;
                }
                if self.value(&at(hi)) < 0.0 {
                    continue;
                }
                let mut lo = 0.0;
                for _ in 0..60 {
                    let mid = 0.5 * (lo + hi);
                    if self.value(&at(mid)) < 0.0 {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                at(0.5 * (lo + hi))
            } else {
                at(0.1 * rng.gen::<f64>())
            };
            if let Ok(p) = self.project_to_boundary(&start) {
                return Ok(p);
            }
        }
        Err(Error::NoConvergence)
    }

    /// `count` boundary samples, sample `i` drawn from substream `i`.
    pub fn boundary_samples(
        &self,
        count: usize,
        seed: u64,
        exec: Exec,
    ) -> Result<Vec<Vec<Complex64>>> {
        map_indexed(exec, count, |i| {
            self.boundary_sample(&mut substream(seed, i as u64))
        })
        .into_iter()
        .collect()
    }

    pub fn distance_to_boundary(&self, z: &[Complex64], opts: &DistanceOptions) -> Result<f64> {
        Ok(nearest_point(&[&self.rho], z, &[], opts)?.distance)
    }

    /// The tangent-bundle edge through `(p, w(p))` in `ℂⁿ × ℂ^{n-1}`:
    /// `ρ(z) = 0`, `w_j = ρ_{z_j}(z)/ρ_{z_pivot}(z)`.
    pub fn tangent_bundle_edge(&self, p: &[Complex64]) -> Result<EdgeSpec> {
        let (_, pivot) = tangent_bundle_chart(self, p)?;
        let dim = 2 * self.n - 1;
        let rho = Arc::new(self.rho.clone());
        let mut phi: Vec<Arc<dyn RealJet>> = vec![Arc::new(Lifted {
            rho: rho.clone(),
            dim,
        })];
        let others: Vec<usize> = (0..self.n).filter(|&j| j != pivot).collect();
        for (slot, &j) in others.iter().enumerate() {
            for imag in [false, true] {
                phi.push(Arc::new(ChartComponent {
                    rho: rho.clone(),
                    n: self.n,
                    pivot,
                    j,
                    slot,
                    imag,
                }));
            }
        }
        EdgeSpec::new("tangent-bundle", phi)
    }
}

fn gaussian(rng: &mut impl Rng) -> f64 {
    // Box–Muller
    let u1: f64 = rng.gen::<f64>().max(1e-300);
    let u2: f64 = rng.gen();
    (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
}

/// `ρ` pulled back to `ℂⁿ × ℂ^{n-1}`.
#[derive(Debug)]
struct Lifted {
    rho: Arc<RealPoly>,
    dim: usize,
}

impl RealJet for Lifted {
    fn dim(&self) -> usize {
        self.dim
    }
    fn value(&self, z: &[Complex64]) -> f64 {
        self.rho.value(&z[..self.rho.n])
    }
    fn dz(&self, z: &[Complex64]) -> Vec<Complex64> {
        let mut d = self.rho.dz(&z[..self.rho.n]);
        d.resize(self.dim, Complex64::new(0.0, 0.0));
        d
    }
}

/// `Re` or `Im` of `w_slot - ρ_{z_j}/ρ_{z_pivot}`.
#[derive(Debug)]
struct ChartComponent {
    rho: Arc<RealPoly>,
    n: usize,
    pivot: usize,
    j: usize,
    slot: usize,
    imag: bool,
}

impl ChartComponent {
    fn quotient(&self, z: &[Complex64]) -> Complex64 {
        let d = self.rho.dz(z);
        d[self.j] / d[self.pivot]
    }
}

impl RealJet for ChartComponent {
    fn dim(&self) -> usize {
        2 * self.n - 1
    }
    fn value(&self, z: &[Complex64]) -> f64 {
        let v = z[self.n + self.slot] - self.quotient(&z[..self.n]);
        if self.imag {
            v.im
        } else {
            v.re
        }
    }
    fn dz(&self, z: &[Complex64]) -> Vec<Complex64> {
        let zz = &z[..self.n];
        let d = self.rho.dz(zz);
        let levi = self.rho.levi_matrix(zz);
        let holo = self.rho.dzdz(zz);
        let (a, b) = (d[self.j], d[self.pivot]);
        let b2 = b * b;
        let mut out = vec![Complex64::new(0.0, 0.0); self.dim()];
        for k in 0..self.n {
            let q_z = (holo[(self.j, k)] * b - a * holo[(self.pivot, k)]) / b2;
            let q_zbar = (levi[(self.j, k)] * b - a * levi[(self.pivot, k)]) / b2;
            // ∂Re q = (q_z + conj(q_z̄))/2, ∂Im q = (q_z - conj(q_z̄))/(2i)
            let dq = if self.imag {
                (q_z - q_zbar.conj()) / Complex64::new(0.0, 2.0)
            } else {
                (q_z + q_zbar.conj()) * 0.5
            };
            out[k] = -dq;
        }
        out[self.n + self.slot] = if self.imag {
            Complex64::new(0.0, -0.5)
        } else {
            Complex64::new(0.5, 0.0)
        };
        out
    }
}

/// `L(ρ, p, v) = Σ ρ_{z_j z̄_k}(p) v_j v̄_k`.
pub fn levi_form(d: &DomainSpec, p: &[Complex64], v: &[Complex64]) -> Result<f64> {
    if p.len() != d.n || v.len() != d.n {
        return Err(Error::DimensionMismatch {
            expected: d.n,
            actual: if p.len() != d.n { p.len() } else { v.len() },
        });
    }
    let l = d.levi_matrix(p);
    let mut s = Complex64::new(0.0, 0.0);
    for j in 0..d.n {
        for k in 0..d.n {
            s += l[(j, k)] * v[j] * v[k].conj();
        }
    }
    Ok(s.re)
}

/// Smallest eigenvalue of the Levi form restricted to `H_p(bΩ)`.
/// Infinite when `H_p` is trivial (`n = 1`).
pub fn restricted_levi_min(d: &DomainSpec, p: &[Complex64]) -> Result<f64> {
    let grad = d.dz(p);
    if cnorm(&grad) < 1e-10 {
        return Err(Error::DegenerateBoundary(format!("{:?}", to_real(p))));
    }
    let basis = kernel_of_functional(&grad);
    if basis.is_empty() {
        return Ok(f64::INFINITY);
    }
    let l = d.levi_matrix(p);
    let m = basis.len();
    let bilinear = |a: &[Complex64], b: &[Complex64]| -> Complex64 {
        let mut s = Complex64::new(0.0, 0.0);
        for j in 0..d.n {
            for k in 0..d.n {
                s += l[(j, k)] * a[j] * b[k].conj();
            }
        }
        s
    };
    let restricted = CMatrix::from_fn(m, m, |i, k| bilinear(&basis[i], &basis[k]));
    Ok(hermitian_min_eigenvalue(&restricted))
}

/// Minimum restricted Levi eigenvalue over `samples` seeded boundary points.
pub fn strict_psc_margin(d: &DomainSpec, samples: usize, seed: u64, exec: Exec) -> Result<f64> {
    let pts = d.boundary_samples(samples, seed, exec)?;
    strict_psc_margin_at(d, &pts)
}

pub fn strict_psc_margin_at(d: &DomainSpec, points: &[Vec<Complex64>]) -> Result<f64> {
    let mut best = f64::INFINITY;
    for p in points {
        if d.value(p).abs() > 1e-8 {
            return Err(Error::Precondition(format!(
                "sample is not on the boundary (rho = {:e})",
                d.value(p)
            )));
        }
        best = best.min(restricted_levi_min(d, p)?);
    }
    Ok(best)
}

/// A complex hyperplane `{v : Σ a_j v_j = 0}` stored by its unit coefficient
/// vector `a`, defined up to a unimodular factor.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Hyperplane {
    pub normal: Vec<Complex64>,
}

impl Hyperplane {
    pub fn new(a: &[Complex64]) -> Result<Self> {
        if cnorm(a) < 1e-10 {
            return Err(Error::DegenerateBoundary(
                "hyperplane normal vanishes".into(),
            ));
        }
        Ok(Self {
            normal: normalized(a),
        })
    }

    pub fn dim(&self) -> usize {
        self.normal.len()
    }

    /// Orthonormal basis of the hyperplane.
    pub fn basis(&self) -> Vec<Vec<Complex64>> {
        kernel_of_functional(&self.normal)
    }

    /// Chart `w_j = a_j / a_pivot`, `j ≠ pivot`, pivot of largest modulus.
    pub fn chart(&self) -> (Vec<Complex64>, usize) {
        let pivot = argmax_modulus(&self.normal);
        let w = (0..self.dim())
            .filter(|&j| j != pivot)
            .map(|j| self.normal[j] / self.normal[pivot])
            .collect();
        (w, pivot)
    }

    pub fn from_chart(w: &[Complex64], pivot: usize) -> Result<Self> {
        let n = w.len() + 1;
        if pivot >= n {
            return Err(Error::InvalidSpec(format!("pivot {pivot} out of range")));
        }
        let mut a = Vec::with_capacity(n);
        let mut it = w.iter();
        for j in 0..n {
            a.push(if j == pivot {
                Complex64::new(1.0, 0.0)
            } else {
                *it.next().unwrap()
            });
        }
        Self::new(&a)
    }

    /// Projective distance `sqrt(1 - |⟨a, b⟩|²)` between unit normals,
    /// evaluated as the norm of the part of `b` orthogonal to `a`.
    pub fn distance(&self, other: &Hyperplane) -> f64 {
        let c = hermitian_dot(&other.normal, &self.normal);
        let resid: Vec<Complex64> = other
            .normal
            .iter()
            .zip(&self.normal)
            .map(|(b, a)| b - c * a)
            .collect();
        cnorm(&resid)
    }
}

fn argmax_modulus(a: &[Complex64]) -> usize {
    let mut best = 0;
    for (k, v) in a.iter().enumerate() {
        if v.norm() > a[best].norm() {
            best = k;
        }
    }
    best
}

/// `H_p(bΩ) = {v : Σ ρ_{z_j}(p) v_j = 0}`.
pub fn holomorphic_tangent(d: &DomainSpec, p: &[Complex64]) -> Result<Hyperplane> {
    Hyperplane::new(&d.dz(p)).map_err(|_| Error::DegenerateBoundary(format!("{:?}", to_real(p))))
}

/// Chart coordinates of `H_p(bΩ)`: `w_j = ρ_{z_j}(p)/ρ_{z_pivot}(p)`.
pub fn tangent_bundle_chart(d: &DomainSpec, p: &[Complex64]) -> Result<(Vec<Complex64>, usize)> {
    let g = d.dz(p);
    let pivot = argmax_modulus(&g);
    if g[pivot].norm() < 1e-8 {
        return Err(Error::DegenerateBoundary(format!("{:?}", to_real(p))));
    }
    let w = (0..d.n)
        .filter(|&j| j != pivot)
        .map(|j| g[j] / g[pivot])
        .collect();
    Ok((w, pivot))
}

/// The tangent-bundle edge through `p` as a wedge-edge JSON description.
pub fn tangent_bundle_edge_config(d: &DomainSpec, p: &[Complex64]) -> EdgeConfig {
    EdgeConfig::TangentBundle {
        domain: d.config.clone(),
        base_point: p.iter().map(|c| [c.re, c.im]).collect(),
    }
}
