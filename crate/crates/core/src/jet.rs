//! Real-valued functions on `ℂⁿ` with first and second order jets.
//!
//! Real coordinates are laid out as `(x_1..x_n, y_1..y_n)` with `z = x + iy`.
//! Complex derivatives follow the Wirtinger convention
//! `∂/∂z = (∂/∂x - i∂/∂y)/2`.

use std::collections::BTreeMap;
use std::fmt::Debug;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type CMatrix = DMatrix<Complex64>;

pub fn to_real(z: &[Complex64]) -> Vec<f64> {
    z.iter()
        .map(|c| c.re)
        .chain(z.iter().map(|c| c.im))
        .collect()
}

pub fn from_real(v: &[f64]) -> Vec<Complex64> {
    let n = v.len() / 2;
    (0..n).map(|k| Complex64::new(v[k], v[n + k])).collect()
}

/// A real function of `z ∈ ℂⁿ` with its complex gradient.
pub trait RealJet: Send + Sync + Debug {
    fn dim(&self) -> usize;
    fn value(&self, z: &[Complex64]) -> f64;
    /// `(∂f/∂z_1, …, ∂f/∂z_n)`.
    fn dz(&self, z: &[Complex64]) -> Vec<Complex64>;

    /// Gradient in real coordinates `(∂/∂x, ∂/∂y)`.
    fn real_gradient(&self, z: &[Complex64]) -> Vec<f64> {
        let d = self.dz(z);
        d.iter()
            .map(|c| 2.0 * c.re)
            .chain(d.iter().map(|c| -2.0 * c.im))
            .collect()
    }
}

/// A real function with its full second-order jet.
pub trait RealJet2: RealJet {
    /// Complex Hessian `ρ_{z_j z̄_k}` (Hermitian).
    fn levi_matrix(&self, z: &[Complex64]) -> CMatrix;
    /// `ρ_{z_j z_k}` (symmetric).
    fn dzdz(&self, z: &[Complex64]) -> CMatrix;
}

/// One monomial `c · Π x_k^{x[k]} y_k^{y[k]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Term {
    pub c: f64,
    pub x: Vec<u32>,
    pub y: Vec<u32>,
}

/// Real polynomial in the `2n` real coordinates of `ℂⁿ`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RealPoly {
    pub n: usize,
    pub terms: Vec<Term>,
}

fn powi(v: f64, e: u32) -> f64 {
    v.powi(e as i32)
}

impl RealPoly {
    pub fn new(n: usize, terms: Vec<Term>) -> Result<Self> {
        let p = Self { n, terms };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        for t in &self.terms {
            if t.x.len() != self.n || t.y.len() != self.n {
                return Err(Error::InvalidSpec(format!(
                    "monomial exponent lists must have length {}",
                    self.n
                )));
            }
            if !t.c.is_finite() {
                return Err(Error::InvalidSpec("non-finite coefficient".into()));
            }
        }
        Ok(())
    }

    pub fn zero(n: usize) -> Self {
        Self { n, terms: vec![] }
    }

    pub fn constant(n: usize, c: f64) -> Self {
        Self {
            n,
            terms: vec![Term {
                c,
                x: vec![0; n],
                y: vec![0; n],
            }],
        }
    }

    /// The real coordinate `x_k` (`k` zero-based).
    pub fn x(n: usize, k: usize) -> Self {
        let mut x = vec![0; n];
        x[k] = 1;
        Self {
            n,
            terms: vec![Term {
                c: 1.0,
                x,
                y: vec![0; n],
            }],
        }
    }

    /// The real coordinate `y_k` (`k` zero-based).
    pub fn y(n: usize, k: usize) -> Self {
        let mut y = vec![0; n];
        y[k] = 1;
        Self {
            n,
            terms: vec![Term {
                c: 1.0,
                x: vec![0; n],
                y,
            }],
        }
    }

    /// `Σ a_k |z_k|²`.
    pub fn weighted_norm_sq(weights: &[f64]) -> Self {
        let n = weights.len();
        let mut p = Self::zero(n);
        for (k, &a) in weights.iter().enumerate() {
            p = p.add(&Self::x(n, k).mul(&Self::x(n, k)).scale(a));
            p = p.add(&Self::y(n, k).mul(&Self::y(n, k)).scale(a));
        }
        p
    }

    pub fn degree(&self) -> u32 {
        self.terms
            .iter()
            .map(|t| t.x.iter().chain(&t.y).sum::<u32>())
            .max()
            .unwrap_or(0)
    }

    fn key(t: &Term) -> Vec<u32> {
        t.x.iter().chain(&t.y).copied().collect()
    }

    fn from_map(n: usize, map: BTreeMap<Vec<u32>, f64>) -> Self {
        let terms = map
            .into_iter()
            .filter(|(_, c)| *c != 0.0)
            .map(|(k, c)| Term {
                c,
                x: k[..n].to_vec(),
                y: k[n..].to_vec(),
            })
            .collect();
        Self { n, terms }
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut map = BTreeMap::new();
        for t in self.terms.iter().chain(&other.terms) {
            *map.entry(Self::key(t)).or_insert(0.0) += t.c;
        }
        Self::from_map(self.n, map)
    }

    pub fn scale(&self, a: f64) -> Self {
        Self {
            n: self.n,
            terms: self
                .terms
                .iter()
                .map(|t| Term {
                    c: t.c * a,
                    ..t.clone()
                })
                .collect(),
        }
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut map = BTreeMap::new();
        for a in &self.terms {
            for b in &other.terms {
                let k: Vec<u32> = Self::key(a)
                    .iter()
                    .zip(Self::key(b))
                    .map(|(p, q)| p + q)
                    .collect();
                *map.entry(k).or_insert(0.0) += a.c * b.c;
            }
        }
        Self::from_map(self.n, map)
    }

    /// Value at real coordinates.
    pub fn eval_real(&self, v: &[f64]) -> f64 {
        self.terms
            .iter()
            .map(|t| {
                let mut m = t.c;
                for k in 0..self.n {
                    m *= powi(v[k], t.x[k]) * powi(v[self.n + k], t.y[k]);
                }
                m
            })
            .sum()
    }

    fn exps(&self, t: &Term) -> Vec<u32> {
        Self::key(t)
    }

    /// Gradient at real coordinates.
    pub fn grad_real(&self, v: &[f64]) -> Vec<f64> {
        let dim = 2 * self.n;
        let mut g = vec![0.0; dim];
        for t in &self.terms {
            let e = self.exps(t);
            for a in 0..dim {
                if e[a] == 0 {
                    continue;
                }
                let mut m = t.c * e[a] as f64;
                for i in 0..dim {
                    let p = if i == a { e[i] - 1 } else { e[i] };
                    m *= powi(v[i], p);
                }
                g[a] += m;
            }
        }
        g
    }

    /// Hessian at real coordinates.
    pub fn hess_real(&self, v: &[f64]) -> DMatrix<f64> {
        let dim = 2 * self.n;
        let mut h = DMatrix::zeros(dim, dim);
        for t in &self.terms {
            let e = self.exps(t);
            for a in 0..dim {
                for b in a..dim {
                    let mut ee = e.clone();
                    let mut m = t.c;
                    if ee[a] == 0 {
                        continue;
                    }
                    m *= ee[a] as f64;
                    ee[a] -= 1;
                    if ee[b] == 0 {
                        continue;
                    }
                    m *= ee[b] as f64;
                    ee[b] -= 1;
                    for i in 0..dim {
                        m *= powi(v[i], ee[i]);
                    }
                    h[(a, b)] += m;
                    if a != b {
                        h[(b, a)] += m;
                    }
                }
            }
        }
        h
    }

    /// Sum over monomials of `|c|·e_a`: bounds `|∂p/∂v_a|` on the unit box.
    pub fn partial_bounds_on_unit_box(&self) -> Vec<f64> {
        let dim = 2 * self.n;
        let mut b = vec![0.0; dim];
        for t in &self.terms {
            let e = self.exps(t);
            for a in 0..dim {
                b[a] += t.c.abs() * e[a] as f64;
            }
        }
        b
    }
}

/// Converts a real Hessian into `(ρ_{z_j z̄_k}, ρ_{z_j z_k})`.
pub fn complex_hessians(h: &DMatrix<f64>, n: usize) -> (CMatrix, CMatrix) {
    let mut levi = CMatrix::zeros(n, n);
    let mut holo = CMatrix::zeros(n, n);
    for j in 0..n {
        for k in 0..n {
            let xx = h[(j, k)];
            let yy = h[(n + j, n + k)];
            let xy = h[(j, n + k)];
            let yx = h[(n + j, k)];
            levi[(j, k)] = Complex64::new(xx + yy, xy - yx) * 0.25;
            holo[(j, k)] = Complex64::new(xx - yy, -(xy + yx)) * 0.25;
        }
    }
    (levi, holo)
}

impl RealJet for RealPoly {
    fn dim(&self) -> usize {
        self.n
    }

    fn value(&self, z: &[Complex64]) -> f64 {
        self.eval_real(&to_real(z))
    }

    fn dz(&self, z: &[Complex64]) -> Vec<Complex64> {
        let g = self.grad_real(&to_real(z));
        (0..self.n)
            .map(|k| Complex64::new(g[k], -g[self.n + k]) * 0.5)
            .collect()
    }

    fn real_gradient(&self, z: &[Complex64]) -> Vec<f64> {
        self.grad_real(&to_real(z))
    }
}

impl RealJet2 for RealPoly {
    fn levi_matrix(&self, z: &[Complex64]) -> CMatrix {
        complex_hessians(&self.hess_real(&to_real(z)), self.n).0
    }

    fn dzdz(&self, z: &[Complex64]) -> CMatrix {
        complex_hessians(&self.hess_real(&to_real(z)), self.n).1
    }
}
