//! Wedges `W = {φ_j < 0}`, their edges `E = {φ_j = 0}`, the shrunken wedges
//! `W_δ = {φ_j - δ Σ_{l≠j} φ_l < 0}`, and totally real graphs `x = r(x, y)`.

use std::fmt::Debug;
use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::distance::{nearest_point, DistanceOptions};
use crate::domains::{DomainConfig, DomainSpec};
use crate::error::{Error, Result};
use crate::exec::{map_indexed, substream, Exec};
use crate::jet::{CMatrix, RealJet, RealPoly};
use crate::linalg::min_singular_value;

/// A generic edge given by `m` real defining functions on `ℂⁿ`.
#[derive(Debug, Clone)]
pub struct EdgeSpec {
    pub n: usize,
    pub phi: Vec<Arc<dyn RealJet>>,
    pub name: String,
}

impl EdgeSpec {
    pub fn new(name: impl Into<String>, phi: Vec<Arc<dyn RealJet>>) -> Result<Self> {
        let n = phi
            .first()
            .ok_or_else(|| Error::InvalidSpec("edge needs at least one defining function".into()))?
            .dim();
        if phi.iter().any(|f| f.dim() != n) {
            return Err(Error::InvalidSpec(
                "defining functions disagree on dimension".into(),
            ));
        }
        Ok(Self {
            n,
            phi,
            name: name.into(),
        })
    }

    /// `φ_j = x_j`, edge `iℝⁿ`.
    pub fn flat(n: usize) -> Self {
        let phi = (0..n)
            .map(|j| Arc::new(RealPoly::x(n, j)) as Arc<dyn RealJet>)
            .collect();
        Self {
            n,
            phi,
            name: "flat".into(),
        }
    }

    pub fn from_polys(polys: Vec<RealPoly>) -> Result<Self> {
        for p in &polys {
            p.validate()?;
            if p.degree() > 4 {
                return Err(Error::InvalidSpec(format!(
                    "defining polynomial of degree {} exceeds 4",
                    p.degree()
                )));
            }
        }
        Self::new(
            "polynomial",
            polys
                .into_iter()
                .map(|p| Arc::new(p) as Arc<dyn RealJet>)
                .collect(),
        )
    }

    pub fn codim(&self) -> usize {
        self.phi.len()
    }

    pub fn values(&self, z: &[Complex64]) -> Vec<f64> {
        self.phi.iter().map(|f| f.value(z)).collect()
    }

    /// The `m × n` matrix `∂φ_j/∂z_k`.
    pub fn complex_jacobian(&self, z: &[Complex64]) -> CMatrix {
        let rows: Vec<Vec<Complex64>> = self.phi.iter().map(|f| f.dz(z)).collect();
        CMatrix::from_fn(self.codim(), self.n, |j, k| rows[j][k])
    }

    fn refs(&self) -> Vec<&dyn RealJet> {
        self.phi.iter().map(|f| f.as_ref()).collect()
    }

    /// Distance to the edge.
    pub fn distance_to_edge(&self, z: &[Complex64], opts: &DistanceOptions) -> Result<f64> {
        Ok(nearest_point(&self.refs(), z, &[], opts)?.distance)
    }
}

/// A wedge with its shrink factor `δ`; `δ = 0` is the full wedge.
#[derive(Debug, Clone)]
pub struct WedgeSpec {
    pub edge: EdgeSpec,
    pub delta: f64,
}

impl WedgeSpec {
    pub fn new(edge: EdgeSpec, delta: f64) -> Result<Self> {
        if !(delta >= 0.0) {
            return Err(Error::InvalidSpec(format!(
                "shrink factor {delta} must be >= 0"
            )));
        }
        Ok(Self { edge, delta })
    }

    /// Distance to `bW`, i.e. the smallest distance to a single level set
    /// `{φ_j = 0}` (valid for points of `W`).
    pub fn distance_to_wedge_boundary(
        &self,
        z: &[Complex64],
        opts: &DistanceOptions,
    ) -> Result<f64> {
        let mut best = f64::INFINITY;
        for f in &self.edge.phi {
            let d = nearest_point(&[f.as_ref()], z, &[], opts)?.distance;
            best = best.min(d);
        }
        Ok(best)
    }
}

pub fn in_wedge(w: &WedgeSpec, z: &[Complex64]) -> bool {
    w.edge.values(z).iter().all(|&v| v < 0.0)
}

pub fn in_shrunken(w: &WedgeSpec, z: &[Complex64]) -> bool {
    let v = w.edge.values(z);
    let total: f64 = v.iter().sum();
    v.iter().all(|&vj| vj - w.delta * (total - vj) < 0.0)
}

/// Smallest singular value of `(∂φ_j/∂z_k)`; zero when `m > n`.
pub fn genericity_margin(e: &EdgeSpec, z: &[Complex64]) -> Result<f64> {
    if z.len() != e.n {
        return Err(Error::DimensionMismatch {
            expected: e.n,
            actual: z.len(),
        });
    }
    let jac = e.complex_jacobian(z);
    if jac.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
        return Err(Error::InvalidSpec(
            "jet evaluation produced non-finite values".into(),
        ));
    }
    if e.codim() > e.n {
        return Ok(0.0);
    }
    Ok(min_singular_value(&jac))
}

#[derive(Debug, Clone, Serialize)]
pub struct ComparabilityReport {
    /// `max` over samples of `max(d_E/d_bW, d_bW/d_E)`.
    pub constant: f64,
    pub ratios: Vec<f64>,
    pub failures: Vec<(usize, String)>,
}

/// Uniform rejection sample of `W_δ ∩ {|x_k|, |y_k| ≤ radius}`.
pub fn sample_shrunken(
    w: &WedgeSpec,
    radius: f64,
    rng: &mut impl Rng,
    max_tries: usize,
) -> Option<Vec<Complex64>> {
    let n = w.edge.n;
    for _ in 0..max_tries {
        let z: Vec<Complex64> = (0..n)
            .map(|_| {
                Complex64::new(
                    radius * (2.0 * rng.gen::<f64>() - 1.0),
                    radius * (2.0 * rng.gen::<f64>() - 1.0),
                )
            })
            .collect();
        if in_shrunken(w, &z) {
            return Some(z);
        }
    }
    None
}

/// Fits the comparability constant between `dist(z, E)` and `dist(z, bW)`
/// over seeded samples of `W_δ` near the origin.
pub fn dist_comparability(
    w: &WedgeSpec,
    samples: usize,
    radius: f64,
    seed: u64,
    exec: Exec,
) -> Result<ComparabilityReport> {
    if !(w.delta > 0.0) {
        return Err(Error::Precondition(
            "comparability requires a shrunken wedge (delta > 0)".into(),
        ));
    }
    let results = map_indexed(exec, samples, |i| -> std::result::Result<f64, String> {
        let mut rng = substream(seed, i as u64);
        let z =
            sample_shrunken(w, radius, &mut rng, 100_000).ok_or("no sample found in W_delta")?;
        let opts = DistanceOptions {
            seed: seed ^ (i as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15),
            spread: radius,
            ..DistanceOptions::default()
        };
        let de = w
            .edge
            .distance_to_edge(&z, &opts)
            .map_err(|e| e.to_string())?;
        let db = w
            .distance_to_wedge_boundary(&z, &opts)
            .map_err(|e| e.to_string())?;
        if de <= 0.0 || db <= 0.0 {
            return Err("sample on the boundary".into());
        }
        Ok((de / db).max(db / de))
    });
    let mut ratios = Vec::new();
    let mut failures = Vec::new();
    for (i, r) in results.into_iter().enumerate() {
        match r {
            Ok(v) => ratios.push(v),
            Err(e) => failures.push((i, e)),
        }
    }
    let constant = ratios.iter().copied().fold(0.0, f64::max);
    Ok(ComparabilityReport {
        constant,
        ratios,
        failures,
    })
}

/// `r : ℝ²ⁿ → ℝⁿ` whose graph `x = r(x, y)` is a totally real edge.
pub trait GraphMap: Send + Sync + Debug {
    fn n(&self) -> usize;
    fn eval(&self, x: &[f64], y: &[f64]) -> Vec<f64>;
    /// `(∂r/∂x, ∂r/∂y)`, each `n × n`.
    fn jacobian(&self, x: &[f64], y: &[f64]) -> (DMatrix<f64>, DMatrix<f64>);
    /// Certified Lipschitz constant of `r` on the box `|x_k|, |y_k| ≤ 1`.
    fn lipschitz_bound(&self) -> f64;
    fn is_zero(&self) -> bool {
        false
    }
}

#[derive(Debug, Clone)]
pub struct ZeroGraph {
    pub n: usize,
}

impl GraphMap for ZeroGraph {
    fn n(&self) -> usize {
        self.n
    }
    fn eval(&self, _x: &[f64], _y: &[f64]) -> Vec<f64> {
        vec![0.0; self.n]
    }
    fn jacobian(&self, _x: &[f64], _y: &[f64]) -> (DMatrix<f64>, DMatrix<f64>) {
        (
            DMatrix::zeros(self.n, self.n),
            DMatrix::zeros(self.n, self.n),
        )
    }
    fn lipschitz_bound(&self) -> f64 {
        0.0
    }
    fn is_zero(&self) -> bool {
        true
    }
}

/// `r_j(x, y) = ε‖y‖²` for every `j`.
#[derive(Debug, Clone)]
pub struct QuadraticGraph {
    pub n: usize,
    pub epsilon: f64,
}

impl GraphMap for QuadraticGraph {
    fn n(&self) -> usize {
        self.n
    }
    fn eval(&self, _x: &[f64], y: &[f64]) -> Vec<f64> {
        let s: f64 = y.iter().map(|v| v * v).sum();
        vec![self.epsilon * s; self.n]
    }
    fn jacobian(&self, _x: &[f64], y: &[f64]) -> (DMatrix<f64>, DMatrix<f64>) {
        let dy = DMatrix::from_fn(self.n, self.n, |_, k| 2.0 * self.epsilon * y[k]);
        (DMatrix::zeros(self.n, self.n), dy)
    }
    fn lipschitz_bound(&self) -> f64 {
        // ‖∂r/∂y‖ = √n · 2ε‖y‖ ≤ 2εn on the box
        2.0 * self.epsilon.abs() * self.n as f64
    }
}

/// Polynomial components `r_j`, each a [`RealPoly`] in `(x, y)`.
#[derive(Debug, Clone)]
pub struct PolyGraph {
    pub polys: Vec<RealPoly>,
}

impl GraphMap for PolyGraph {
    fn n(&self) -> usize {
        self.polys.len()
    }
    fn eval(&self, x: &[f64], y: &[f64]) -> Vec<f64> {
        let v: Vec<f64> = x.iter().chain(y).copied().collect();
        self.polys.iter().map(|p| p.eval_real(&v)).collect()
    }
    fn jacobian(&self, x: &[f64], y: &[f64]) -> (DMatrix<f64>, DMatrix<f64>) {
        let n = self.n();
        let v: Vec<f64> = x.iter().chain(y).copied().collect();
        let g: Vec<Vec<f64>> = self.polys.iter().map(|p| p.grad_real(&v)).collect();
        (
            DMatrix::from_fn(n, n, |j, k| g[j][k]),
            DMatrix::from_fn(n, n, |j, k| g[j][n + k]),
        )
    }
    fn lipschitz_bound(&self) -> f64 {
        // Frobenius bound of the Jacobian dominates the operator norm
        self.polys
            .iter()
            .flat_map(|p| p.partial_bounds_on_unit_box())
            .map(|b| b * b)
            .sum::<f64>()
            .sqrt()
    }
}

/// Totally real edge `{x = r(x, y)}` normalised by `r(0) = 0`, `dr(0) = 0`.
#[derive(Debug, Clone)]
pub struct TotallyRealGraph {
    pub r: Arc<dyn GraphMap>,
    pub lipschitz_bound: f64,
}

impl TotallyRealGraph {
    pub fn new(r: Arc<dyn GraphMap>) -> Result<Self> {
        let n = r.n();
        let zero = vec![0.0; n];
        let v0 = r.eval(&zero, &zero);
        let (jx, jy) = r.jacobian(&zero, &zero);
        let jet0 = v0.iter().map(|v| v.abs()).fold(0.0, f64::max)
            + jx.iter()
                .chain(jy.iter())
                .map(|v| v.abs())
                .fold(0.0, f64::max);
        if jet0 > 1e-14 {
            return Err(Error::InvalidSpec(
                "graph must satisfy r(0) = 0 and dr(0) = 0".into(),
            ));
        }
        let lipschitz_bound = r.lipschitz_bound();
        Ok(Self { r, lipschitz_bound })
    }

    pub fn flat(n: usize) -> Self {
        Self {
            r: Arc::new(ZeroGraph { n }),
            lipschitz_bound: 0.0,
        }
    }

    pub fn quadratic(n: usize, epsilon: f64) -> Self {
        let g = QuadraticGraph { n, epsilon };
        Self {
            lipschitz_bound: g.lipschitz_bound(),
            r: Arc::new(g),
        }
    }

    pub fn n(&self) -> usize {
        self.r.n()
    }

    /// Point of the edge above `y`, solving `x = r(x, y)` by fixed-point iteration.
    pub fn edge_point(&self, y: &[f64]) -> Result<Vec<Complex64>> {
        let mut x = vec![0.0; self.n()];
        for _ in 0..200 {
            let next = self.r.eval(&x, y);
            let step = next
                .iter()
                .zip(&x)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max);
            x = next;
            if step < 1e-15 {
                return Ok(x
                    .iter()
                    .zip(y)
                    .map(|(a, b)| Complex64::new(*a, *b))
                    .collect());
            }
        }
        Err(Error::NoConvergence)
    }

    /// Basis (columns, in real coordinates `(ξ, η)`) of `T_pE`:
    /// `ξ = (I - ∂_x r)⁻¹ ∂_y r η`.
    pub fn tangent_basis(&self, p: &[Complex64]) -> Result<DMatrix<f64>> {
        let n = self.n();
        let x: Vec<f64> = p.iter().map(|c| c.re).collect();
        let y: Vec<f64> = p.iter().map(|c| c.im).collect();
        let (jx, jy) = self.r.jacobian(&x, &y);
        let a = DMatrix::<f64>::identity(n, n) - jx;
        let xi = a.lu().solve(&jy).ok_or(Error::Singular(0.0))?;
        let mut basis = DMatrix::zeros(2 * n, n);
        basis.view_mut((0, 0), (n, n)).copy_from(&xi);
        basis
            .view_mut((n, 0), (n, n))
            .copy_from(&DMatrix::<f64>::identity(n, n));
        Ok(basis)
    }

    /// `φ_j = x_j - r_j(x, y)`, so the wedge `{φ < 0}` lies on the side the
    /// attached discs point into.
    pub fn edge_spec(&self) -> EdgeSpec {
        let n = self.n();
        let phi = (0..n)
            .map(|j| {
                Arc::new(GraphComponent {
                    r: self.r.clone(),
                    j,
                }) as Arc<dyn RealJet>
            })
            .collect();
        EdgeSpec {
            n,
            phi,
            name: if self.r.is_zero() {
                "flat".into()
            } else {
                "graph".into()
            },
        }
    }
}

#[derive(Debug, Clone)]
struct GraphComponent {
    r: Arc<dyn GraphMap>,
    j: usize,
}

impl RealJet for GraphComponent {
    fn dim(&self) -> usize {
        self.r.n()
    }
    fn value(&self, z: &[Complex64]) -> f64 {
        let x: Vec<f64> = z.iter().map(|c| c.re).collect();
        let y: Vec<f64> = z.iter().map(|c| c.im).collect();
        x[self.j] - self.r.eval(&x, &y)[self.j]
    }
    fn real_gradient(&self, z: &[Complex64]) -> Vec<f64> {
        let n = self.r.n();
        let x: Vec<f64> = z.iter().map(|c| c.re).collect();
        let y: Vec<f64> = z.iter().map(|c| c.im).collect();
        let (jx, jy) = self.r.jacobian(&x, &y);
        let mut g: Vec<f64> = (0..n)
            .map(|k| -jx[(self.j, k)])
            .chain((0..n).map(|k| -jy[(self.j, k)]))
            .collect();
        g[self.j] += 1.0;
        g
    }
    fn dz(&self, z: &[Complex64]) -> Vec<Complex64> {
        let n = self.r.n();
        let g = self.real_gradient(z);
        (0..n)
            .map(|k| Complex64::new(g[k], -g[n + k]) * 0.5)
            .collect()
    }
}

/// JSON description of an edge.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum EdgeConfig {
    Flat {
        n: usize,
    },
    PerturbedFlat {
        n: usize,
        epsilon: f64,
    },
    TangentBundle {
        domain: DomainConfig,
        base_point: Vec<[f64; 2]>,
    },
    Polynomial {
        phi: Vec<RealPoly>,
    },
}

/// JSON description of a wedge.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WedgeConfig {
    pub edge: EdgeConfig,
    #[serde(default)]
    pub delta: f64,
}

impl EdgeConfig {
    pub fn build(&self) -> Result<EdgeSpec> {
        match self {
            EdgeConfig::Flat { n } => Ok(EdgeSpec::flat(*n)),
            EdgeConfig::PerturbedFlat { n, epsilon } => {
                let mut e = TotallyRealGraph::quadratic(*n, *epsilon).edge_spec();
                e.name = "perturbed-flat".into();
                Ok(e)
            }
            EdgeConfig::TangentBundle { domain, base_point } => {
                let d = DomainSpec::from_config(domain)?;
                let p: Vec<Complex64> = base_point
                    .iter()
                    .map(|[a, b]| Complex64::new(*a, *b))
                    .collect();
                d.tangent_bundle_edge(&p)
            }
            EdgeConfig::Polynomial { phi } => EdgeSpec::from_polys(phi.clone()),
        }
    }
}

impl WedgeConfig {
    pub fn build(&self) -> Result<WedgeSpec> {
        WedgeSpec::new(self.edge.build()?, self.delta)
    }
}
