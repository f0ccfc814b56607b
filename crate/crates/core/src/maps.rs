//! Holomorphic model maps with first-order jets, and the lift
//! `F(z, P) = (f(z), df(z)P)` to hyperplanes.

use std::fmt::Debug;
use std::sync::Arc;

use num_complex::Complex64;

use crate::domains::{DomainSpec, Hyperplane};
use crate::error::{Error, Result};
use crate::jet::CMatrix;
use crate::linalg::{cmat_mul_vec, hermitian_dot, min_singular_value};

/// A map `ℂⁿ → ℂᵐ` that can be evaluated pointwise.
pub trait PointMap: Send + Sync + Debug {
    fn source_dim(&self) -> usize;
    fn target_dim(&self) -> usize;
    fn eval(&self, z: &[Complex64]) -> Vec<Complex64>;
}

/// A holomorphic map with its complex Jacobian `∂f_j/∂z_k`.
pub trait HolomorphicMap: PointMap {
    fn jacobian(&self, z: &[Complex64]) -> CMatrix;
}

#[derive(Debug, Clone)]
pub struct Identity {
    pub n: usize,
}

impl PointMap for Identity {
    fn source_dim(&self) -> usize {
        self.n
    }
    fn target_dim(&self) -> usize {
        self.n
    }
    fn eval(&self, z: &[Complex64]) -> Vec<Complex64> {
        z.to_vec()
    }
}

impl HolomorphicMap for Identity {
    fn jacobian(&self, _z: &[Complex64]) -> CMatrix {
        CMatrix::identity(self.n, self.n)
    }
}

/// `z ↦ Az`.
#[derive(Debug, Clone)]
pub struct Linear {
    pub a: CMatrix,
}

impl Linear {
    /// Requires `A*A = I` to `1e-12`.
    pub fn unitary(a: CMatrix) -> Result<Self> {
        let n = a.nrows();
        let defect = (a.adjoint() * &a - CMatrix::identity(n, n))
            .iter()
            .map(|c| c.norm())
            .fold(0.0, f64::max);
        if a.ncols() != n || defect > 1e-12 {
            return Err(Error::InvalidSpec(format!(
                "matrix is not unitary (defect {defect:e})"
            )));
        }
        Ok(Self { a })
    }

    /// Unitary built from Givens rotations and phases; deterministic in the angles.
    pub fn rotation(n: usize, angles: &[f64]) -> Self {
        let mut u = CMatrix::identity(n, n);
        let mut it = angles.iter().copied().cycle();
        for j in 0..n {
            let ph = Complex64::from_polar(1.0, it.next().unwrap_or(0.0));
            for r in 0..n {
                u[(r, j)] *= ph;
            }
        }
        for j in 0..n.saturating_sub(1) {
            let t = it.next().unwrap_or(0.0);
            let mut g = CMatrix::identity(n, n);
            g[(j, j)] = Complex64::new(t.cos(), 0.0);
            g[(j, j + 1)] = Complex64::new(-t.sin(), 0.0);
            g[(j + 1, j)] = Complex64::new(t.sin(), 0.0);
            g[(j + 1, j + 1)] = Complex64::new(t.cos(), 0.0);
            u = g * u;
        }
        Self { a: u }
    }
}

impl PointMap for Linear {
    fn source_dim(&self) -> usize {
        self.a.ncols()
    }
    fn target_dim(&self) -> usize {
        self.a.nrows()
    }
    fn eval(&self, z: &[Complex64]) -> Vec<Complex64> {
        cmat_mul_vec(&self.a, z)
    }
}

impl HolomorphicMap for Linear {
    fn jacobian(&self, _z: &[Complex64]) -> CMatrix {
        self.a.clone()
    }
}

/// Involutive ball automorphism `φ_a(z) = (a - P_a z - s_a Q_a z)/(1 - ⟨z, a⟩)`
/// with `s_a = sqrt(1 - |a|²)`, exchanging `0` and `a`.
#[derive(Debug, Clone)]
pub struct BallAutomorphism {
    pub a: Vec<Complex64>,
    l: CMatrix,
}

impl BallAutomorphism {
    pub fn new(a: Vec<Complex64>) -> Result<Self> {
        let n = a.len();
        let a2: f64 = a.iter().map(|c| c.norm_sqr()).sum();
        if !(a2 < 1.0) {
            return Err(Error::InvalidSpec(
                "automorphism centre must lie in the ball".into(),
            ));
        }
        let s = (1.0 - a2).sqrt();
        let mut l = CMatrix::identity(n, n) * Complex64::new(s, 0.0);
        if a2 > 0.0 {
            for j in 0..n {
                for k in 0..n {
                    l[(j, k)] += a[j] * a[k].conj() * ((1.0 - s) / a2);
                }
            }
        }
        Ok(Self { a, l })
    }

    fn parts(&self, z: &[Complex64]) -> (Vec<Complex64>, Complex64) {
        let lz = cmat_mul_vec(&self.l, z);
        let num = self.a.iter().zip(&lz).map(|(a, b)| a - b).collect();
        let den = Complex64::new(1.0, 0.0) - hermitian_dot(z, &self.a);
        (num, den)
    }
}

impl PointMap for BallAutomorphism {
    fn source_dim(&self) -> usize {
        self.a.len()
    }
    fn target_dim(&self) -> usize {
        self.a.len()
    }
    fn eval(&self, z: &[Complex64]) -> Vec<Complex64> {
        let (num, den) = self.parts(z);
        num.iter().map(|v| v / den).collect()
    }
}

impl HolomorphicMap for BallAutomorphism {
    fn jacobian(&self, z: &[Complex64]) -> CMatrix {
        let n = self.a.len();
        let (num, den) = self.parts(z);
        CMatrix::from_fn(n, n, |j, k| {
            -self.l[(j, k)] / den + num[j] * self.a[k].conj() / (den * den)
        })
    }
}

/// `ζ ↦ ζᵏ` on `ℂ`.
#[derive(Debug, Clone)]
pub struct Power {
    pub k: u32,
}

impl PointMap for Power {
    fn source_dim(&self) -> usize {
        1
    }
    fn target_dim(&self) -> usize {
        1
    }
    fn eval(&self, z: &[Complex64]) -> Vec<Complex64> {
        vec![z[0].powu(self.k)]
    }
}

impl HolomorphicMap for Power {
    fn jacobian(&self, z: &[Complex64]) -> CMatrix {
        let d = if self.k == 0 {
            Complex64::new(0.0, 0.0)
        } else {
            z[0].powu(self.k - 1) * self.k as f64
        };
        CMatrix::from_element(1, 1, d)
    }
}

/// `z ↦ sz`.
#[derive(Debug, Clone)]
pub struct Scale {
    pub n: usize,
    pub s: Complex64,
}

impl PointMap for Scale {
    fn source_dim(&self) -> usize {
        self.n
    }
    fn target_dim(&self) -> usize {
        self.n
    }
    fn eval(&self, z: &[Complex64]) -> Vec<Complex64> {
        z.iter().map(|v| v * self.s).collect()
    }
}

impl HolomorphicMap for Scale {
    fn jacobian(&self, _z: &[Complex64]) -> CMatrix {
        CMatrix::identity(self.n, self.n) * self.s
    }
}

#[derive(Debug, Clone)]
pub struct Constant {
    pub n: usize,
    pub value: Vec<Complex64>,
}

impl PointMap for Constant {
    fn source_dim(&self) -> usize {
        self.n
    }
    fn target_dim(&self) -> usize {
        self.value.len()
    }
    fn eval(&self, _z: &[Complex64]) -> Vec<Complex64> {
        self.value.clone()
    }
}

impl HolomorphicMap for Constant {
    fn jacobian(&self, _z: &[Complex64]) -> CMatrix {
        CMatrix::zeros(self.value.len(), self.n)
    }
}

/// `outer ∘ inner`.
#[derive(Debug, Clone)]
pub struct Compose {
    pub outer: Arc<dyn HolomorphicMap>,
    pub inner: Arc<dyn HolomorphicMap>,
}

impl PointMap for Compose {
    fn source_dim(&self) -> usize {
        self.inner.source_dim()
    }
    fn target_dim(&self) -> usize {
        self.outer.target_dim()
    }
    fn eval(&self, z: &[Complex64]) -> Vec<Complex64> {
        self.outer.eval(&self.inner.eval(z))
    }
}

impl HolomorphicMap for Compose {
    fn jacobian(&self, z: &[Complex64]) -> CMatrix {
        self.outer.jacobian(&self.inner.eval(z)) * self.inner.jacobian(z)
    }
}

/// Radial warp `z ↦ z/|z| · (1 - sqrt(1 - |z|))` of the closed ball. Not
/// holomorphic; Hölder-1/2 at the sphere, used as a control for fitters.
#[derive(Debug, Clone)]
pub struct SqrtWarp {
    pub n: usize,
}

impl PointMap for SqrtWarp {
    fn source_dim(&self) -> usize {
        self.n
    }
    fn target_dim(&self) -> usize {
        self.n
    }
    fn eval(&self, z: &[Complex64]) -> Vec<Complex64> {
        let r = z.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        if r == 0.0 {
            return z.to_vec();
        }
        let g = 1.0 - (1.0 - r.min(1.0)).sqrt();
        z.iter().map(|c| c * (g / r)).collect()
    }
}

/// Radial warp `z ↦ z/|z| · (1 - (1 - |z|)^α)`, Hölder-α at the sphere.
#[derive(Debug, Clone)]
pub struct RadialWarp {
    pub n: usize,
    pub alpha: f64,
}

impl PointMap for RadialWarp {
    fn source_dim(&self) -> usize {
        self.n
    }
    fn target_dim(&self) -> usize {
        self.n
    }
    fn eval(&self, z: &[Complex64]) -> Vec<Complex64> {
        let r = z.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        if r == 0.0 {
            return z.to_vec();
        }
        let g = 1.0 - (1.0 - r.min(1.0)).powf(self.alpha);
        z.iter().map(|c| c * (g / r)).collect()
    }
}

/// Largest deviation between the Jacobian and central differences of `f`
/// in the `x_k` and `y_k` directions (`∂f/∂y_k = i ∂f/∂z_k` for holomorphic f).
pub fn cr_residual(f: &dyn HolomorphicMap, z: &[Complex64]) -> f64 {
    let h = 1e-5;
    let j = f.jacobian(z);
    let mut worst: f64 = 0.0;
    for k in 0..f.source_dim() {
        for dir in [Complex64::new(1.0, 0.0), Complex64::new(0.0, 1.0)] {
            let mut up = z.to_vec();
            let mut dn = z.to_vec();
            up[k] += dir * h;
            dn[k] -= dir * h;
            let fu = f.eval(&up);
            let fd = f.eval(&dn);
            for r in 0..f.target_dim() {
                let fdiff = (fu[r] - fd[r]) / (2.0 * h);
                worst = worst.max((fdiff - j[(r, k)] * dir).norm());
            }
        }
    }
    worst
}

/// A holomorphic map between two model domains, with sanity-checked jets.
#[derive(Debug, Clone)]
pub struct MapUnderTest {
    pub map: Arc<dyn HolomorphicMap>,
    pub source: DomainSpec,
    pub target: DomainSpec,
}

impl MapUnderTest {
    /// Checks dimensions and that the Cauchy–Riemann residual is at most
    /// `1e-8` on interior probes `r·p`, `p` on `bΩ₁`, `r ∈ {0, 0.5, 0.9}`.
    pub fn new(
        map: Arc<dyn HolomorphicMap>,
        source: DomainSpec,
        target: DomainSpec,
    ) -> Result<Self> {
        if map.source_dim() != source.n || map.target_dim() != target.n {
            return Err(Error::DimensionMismatch {
                expected: source.n,
                actual: map.source_dim(),
            });
        }
        let boundary = source.boundary_samples(6, 0x1234, crate::exec::Exec::Sequential)?;
        for p in &boundary {
            for r in [0.0, 0.5, 0.9] {
                let z: Vec<Complex64> = p.iter().map(|c| c * r).collect();
                let res = cr_residual(map.as_ref(), &z);
                if !(res <= 1e-8) {
                    return Err(Error::Hypothesis {
                        reason: format!("Cauchy-Riemann residual {res:e} exceeds 1e-8"),
                        witnesses: vec![crate::jet::to_real(&z)],
                    });
                }
            }
        }
        Ok(Self {
            map,
            source,
            target,
        })
    }

    pub fn eval(&self, z: &[Complex64]) -> Vec<Complex64> {
        self.map.eval(z)
    }

    pub fn jacobian(&self, z: &[Complex64]) -> CMatrix {
        self.map.jacobian(z)
    }
}

/// `F(z, P) = (f(z), df(z)P)`. The coefficient vector transforms by the
/// inverse transpose: `df(z)(ker aᵀ) = ker (df⁻ᵀ a)ᵀ`.
pub fn lift_map(
    m: &MapUnderTest,
    z: &[Complex64],
    p: &Hyperplane,
) -> Result<(Vec<Complex64>, Hyperplane)> {
    let j = m.jacobian(z);
    if j.nrows() != j.ncols() || j.nrows() != p.dim() {
        return Err(Error::DimensionMismatch {
            expected: p.dim(),
            actual: j.nrows(),
        });
    }
    let smin = min_singular_value(&j);
    if smin < 1e-12 {
        return Err(Error::Singular(smin));
    }
    let jt = j.transpose();
    let b = jt
        .lu()
        .solve(&nalgebra::DVector::from_column_slice(&p.normal))
        .ok_or(Error::Singular(smin))?;
    let image = Hyperplane::new(b.as_slice())?;
    Ok((m.eval(z), image))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domains::holomorphic_tangent;
    use crate::exec::{substream, Exec};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn ball_map(f: Arc<dyn HolomorphicMap>, n: usize) -> MapUnderTest {
        MapUnderTest::new(f, DomainSpec::ball(n), DomainSpec::ball(n)).unwrap()
    }

    #[test]
    fn automorphism_swaps_zero_and_a() {
        let a = vec![c(0.3, 0.1), c(-0.2, 0.4)];
        let f = BallAutomorphism::new(a.clone()).unwrap();
        let fa = f.eval(&a);
        assert!(fa.iter().all(|v| v.norm() < 1e-15));
        let f0 = f.eval(&[c(0.0, 0.0), c(0.0, 0.0)]);
        assert!(f0.iter().zip(&a).all(|(x, y)| (x - y).norm() < 1e-15));
        let z = vec![c(0.1, -0.5), c(0.2, 0.2)];
        let back = f.eval(&f.eval(&z));
        assert!(back.iter().zip(&z).all(|(x, y)| (x - y).norm() < 1e-14));
    }

    #[test]
    fn automorphism_preserves_sphere() {
        let f = BallAutomorphism::new(vec![c(0.5, 0.0), c(0.0, 0.2)]).unwrap();
        let d = DomainSpec::ball(2);
        for p in d.boundary_samples(20, 1, Exec::Sequential).unwrap() {
            let q = f.eval(&p);
            assert!(d.value(&q).abs() < 1e-12);
        }
    }

    #[test]
    fn jets_pass_cauchy_riemann() {
        let f = BallAutomorphism::new(vec![c(0.5, 0.0), c(0.0, 0.0)]).unwrap();
        assert!(cr_residual(&f, &[c(0.2, 0.3), c(-0.1, 0.4)]) < 1e-8);
        let comp = Compose {
            outer: Arc::new(f.clone()),
            inner: Arc::new(Linear::rotation(2, &[0.3, 1.1, 0.7])),
        };
        assert!(cr_residual(&comp, &[c(0.2, 0.3), c(-0.1, 0.4)]) < 1e-8);
    }

    #[test]
    fn wrong_jet_rejected() {
        #[derive(Debug)]
        struct Conj;
        impl PointMap for Conj {
            fn source_dim(&self) -> usize {
                1
            }
            fn target_dim(&self) -> usize {
                1
            }
            fn eval(&self, z: &[Complex64]) -> Vec<Complex64> {
                vec![z[0].conj()]
            }
        }
        impl HolomorphicMap for Conj {
            fn jacobian(&self, _z: &[Complex64]) -> CMatrix {
                CMatrix::from_element(1, 1, c(1.0, 0.0))
            }
        }
        assert!(
            MapUnderTest::new(Arc::new(Conj), DomainSpec::ball(1), DomainSpec::ball(1)).is_err()
        );
    }

    #[test]
    fn lift_of_identity_and_unitary() {
        let d = DomainSpec::ball(2);
        let p = vec![c(0.6, 0.0), c(0.0, 0.8)];
        let h = holomorphic_tangent(&d, &p).unwrap();
        let id = ball_map(Arc::new(Identity { n: 2 }), 2);
        let (q, h2) = lift_map(&id, &p, &h).unwrap();
        assert_eq!(q, p);
        assert!(h.distance(&h2) < 1e-12);
        let u = Linear::rotation(2, &[0.4, -1.0, 0.9]);
        let um = ball_map(Arc::new(u.clone()), 2);
        let (q, h3) = lift_map(&um, &p, &h).unwrap();
        // the image of a hyperplane under U has normal coefficients ū·a
        let expect = Hyperplane::new(&cmat_mul_vec(&u.a.map(|v| v.conj()), &h.normal)).unwrap();
        assert!(h3.distance(&expect) < 1e-12);
        assert!(h3.distance(&holomorphic_tangent(&d, &q).unwrap()) < 1e-12);
    }

    #[test]
    fn lift_preserves_tangent_bundle_for_automorphisms() {
        let d = DomainSpec::ball(3);
        let f = ball_map(
            Arc::new(BallAutomorphism::new(vec![c(0.5, 0.1), c(0.0, -0.3), c(0.2, 0.0)]).unwrap()),
            3,
        );
        let mut rng = substream(5, 0);
        for _ in 0..20 {
            let p = d.boundary_sample(&mut rng).unwrap();
            let (q, h) = lift_map(&f, &p, &holomorphic_tangent(&d, &p).unwrap()).unwrap();
            let gap = h.distance(&holomorphic_tangent(&d, &q).unwrap());
            assert!(gap < 1e-8, "gap {gap:e} rho {:e}", d.value(&p));
        }
    }

    #[test]
    fn singular_lift_rejected() {
        let f = MapUnderTest::new(
            Arc::new(Power { k: 2 }),
            DomainSpec::ball(1),
            DomainSpec::ball(1),
        )
        .unwrap();
        let h = Hyperplane::new(&[c(1.0, 0.0)]).unwrap();
        assert!(matches!(
            lift_map(&f, &[c(0.0, 0.0)], &h),
            Err(Error::Singular(_))
        ));
    }

    #[test]
    fn sqrt_warp_profile() {
        let w = SqrtWarp { n: 2 };
        let z = [c(0.75, 0.0), c(0.0, 0.0)];
        assert!((w.eval(&z)[0].re - 0.5).abs() < 1e-15);
    }
}
