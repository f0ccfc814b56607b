//! Calculus on the unit circle: the conjugate-function (Hilbert) transform,
//! harmonic extension into the disc, and holomorphic completion of real
//! boundary data.
//!
//! Everything works on a uniform grid `θ_k = 2πk/N`. The Hilbert transform is
//! the Fourier multiplier `-i·sgn(k)` with the mean and the Nyquist mode
//! removed, so `u + iT(u)` is the trace of a holomorphic function whose
//! imaginary part vanishes at the centre.

use std::cell::RefCell;
use std::f64::consts::PI;

use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Closest admissible distance to the unit circle for interior evaluation.
pub const BOUNDARY_CUTOFF: f64 = 1e-12;

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

fn fft_in_place(buf: &mut [Complex64], inverse: bool) {
    PLANNER.with(|p| {
        let mut p = p.borrow_mut();
        let plan = if inverse {
            p.plan_fft_inverse(buf.len())
        } else {
            p.plan_fft_forward(buf.len())
        };
        plan.process(buf);
    });
}

/// Normalised Fourier coefficients `c_k = (1/N) Σ_j u_j e^{-ikθ_j}` in FFT order.
fn forward(samples: &[Complex64]) -> Vec<Complex64> {
    let mut buf = samples.to_vec();
    fft_in_place(&mut buf, false);
    let scale = 1.0 / samples.len() as f64;
    buf.iter_mut().for_each(|c| *c *= scale);
    buf
}

fn inverse(coeffs: &[Complex64]) -> Vec<Complex64> {
    let mut buf = coeffs.to_vec();
    fft_in_place(&mut buf, true);
    buf
}

fn check_len(n: usize) -> Result<()> {
    if n < 4 || n % 2 != 0 {
        Err(Error::InvalidSampleCount(n))
    } else {
        Ok(())
    }
}

/// Uniform samples of a (real or complex) function on the unit circle.
#[derive(Debug, Clone, PartialEq)]
pub struct CircleFunction {
    samples: Vec<Complex64>,
}

impl CircleFunction {
    pub fn new(samples: Vec<Complex64>) -> Result<Self> {
        check_len(samples.len())?;
        Ok(Self { samples })
    }

    pub fn from_real(values: Vec<f64>) -> Result<Self> {
        Self::new(values.into_iter().map(|v| Complex64::new(v, 0.0)).collect())
    }

    pub fn from_fn_real(n: usize, f: impl Fn(f64) -> f64) -> Result<Self> {
        check_len(n)?;
        Self::from_real((0..n).map(|k| f(grid_angle(k, n))).collect())
    }

    pub fn from_fn(n: usize, f: impl Fn(f64) -> Complex64) -> Result<Self> {
        check_len(n)?;
        Self::new((0..n).map(|k| f(grid_angle(k, n))).collect())
    }

    pub fn zeros(n: usize) -> Result<Self> {
        Self::from_real(vec![0.0; n])
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn samples(&self) -> &[Complex64] {
        &self.samples
    }

    pub fn angle(&self, k: usize) -> f64 {
        grid_angle(k, self.len())
    }

    pub fn is_real(&self) -> bool {
        self.samples.iter().all(|s| s.im == 0.0)
    }

    pub fn real_parts(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.re).collect()
    }

    pub fn imag_parts(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.im).collect()
    }

    pub fn mean(&self) -> Complex64 {
        self.samples.iter().sum::<Complex64>() / self.len() as f64
    }

    pub fn sup_norm(&self) -> f64 {
        self.samples.iter().map(|s| s.norm()).fold(0.0, f64::max)
    }

    /// Normalised Fourier coefficients in FFT order (index `k` ↔ frequency
    /// `k` for `k < N/2`, `k - N` above, `N/2` is the Nyquist mode).
    pub fn fourier(&self) -> Vec<Complex64> {
        forward(&self.samples)
    }

    pub fn scale(&self, a: f64) -> Self {
        Self {
            samples: self.samples.iter().map(|s| s * a).collect(),
        }
    }

    /// `a·self + b·other`.
    pub fn combine(&self, a: f64, other: &Self, b: f64) -> Result<Self> {
        if other.len() != self.len() {
            return Err(Error::DimensionMismatch {
                expected: self.len(),
                actual: other.len(),
            });
        }
        Ok(Self {
            samples: self
                .samples
                .iter()
                .zip(&other.samples)
                .map(|(x, y)| x * a + y * b)
                .collect(),
        })
    }

    fn require_real(&self) -> Result<()> {
        let max_imag = self.samples.iter().map(|s| s.im.abs()).fold(0.0, f64::max);
        if max_imag != 0.0 {
            return Err(Error::NotReal { max_imag });
        }
        Ok(())
    }
}

pub fn grid_angle(k: usize, n: usize) -> f64 {
    2.0 * PI * k as f64 / n as f64
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum SampleRepr {
    Real(f64),
    Complex([f64; 2]),
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CircleRepr {
    n: usize,
    samples: Vec<SampleRepr>,
}

impl Serialize for CircleFunction {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let real = self.is_real();
        let samples = self
            .samples
            .iter()
            .map(|c| {
                if real {
                    SampleRepr::Real(c.re)
                } else {
                    SampleRepr::Complex([c.re, c.im])
                }
            })
            .collect();
        CircleRepr {
            n: self.len(),
            samples,
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for CircleFunction {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let repr = CircleRepr::deserialize(d)?;
        if repr.n != repr.samples.len() {
            return Err(serde::de::Error::custom(format!(
                "n = {} but {} samples given",
                repr.n,
                repr.samples.len()
            )));
        }
        let samples = repr
            .samples
            .into_iter()
            .map(|s| match s {
                SampleRepr::Real(x) => Complex64::new(x, 0.0),
                SampleRepr::Complex([re, im]) => Complex64::new(re, im),
            })
            .collect();
        CircleFunction::new(samples).map_err(serde::de::Error::custom)
    }
}

/// Conjugate-function transform of real boundary data.
///
/// `(Tu)ˆ(k) = -i·sgn(k)·û(k)`, `(Tu)ˆ(0) = 0`, Nyquist mode dropped.
/// `T(cos) = sin`, `T(sin) = -cos`.
pub fn hilbert_transform(u: &CircleFunction) -> Result<CircleFunction> {
    u.require_real()?;
    let n = u.len();
    let mut c = u.fourier();
    let half = n / 2;
    c[0] = Complex64::new(0.0, 0.0);
    c[half] = Complex64::new(0.0, 0.0);
    let minus_i = Complex64::new(0.0, -1.0);
    for (k, ck) in c.iter_mut().enumerate().skip(1) {
        if k < half {
            *ck *= minus_i;
        } else if k > half {
            *ck *= -minus_i;
        }
    }
    let out = inverse(&c);
    CircleFunction::from_real(out.into_iter().map(|z| z.re).collect())
}

/// Evaluates the harmonic extension from precomputed FFT-order coefficients.
/// Valid on the closed disc.
fn harmonic_from_coeffs(c: &[Complex64], zeta: Complex64) -> Complex64 {
    let n = c.len();
    let half = n / 2;
    let mut pos = Complex64::new(0.0, 0.0);
    for k in (0..half).rev() {
        pos = pos * zeta + c[k];
    }
    let zb = zeta.conj();
    let mut neg = Complex64::new(0.0, 0.0);
    for k in (1..half).rev() {
        neg = neg * zb + c[n - k];
    }
    neg *= zb;
    let nyq = c[half] * zeta.powu(half as u32).re;
    pos + neg + nyq
}

/// `(∂/∂ζ, ∂/∂ζ̄)` of the harmonic extension.
fn harmonic_derivatives(c: &[Complex64], zeta: Complex64) -> (Complex64, Complex64) {
    let n = c.len();
    let half = n / 2;
    let mut dz = Complex64::new(0.0, 0.0);
    for k in (1..half).rev() {
        dz = dz * zeta + c[k] * k as f64;
    }
    let zb = zeta.conj();
    let mut dzb = Complex64::new(0.0, 0.0);
    for k in (1..half).rev() {
        dzb = dzb * zb + c[n - k] * k as f64;
    }
    let m = half as f64 / 2.0;
    dz += c[half] * m * zeta.powu(half as u32 - 1);
    dzb += c[half] * m * zb.powu(half as u32 - 1);
    (dz, dzb)
}

fn check_interior(zeta: Complex64) -> Result<()> {
    let r = zeta.norm();
    if !(r <= 1.0 - BOUNDARY_CUTOFF) {
        return Err(Error::TooCloseToBoundary { modulus: r });
    }
    Ok(())
}

/// Poisson (harmonic) extension of `u` evaluated at an interior point.
///
/// The trapezoid rule is applied with the band-limited discrete Poisson
/// kernel, which reproduces the extension of the trigonometric interpolant
/// of the samples exactly.
pub fn poisson_extend(u: &CircleFunction, zeta: Complex64) -> Result<Complex64> {
    check_interior(zeta)?;
    Ok(harmonic_from_coeffs(&u.fourier(), zeta))
}

/// Continuous Poisson kernel `K_P(ζ, t) = (1/2π)(1 - |ζ|²)/|e^{it} - ζ|²`.
pub fn poisson_kernel(zeta: Complex64, t: f64) -> f64 {
    let w = Complex64::from_polar(1.0, t) - zeta;
    (1.0 - zeta.norm_sqr()) / (2.0 * PI * w.norm_sqr())
}

/// Trapezoid quadrature of the continuous Poisson kernel against the samples.
/// Accurate away from the circle; used as an independent route to
/// [`poisson_extend`].
pub fn poisson_quadrature(u: &CircleFunction, zeta: Complex64) -> Result<Complex64> {
    check_interior(zeta)?;
    let n = u.len();
    let w = 2.0 * PI / n as f64;
    Ok(u.samples()
        .iter()
        .enumerate()
        .map(|(k, s)| s * (poisson_kernel(zeta, grid_angle(k, n)) * w))
        .sum())
}

/// Checks `K_P(ζ,t) ≤ (1/π)(1 - |ζ|)/|e^{it} - ζ|²` for `|arg ζ| ≤ τ/2`,
/// `|t| > τ`, `|ζ| < 1`.
pub fn poisson_kernel_bound_check(zeta: Complex64, t: f64, tau: f64) -> Result<bool> {
    let r = zeta.norm();
    if r >= 1.0 {
        return Err(Error::Precondition(format!("|zeta| = {r} must be < 1")));
    }
    if !(tau > 0.0 && tau < PI) {
        return Err(Error::Precondition(format!(
            "tau = {tau} must lie in (0, pi)"
        )));
    }
    let arg = if r == 0.0 { 0.0 } else { zeta.arg() };
    if arg.abs() > tau / 2.0 {
        return Err(Error::Precondition(format!(
            "|arg zeta| = {} exceeds tau/2",
            arg.abs()
        )));
    }
    let t_wrapped = (t + PI).rem_euclid(2.0 * PI) - PI;
    let t_abs = if t_wrapped == -PI {
        PI
    } else {
        t_wrapped.abs()
    };
    if t_abs <= tau {
        return Err(Error::Precondition(format!(
            "|t| = {t_abs} must exceed tau = {tau}"
        )));
    }
    let w = Complex64::from_polar(1.0, t) - zeta;
    let bound = (1.0 - r) / (PI * w.norm_sqr());
    Ok(poisson_kernel(zeta, t) <= bound)
}

/// A map of the closed unit disc into `ℂⁿ` given by boundary samples; interior
/// values are the harmonic extension of each component.
#[derive(Debug, Clone)]
pub struct AnalyticDisc {
    coeffs: Vec<Vec<Complex64>>,
    samples: Vec<CircleFunction>,
}

impl AnalyticDisc {
    /// Builds a disc from complex boundary samples, one circle function per
    /// coordinate.
    pub fn from_boundary(components: &[CircleFunction]) -> Result<Self> {
        let first = components
            .first()
            .ok_or_else(|| Error::InvalidSpec("disc needs at least one component".into()))?;
        for c in components {
            if c.len() != first.len() {
                return Err(Error::DimensionMismatch {
                    expected: first.len(),
                    actual: c.len(),
                });
            }
        }
        Ok(Self {
            coeffs: components.iter().map(|c| c.fourier()).collect(),
            samples: components.to_vec(),
        })
    }

    pub fn dimension(&self) -> usize {
        self.coeffs.len()
    }

    pub fn sample_count(&self) -> usize {
        self.coeffs[0].len()
    }

    /// Boundary samples the disc was built from.
    pub fn boundary(&self) -> &[CircleFunction] {
        &self.samples
    }

    /// Value at `ζ` with `|ζ| ≤ 1` (the band-limited extension is defined up to
    /// and including the circle).
    pub fn evaluate(&self, zeta: Complex64) -> Result<Vec<Complex64>> {
        if zeta.norm() > 1.0 + 1e-14 {
            return Err(Error::Precondition(format!("|zeta| = {} > 1", zeta.norm())));
        }
        Ok(self
            .coeffs
            .iter()
            .map(|c| harmonic_from_coeffs(c, zeta))
            .collect())
    }

    pub fn boundary_value(&self, theta: f64) -> Vec<Complex64> {
        let z = Complex64::from_polar(1.0, theta);
        self.coeffs
            .iter()
            .map(|c| harmonic_from_coeffs(c, z))
            .collect()
    }

    pub fn center(&self) -> Vec<Complex64> {
        self.coeffs.iter().map(|c| c[0]).collect()
    }

    /// Complex derivative `∂h/∂ζ` at `ζ`.
    pub fn derivative(&self, zeta: Complex64) -> Vec<Complex64> {
        self.coeffs
            .iter()
            .map(|c| harmonic_derivatives(c, zeta).0)
            .collect()
    }

    /// `∂h/∂ζ̄` at `ζ`; vanishes for holomorphic discs.
    pub fn antiholomorphic_derivative(&self, zeta: Complex64) -> Vec<Complex64> {
        self.coeffs
            .iter()
            .map(|c| harmonic_derivatives(c, zeta).1)
            .collect()
    }

    /// `∂h/∂r` on the unit circle at angle `θ`.
    pub fn radial_derivative(&self, theta: f64) -> Vec<Complex64> {
        self.coeffs
            .iter()
            .map(|c| {
                let n = c.len();
                let half = n / 2;
                let mut acc = Complex64::new(0.0, 0.0);
                for k in 1..half {
                    let kf = k as f64;
                    acc += c[k] * Complex64::from_polar(kf, kf * theta);
                    acc += c[n - k] * Complex64::from_polar(kf, -kf * theta);
                }
                acc + c[half] * (half as f64 * (half as f64 * theta).cos())
            })
            .collect()
    }

    /// Largest `|∂h/∂ζ̄|` over a polar grid of the disc of radius `radius`.
    pub fn cr_residual(&self, radius: f64, rings: usize, spokes: usize) -> f64 {
        let mut worst: f64 = 0.0;
        for i in 0..=rings {
            let r = radius * i as f64 / rings.max(1) as f64;
            for j in 0..spokes {
                let z = Complex64::from_polar(r, grid_angle(j, spokes));
                for d in self.antiholomorphic_derivative(z) {
                    worst = worst.max(d.norm());
                }
            }
        }
        worst
    }
}

/// Holomorphic completion of real vector boundary data: the disc whose trace
/// is `u_j + i(T(u_j) + c_j)` in each coordinate.
pub fn analytic_completion(u: &[CircleFunction], c: &[f64]) -> Result<AnalyticDisc> {
    if u.len() != c.len() {
        return Err(Error::DimensionMismatch {
            expected: u.len(),
            actual: c.len(),
        });
    }
    let mut comps = Vec::with_capacity(u.len());
    for (uj, &cj) in u.iter().zip(c) {
        let tu = hilbert_transform(uj)?;
        let samples = uj
            .samples()
            .iter()
            .zip(tu.samples())
            .map(|(a, b)| Complex64::new(a.re, b.re + cj))
            .collect();
        comps.push(CircleFunction::new(samples)?);
    }
    AnalyticDisc::from_boundary(&comps)
}
