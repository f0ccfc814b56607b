//! Euclidean distance from a point to the common zero set of real functions,
//! by multistart projected iteration on the optimality system
//! `p = z - Jᵀλ`, `g(p) = 0`.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;

use crate::error::{Error, Result};
use crate::exec::substream;
use crate::jet::{from_real, to_real, RealJet};
use crate::linalg::solve_real;

#[derive(Debug, Clone, Copy)]
pub struct DistanceOptions {
    pub starts: usize,
    pub tol: f64,
    pub max_iter: usize,
    /// Scale of the random perturbation applied to the extra starts.
    pub spread: f64,
    pub seed: u64,
}

impl Default for DistanceOptions {
    fn default() -> Self {
        Self {
            starts: 8,
            tol: 1e-10,
            max_iter: 200,
            spread: 0.1,
            seed: 0x5eed,
        }
    }
}

#[derive(Debug, Clone)]
pub struct NearestPoint {
    pub point: Vec<Complex64>,
    pub distance: f64,
    pub converged_starts: usize,
}

fn project_from(
    funcs: &[&dyn RealJet],
    target: &[f64],
    start: Vec<f64>,
    opts: &DistanceOptions,
) -> Option<Vec<f64>> {
    let dim = target.len();
    let k = funcs.len();
    let mut p = start;
    for _ in 0..opts.max_iter {
        let z = from_real(&p);
        let g: Vec<f64> = funcs.iter().map(|f| f.value(&z)).collect();
        let rows: Vec<Vec<f64>> = funcs.iter().map(|f| f.real_gradient(&z)).collect();
        let jac = DMatrix::from_fn(k, dim, |i, j| rows[i][j]);
        let jjt = &jac * jac.transpose();
        let rhs: Vec<f64> = (0..k)
            .map(|i| {
                g[i] + (0..dim)
                    .map(|j| rows[i][j] * (target[j] - p[j]))
                    .sum::<f64>()
            })
            .collect();
        let lambda = solve_real(jjt, &rhs)?;
        let next: Vec<f64> = (0..dim)
            .map(|j| target[j] - (0..k).map(|i| rows[i][j] * lambda[i]).sum::<f64>())
            .collect();
        let step = next
            .iter()
            .zip(&p)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt();
        if !step.is_finite() {
            return None;
        }
        p = next;
        if step < opts.tol {
            let z = from_real(&p);
            let gmax = funcs.iter().map(|f| f.value(&z).abs()).fold(0.0, f64::max);
            if gmax < opts.tol.max(1e-12) * 10.0 {
                return Some(p);
            }
        }
    }
    None
}

/// Distance from `z` to `{f_1 = … = f_k = 0}`. The first start is `z` itself,
/// the remaining ones are seeded perturbations; the smallest converged
/// distance wins. `hints` are extra starting points tried first.
pub fn nearest_point(
    funcs: &[&dyn RealJet],
    z: &[Complex64],
    hints: &[Vec<Complex64>],
    opts: &DistanceOptions,
) -> Result<NearestPoint> {
    if funcs.is_empty() {
        return Err(Error::Precondition("no constraint functions".into()));
    }
    let target = to_real(z);
    let mut rng = substream(opts.seed, 0);
    let mut starts: Vec<Vec<f64>> = hints.iter().map(|h| to_real(h)).collect();
    starts.push(target.clone());
    while starts.len() < hints.len() + opts.starts.max(1) {
        starts.push(
            target
                .iter()
                .map(|t| t + opts.spread * (2.0 * rng.gen::<f64>() - 1.0))
                .collect(),
        );
    }
    let mut best: Option<(f64, Vec<f64>)> = None;
    let mut converged = 0;
    for s in starts {
        if let Some(p) = project_from(funcs, &target, s, opts) {
            converged += 1;
            let d = p
                .iter()
                .zip(&target)
                .map(|(a, b)| (a - b) * (a - b))
                .sum::<f64>()
                .sqrt();
            if best.as_ref().map_or(true, |(bd, _)| d < *bd) {
                best = Some((d, p));
            }
        }
    }
    let (distance, p) = best.ok_or(Error::NoConvergence)?;
    Ok(NearestPoint {
        point: from_real(&p),
        distance,
        converged_starts: converged,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::jet::RealPoly;

    #[test]
    fn distance_to_sphere() {
        let rho = RealPoly::weighted_norm_sq(&[1.0, 1.0]).add(&RealPoly::constant(2, -1.0));
        let z = [Complex64::new(0.3, 0.1), Complex64::new(-0.2, 0.0)];
        let r = (0.09f64 + 0.01 + 0.04).sqrt();
        let np = nearest_point(&[&rho], &z, &[], &DistanceOptions::default()).unwrap();
        assert!((np.distance - (1.0 - r)).abs() < 1e-10);
    }

    #[test]
    fn distance_to_linear_subspace() {
        // {x_1 = 0, x_2 = 0} in C²
        let f1 = RealPoly::x(2, 0);
        let f2 = RealPoly::x(2, 1);
        let z = [Complex64::new(-0.3, 0.2), Complex64::new(-0.4, 0.9)];
        let np = nearest_point(&[&f1, &f2], &z, &[], &DistanceOptions::default()).unwrap();
        assert!((np.distance - 0.5).abs() < 1e-12);
        assert_eq!(np.converged_starts, 8);
    }

    #[test]
    fn centre_of_sphere_still_converges_from_perturbed_starts() {
        let rho = RealPoly::weighted_norm_sq(&[1.0]).add(&RealPoly::constant(1, -1.0));
        let np = nearest_point(
            &[&rho],
            &[Complex64::new(0.0, 0.0)],
            &[],
            &DistanceOptions::default(),
        )
        .unwrap();
        assert!((np.distance - 1.0).abs() < 1e-10);
    }
}
