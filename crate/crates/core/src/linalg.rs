//! Small dense linear-algebra helpers on top of nalgebra.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::jet::CMatrix;

pub fn min_singular_value(m: &CMatrix) -> f64 {
    if m.nrows() == 0 || m.ncols() == 0 {
        return 0.0;
    }
    let sv = m.clone().svd(false, false).singular_values;
    // a wide matrix has min(rows, cols) singular values
    sv.iter().copied().fold(f64::INFINITY, f64::min)
}

pub fn max_singular_value(m: &CMatrix) -> f64 {
    m.clone()
        .svd(false, false)
        .singular_values
        .iter()
        .copied()
        .fold(0.0, f64::max)
}

/// Eigenvalues of a Hermitian matrix, ascending.
pub fn hermitian_eigenvalues(m: &CMatrix) -> Vec<f64> {
    let mut ev: Vec<f64> = m.clone().symmetric_eigenvalues().iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    ev
}

pub fn hermitian_min_eigenvalue(m: &CMatrix) -> f64 {
    if m.nrows() == 0 {
        return f64::INFINITY;
    }
    hermitian_eigenvalues(m)[0]
}

pub fn cnorm(v: &[Complex64]) -> f64 {
    v.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
}

/// Hermitian product `⟨a, b⟩ = Σ a_j b̄_j`.
pub fn hermitian_dot(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x * y.conj()).sum()
}

/// Bilinear pairing `Σ a_j b_j`.
pub fn bilinear(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn normalized(v: &[Complex64]) -> Vec<Complex64> {
    let n = cnorm(v);
    v.iter().map(|c| c / n).collect()
}

/// Orthonormal basis of `{v : Σ a_j v_j = 0}` by Gram–Schmidt against `ā`.
pub fn kernel_of_functional(a: &[Complex64]) -> Vec<Vec<Complex64>> {
    let n = a.len();
    let abar: Vec<Complex64> = a.iter().map(|c| c.conj()).collect();
    let mut basis: Vec<Vec<Complex64>> = vec![normalized(&abar)];
    for k in 0..n {
        let mut v = vec![Complex64::new(0.0, 0.0); n];
        v[k] = Complex64::new(1.0, 0.0);
        for _ in 0..2 {
            for b in &basis {
                let p = hermitian_dot(&v, b);
                for (vi, bi) in v.iter_mut().zip(b) {
                    *vi -= p * bi;
                }
            }
        }
        let nv = cnorm(&v);
        if nv > 1e-8 {
            basis.push(v.iter().map(|c| c / nv).collect());
        }
        if basis.len() == n {
            break;
        }
    }
    basis.into_iter().skip(1).collect()
}

pub fn cmat_mul_vec(m: &CMatrix, v: &[Complex64]) -> Vec<Complex64> {
    (m * DVector::from_column_slice(v))
        .iter()
        .copied()
        .collect()
}

/// Solves a small real system, `None` if singular.
pub fn solve_real(a: DMatrix<f64>, b: &[f64]) -> Option<Vec<f64>> {
    let rhs = DVector::from_column_slice(b);
    a.lu().solve(&rhs).map(|x| x.iter().copied().collect())
}
