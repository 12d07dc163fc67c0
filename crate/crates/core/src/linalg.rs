//! Small dense helpers over nalgebra.

use nalgebra::{DMatrix, DVector};

/// Smallest Cholesky pivot `L_ii²`, or the smallest eigenvalue when the
/// factorization breaks down.
pub(crate) fn smallest_pivot(m: &DMatrix<f64>) -> f64 {
    match m.clone().cholesky() {
        Some(c) => {
            let l = c.l_dirty();
            (0..m.nrows())
                .map(|i| l[(i, i)] * l[(i, i)])
                .fold(f64::INFINITY, f64::min)
        }
        None => m.clone().symmetric_eigenvalues().min(),
    }
}

/// `uᵀ G v`.
pub(crate) fn inner(g: &DMatrix<f64>, u: &[f64], v: &[f64]) -> f64 {
    let n = u.len();
    let mut s = 0.0;
    for i in 0..n {
        if u[i] == 0.0 {
            continue;
        }
        for j in 0..n {
            s += u[i] * g[(i, j)] * v[j];
        }
    }
    s
}

pub(crate) fn norm2(g: &DMatrix<f64>, u: &[f64]) -> f64 {
    inner(g, u, u)
}

pub(crate) fn mat_vec(m: &DMatrix<f64>, v: &[f64]) -> Vec<f64> {
    (m * DVector::from_column_slice(v)).as_slice().to_vec()
}

pub(crate) fn axpy(a: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += a * xi;
    }
}

pub(crate) fn sub(x: &[f64], y: &[f64]) -> Vec<f64> {
    x.iter().zip(y).map(|(a, b)| a - b).collect()
}

pub(crate) fn max_abs(x: &[f64]) -> f64 {
    x.iter().fold(0.0, |m, v| m.max(v.abs()))
}
