use nalgebra::{Matrix2, Matrix4};

use crate::error::{Error, Result};
use crate::C64;

pub(crate) fn check_grid(grid: &[f64], what: &'static str) -> Result<()> {
    if grid.is_empty() {
        return Err(Error::EmptyGrid);
    }
    if grid.iter().any(|x| !x.is_finite()) {
        return Err(Error::NonFinite(what));
    }
    if let Some(i) = grid.windows(2).position(|w| w[1] < w[0]) {
        return Err(Error::UnsortedGrid(i + 1));
    }
    Ok(())
}

pub(crate) fn conj2(m: &Matrix2<C64>) -> Matrix2<C64> {
    m.map(|z| z.conj())
}

/// Eigenvalues of a real symmetric 2×2 matrix, ascending.
pub(crate) fn sym2_eigenvalues(m: &Matrix2<f64>) -> [f64; 2] {
    let mean = 0.5 * (m[(0, 0)] + m[(1, 1)]);
    let half = 0.5 * (m[(0, 0)] - m[(1, 1)]);
    let r = half.hypot(m[(0, 1)]);
    [mean - r, mean + r]
}

/// Principal square root of a real symmetric positive-semidefinite 2×2 matrix.
pub(crate) fn sym2_sqrt(m: &Matrix2<f64>) -> Matrix2<f64> {
    let eig = m.symmetric_eigen();
    let d = Matrix2::from_diagonal(&eig.eigenvalues.map(|x| x.max(0.0).sqrt()));
    &eig.eigenvectors * d * eig.eigenvectors.transpose()
}

pub(crate) fn is_finite4(m: &Matrix4<f64>) -> bool {
    m.iter().all(|x| x.is_finite())
}

/// Smallest eigenvalue of a real symmetric 4×4 matrix.
pub(crate) fn min_eigenvalue4(m: &Matrix4<f64>) -> f64 {
    m.symmetric_eigen().eigenvalues.min()
}
