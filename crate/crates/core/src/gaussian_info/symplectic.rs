//! Symplectic building blocks in `(X₁, P₁, X₂, P₂)` ordering.

use nalgebra::{Matrix2, Matrix4, Vector4};
use rand::Rng;

use super::CovarianceMatrix4;

/// `Ω = J ⊕ J` with `J = [[0, 1], [−1, 0]]`.
pub fn symplectic_form() -> Matrix4<f64> {
    Matrix4::new(
        0.0, 1.0, 0.0, 0.0, //
        -1.0, 0.0, 0.0, 0.0, //
        0.0, 0.0, 0.0, 1.0, //
        0.0, 0.0, -1.0, 0.0,
    )
}

pub fn rotation(theta: f64) -> Matrix2<f64> {
    let (s, c) = theta.sin_cos();
    Matrix2::new(c, -s, s, c)
}

/// Single-mode symplectic `R(θ)·diag(e^{−r}, e^{r})·R(φ)`.
pub fn local_symplectic(theta: f64, r: f64, phi: f64) -> Matrix2<f64> {
    rotation(theta) * Matrix2::new((-r).exp(), 0.0, 0.0, r.exp()) * rotation(phi)
}

/// `s1 ⊕ s2`.
pub fn direct_sum(s1: &Matrix2<f64>, s2: &Matrix2<f64>) -> Matrix4<f64> {
    let mut m = Matrix4::zeros();
    m.fixed_view_mut::<2, 2>(0, 0).copy_from(s1);
    m.fixed_view_mut::<2, 2>(2, 2).copy_from(s2);
    m
}

pub fn beam_splitter(theta: f64) -> Matrix4<f64> {
    let (s, c) = theta.sin_cos();
    Matrix4::new(
        c, 0.0, s, 0.0, //
        0.0, c, 0.0, s, //
        -s, 0.0, c, 0.0, //
        0.0, -s, 0.0, c,
    )
}

/// `[[cosh r·I, sinh r·Z], [sinh r·Z, cosh r·I]]`, `Z = diag(1, −1)`.
pub fn two_mode_squeezer(r: f64) -> Matrix4<f64> {
    let (c, s) = (r.cosh(), r.sinh());
    Matrix4::new(
        c, 0.0, s, 0.0, //
        0.0, c, 0.0, -s, //
        s, 0.0, c, 0.0, //
        0.0, -s, 0.0, c,
    )
}

/// Product of two thermal states with symplectic eigenvalues `nu1`, `nu2`.
pub fn thermal(nu1: f64, nu2: f64) -> CovarianceMatrix4 {
    CovarianceMatrix4::from_matrix_unchecked(Matrix4::from_diagonal(&Vector4::new(nu1, nu1, nu2, nu2)))
}

/// Random local symplectic pair `s1 ⊕ s2` with squeezing up to `max_r`.
pub fn random_local<R: Rng + ?Sized>(rng: &mut R, max_r: f64) -> Matrix4<f64> {
    let tau = std::f64::consts::TAU;
    let mut one = || {
        local_symplectic(
            rng.random::<f64>() * tau,
            rng.random::<f64>() * max_r,
            rng.random::<f64>() * tau,
        )
    };
    let (a, b) = (one(), one());
    direct_sum(&a, &b)
}

/// A random physical two-mode covariance matrix: thermal symplectic
/// spectrum in `[1, 3)` dressed by local squeezers, a beam splitter and a
/// two-mode squeezer.
pub fn random_physical_cm<R: Rng + ?Sized>(rng: &mut R) -> CovarianceMatrix4 {
    let nu1 = 1.0 + 2.0 * rng.random::<f64>();
    let nu2 = 1.0 + 2.0 * rng.random::<f64>();
    let inner = random_local(rng, 0.6);
    let bs = beam_splitter(rng.random::<f64>() * std::f64::consts::PI);
    let tms = two_mode_squeezer(rng.random::<f64>());
    let outer = random_local(rng, 0.6);
    let s = outer * tms * bs * inner;
    let m = s * thermal(nu1, nu2).matrix() * s.transpose();
    CovarianceMatrix4::from_matrix_unchecked(0.5 * (m + m.transpose()))
}
