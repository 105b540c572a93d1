//! Brute-force Gaussian discord: explicit minimization of the conditional
//! entropy over single-mode Gaussian measurements.
//!
//! A pure Gaussian measurement on the measured mode has covariance
//! `Γ = R(θ)·diag(s, 1/s)·R(θ)ᵀ`; the kept mode is left with
//! `α' = α − γ(β + Γ)⁻¹γᵀ`. Homodyne detection is the `s → 0` limit and is
//! evaluated exactly. The grid search is followed by a local polish so the
//! estimate does not depend on the grid spacing near the optimum.

use std::f64::consts::PI;

use nalgebra::{Matrix2, Vector2};

use super::{entropy_f, symplectic::rotation, symplectic_eigenvalues, CovarianceMatrix4, MeasuredMode};
use crate::error::{Error, Result};

const LOG_S_MIN: f64 = -3.0 * std::f64::consts::LN_10;
const LOG_S_MAX: f64 = 3.0 * std::f64::consts::LN_10;

/// One single-mode Gaussian measurement.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GaussianMeasurement {
    /// Measurement covariance `R(θ)·diag(e^{log_s}, e^{−log_s})·R(θ)ᵀ`.
    General { log_s: f64, theta: f64 },
    /// Ideal homodyne of the quadrature along `(cos θ, sin θ)`.
    Homodyne { theta: f64 },
}

struct Blocks {
    kept: Matrix2<f64>,
    measured: Matrix2<f64>,
    /// rows: kept mode, columns: measured mode
    cross: Matrix2<f64>,
}

fn blocks(cm: &CovarianceMatrix4, side: MeasuredMode) -> Blocks {
    match side {
        MeasuredMode::Channel1 => Blocks {
            kept: cm.block_b(),
            measured: cm.block_a(),
            cross: cm.block_c().transpose(),
        },
        MeasuredMode::Channel2 => Blocks {
            kept: cm.block_a(),
            measured: cm.block_b(),
            cross: cm.block_c(),
        },
    }
}

fn det_after(b: &Blocks, m: GaussianMeasurement) -> f64 {
    match m {
        GaussianMeasurement::General { log_s, theta } => {
            let r = rotation(theta);
            let s = log_s.exp();
            let gamma = r * Matrix2::new(s, 0.0, 0.0, 1.0 / s) * r.transpose();
            match (b.measured + gamma).try_inverse() {
                Some(inv) => (b.kept - b.cross * inv * b.cross.transpose()).determinant(),
                None => f64::INFINITY,
            }
        }
        GaussianMeasurement::Homodyne { theta } => {
            let u = Vector2::new(theta.cos(), theta.sin());
            let w = b.cross * u;
            let denom = u.dot(&(b.measured * u));
            (b.kept - w * w.transpose() / denom).determinant()
        }
    }
}

/// Determinant of the kept mode's covariance after measuring `side` with `m`.
pub fn conditional_det(cm: &CovarianceMatrix4, side: MeasuredMode, m: GaussianMeasurement) -> f64 {
    det_after(&blocks(cm, side), m)
}

/// Brute-force discord with the measurement on channel 1.
pub fn discord_numeric_oracle(cm: &CovarianceMatrix4, grid_size: usize) -> Result<f64> {
    discord_numeric_oracle_with(cm, grid_size, MeasuredMode::Channel1)
}

/// Brute-force discord: `grid_size × grid_size` grid over
/// `log s ∈ [ln 10⁻³, ln 10³]`, `θ ∈ [0, π)` plus `grid_size` homodyne
/// angles, then a local polish of the best candidates.
pub fn discord_numeric_oracle_with(cm: &CovarianceMatrix4, grid_size: usize, side: MeasuredMode) -> Result<f64> {
    if grid_size < 32 {
        return Err(Error::InvalidParams(format!("grid_size must be >= 32, got {grid_size}")));
    }
    let b = blocks(cm, side);
    let n = grid_size;
    let theta_at = |k: usize| PI * k as f64 / n as f64;

    let mut best_general = (f64::INFINITY, 0.0, 0.0);
    for i in 0..n {
        let log_s = LOG_S_MIN + (LOG_S_MAX - LOG_S_MIN) * i as f64 / (n - 1) as f64;
        for k in 0..n {
            let theta = theta_at(k);
            let e = det_after(&b, GaussianMeasurement::General { log_s, theta });
            if e < best_general.0 {
                best_general = (e, log_s, theta);
            }
        }
    }
    let mut best_homodyne = (f64::INFINITY, 0.0);
    for k in 0..n {
        let theta = theta_at(k);
        let e = det_after(&b, GaussianMeasurement::Homodyne { theta });
        if e < best_homodyne.0 {
            best_homodyne = (e, theta);
        }
    }

    let step = PI / n as f64;
    let general = nelder_mead(
        // outside the grid range the exact homodyne branch takes over
        |x| {
            if (LOG_S_MIN..=LOG_S_MAX).contains(&x[0]) {
                det_after(&b, GaussianMeasurement::General { log_s: x[0], theta: x[1] })
            } else {
                f64::INFINITY
            }
        },
        [best_general.1, best_general.2],
        [(LOG_S_MAX - LOG_S_MIN) / (n - 1) as f64, step],
    );
    let homodyne = golden_section(
        |theta| det_after(&b, GaussianMeasurement::Homodyne { theta }),
        best_homodyne.1 - step,
        best_homodyne.1 + step,
    );
    let e_min = [best_general.0, best_homodyne.0, general, homodyne]
        .into_iter()
        .fold(f64::INFINITY, f64::min);

    let (nu_plus, nu_minus) = symplectic_eigenvalues(cm)?;
    let d = entropy_f(b.measured.determinant().sqrt())? - entropy_f(nu_plus.max(1.0))?
        - entropy_f(nu_minus.max(1.0))?
        + entropy_f(e_min.max(1.0).sqrt())?;
    Ok(d)
}

fn golden_section(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    let ratio = 0.5 * (5f64.sqrt() - 1.0);
    let mut x1 = hi - ratio * (hi - lo);
    let mut x2 = lo + ratio * (hi - lo);
    let (mut f1, mut f2) = (f(x1), f(x2));
    for _ in 0..80 {
        if f1 < f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - ratio * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + ratio * (hi - lo);
            f2 = f(x2);
        }
    }
    f1.min(f2)
}

/// Minimal two-dimensional Nelder–Mead; returns the smallest value seen.
fn nelder_mead(f: impl Fn([f64; 2]) -> f64, start: [f64; 2], scale: [f64; 2]) -> f64 {
    let mut pts = [
        start,
        [start[0] + scale[0], start[1]],
        [start[0], start[1] + scale[1]],
    ];
    let mut vals = pts.map(|p| f(p));
    let lerp = |a: [f64; 2], b: [f64; 2], t: f64| [a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])];
    for _ in 0..400 {
        let mut order = [0usize, 1, 2];
        order.sort_by(|&i, &j| vals[i].partial_cmp(&vals[j]).unwrap_or(std::cmp::Ordering::Equal));
        pts = order.map(|i| pts[i]);
        vals = order.map(|i| vals[i]);
        // Equal values alone do not mean convergence: the conditional
        // determinant is often flat along the measurement angle.
        let size = (1..3).map(|k| (pts[k][0] - pts[0][0]).abs().max((pts[k][1] - pts[0][1]).abs())).fold(0.0, f64::max);
        if (vals[2] - vals[0]).abs() <= 1e-15 * vals[0].abs().max(1.0) && size < 1e-9 {
            break;
        }
        let centroid = lerp(pts[0], pts[1], 0.5);
        let reflected = lerp(centroid, pts[2], -1.0);
        let fr = f(reflected);
        if fr < vals[0] {
            let expanded = lerp(centroid, pts[2], -2.0);
            let fe = f(expanded);
            if fe < fr {
                pts[2] = expanded;
                vals[2] = fe;
            } else {
                pts[2] = reflected;
                vals[2] = fr;
            }
        } else if fr < vals[1] {
            pts[2] = reflected;
            vals[2] = fr;
        } else {
            let contracted = lerp(centroid, pts[2], 0.5);
            let fc = f(contracted);
            if fc < vals[2] {
                pts[2] = contracted;
                vals[2] = fc;
            } else {
                for k in 1..3 {
                    pts[k] = lerp(pts[0], pts[k], 0.5);
                    vals[k] = f(pts[k]);
                }
            }
        }
    }
    vals.into_iter().fold(f64::INFINITY, f64::min)
}
