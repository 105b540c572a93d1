//! Two-mode Gaussian states in shot-noise units.
//!
//! Quadrature ordering is `(X₁, P₁, X₂, P₂)` and the vacuum has unit
//! variance. The covariance matrix is written in blocks
//!
//! ```text
//! σ = [ A   C ]      I₁ = det A, I₂ = det B, I₃ = det C, I₄ = det σ
//!     [ Cᵀ  B ]
//! ```
//!
//! and every quantity here is a function of the four local symplectic
//! invariants `I₁..I₄`.

mod oracle;
pub mod symplectic;

pub use oracle::{conditional_det, discord_numeric_oracle, discord_numeric_oracle_with, GaussianMeasurement};

use nalgebra::{Matrix2, Matrix4};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Symmetry tolerance, relative to the largest entry (floored at 1).
pub const SYMMETRY_TOL: f64 = 1e-12;
/// Allowed violation of `ν₋ ≥ 1`.
pub const PHYSICALITY_TOL: f64 = 1e-9;

/// Which channel the Gaussian measurement acts on in the discord.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum MeasuredMode {
    #[default]
    Channel1,
    Channel2,
}

/// Real symmetric 4×4 covariance matrix satisfying `σ + iΩ ⪰ 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CovarianceMatrix4(Matrix4<f64>);

impl CovarianceMatrix4 {
    /// Validates symmetry and the uncertainty principle.
    pub fn new(m: Matrix4<f64>) -> Result<Self> {
        if !crate::linalg::is_finite4(&m) {
            return Err(Error::NonFinite("covariance matrix"));
        }
        let scale = m.amax().max(1.0);
        if (m - m.transpose()).amax() > SYMMETRY_TOL * scale {
            return Err(Error::NonPhysical("matrix is not symmetric".into()));
        }
        let cm = Self(0.5 * (m + m.transpose()));
        let lowest = cm.uncertainty_margin();
        if lowest < -PHYSICALITY_TOL * scale {
            return Err(Error::NonPhysical(format!(
                "sigma + i*Omega has eigenvalue {lowest:e}"
            )));
        }
        Ok(cm)
    }

    pub(crate) fn from_matrix_unchecked(m: Matrix4<f64>) -> Self {
        Self(m)
    }

    pub fn identity() -> Self {
        Self(Matrix4::identity())
    }

    /// Two-mode squeezed vacuum with squeezing `r`:
    /// `[[cosh2r·I, sinh2r·Z], [sinh2r·Z, cosh2r·I]]`, `Z = diag(1, −1)`.
    pub fn two_mode_squeezed_vacuum(r: f64) -> Self {
        let s = symplectic::two_mode_squeezer(r);
        Self(s * s.transpose())
    }

    pub fn matrix(&self) -> &Matrix4<f64> {
        &self.0
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.0[(i, j)]
    }

    pub fn block_a(&self) -> Matrix2<f64> {
        self.0.fixed_view::<2, 2>(0, 0).into_owned()
    }

    pub fn block_b(&self) -> Matrix2<f64> {
        self.0.fixed_view::<2, 2>(2, 2).into_owned()
    }

    /// Off-diagonal block, rows mode 1, columns mode 2.
    pub fn block_c(&self) -> Matrix2<f64> {
        self.0.fixed_view::<2, 2>(0, 2).into_owned()
    }

    /// `[I₁, I₂, I₃, I₄]`.
    pub fn invariants(&self) -> [f64; 4] {
        [
            self.block_a().determinant(),
            self.block_b().determinant(),
            self.block_c().determinant(),
            self.0.determinant(),
        ]
    }

    /// `Var(X₁ − X₂)`.
    pub fn var_x_diff(&self) -> f64 {
        self.0[(0, 0)] + self.0[(2, 2)] - 2.0 * self.0[(0, 2)]
    }

    /// `Var(P₁ + P₂)`.
    pub fn var_p_sum(&self) -> f64 {
        self.0[(1, 1)] + self.0[(3, 3)] + 2.0 * self.0[(1, 3)]
    }

    /// Same state with the two modes exchanged.
    pub fn swapped(&self) -> Self {
        let p = Matrix4::new(
            0.0, 0.0, 1.0, 0.0, //
            0.0, 0.0, 0.0, 1.0, //
            1.0, 0.0, 0.0, 0.0, //
            0.0, 1.0, 0.0, 0.0,
        );
        Self(p * self.0 * p)
    }

    /// `σ ↦ S σ Sᵀ`.
    pub fn transformed(&self, s: &Matrix4<f64>) -> Self {
        Self(s * self.0 * s.transpose())
    }

    /// Smallest eigenvalue of the Hermitian matrix `σ + iΩ`.
    pub fn uncertainty_margin(&self) -> f64 {
        let omega = symplectic::symplectic_form();
        let h = self.0.map(|x| crate::C64::new(x, 0.0))
            + omega.map(|x| crate::C64::new(0.0, x));
        h.symmetric_eigen().eigenvalues.min()
    }

    /// Smallest eigenvalue of `σ − I`; non-negative when the state carries
    /// no noise below the vacuum in any quadrature combination.
    pub fn excess_min_eigenvalue(&self) -> f64 {
        crate::linalg::min_eigenvalue4(&(self.0 - Matrix4::identity()))
    }
}

/// Entropy function `f(x) = ((x+1)/2)·log₂((x+1)/2) − ((x−1)/2)·log₂((x−1)/2)`.
///
/// Arguments within [`PHYSICALITY_TOL`] below 1 are clamped to 1.
pub fn entropy_f(x: f64) -> Result<f64> {
    if !x.is_finite() || x < 1.0 - PHYSICALITY_TOL {
        return Err(Error::NumericDegeneracy(format!("entropy function at x = {x}")));
    }
    let x = x.max(1.0);
    let p = 0.5 * (x + 1.0);
    let m = 0.5 * (x - 1.0);
    let tail = if m > 0.0 { m * m.log2() } else { 0.0 };
    Ok(p * p.log2() - tail)
}

/// `X = S_x/√|S_z|`, `P = S_y/√|S_z|`.
pub fn quadratures_from_stokes(sx: f64, sy: f64, sz: f64) -> Result<(f64, f64)> {
    if sz == 0.0 {
        return Err(Error::UndefinedQuadrature);
    }
    let norm = sz.abs().sqrt();
    Ok((sx / norm, sy / norm))
}

/// Standard form `σ = [[a·I, diag(c₊, c₋)], [diag(c₊, c₋), b·I]]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StandardForm {
    pub a: f64,
    pub b: f64,
    pub c_plus: f64,
    pub c_minus: f64,
}

impl StandardForm {
    pub fn to_cm(&self) -> CovarianceMatrix4 {
        let (a, b, cp, cm) = (self.a, self.b, self.c_plus, self.c_minus);
        CovarianceMatrix4(Matrix4::new(
            a, 0.0, cp, 0.0, //
            0.0, a, 0.0, cm, //
            cp, 0.0, b, 0.0, //
            0.0, cm, 0.0, b,
        ))
    }
}

/// Reduces `cm` to standard form using only its local invariants.
///
/// `c₊ ≥ 0`, `|c₊| ≥ |c₋|` and `c₊c₋ = I₃`; the sign of `I₃` lands on `c₋`.
pub fn standard_form(cm: &CovarianceMatrix4) -> Result<StandardForm> {
    let [i1, i2, i3, i4] = cm.invariants();
    if i1 <= 0.0 || i2 <= 0.0 {
        return Err(Error::NonPhysical("local blocks are not positive".into()));
    }
    let a = i1.sqrt();
    let b = i2.sqrt();
    // c₊² + c₋² from det σ = (ab − c₊²)(ab − c₋²) when both local blocks are a·I, b·I.
    let sum_sq = (i1 * i2 + i3 * i3 - i4) / (a * b);
    let disc = (sum_sq * sum_sq - 4.0 * i3 * i3).max(0.0);
    let c_plus = (0.5 * (sum_sq + disc.sqrt())).max(0.0).sqrt();
    let c_minus = if c_plus > 0.0 { i3 / c_plus } else { 0.0 };
    Ok(StandardForm { a, b, c_plus, c_minus })
}

/// Closed-form symplectic eigenvalues `(ν₊, ν₋)`.
///
/// `2ν±² = Δ ± √(Δ² − 4 det σ)` with `Δ = I₁ + I₂ + 2I₃`.
pub fn symplectic_eigenvalues(cm: &CovarianceMatrix4) -> Result<(f64, f64)> {
    let [i1, i2, i3, i4] = cm.invariants();
    let delta = i1 + i2 + 2.0 * i3;
    let mut disc = delta * delta - 4.0 * i4;
    if disc < -PHYSICALITY_TOL * (delta * delta).max(1.0) {
        return Err(Error::NumericDegeneracy(format!(
            "negative discriminant {disc:e} in symplectic spectrum"
        )));
    }
    disc = disc.max(0.0);
    let plus = (0.5 * (delta + disc.sqrt())).max(0.0).sqrt();
    let minus = (0.5 * (delta - disc.sqrt())).max(0.0).sqrt();
    Ok((plus, minus))
}

/// Symplectic eigenvalues from the spectrum of `Ω·σ` (eigenvalues `±iν`).
pub fn symplectic_eigenvalues_numeric(cm: &CovarianceMatrix4) -> (f64, f64) {
    let ev = (symplectic::symplectic_form() * cm.0).complex_eigenvalues();
    let mut mags: Vec<f64> = ev.iter().map(|z| z.im.abs()).collect();
    mags.sort_by(|a, b| b.partial_cmp(a).unwrap());
    (0.5 * (mags[0] + mags[1]), 0.5 * (mags[2] + mags[3]))
}

/// `[Var(X₁ − X₂) + Var(P₁ + P₂)]/4`; below 1 certifies entanglement.
pub fn duan_criterion(cm: &CovarianceMatrix4) -> f64 {
    0.25 * (cm.var_x_diff() + cm.var_p_sum())
}

/// Gaussian discord and the quantities it is built from.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiscordResult {
    /// Discord in bits.
    pub discord: f64,
    pub nu_plus: f64,
    pub nu_minus: f64,
    /// `[I₁, I₂, I₃, I₄]`.
    pub invariants: [f64; 4],
    pub duan_value: f64,
    pub measured: MeasuredMode,
}

/// Gaussian discord with the measurement on channel 1.
pub fn gaussian_discord(cm: &CovarianceMatrix4) -> Result<DiscordResult> {
    gaussian_discord_with(cm, MeasuredMode::Channel1)
}

/// Gaussian discord `D = f(√det β) − f(ν₊) − f(ν₋) + f(√E_min)`, where `β`
/// is the block of the measured mode and `E_min` the smallest determinant
/// of the unmeasured mode's conditional covariance over Gaussian
/// measurements.
pub fn gaussian_discord_with(cm: &CovarianceMatrix4, measured: MeasuredMode) -> Result<DiscordResult> {
    let invariants = cm.invariants();
    let (nu_plus, nu_minus) = symplectic_eigenvalues(cm)?;
    if nu_minus < 1.0 - PHYSICALITY_TOL {
        return Err(Error::NonPhysical(format!("nu_minus = {nu_minus} < 1")));
    }
    let (nu_plus, nu_minus) = (nu_plus.max(1.0), nu_minus.max(1.0));
    let [i1, i2, i3, i4] = invariants;
    let (kept, meas) = match measured {
        MeasuredMode::Channel1 => (i2, i1),
        MeasuredMode::Channel2 => (i1, i2),
    };
    let e_min = min_conditional_det(kept, meas, i3, i4)?;
    let discord = entropy_f(meas.sqrt())? - entropy_f(nu_plus)? - entropy_f(nu_minus)?
        + entropy_f(e_min.sqrt())?;
    Ok(DiscordResult {
        discord: discord.max(0.0),
        nu_plus,
        nu_minus,
        invariants,
        duan_value: duan_criterion(cm),
        measured,
    })
}

/// Minimal conditional determinant of the kept mode, two-branch closed form.
///
/// `a`, `b` are the determinants of the kept and measured blocks, `c` the
/// cross-block determinant and `d` the full determinant.
fn min_conditional_det(a: f64, b: f64, c: f64, d: f64) -> Result<f64> {
    let c2 = c * c;
    if c2 <= 1e-28 * (a * b).max(1.0) {
        return Ok(a);
    }
    let e = if (d - a * b).powi(2) <= (1.0 + b) * c2 * (a + d) {
        let inner = (c2 + (b - 1.0) * (d - a)).max(0.0);
        (2.0 * c2 + (b - 1.0) * (d - a) + 2.0 * c.abs() * inner.sqrt()) / (b - 1.0).powi(2)
    } else {
        let inner = (c2 * c2 + (d - a * b).powi(2) - 2.0 * c2 * (a * b + d)).max(0.0);
        (a * b - c2 + d - inner.sqrt()) / (2.0 * b)
    };
    if !e.is_finite() {
        return Err(Error::NumericDegeneracy("conditional determinant is not finite".into()));
    }
    Ok(e)
}
