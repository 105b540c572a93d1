//! Quantum Langevin dynamics of the two spin waves and the homodyne noise
//! spectra they imprint on the probes.
//!
//! The mode vector is `v = (b₁, b₂†)` in the frame rotating at the Larmor
//! frequency, so the dissipative coupling pairs channel 1 with the
//! conjugate of channel 2 (signal/idler type):
//!
//! ```text
//! dv/dt = M v + F,     M = [ −i|Δ₀| − γ₁₂        Γc      ]
//!                          [      Γc        +i|Δ₀| − γ₁₂ ]
//! ⟨F F†⟩ = d_out = 2Γ_d (1 + n_exc),  ⟨F† F⟩ = d_in = 2Γ_d n_exc,
//! Γ_d = [[γ₁₂, −Γc], [−Γc, γ₁₂]]
//! ```
//!
//! The probe quadratures are shot noise (unit variance) plus `eta_read`
//! times the atomic noise in excess of the atomic vacuum, plus an optional
//! broad Lorentzian pedestal that is local to each channel.

mod time_domain;

pub use time_domain::{simulate_time_domain, SpectrumEstimate, TimeDomainConfig};

use nalgebra::{Matrix2, Matrix4};
use serde::{Deserialize, Serialize};

use crate::effective_model::{eigenvalues_numeric, SystemParams};
use crate::error::{Error, Result};
use crate::gaussian_info::CovarianceMatrix4;
use crate::linalg::{check_grid, conj2, sym2_eigenvalues};
use crate::C64;

/// Generator of `v = (b₁, b₂†)` in the rotating frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DriftMatrix {
    pub m: Matrix2<C64>,
}

impl DriftMatrix {
    /// `−γ₁₂ ± √(Γc² − Δ₀²)`, principal branch.
    pub fn eigenvalues(&self) -> [C64; 2] {
        let g = -0.5 * (self.m[(0, 0)].re + self.m[(1, 1)].re);
        let d = self.m[(1, 1)].im;
        let gc = self.m[(0, 1)].re;
        let root = C64::new(gc * gc - d * d, 0.0).sqrt();
        [C64::new(-g, 0.0) + root, C64::new(-g, 0.0) - root]
    }

    /// Eigenvalues from a generic complex eigensolver.
    pub fn eigenvalues_numeric(&self) -> Result<[C64; 2]> {
        eigenvalues_numeric(&self.m)
    }

    pub fn max_real_eigenvalue(&self) -> f64 {
        self.eigenvalues().iter().map(|z| z.re).fold(f64::NEG_INFINITY, f64::max)
    }

    /// Response `χ(ω) = (−iω·I − M)⁻¹`.
    pub fn susceptibility(&self, omega: f64) -> Result<Matrix2<C64>> {
        (Matrix2::from_diagonal_element(C64::new(0.0, -omega)) - self.m)
            .try_inverse()
            .ok_or(Error::Singular("susceptibility"))
    }
}

pub fn drift_matrix(params: &SystemParams) -> DriftMatrix {
    let d = params.delta0.abs();
    let g = params.gamma12();
    let c = C64::new(params.gamma_c, 0.0);
    DriftMatrix {
        m: Matrix2::new(C64::new(-g, -d), c, c, C64::new(-g, d)),
    }
}

/// Langevin force correlation densities.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseModel {
    /// `⟨F F†⟩`
    pub d_out: Matrix2<f64>,
    /// `⟨F† F⟩`
    pub d_in: Matrix2<f64>,
}

impl NoiseModel {
    /// Builds the closure from raw rates; both densities must be PSD.
    pub fn from_rates(gamma12: f64, gamma_c: f64, n_exc: f64) -> Result<Self> {
        let damp = damping_diffusion(gamma12, gamma_c);
        let model = Self {
            d_out: damp * (1.0 + n_exc),
            d_in: damp * n_exc,
        };
        let tol = 1e-12 * gamma12.abs().max(1.0);
        for (name, m) in [("d_out", model.d_out), ("d_in", model.d_in)] {
            let low = sym2_eigenvalues(&m)[0];
            if low < -tol {
                return Err(Error::InternalConsistency(format!(
                    "{name} is not positive-semidefinite (eigenvalue {low:e})"
                )));
            }
        }
        Ok(model)
    }

    /// `d_out − d_in`, fixed by the damping alone.
    pub fn commutator(&self) -> Matrix2<f64> {
        self.d_out - self.d_in
    }
}

/// `2·[[γ₁₂, −Γc], [−Γc, γ₁₂]]`.
fn damping_diffusion(gamma12: f64, gamma_c: f64) -> Matrix2<f64> {
    2.0 * Matrix2::new(gamma12, -gamma_c, -gamma_c, gamma12)
}

pub fn noise_model(params: &SystemParams) -> Result<NoiseModel> {
    NoiseModel::from_rates(params.gamma12(), params.gamma_c, params.n_exc)
}

/// Per-frequency quadrature covariance, shot-noise units.
#[derive(Debug, Clone, PartialEq)]
pub struct NoiseSpectrum {
    /// Detuning from the Larmor frequency.
    pub omega_grid: Vec<f64>,
    pub cm_per_omega: Vec<CovarianceMatrix4>,
}

/// Maps `(v₁, v₂, v₁*, v₂*)` onto `(X₁, P₁, X₂, P₂)` with `b₂ = v₂*`,
/// `X = b + b†`, `P = −i(b − b†)`.
fn quadrature_map() -> Matrix4<C64> {
    let o = C64::new(0.0, 0.0);
    let r = C64::new(1.0, 0.0);
    let i = C64::new(0.0, 1.0);
    Matrix4::new(
        r, o, r, o, //
        -i, o, i, o, //
        o, r, o, r, //
        o, i, o, -i,
    )
}

pub(crate) fn pedestal(params: &SystemParams, omega: f64) -> f64 {
    if params.broad_amp == 0.0 {
        return 0.0;
    }
    let w2 = params.broad_width * params.broad_width;
    params.broad_amp * w2 / (omega * omega + w2)
}

/// Symmetrized spectral covariance of the atomic quadratures in excess of
/// the atomic vacuum, before the readout gain.
pub(crate) fn atomic_excess_cm(drift: &DriftMatrix, noise: &NoiseModel, omega: f64) -> Result<Matrix4<f64>> {
    // Excess over the atomic vacuum: d_out − 2Γ_d = d_in in both orderings.
    let excess = (noise.d_out - noise.commutator()).map(|x| C64::new(x, 0.0));
    let chi_p = drift.susceptibility(omega)?;
    let chi_m = drift.susceptibility(-omega)?;
    let normal = chi_p * excess * chi_p.adjoint();
    let anti = conj2(&chi_m) * excess * chi_m.transpose();
    let mut sww = Matrix4::<C64>::zeros();
    sww.fixed_view_mut::<2, 2>(0, 0).copy_from(&normal);
    sww.fixed_view_mut::<2, 2>(2, 2).copy_from(&anti);
    let a = quadrature_map();
    let s = a * sww * a.adjoint();
    let re = s.map(|z| z.re);
    Ok(0.5 * (re + re.transpose()))
}

fn cm_at(params: &SystemParams, drift: &DriftMatrix, noise: &NoiseModel, omega: f64) -> Result<CovarianceMatrix4> {
    let atomic = atomic_excess_cm(drift, noise, omega)?;
    let floor = 1.0 + pedestal(params, omega);
    let m = Matrix4::identity() * floor + atomic * params.eta_read;
    if !crate::linalg::is_finite4(&m) {
        return Err(Error::NonFinite("spectral covariance"));
    }
    Ok(CovarianceMatrix4::from_matrix_unchecked(m))
}

/// Spectral covariance matrices on `omega_grid` (detuning from Ω_L).
pub fn spectral_cm(params: &SystemParams, omega_grid: &[f64]) -> Result<NoiseSpectrum> {
    params.validate()?;
    check_grid(omega_grid, "omega grid")?;
    let drift = drift_matrix(params);
    let noise = noise_model(params)?;
    let cm_per_omega = omega_grid
        .iter()
        .map(|&w| cm_at(params, &drift, &noise, w))
        .collect::<Result<Vec<_>>>()?;
    Ok(NoiseSpectrum {
        omega_grid: omega_grid.to_vec(),
        cm_per_omega,
    })
}

/// Covariance at the Larmor frequency (`ω = 0` in the rotating frame).
pub fn cm_at_analysis_frequency(params: &SystemParams) -> Result<CovarianceMatrix4> {
    params.validate()?;
    cm_at(params, &drift_matrix(params), &noise_model(params)?, 0.0)
}

/// `10·log₁₀(x)`.
pub fn to_db(x: f64) -> f64 {
    10.0 * x.log10()
}

/// One row of the variance traces, all in dB relative to shot noise.
///
/// Joint variances are reported as `Var(X₁ − X₂)/2` and `Var(P₁ + P₂)/2`
/// so that vacuum reads 0 dB in every column.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VarianceRow {
    pub omega: f64,
    pub varx1_db: f64,
    pub varx2_db: f64,
    pub varxdiff_db: f64,
    pub varpsum_db: f64,
}

pub fn variance_traces(spec: &NoiseSpectrum) -> Vec<VarianceRow> {
    spec.omega_grid
        .iter()
        .zip(&spec.cm_per_omega)
        .map(|(&omega, cm)| VarianceRow {
            omega,
            varx1_db: to_db(cm.get(0, 0)),
            varx2_db: to_db(cm.get(2, 2)),
            varxdiff_db: to_db(0.5 * cm.var_x_diff()),
            varpsum_db: to_db(0.5 * cm.var_p_sum()),
        })
        .collect()
}
