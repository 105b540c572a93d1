//! Parameters, the two-mode effective Hamiltonian and its supermodes.
//!
//! The dynamics of the two ground-state coherences is generated by
//!
//! ```text
//! H = [ |Δ₀| − iγ₁₂      iΓc      ]
//!     [    iΓc       −|Δ₀| − iγ₁₂ ]
//! ```
//!
//! whose eigenvalues `ω± = −iγ₁₂ ± √(Δ₀² − Γc²)` coalesce at the
//! exceptional point `|Δ₀| = Γc`.

use nalgebra::Matrix2;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::check_grid;
use crate::C64;

/// Relative tolerance used to flag the exceptional point.
pub const DEFAULT_EP_TOL: f64 = 1e-6;

/// Model rates and frequencies, all in rad/s unless noted.
///
/// `alpha_bg` and `g_read` are the thin-medium readout calibration used by
/// [`crate::eit_semiclassical`]; the defaults were solved once with
/// [`crate::eit_semiclassical::calibrate_readout`] for the default rates
/// (coupled on-resonance gain 0.10, uncoupled peak transmission 0.99) and
/// frozen here.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SystemParams {
    /// Half the spin-wave frequency difference. Stored signed.
    pub delta0: f64,
    /// Intrinsic ground-state coherence decay γ₀.
    pub gamma0: f64,
    /// Inter-channel dissipative coupling Γc.
    pub gamma_c: f64,
    /// Control Rabi frequency Ω₁ (equal in both channels).
    pub control_rabi: f64,
    /// Optical coherence decay γ₁₃.
    pub gamma13: f64,
    /// Larmor frequency Ω_L, the centre of the homodyne analysis band.
    pub omega_larmor: f64,
    /// Excess-noise occupancy of the atomic reservoirs.
    pub n_exc: f64,
    /// Readout gain from spin spectral density to quadrature spectral density.
    pub eta_read: f64,
    /// Height of the broad single-pass pedestal (shot-noise units).
    pub broad_amp: f64,
    /// Half width of the broad pedestal.
    pub broad_width: f64,
    /// Residual probe absorption (dimensionless).
    pub alpha_bg: f64,
    /// Coherence-to-field readout coefficient (rad/s).
    pub g_read: f64,
}

impl Default for SystemParams {
    fn default() -> Self {
        Self {
            delta0: 0.0,
            gamma0: 1.0,
            gamma_c: 4.0,
            control_rabi: 10.0,
            gamma13: 100.0,
            omega_larmor: 1000.0,
            n_exc: 1.0,
            eta_read: 1.0,
            broad_amp: 0.0,
            broad_width: 10.0,
            alpha_bg: 0.054_106_636_127_613_74,
            g_read: -3.087_464_528_932_961,
        }
    }
}

impl SystemParams {
    /// Parameters with a prescribed total coherence decay `γ₁₂`.
    ///
    /// The pump is switched off and `γ₀ = γ₁₂ − Γc`, everything else keeps
    /// its default.
    pub fn with_gamma12(delta0: f64, gamma_c: f64, gamma12: f64) -> Self {
        Self {
            delta0,
            gamma_c,
            gamma0: gamma12 - gamma_c,
            control_rabi: 0.0,
            ..Self::default()
        }
    }

    /// Optical pumping rate Γ_P = Ω₁²/γ₁₃ of one control beam.
    pub fn pumping_rate(&self) -> f64 {
        self.control_rabi * self.control_rabi / self.gamma13
    }

    /// Power-broadened coherence decay γ₁₂ = γ₀ + Γc + 2Γ_P.
    pub fn gamma12(&self) -> f64 {
        self.gamma0 + self.gamma_c + 2.0 * self.pumping_rate()
    }

    /// Multiplies every rate and frequency by `scale` (normalized → rad/s).
    pub fn scaled(&self, scale: f64) -> Self {
        Self {
            delta0: self.delta0 * scale,
            gamma0: self.gamma0 * scale,
            gamma_c: self.gamma_c * scale,
            control_rabi: self.control_rabi * scale,
            gamma13: self.gamma13 * scale,
            omega_larmor: self.omega_larmor * scale,
            broad_width: self.broad_width * scale,
            g_read: self.g_read * scale,
            ..*self
        }
    }

    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("delta0", self.delta0),
            ("gamma0", self.gamma0),
            ("gamma_c", self.gamma_c),
            ("control_rabi", self.control_rabi),
            ("gamma13", self.gamma13),
            ("omega_larmor", self.omega_larmor),
            ("n_exc", self.n_exc),
            ("eta_read", self.eta_read),
            ("broad_amp", self.broad_amp),
            ("broad_width", self.broad_width),
            ("alpha_bg", self.alpha_bg),
            ("g_read", self.g_read),
        ];
        if let Some((name, _)) = fields.iter().find(|(_, v)| !v.is_finite()) {
            return Err(Error::InvalidParams(format!("{name} is not finite")));
        }
        let positive = |name: &str, v: f64| {
            if v > 0.0 {
                Ok(())
            } else {
                Err(Error::InvalidParams(format!("{name} must be > 0, got {v}")))
            }
        };
        let non_negative = |name: &str, v: f64| {
            if v >= 0.0 {
                Ok(())
            } else {
                Err(Error::InvalidParams(format!("{name} must be >= 0, got {v}")))
            }
        };
        positive("gamma0", self.gamma0)?;
        positive("gamma13", self.gamma13)?;
        non_negative("gamma_c", self.gamma_c)?;
        non_negative("n_exc", self.n_exc)?;
        non_negative("eta_read", self.eta_read)?;
        non_negative("broad_amp", self.broad_amp)?;
        non_negative("broad_width", self.broad_width)?;
        if self.broad_amp > 0.0 && self.broad_width <= 0.0 {
            return Err(Error::InvalidParams(
                "broad_width must be > 0 when broad_amp > 0".into(),
            ));
        }
        if self.gamma12() <= self.gamma_c {
            return Err(Error::InvalidParams(format!(
                "gamma12 = {} must exceed gamma_c = {}",
                self.gamma12(),
                self.gamma_c
            )));
        }
        Ok(())
    }
}

/// Free-function form of [`SystemParams::gamma12`].
pub fn gamma12(params: &SystemParams) -> f64 {
    params.gamma12()
}

/// Anti-PT phase of the supermode pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Regime {
    Unbroken,
    ExceptionalPoint,
    Broken,
}

/// The two eigen-EIT supermodes. Real part = centre, `−Im` = linewidth.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SupermodePair {
    pub omega_plus: C64,
    pub omega_minus: C64,
    pub regime: Regime,
}

impl SupermodePair {
    pub fn real_gap(&self) -> f64 {
        (self.omega_plus.re - self.omega_minus.re).abs()
    }

    pub fn imag_gap(&self) -> f64 {
        (self.omega_plus.im - self.omega_minus.im).abs()
    }
}

/// The effective Hamiltonian. Consumes `|Δ₀|`.
pub fn build_hamiltonian(params: &SystemParams) -> Matrix2<C64> {
    let d = params.delta0.abs();
    let g = params.gamma12();
    let c = C64::new(0.0, params.gamma_c);
    Matrix2::new(C64::new(d, -g), c, c, C64::new(-d, -g))
}

/// Image of `h` under the antilinear swap `PT`: `P·h*·P`.
///
/// An anti-PT-symmetric generator satisfies `pt_conjugate(h) == -h`.
pub fn pt_conjugate(h: &Matrix2<C64>) -> Matrix2<C64> {
    Matrix2::new(
        h[(1, 1)].conj(),
        h[(1, 0)].conj(),
        h[(0, 1)].conj(),
        h[(0, 0)].conj(),
    )
}

/// Classifies `|Δ₀|` against `Γc` with relative tolerance `tol`.
pub fn classify_regime(delta0: f64, gamma_c: f64, tol: f64) -> Regime {
    let d = delta0.abs();
    if (d - gamma_c).abs() <= tol * gamma_c {
        Regime::ExceptionalPoint
    } else if d < gamma_c * (1.0 - tol) {
        Regime::Unbroken
    } else {
        Regime::Broken
    }
}

/// Closed-form supermodes `ω± = −iγ₁₂ ± √(Δ₀² − Γc²)`, principal branch.
///
/// `ω₊` has the larger real part in the broken phase and the smaller
/// linewidth in the unbroken phase. `Γc = Δ₀ = 0` is reported as an
/// exceptional point with both modes at `−iγ₁₂`.
pub fn supermodes(params: &SystemParams, tol: f64) -> Result<SupermodePair> {
    if !(tol > 0.0) {
        return Err(Error::InvalidParams(format!("tol must be > 0, got {tol}")));
    }
    params.validate()?;
    let d = params.delta0;
    let gc = params.gamma_c;
    let root = C64::new(d * d - gc * gc, 0.0).sqrt();
    let centre = C64::new(0.0, -params.gamma12());
    Ok(SupermodePair {
        omega_plus: centre + root,
        omega_minus: centre - root,
        regime: classify_regime(d, gc, tol),
    })
}

/// One row of an eigen-gap sweep.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EigenGapRow {
    pub delta0: f64,
    pub re_gap: f64,
    pub im_gap: f64,
}

/// Real- and imaginary-part supermode gaps over a Δ₀ grid.
pub fn eigengap_sweep(params: &SystemParams, delta0_grid: &[f64]) -> Result<Vec<EigenGapRow>> {
    params.validate()?;
    check_grid(delta0_grid, "delta0 grid")?;
    delta0_grid
        .iter()
        .map(|&delta0| {
            let p = SystemParams { delta0, ..*params };
            let modes = supermodes(&p, DEFAULT_EP_TOL)?;
            Ok(EigenGapRow {
                delta0,
                re_gap: modes.real_gap(),
                im_gap: modes.imag_gap(),
            })
        })
        .collect()
}

/// Eigenvalues of a general complex 2×2 matrix from a Schur decomposition,
/// sorted by descending real part then descending imaginary part.
pub fn eigenvalues_numeric(h: &Matrix2<C64>) -> Result<[C64; 2]> {
    let ev = nalgebra::linalg::Schur::new(*h)
        .eigenvalues()
        .ok_or(Error::NumericDegeneracy("Schur decomposition did not triangularize".into()))?;
    let mut out = [ev[0], ev[1]];
    out.sort_by(|a, b| {
        b.re.partial_cmp(&a.re)
            .unwrap()
            .then(b.im.partial_cmp(&a.im).unwrap())
    });
    Ok(out)
}
