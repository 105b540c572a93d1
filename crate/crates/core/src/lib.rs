//! Two atomic spin-wave channels coupled dissipatively by atomic motion.
//!
//! The crate models the anti-PT-symmetric two-mode system
//!
//! ```text
//! H = [ |Δ₀| − iγ₁₂      iΓc      ]
//!     [    iΓc       −|Δ₀| − iγ₁₂ ]
//! ```
//!
//! with `γ₁₂ = γ₀ + Γc + 2Γ_P` and `Γ_P = Ω₁²/γ₁₃`, and builds on it:
//!
//! * [`effective_model`]: parameters, supermodes `ω± = −iγ₁₂ ± √(Δ₀² − Γc²)`
//!   and the exceptional-point regime classification.
//! * [`langevin_spectra`]: Langevin noise dynamics, shot-noise normalized
//!   homodyne spectra, and an Euler–Maruyama time-domain oracle.
//! * [`gaussian_info`]: two-mode Gaussian toolkit (symplectic spectrum,
//!   standard form, Gaussian discord with a brute-force oracle, Duan value).
//! * [`eit_semiclassical`]: driven steady state, probe gain, phase
//!   sensitivity and EIT peak separation.
//! * [`microscopic_exchange`]: beam/beam/dark compartment model, adiabatic
//!   reduction to the effective coupling and a Monte Carlo atom oracle.
//! * [`cli`]: JSON run configurations and the CSV/JSON emitters behind the
//!   `antipt` binary.
//!
//! All rates and frequencies are angular (rad/s). The defaults use
//! normalized units with `γ₀ = 1`.

pub mod cli;
pub mod effective_model;
pub mod eit_semiclassical;
pub mod error;
pub mod gaussian_info;
pub mod langevin_spectra;
pub mod microscopic_exchange;

mod linalg;

pub use effective_model::{Regime, SupermodePair, SystemParams};
pub use error::{Error, Result};
pub use gaussian_info::{CovarianceMatrix4, DiscordResult, MeasuredMode};
pub use langevin_spectra::NoiseSpectrum;

/// Complex scalar used throughout.
pub type C64 = num_complex::Complex64;
