//! Driven steady state of the two coupled EIT channels and the thin-medium
//! probe readout built on it.
//!
//! Unlike [`build_hamiltonian`](crate::effective_model::build_hamiltonian),
//! the detuning enters here with its sign: channel 1 sits at `+Δ₀` and
//! channel 2 at `−Δ₀`, so exchanging the channels is the same as flipping
//! `Δ₀`.

use std::f64::consts::TAU;

use nalgebra::{Matrix2, Vector2};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::effective_model::SystemParams;
use crate::error::{Error, Result};
use crate::linalg::check_grid;
use crate::C64;

/// Probe amplitudes and the channel-1 probe/control phase.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ProbeConfig {
    /// `[re, im]` in JSON.
    pub e_in_1: Complex64,
    pub e_in_2: Complex64,
    pub phi_1: f64,
    pub channel_1_enabled: bool,
    pub channel_2_enabled: bool,
}

impl Default for ProbeConfig {
    fn default() -> Self {
        Self {
            e_in_1: C64::new(1.0, 0.0),
            e_in_2: C64::new(1.0, 0.0),
            phi_1: 0.0,
            channel_1_enabled: true,
            channel_2_enabled: true,
        }
    }
}

impl ProbeConfig {
    /// Same probes with only channel `ch` (1 or 2) switched on.
    pub fn channel_only(&self, ch: usize) -> Self {
        Self {
            channel_1_enabled: ch == 1,
            channel_2_enabled: ch == 2,
            ..*self
        }
    }

    fn enabled(&self) -> [bool; 2] {
        [self.channel_1_enabled, self.channel_2_enabled]
    }

    fn coupled(&self) -> bool {
        self.channel_1_enabled && self.channel_2_enabled
    }

    fn validate(&self) -> Result<()> {
        if !self.channel_1_enabled && !self.channel_2_enabled {
            return Err(Error::InvalidParams("at least one probe channel must be enabled".into()));
        }
        let amps = [self.e_in_1, self.e_in_2];
        for (j, (e, on)) in amps.iter().zip(self.enabled()).enumerate() {
            if !e.re.is_finite() || !e.im.is_finite() {
                return Err(Error::NonFinite("probe amplitude"));
            }
            if on && e.norm() == 0.0 {
                return Err(Error::InvalidParams(format!("probe {} is enabled with zero amplitude", j + 1)));
            }
        }
        if !self.phi_1.is_finite() {
            return Err(Error::NonFinite("phi_1"));
        }
        Ok(())
    }

    fn phase_factors(&self) -> [C64; 2] {
        [C64::from_polar(1.0, self.phi_1), C64::new(1.0, 0.0)]
    }
}

/// Drive strength per unit probe amplitude, `Ω₁/γ₁₃`.
pub fn drive_strength(params: &SystemParams) -> f64 {
    params.control_rabi / params.gamma13
}

/// Solves `0 = i(δ_B − H)σ + s` for the two ground-state coherences.
///
/// Disabling a channel removes its drive and cuts the coupling.
pub fn coherence_steady_state(params: &SystemParams, delta_b: f64, probes: &ProbeConfig) -> Result<(C64, C64)> {
    params.validate()?;
    probes.validate()?;
    if !delta_b.is_finite() {
        return Err(Error::NonFinite("delta_b"));
    }
    Ok(solve(params, delta_b, probes))
}

fn solve(params: &SystemParams, delta_b: f64, probes: &ProbeConfig) -> (C64, C64) {
    let g = params.gamma12();
    let d = params.delta0;
    let gc = if probes.coupled() { params.gamma_c } else { 0.0 };
    let a = Matrix2::new(
        C64::new(-g, delta_b - d),
        C64::new(gc, 0.0),
        C64::new(gc, 0.0),
        C64::new(-g, delta_b + d),
    );
    let kappa = drive_strength(params);
    let [p1, p2] = probes.phase_factors();
    let [on1, on2] = probes.enabled();
    let s = Vector2::new(
        if on1 { C64::new(0.0, kappa) * probes.e_in_1 * p1 } else { C64::default() },
        if on2 { C64::new(0.0, kappa) * probes.e_in_2 * p2 } else { C64::default() },
    );
    // γ₁₂ > Γc keeps det(A) away from zero, so the explicit inverse is safe.
    let det = a[(0, 0)] * a[(1, 1)] - a[(0, 1)] * a[(1, 0)];
    let x0 = -(a[(1, 1)] * s[0] - a[(0, 1)] * s[1]) / det;
    let x1 = -(a[(0, 0)] * s[1] - a[(1, 0)] * s[0]) / det;
    (x0, x1)
}

/// Gains of both channels at one two-photon detuning.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProbeGains {
    pub gain_1: f64,
    pub gain_2: f64,
    /// `true` for a channel that was switched off; its gain is the bare
    /// background absorption `−α_bg(2 − α_bg)`.
    pub disabled: [bool; 2],
}

/// `|e_out/e_in|² − 1` with `e_out = e_in(1 − α_bg) + i·g_read·σ·e^{−iφ}`.
pub fn probe_gain(params: &SystemParams, delta_b: f64, probes: &ProbeConfig) -> Result<ProbeGains> {
    let _ = coherence_steady_state(params, delta_b, probes)?;
    Ok(gain_unchecked(params, delta_b, probes))
}

fn gain_unchecked(params: &SystemParams, delta_b: f64, probes: &ProbeConfig) -> ProbeGains {
    let (s1, s2) = solve(params, delta_b, probes);
    let t = 1.0 - params.alpha_bg;
    let bare = t * t - 1.0;
    let [p1, p2] = probes.phase_factors();
    let read = C64::new(0.0, params.g_read);
    let gain = |e: C64, sigma: C64, p: C64, on: bool| {
        if on {
            ((e * t + read * sigma * p.conj()) / e).norm_sqr() - 1.0
        } else {
            bare
        }
    };
    let [on1, on2] = probes.enabled();
    ProbeGains {
        gain_1: gain(probes.e_in_1, s1, p1, on1),
        gain_2: gain(probes.e_in_2, s2, p2, on2),
        disabled: [!on1, !on2],
    }
}

/// Readout calibration `(α_bg, g_read)` such that a single channel on
/// resonance transmits amplitude `t_uncoupled` and the symmetric coupled
/// pair at `Δ₀ = 0` reaches power gain `coupled_gain`.
pub fn calibrate_readout(params: &SystemParams, t_uncoupled: f64, coupled_gain: f64) -> Result<(f64, f64)> {
    params.validate()?;
    let g = params.gamma12();
    let gc = params.gamma_c;
    if gc <= 0.0 {
        return Err(Error::InvalidParams("calibration needs gamma_c > 0".into()));
    }
    if !(coupled_gain > -1.0) || !(t_uncoupled > 0.0) {
        return Err(Error::InvalidParams("calibration targets out of range".into()));
    }
    let t_coupled = (1.0 + coupled_gain).sqrt();
    // e_out = (1 − α) + G/(γ − Γc) coupled, (1 − α) + G/γ uncoupled, G = −g_read·κ
    let gr = (t_coupled - t_uncoupled) / (1.0 / (g - gc) - 1.0 / g);
    let alpha = 1.0 - t_uncoupled + gr / g;
    Ok((alpha, -gr / drive_strength(params)))
}

/// Whether a channel on its own can only attenuate: with the coupling cut
/// the on-resonance output `1 − α_bg − g_read·κ/γ₁₂` must stay within
/// `[−1, 1]` (`κ` is the drive strength; the off-resonance output lies on
/// a circle through that point and `1 − α_bg`).
pub fn readout_is_passive(params: &SystemParams) -> bool {
    let t = 1.0 - params.alpha_bg;
    let peak = t - params.g_read * drive_strength(params) / params.gamma12();
    t.abs() <= 1.0 && peak.abs() <= 1.0
}

/// Gain traces over a two-photon detuning grid with their peaks.
#[derive(Debug, Clone, PartialEq)]
pub struct EitSpectrum {
    pub delta_b_grid: Vec<f64>,
    pub gain_1: Vec<f64>,
    pub gain_2: Vec<f64>,
    /// `None` for a flat trace.
    pub peak_1: Option<f64>,
    pub peak_2: Option<f64>,
    /// `|peak_1 − peak_2|`; `None` when either peak is undefined.
    pub separation: Option<f64>,
    pub disabled: [bool; 2],
}

fn check_spectrum_grid(grid: &[f64], what: &'static str) -> Result<()> {
    check_grid(grid, what)?;
    if grid.len() < 3 {
        return Err(Error::InvalidParams(format!("{what} needs at least 3 points")));
    }
    Ok(())
}

pub fn eit_spectrum(params: &SystemParams, grid: &[f64], probes: &ProbeConfig) -> Result<EitSpectrum> {
    params.validate()?;
    probes.validate()?;
    check_spectrum_grid(grid, "delta_b grid")?;
    let rows: Vec<ProbeGains> = grid.par_iter().map(|&x| gain_unchecked(params, x, probes)).collect();
    let gain_1: Vec<f64> = rows.iter().map(|r| r.gain_1).collect();
    let gain_2: Vec<f64> = rows.iter().map(|r| r.gain_2).collect();
    if gain_1.iter().chain(&gain_2).any(|g| !g.is_finite()) {
        return Err(Error::NonFinite("probe gain"));
    }
    let peak_1 = find_peak(grid, &gain_1);
    let peak_2 = find_peak(grid, &gain_2);
    let separation = peak_1.zip(peak_2).map(|(a, b)| (a - b).abs());
    Ok(EitSpectrum {
        delta_b_grid: grid.to_vec(),
        gain_1,
        gain_2,
        peak_1,
        peak_2,
        separation,
        disabled: rows[0].disabled,
    })
}

/// Vertex of the parabola through the grid argmax and its neighbours.
/// Exact ties go to the smaller `|x|`; a flat trace has no peak.
pub fn find_peak(x: &[f64], y: &[f64]) -> Option<f64> {
    let (lo, hi) = y.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)));
    if x.is_empty() || !(hi - lo > 1e-12 * hi.abs().max(1.0)) {
        return None;
    }
    let mut k = 0;
    for i in 1..y.len() {
        if y[i] > y[k] || (y[i] == y[k] && x[i].abs() < x[k].abs()) {
            k = i;
        }
    }
    if k == 0 || k + 1 == y.len() {
        return Some(x[k]);
    }
    let (x0, x1, x2) = (x[k - 1], x[k], x[k + 1]);
    let (y0, y1, y2) = (y[k - 1], y[k], y[k + 1]);
    let num = (x1 - x0).powi(2) * (y1 - y2) - (x1 - x2).powi(2) * (y1 - y0);
    let den = (x1 - x0) * (y1 - y2) - (x1 - x2) * (y1 - y0);
    if den == 0.0 {
        return Some(x1);
    }
    Some(x1 - 0.5 * num / den)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PhaseRow {
    pub phi: f64,
    pub gain_1: f64,
    pub gain_2: f64,
}

/// On-resonance gains as the channel-1 probe phase is swept.
pub fn phase_sweep(params: &SystemParams, phi_grid: &[f64], probes: &ProbeConfig) -> Result<Vec<PhaseRow>> {
    params.validate()?;
    probes.validate()?;
    check_grid(phi_grid, "phi grid")?;
    let span = phi_grid[phi_grid.len() - 1] - phi_grid[0];
    if span < TAU * (1.0 - 1e-12) {
        return Err(Error::InvalidParams(format!("phi grid spans {span}, needs at least 2π")));
    }
    Ok(phi_grid
        .par_iter()
        .map(|&phi| {
            let g = gain_unchecked(params, 0.0, &ProbeConfig { phi_1: phi, ..*probes });
            PhaseRow { phi, gain_1: g.gain_1, gain_2: g.gain_2 }
        })
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeparationRow {
    pub delta0: f64,
    pub separation: Option<f64>,
}

/// Peak separation of the coupled gain traces as `Δ₀` is swept.
pub fn separation_sweep(
    params: &SystemParams,
    delta0_grid: &[f64],
    delta_b_grid: &[f64],
    probes: &ProbeConfig,
) -> Result<Vec<SeparationRow>> {
    check_grid(delta0_grid, "delta0 grid")?;
    delta0_grid
        .iter()
        .map(|&delta0| {
            let s = eit_spectrum(&SystemParams { delta0, ..*params }, delta_b_grid, probes)?;
            Ok(SeparationRow { delta0, separation: s.separation })
        })
        .collect()
}

/// Interior abscissa where `|y''|` (three-point second difference) is
/// largest. Unlike geometric curvature this does not depend on the units
/// chosen for the two axes.
pub fn max_curvature_point(x: &[f64], y: &[f64]) -> Option<f64> {
    if x.len() < 3 || x.len() != y.len() {
        return None;
    }
    let mut best: Option<(f64, f64)> = None;
    for k in 1..x.len() - 1 {
        let (h0, h1) = (x[k] - x[k - 1], x[k + 1] - x[k]);
        let d2 = 2.0 * ((y[k + 1] - y[k]) / h1 - (y[k] - y[k - 1]) / h0) / (h0 + h1);
        if d2.is_finite() && best.is_none_or(|(_, b)| d2.abs() > b) {
            best = Some((x[k], d2.abs()));
        }
    }
    best.map(|(xk, _)| xk)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
        (0..n).map(|k| a + (b - a) * k as f64 / (n - 1) as f64).collect()
    }

    #[test]
    fn decoupled_lorentzian() {
        let p = SystemParams { gamma_c: 0.0, delta0: 1.5, ..SystemParams::default() };
        let probes = ProbeConfig { e_in_1: C64::new(0.3, -0.7), phi_1: 0.4, ..Default::default() };
        let k = drive_strength(&p);
        let g = p.gamma12();
        for db in [-3.0, 0.0, 2.2] {
            let (s1, s2) = coherence_steady_state(&p, db, &probes).unwrap();
            let d1 = C64::new(0.0, k) * probes.e_in_1 * C64::from_polar(1.0, 0.4);
            let d2 = C64::new(0.0, k) * probes.e_in_2;
            let want1 = d1 / C64::new(g, -(db - 1.5));
            let want2 = d2 / C64::new(g, -(db + 1.5));
            assert!((s1 - want1).norm() < 1e-15 && (s2 - want2).norm() < 1e-15);
        }
    }

    #[test]
    fn coupling_stimulates_coherence() {
        let p = SystemParams::default();
        let (c1, c2) = coherence_steady_state(&p, 0.0, &ProbeConfig::default()).unwrap();
        let (u1, _) = coherence_steady_state(&p, 0.0, &ProbeConfig::default().channel_only(1)).unwrap();
        let (_, u2) = coherence_steady_state(&p, 0.0, &ProbeConfig::default().channel_only(2)).unwrap();
        assert!(c1.norm() > u1.norm() && c2.norm() > u2.norm());
    }

    #[test]
    fn frozen_calibration_reproduces_targets() {
        let p = SystemParams::default();
        let (alpha, g_read) = calibrate_readout(&p, 0.99, 0.10).unwrap();
        assert_relative_eq!(alpha, p.alpha_bg, max_relative = 1e-12);
        assert_relative_eq!(g_read, p.g_read, max_relative = 1e-12);
        let g = probe_gain(&p, 0.0, &ProbeConfig::default()).unwrap();
        assert!((g.gain_1 - 0.10).abs() < 1e-9 && (g.gain_2 - 0.10).abs() < 1e-9);
        let u = probe_gain(&p, 0.0, &ProbeConfig::default().channel_only(1)).unwrap();
        assert_relative_eq!(u.gain_1, 0.99f64.powi(2) - 1.0, max_relative = 1e-12);
        assert!(u.disabled[1]);
        assert_relative_eq!(u.gain_2, -p.alpha_bg * (2.0 - p.alpha_bg), max_relative = 1e-12);
    }

    #[test]
    fn zero_drive_and_bad_probes() {
        let p = SystemParams::default();
        let off = ProbeConfig { channel_1_enabled: false, channel_2_enabled: false, ..Default::default() };
        assert!(coherence_steady_state(&p, 0.0, &off).is_err());
        let zero = ProbeConfig { e_in_1: C64::default(), ..Default::default() };
        assert!(probe_gain(&p, 0.0, &zero).is_err());
        let quiet = ProbeConfig { e_in_2: C64::default(), ..Default::default() }.channel_only(1);
        let (s1, s2) = coherence_steady_state(&p, 0.0, &ProbeConfig { e_in_1: C64::new(1e-300, 0.0), ..quiet })
            .unwrap();
        assert!(s1.norm() < 1e-290 && s2 == C64::default());
    }

    #[test]
    fn uncoupled_peaks_sit_at_plus_minus_detuning() {
        let p = SystemParams { gamma_c: 0.0, delta0: 1.0, ..SystemParams::default() };
        let grid = linspace(-20.0, 20.0, 801);
        let s = eit_spectrum(&p, &grid, &ProbeConfig::default()).unwrap();
        assert!((s.peak_1.unwrap() - 1.0).abs() < 1e-9);
        assert!((s.peak_2.unwrap() + 1.0).abs() < 1e-9);
        assert!((s.separation.unwrap() - 2.0).abs() < 1e-9);
    }

    #[test]
    fn isolated_channel_is_passive_when_readout_is() {
        let p = SystemParams { gamma_c: 0.0, delta0: 1.0, ..SystemParams::default() };
        // defaults were calibrated with the coupling included in γ₁₂
        assert!(!readout_is_passive(&p));
        let grid = linspace(-20.0, 20.0, 801);
        let s = eit_spectrum(&p, &grid, &ProbeConfig::default()).unwrap();
        assert!(s.gain_1.iter().any(|&g| g > 0.0));

        let p = SystemParams { alpha_bg: 0.2, ..p };
        assert!(readout_is_passive(&p));
        let s = eit_spectrum(&p, &grid, &ProbeConfig::default()).unwrap();
        assert!(s.gain_1.iter().chain(&s.gain_2).all(|&g| g <= 0.0));
        // uncoupled runs of the calibrated defaults keep γ₁₂ and stay passive
        let s = eit_spectrum(&SystemParams::default(), &grid, &ProbeConfig::default().channel_only(1)).unwrap();
        assert!(s.gain_1.iter().all(|&g| g <= 0.0));
    }

    #[test]
    fn strong_coupling_merges_and_weak_coupling_splits() {
        let grid = linspace(-60.0, 60.0, 4001);
        let merged = SystemParams { delta0: 0.2, ..SystemParams::default() };
        let s = eit_spectrum(&merged, &grid, &ProbeConfig::default()).unwrap();
        let sep = s.separation.unwrap();
        assert!(sep < 2.0 * 0.2 && sep < 0.1 * merged.gamma_c);
        let split = SystemParams { delta0: 30.0, ..SystemParams::default() };
        let s = eit_spectrum(&split, &grid, &ProbeConfig::default()).unwrap();
        let want = 2.0 * (30.0f64.powi(2) - 16.0).sqrt();
        assert!((s.separation.unwrap() - want).abs() < 0.02 * want);
    }

    #[test]
    fn disabled_channel_is_flat() {
        let grid = linspace(-10.0, 10.0, 41);
        let s = eit_spectrum(&SystemParams::default(), &grid, &ProbeConfig::default().channel_only(2)).unwrap();
        assert_eq!(s.peak_1, None);
        assert_eq!(s.separation, None);
        assert!(s.peak_2.is_some());
        assert!(eit_spectrum(&SystemParams::default(), &grid[..2], &ProbeConfig::default()).is_err());
    }

    #[test]
    fn peak_interpolation() {
        let x = linspace(-1.0, 1.0, 21);
        let y: Vec<f64> = x.iter().map(|v| -(v - 0.237).powi(2)).collect();
        assert_relative_eq!(find_peak(&x, &y).unwrap(), 0.237, epsilon = 1e-12);
        let tie = [-1.0, 0.5, 1.0];
        assert_eq!(find_peak(&[-2.0, 0.0, 2.0], &[1.0, 0.0, 1.0]), Some(-2.0));
        assert_eq!(find_peak(&tie, &[3.0, 3.0, 3.0]), None);
    }

    #[test]
    fn phase_sweep_periodic_and_flat_when_uncoupled() {
        let phis = linspace(0.0, TAU, 65);
        let rows = phase_sweep(&SystemParams::default(), &phis, &ProbeConfig::default()).unwrap();
        let (a, b) = (rows[0], rows[64]);
        assert!((a.gain_1 - b.gain_1).abs() < 1e-12 && (a.gain_2 - b.gain_2).abs() < 1e-12);
        let spread = |f: fn(&PhaseRow) -> f64| {
            let v: Vec<f64> = rows.iter().map(f).collect();
            v.iter().cloned().fold(f64::MIN, f64::max) - v.iter().cloned().fold(f64::MAX, f64::min)
        };
        assert!(spread(|r| r.gain_1) > 0.01 && spread(|r| r.gain_2) > 0.01);

        let p0 = SystemParams { gamma_c: 0.0, ..SystemParams::default() };
        let flat = phase_sweep(&p0, &phis, &ProbeConfig::default()).unwrap();
        assert!(flat.iter().all(|r| (r.gain_1 - flat[0].gain_1).abs() < 1e-14));
        assert!(phase_sweep(&p0, &linspace(0.0, 3.0, 5), &ProbeConfig::default()).is_err());
    }

    #[test]
    fn separation_at_zero_detuning_vanishes() {
        let grid = linspace(-30.0, 30.0, 601);
        let rows = separation_sweep(&SystemParams::default(), &[0.0, 12.0], &grid, &ProbeConfig::default()).unwrap();
        assert!(rows[0].separation.unwrap().abs() < 1e-12);
        let want = 2.0 * (144.0f64 - 16.0).sqrt();
        assert!((rows[1].separation.unwrap() - want).abs() < 0.1 * want);
    }

    #[test]
    fn curvature_of_a_kink() {
        let x = linspace(0.0, 2.0, 21);
        let y: Vec<f64> = x.iter().map(|v| (v - 1.0f64).max(0.0)).collect();
        assert_relative_eq!(max_curvature_point(&x, &y).unwrap(), 1.0, epsilon = 1e-12);
        assert_eq!(max_curvature_point(&x[..2], &y[..2]), None);
    }
}
