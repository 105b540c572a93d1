//! Beam 1 / beam 2 / dark compartment model of atoms carrying ground-state
//! coherence between the two illuminated regions.
//!
//! Coherences are tracked in the basis `(c₁, c₂*, c_D)`, matching the
//! `(b₁, b₂†)` ordering of [`langevin_spectra`](crate::langevin_spectra).
//! All compartment quantities are ensemble totals (occupancy weighted), so
//! the dynamics is linear and the Monte Carlo average is directly
//! comparable with the ODE.

mod monte_carlo;

pub use monte_carlo::{monte_carlo_exchange, McConfig, McTrajectory};

use nalgebra::{Matrix2, Matrix3, Vector3};
use serde::{Deserialize, Serialize};

use crate::effective_model::SystemParams;
use crate::error::{Error, Result};
use crate::langevin_spectra::NoiseModel;
use crate::C64;

/// Rates of the compartment model. Defaults are normalized and not tied
/// to a particular cell.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MicroParams {
    /// beam → dark
    pub r_exit: f64,
    /// dark → beams, split equally
    pub r_return: f64,
    pub gamma_dark: f64,
    /// optical pumping inside each beam
    pub pump_rate: f64,
    /// extra coherence decay inside the beams
    pub gamma_local: f64,
    pub delta0: f64,
    pub omega_larmor: f64,
}

impl Default for MicroParams {
    fn default() -> Self {
        Self {
            r_exit: 2.0,
            r_return: 60.0,
            gamma_dark: 1.0,
            pump_rate: 0.5,
            gamma_local: 0.5,
            delta0: 0.0,
            omega_larmor: 1000.0,
        }
    }
}

impl MicroParams {
    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("r_exit", self.r_exit),
            ("r_return", self.r_return),
            ("gamma_dark", self.gamma_dark),
            ("pump_rate", self.pump_rate),
            ("gamma_local", self.gamma_local),
        ];
        for (name, v) in fields {
            if !v.is_finite() {
                return Err(Error::NonFinite(name));
            }
            if v < 0.0 {
                return Err(Error::InvalidParams(format!("{name} must be >= 0, got {v}")));
            }
        }
        if !self.delta0.is_finite() || !self.omega_larmor.is_finite() {
            return Err(Error::NonFinite("delta0/omega_larmor"));
        }
        if self.r_exit > 0.0 && self.r_return <= 0.0 {
            return Err(Error::InvalidParams("r_return must be > 0 when r_exit > 0".into()));
        }
        Ok(())
    }

    /// Rates multiplied by `scale` (times divided by it).
    pub fn scaled(&self, scale: f64) -> Self {
        Self {
            r_exit: self.r_exit * scale,
            r_return: self.r_return * scale,
            gamma_dark: self.gamma_dark * scale,
            pump_rate: self.pump_rate * scale,
            gamma_local: self.gamma_local * scale,
            delta0: self.delta0 * scale,
            omega_larmor: self.omega_larmor * scale,
        }
    }

    /// Coherence decay inside a beam, not counting the exit.
    pub fn beam_decay(&self) -> f64 {
        self.pump_rate + self.gamma_local
    }

    pub(crate) fn max_rate(&self) -> f64 {
        [self.r_exit, self.r_return, self.gamma_dark, self.beam_decay(), self.delta0.abs()]
            .into_iter()
            .fold(0.0, f64::max)
    }
}

/// Per-compartment totals in the order beam 1, beam 2, dark.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CompartmentState {
    /// `(c₁, c₂*, c_D)`
    pub coherence: [C64; 3],
    pub occupancy: [f64; 3],
    /// Occupancy-weighted population imbalance; `|imbalance| ≤ occupancy`.
    pub imbalance: [f64; 3],
}

impl CompartmentState {
    /// Exchange-stationary occupancies, unit coherence in the beams,
    /// empty dark coherence and no imbalance.
    pub fn prepared(mp: &MicroParams) -> Self {
        let occ = if mp.r_exit + mp.r_return > 0.0 {
            let beam = 0.5 * mp.r_return / (mp.r_exit + mp.r_return);
            [beam, beam, 1.0 - 2.0 * beam]
        } else {
            [0.5, 0.5, 0.0]
        };
        Self {
            coherence: [C64::new(occ[0], 0.0), C64::new(occ[1], 0.0), C64::default()],
            occupancy: occ,
            imbalance: [0.0; 3],
        }
    }

    fn to_vectors(self) -> (Vector3<C64>, [f64; 6]) {
        let p = self.occupancy;
        let w = self.imbalance;
        (Vector3::from(self.coherence), [p[0], p[1], p[2], w[0], w[1], w[2]])
    }

    fn from_vectors(c: &Vector3<C64>, pw: &[f64; 6]) -> Self {
        Self {
            coherence: [c[0], c[1], c[2]],
            occupancy: [pw[0], pw[1], pw[2]],
            imbalance: [pw[3], pw[4], pw[5]],
        }
    }

    pub fn is_physical(&self, tol: f64) -> bool {
        self.coherence.iter().all(|z| z.re.is_finite() && z.im.is_finite())
            && self.occupancy.iter().all(|&p| (-tol..=1.0 + tol).contains(&p))
            && self.imbalance.iter().zip(&self.occupancy).all(|(w, p)| w.abs() <= p + tol)
    }
}

/// Linear generators of the compartment dynamics.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CompartmentGenerator {
    /// acts on `(c₁, c₂*, c_D)`
    pub coherence: Matrix3<C64>,
    /// acts on `(P₁, P₂, P_D, W₁, W₂, W_D)`
    pub population: nalgebra::Matrix6<f64>,
}

/// Exchange part only: columns sum to zero.
pub fn exchange_matrix(mp: &MicroParams) -> Matrix3<f64> {
    let (e, r) = (mp.r_exit, mp.r_return);
    Matrix3::new(
        -e, 0.0, 0.5 * r, //
        0.0, -e, 0.5 * r, //
        e, e, -r,
    )
}

pub fn build_compartment_generator(mp: &MicroParams) -> CompartmentGenerator {
    let x = exchange_matrix(mp);
    let kb = mp.beam_decay();
    let local = [C64::new(-kb, -mp.delta0), C64::new(-kb, mp.delta0), C64::new(-mp.gamma_dark, 0.0)];
    let coherence = Matrix3::from_fn(|i, j| C64::new(x[(i, j)], 0.0) + if i == j { local[i] } else { C64::default() });

    let gp = mp.pump_rate;
    let mut population = nalgebra::Matrix6::zeros();
    population.fixed_view_mut::<3, 3>(0, 0).copy_from(&x);
    population.fixed_view_mut::<3, 3>(3, 3).copy_from(&x);
    // pumping drives beam 1 towards +1 and beam 2 towards −1
    population[(3, 0)] += gp;
    population[(3, 3)] -= gp;
    population[(4, 1)] -= gp;
    population[(4, 4)] -= gp;
    population[(5, 5)] -= mp.gamma_dark;
    CompartmentGenerator { coherence, population }
}

/// Effective two-mode parameters after eliminating the dark compartment.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EffectiveCoupling {
    pub gamma_c_eff: f64,
    pub gamma12_eff: f64,
    /// Relative rms mismatch between the full and the effective beam
    /// response over `|ω| ≤ 3(γ₁₂ − Γc)`.
    pub residual: f64,
}

impl EffectiveCoupling {
    /// Effective-model parameters with the given excitation, pump off.
    pub fn system_params(&self, delta0: f64, n_exc: f64) -> SystemParams {
        SystemParams { n_exc, ..SystemParams::with_gamma12(delta0, self.gamma_c_eff, self.gamma12_eff) }
    }
}

/// Slaves the dark coherence to the beams: `c_D = r_exit(c₁ + c₂*)/(γ_D + r_return)`.
pub fn extract_effective_coupling(mp: &MicroParams) -> Result<EffectiveCoupling> {
    mp.validate()?;
    let dark = mp.gamma_dark + mp.r_return;
    if dark <= 0.0 {
        return Err(Error::NumericDegeneracy("dark compartment neither decays nor returns".into()));
    }
    let gamma_c_eff = mp.r_exit * mp.r_return / (2.0 * dark);
    let gamma12_eff = mp.beam_decay() + mp.r_exit - gamma_c_eff;
    let residual = response_residual(mp, gamma_c_eff, gamma12_eff, &fit_window(gamma_c_eff, gamma12_eff));
    Ok(EffectiveCoupling { gamma_c_eff, gamma12_eff, residual })
}

fn effective_drift(delta0: f64, gamma_c: f64, gamma12: f64) -> Matrix2<C64> {
    Matrix2::new(
        C64::new(-gamma12, -delta0),
        C64::new(gamma_c, 0.0),
        C64::new(gamma_c, 0.0),
        C64::new(-gamma12, delta0),
    )
}

/// Beam block of `(−iω − G)⁻¹` for the full three-compartment generator.
pub fn full_beam_response(mp: &MicroParams, omega: f64) -> Result<Matrix2<C64>> {
    let g = build_compartment_generator(mp).coherence;
    let inv = (Matrix3::from_diagonal_element(C64::new(0.0, -omega)) - g)
        .try_inverse()
        .ok_or(Error::Singular("compartment response"))?;
    Ok(inv.fixed_view::<2, 2>(0, 0).into_owned())
}

fn effective_response(delta0: f64, gamma_c: f64, gamma12: f64, omega: f64) -> Option<Matrix2<C64>> {
    (Matrix2::from_diagonal_element(C64::new(0.0, -omega)) - effective_drift(delta0, gamma_c, gamma12)).try_inverse()
}

fn fit_window(gamma_c: f64, gamma12: f64) -> Vec<f64> {
    let w = 3.0 * (gamma12 - gamma_c).max(1e-12);
    (0..=200).map(|k| -w + 2.0 * w * k as f64 / 200.0).collect()
}

fn residual_vector(mp: &MicroParams, full: &[Matrix2<C64>], omegas: &[f64], gc: f64, g12: f64) -> Vec<f64> {
    let scale = full.iter().flat_map(|m| m.iter().map(|z| z.norm())).fold(0.0, f64::max).max(f64::MIN_POSITIVE);
    let mut out = Vec::with_capacity(8 * omegas.len());
    for (f, &w) in full.iter().zip(omegas) {
        match effective_response(mp.delta0, gc, g12, w) {
            Some(e) => {
                for z in (e - f).iter() {
                    out.push(z.re / scale);
                    out.push(z.im / scale);
                }
            }
            None => out.extend(std::iter::repeat_n(1e6, 8)),
        }
    }
    out
}

fn response_residual(mp: &MicroParams, gc: f64, g12: f64, omegas: &[f64]) -> f64 {
    let full: Vec<_> = omegas.iter().filter_map(|&w| full_beam_response(mp, w).ok()).collect();
    if full.len() != omegas.len() {
        return f64::INFINITY;
    }
    let r = residual_vector(mp, &full, omegas, gc, g12);
    (r.iter().map(|x| x * x).sum::<f64>() / r.len() as f64).sqrt()
}

/// Least-squares fit of the two-mode response to the beam block of the
/// full response, independent of the elimination formula: started from
/// the inverse full response at `ω = 0` and refined by Levenberg–Marquardt.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResponseFit {
    pub gamma_c: f64,
    pub gamma12: f64,
    pub residual: f64,
    pub iterations: usize,
}

pub fn fit_full_response(mp: &MicroParams) -> Result<ResponseFit> {
    mp.validate()?;
    let r0 = full_beam_response(mp, 0.0)?;
    let m0 = -r0.try_inverse().ok_or(Error::Singular("static response"))?;
    let mut p = [0.5 * (m0[(0, 1)].re + m0[(1, 0)].re), -0.5 * (m0[(0, 0)].re + m0[(1, 1)].re)];
    let omegas = fit_window(p[0], p[1]);
    let full: Vec<_> = omegas.iter().map(|&w| full_beam_response(mp, w)).collect::<Result<_>>()?;
    let cost = |p: &[f64; 2]| residual_vector(mp, &full, &omegas, p[0], p[1]).iter().map(|x| x * x).sum::<f64>();

    let mut lambda = 1e-3;
    let mut c = cost(&p);
    let mut iterations = 0;
    for it in 0..200 {
        iterations = it + 1;
        let r = residual_vector(mp, &full, &omegas, p[0], p[1]);
        let mut jac = [vec![0.0; r.len()], vec![0.0; r.len()]];
        for (k, col) in jac.iter_mut().enumerate() {
            let h = 1e-7 * p[k].abs().max(1e-3);
            let mut q = p;
            q[k] += h;
            let rq = residual_vector(mp, &full, &omegas, q[0], q[1]);
            for (i, v) in col.iter_mut().enumerate() {
                *v = (rq[i] - r[i]) / h;
            }
        }
        let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>();
        let jtj = Matrix2::new(dot(&jac[0], &jac[0]), dot(&jac[0], &jac[1]), dot(&jac[1], &jac[0]), dot(&jac[1], &jac[1]));
        let jtr = nalgebra::Vector2::new(dot(&jac[0], &r), dot(&jac[1], &r));
        let mut improved = false;
        while lambda < 1e12 {
            let a = jtj + Matrix2::from_diagonal(&jtj.diagonal()) * lambda;
            let Some(step) = a.lu().solve(&(-jtr)) else { break };
            let q = [p[0] + step[0], p[1] + step[1]];
            let cq = cost(&q);
            if cq < c {
                let done = (c - cq) <= 1e-15 * c.max(1e-300);
                p = q;
                c = cq;
                lambda = (lambda * 0.3).max(1e-12);
                improved = !done;
                break;
            }
            lambda *= 10.0;
        }
        if !improved {
            break;
        }
    }
    if !p.iter().all(|v| v.is_finite()) {
        return Err(Error::NonFinite("response fit"));
    }
    Ok(ResponseFit {
        gamma_c: p[0],
        gamma12: p[1],
        residual: (c / (8 * omegas.len()) as f64).sqrt(),
        iterations,
    })
}

/// Solution of the compartment ODE sampled every `dt` (RK4 with internal
/// substeps).
pub fn compartment_ode(mp: &MicroParams, initial: &CompartmentState, dt: f64, t_total: f64) -> Result<Vec<CompartmentState>> {
    mp.validate()?;
    if !(dt > 0.0) || !(t_total >= 0.0) {
        return Err(Error::InvalidParams("dt must be > 0 and t_total >= 0".into()));
    }
    let gen = build_compartment_generator(mp);
    let n_steps = (t_total / dt).round() as usize;
    let sub = ((dt * mp.max_rate() / 0.02).ceil() as usize).max(1);
    let h = dt / sub as f64;

    let (mut c, mut pw) = initial.to_vectors();
    let pop = gen.population;
    let f_pw = |x: &[f64; 6]| {
        let v = pop * nalgebra::Vector6::from_column_slice(x);
        [v[0], v[1], v[2], v[3], v[4], v[5]]
    };
    let axpy = |a: &[f64; 6], s: f64, b: &[f64; 6]| std::array::from_fn::<f64, 6, _>(|i| a[i] + s * b[i]);

    let mut out = Vec::with_capacity(n_steps + 1);
    out.push(CompartmentState::from_vectors(&c, &pw));
    let hc = C64::new(h, 0.0);
    for _ in 0..n_steps {
        for _ in 0..sub {
            let k1 = gen.coherence * c;
            let k2 = gen.coherence * (c + k1 * (hc * 0.5));
            let k3 = gen.coherence * (c + k2 * (hc * 0.5));
            let k4 = gen.coherence * (c + k3 * hc);
            let two = C64::new(2.0, 0.0);
            c += (k1 + k2 * two + k3 * two + k4) * (hc / 6.0);

            let q1 = f_pw(&pw);
            let q2 = f_pw(&axpy(&pw, 0.5 * h, &q1));
            let q3 = f_pw(&axpy(&pw, 0.5 * h, &q2));
            let q4 = f_pw(&axpy(&pw, h, &q3));
            pw = std::array::from_fn(|i| pw[i] + h / 6.0 * (q1[i] + 2.0 * q2[i] + 2.0 * q3[i] + q4[i]));
        }
        out.push(CompartmentState::from_vectors(&c, &pw));
    }
    Ok(out)
}

/// Excess `Var X₁` spectrum of the full model when the two-mode beam
/// noise `d_in` is injected into the beam compartments only.
pub fn full_excess_spectrum(mp: &MicroParams, noise: &NoiseModel, omega: f64) -> Result<f64> {
    let d = noise.d_in.map(|x| C64::new(x, 0.0));
    let one_sided = |w: f64| -> Result<f64> {
        let r = full_beam_response(mp, w)?;
        Ok((r * d * r.adjoint())[(0, 0)].re)
    };
    Ok(one_sided(omega)? + one_sided(-omega)?)
}

/// Centre and full width at half maximum of the highest non-negative-ω
/// peak of a sampled trace.
pub fn peak_center_and_width(omegas: &[f64], y: &[f64]) -> Option<(f64, f64)> {
    let k = (0..y.len()).filter(|&i| omegas[i] >= 0.0).max_by(|&a, &b| y[a].total_cmp(&y[b]))?;
    let half = 0.5 * y[k];
    let cross = |range: &mut dyn Iterator<Item = usize>| -> Option<f64> {
        for i in range {
            let j = if i > k { i - 1 } else { i + 1 };
            if y[i] < half {
                let t = (half - y[i]) / (y[j] - y[i]);
                return Some(omegas[i] + t * (omegas[j] - omegas[i]));
            }
        }
        None
    };
    let right = cross(&mut (k + 1..y.len()))?;
    let left = cross(&mut (0..k).rev())?;
    let center = if k > 0 && k + 1 < y.len() {
        crate::eit_semiclassical::find_peak(&omegas[k - 1..=k + 1], &y[k - 1..=k + 1]).unwrap_or(omegas[k])
    } else {
        omegas[k]
    };
    Some((center, right - left))
}
