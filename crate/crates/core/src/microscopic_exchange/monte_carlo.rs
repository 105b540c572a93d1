//! Individual atoms hopping between the compartments.
//!
//! Hops are exact exponential events resolved inside each sampling step;
//! between hops the coherence and imbalance of an atom evolve with the
//! local closed-form solution. A hop moves the atom's coherence unchanged.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::Exp1;
use rayon::prelude::*;

use super::{CompartmentState, MicroParams};
use crate::error::{Error, Result};
use crate::C64;

const BLOCK: usize = 256;
const N_OBS: usize = 12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McConfig {
    pub seed: u64,
    pub n_atoms: usize,
    /// Sampling step; must satisfy `dt · max rate < 0.1`.
    pub dt: f64,
    pub t_total: f64,
}

/// Ensemble totals per compartment and their standard errors. For the
/// coherence the error of the real and imaginary part are stored as the
/// real and imaginary part of `std_err[..].coherence`.
#[derive(Debug, Clone, PartialEq)]
pub struct McTrajectory {
    pub times: Vec<f64>,
    pub mean: Vec<CompartmentState>,
    pub std_err: Vec<CompartmentState>,
    pub n_atoms: usize,
}

#[derive(Clone, Copy)]
struct Atom {
    site: usize,
    z: C64,
    w: f64,
}

struct Local {
    decay: [C64; 3],
    pump: f64,
    gamma_dark: f64,
    out_rate: [f64; 3],
}

impl Local {
    fn evolve(&self, a: &mut Atom, s: f64) {
        a.z *= (-self.decay[a.site] * s).exp();
        match a.site {
            0 => a.w = 1.0 + (a.w - 1.0) * (-self.pump * s).exp(),
            1 => a.w = -1.0 + (a.w + 1.0) * (-self.pump * s).exp(),
            _ => a.w *= (-self.gamma_dark * s).exp(),
        }
    }

    fn advance(&self, a: &mut Atom, dt: f64, rng: &mut ChaCha8Rng) {
        let mut left = dt;
        loop {
            let rate = self.out_rate[a.site];
            let wait = if rate > 0.0 { rng.sample::<f64, _>(Exp1) / rate } else { f64::INFINITY };
            if wait >= left {
                self.evolve(a, left);
                return;
            }
            self.evolve(a, wait);
            left -= wait;
            a.site = if a.site < 2 { 2 } else { usize::from(rng.random::<bool>()) };
        }
    }
}

fn observe(a: &Atom, out: &mut [f64; N_OBS]) {
    *out = [0.0; N_OBS];
    out[2 * a.site] = a.z.re;
    out[2 * a.site + 1] = a.z.im;
    out[6 + a.site] = 1.0;
    out[9 + a.site] = a.w;
}

fn to_state(v: &[f64]) -> CompartmentState {
    CompartmentState {
        coherence: [C64::new(v[0], v[1]), C64::new(v[2], v[3]), C64::new(v[4], v[5])],
        occupancy: [v[6], v[7], v[8]],
        imbalance: [v[9], v[10], v[11]],
    }
}

/// Largest-remainder split of `n` atoms over the occupancies.
fn placement(occ: &[f64; 3], n: usize) -> [usize; 3] {
    let total: f64 = occ.iter().sum();
    let exact = occ.map(|p| p / total * n as f64);
    let mut counts = exact.map(|x| x.floor() as usize);
    let mut order = [0, 1, 2];
    order.sort_by(|&a, &b| (exact[b] - exact[b].floor()).total_cmp(&(exact[a] - exact[a].floor())));
    let mut k = 0;
    while counts.iter().sum::<usize>() < n {
        counts[order[k % 3]] += 1;
        k += 1;
    }
    counts
}

/// Telegraph-process ensemble started from `initial` (occupancies are
/// normalized; each atom in compartment `k` starts with the per-atom
/// coherence and imbalance of that compartment).
pub fn monte_carlo_exchange(mp: &MicroParams, initial: &CompartmentState, cfg: &McConfig) -> Result<McTrajectory> {
    mp.validate()?;
    if cfg.n_atoms == 0 {
        return Err(Error::InvalidParams("n_atoms must be >= 1".into()));
    }
    let limit = 0.1 / mp.max_rate().max(f64::MIN_POSITIVE);
    if !(cfg.dt > 0.0) || cfg.dt >= limit {
        return Err(Error::Stability { dt: cfg.dt, limit });
    }
    if !(cfg.t_total >= 0.0) {
        return Err(Error::InvalidParams("t_total must be >= 0".into()));
    }
    if initial.occupancy.iter().any(|&p| !(p >= 0.0)) || initial.occupancy.iter().sum::<f64>() <= 0.0 {
        return Err(Error::InvalidParams("initial occupancies must be >= 0 and not all zero".into()));
    }
    let counts = placement(&initial.occupancy, cfg.n_atoms);
    let per_atom: [(C64, f64); 3] = std::array::from_fn(|k| {
        let p = initial.occupancy[k];
        if p > 0.0 {
            (initial.coherence[k] / p, initial.imbalance[k] / p)
        } else {
            (C64::default(), 0.0)
        }
    });
    let start = |i: usize| {
        let site = if i < counts[0] { 0 } else if i < counts[0] + counts[1] { 1 } else { 2 };
        Atom { site, z: per_atom[site].0, w: per_atom[site].1 }
    };

    let kb = mp.beam_decay();
    let local = Local {
        decay: [C64::new(kb, mp.delta0), C64::new(kb, -mp.delta0), C64::new(mp.gamma_dark, 0.0)],
        pump: mp.pump_rate,
        gamma_dark: mp.gamma_dark,
        out_rate: [mp.r_exit, mp.r_exit, mp.r_return],
    };
    let n_steps = (cfg.t_total / cfg.dt).round() as usize;
    let n_rec = n_steps + 1;

    let n_blocks = cfg.n_atoms.div_ceil(BLOCK);
    let partials: Vec<(Vec<f64>, Vec<f64>)> = (0..n_blocks)
        .into_par_iter()
        .map(|b| {
            let mut sum = vec![0.0; n_rec * N_OBS];
            let mut sq = vec![0.0; n_rec * N_OBS];
            let mut obs = [0.0; N_OBS];
            for i in b * BLOCK..((b + 1) * BLOCK).min(cfg.n_atoms) {
                let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
                rng.set_stream(i as u64);
                let mut atom = start(i);
                for r in 0..n_rec {
                    if r > 0 {
                        local.advance(&mut atom, cfg.dt, &mut rng);
                    }
                    observe(&atom, &mut obs);
                    let base = r * N_OBS;
                    for (q, &x) in obs.iter().enumerate() {
                        sum[base + q] += x;
                        sq[base + q] += x * x;
                    }
                }
            }
            (sum, sq)
        })
        .collect();
    let mut sum = vec![0.0; n_rec * N_OBS];
    let mut sq = vec![0.0; n_rec * N_OBS];
    for (s, q) in &partials {
        for (a, b) in sum.iter_mut().zip(s) {
            *a += b;
        }
        for (a, b) in sq.iter_mut().zip(q) {
            *a += b;
        }
    }

    let n = cfg.n_atoms as f64;
    let mut mean = Vec::with_capacity(n_rec);
    let mut std_err = Vec::with_capacity(n_rec);
    for r in 0..n_rec {
        let m: Vec<f64> = sum[r * N_OBS..(r + 1) * N_OBS].iter().map(|s| s / n).collect();
        let se: Vec<f64> = sq[r * N_OBS..(r + 1) * N_OBS]
            .iter()
            .zip(&m)
            .map(|(q, mu)| {
                if cfg.n_atoms < 2 {
                    f64::INFINITY
                } else {
                    ((q / n - mu * mu).max(0.0) / (n - 1.0)).sqrt()
                }
            })
            .collect();
        mean.push(to_state(&m));
        std_err.push(to_state(&se));
    }
    Ok(McTrajectory {
        times: (0..n_rec).map(|r| r as f64 * cfg.dt).collect(),
        mean,
        std_err,
        n_atoms: cfg.n_atoms,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::microscopic_exchange::compartment_ode;

    fn cfg(seed: u64, n_atoms: usize) -> McConfig {
        McConfig { seed, n_atoms, dt: 0.001, t_total: 0.2 }
    }

    #[test]
    fn placement_is_exact() {
        assert_eq!(placement(&[0.5, 0.5, 0.0], 10), [5, 5, 0]);
        assert_eq!(placement(&[1.0, 1.0, 1.0], 10).iter().sum::<usize>(), 10);
    }

    #[test]
    fn isolated_beam_decays_exactly() {
        let mp = MicroParams { r_exit: 0.0, delta0: 3.0, ..MicroParams::default() };
        let init = CompartmentState::prepared(&mp);
        let mc = monte_carlo_exchange(&mp, &init, &cfg(1, 100)).unwrap();
        let kb = mp.beam_decay();
        for (t, s) in mc.times.iter().zip(&mc.mean) {
            let want = C64::from_polar(0.5 * (-kb * t).exp(), -3.0 * t);
            assert!((s.coherence[0] - want).norm() < 1e-12);
            assert!((s.coherence[1] - want.conj()).norm() < 1e-12);
        }
    }

    #[test]
    fn deterministic_and_thread_independent() {
        let mp = MicroParams::default();
        let init = CompartmentState::prepared(&mp);
        let one = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let a = one.install(|| monte_carlo_exchange(&mp, &init, &cfg(7, 600)).unwrap());
        let b = monte_carlo_exchange(&mp, &init, &cfg(7, 600)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn stability_guard() {
        let mp = MicroParams::default();
        let c = McConfig { dt: 0.002, ..cfg(1, 10) };
        assert!(matches!(
            monte_carlo_exchange(&mp, &CompartmentState::prepared(&mp), &c),
            Err(Error::Stability { .. })
        ));
    }

    #[test]
    fn ensemble_follows_ode_in_the_mean() {
        let mp = MicroParams { delta0: 2.0, ..MicroParams::default() };
        let init = CompartmentState::prepared(&mp);
        let mc = monte_carlo_exchange(&mp, &init, &cfg(3, 2000)).unwrap();
        let ode = compartment_ode(&mp, &mc.mean[0], 0.001, 0.2).unwrap();
        let mut worst = 0.0f64;
        for (m, (se, o)) in mc.mean.iter().zip(mc.std_err.iter().zip(&ode)).step_by(10) {
            for k in 0..3 {
                let d = m.coherence[k] - o.coherence[k];
                worst = worst.max(d.re.abs() / se.coherence[k].re.max(1e-12));
                worst = worst.max(d.im.abs() / se.coherence[k].im.max(1e-12));
                worst = worst.max((m.occupancy[k] - o.occupancy[k]).abs() / se.occupancy[k].max(1e-12));
            }
        }
        assert!(worst < 5.0, "worst deviation {worst} standard errors");
    }
}
