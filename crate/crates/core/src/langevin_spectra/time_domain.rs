//! Euler–Maruyama ensemble of synthesized homodyne records.
//!
//! Each trajectory integrates `dv = M v dt + L dW` for the atomic excess
//! noise (`L Lᵀ = d_in`, circular complex increments), adds white shot
//! noise of unit two-sided density and, when enabled, an independent
//! Ornstein–Uhlenbeck pedestal per quadrature. Spectra are Welch averages
//! of Hann-windowed periodograms. Trajectory `k` draws from ChaCha8 stream
//! `k` of the run seed, and blocks of trajectories are reduced in index
//! order, so the result does not depend on the number of worker threads.

use std::f64::consts::{PI, TAU};
use std::sync::Arc;

use nalgebra::{Matrix2, Matrix4, Vector2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use rustfft::{Fft, FftPlanner};

use super::{drift_matrix, noise_model, DriftMatrix, NoiseSpectrum};
use crate::effective_model::SystemParams;
use crate::error::{Error, Result};
use crate::gaussian_info::CovarianceMatrix4;
use crate::linalg::sym2_sqrt;
use crate::C64;

const BLOCK: usize = 32;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeDomainConfig {
    pub seed: u64,
    pub n_traj: usize,
    /// Integration step; must satisfy `dt < 0.1/γ₁₂`.
    pub dt: f64,
    /// Record length per trajectory.
    pub t_total: f64,
    /// Welch segments per trajectory (50% overlap).
    pub segments: usize,
    /// Highest frequency bin kept in the estimate.
    pub omega_max: f64,
}

/// Ensemble mean and standard error of the spectral covariance.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumEstimate {
    /// FFT bin frequencies `2πj/(L·dt)` up to `omega_max`.
    pub omega_grid: Vec<f64>,
    pub mean: Vec<Matrix4<f64>>,
    pub std_err: Vec<Matrix4<f64>>,
    pub n_traj: usize,
}

impl SpectrumEstimate {
    /// Ensemble means as covariance matrices (not validated: a finite
    /// ensemble need not be exactly physical).
    pub fn mean_spectrum(&self) -> NoiseSpectrum {
        NoiseSpectrum {
            omega_grid: self.omega_grid.clone(),
            cm_per_omega: self
                .mean
                .iter()
                .map(|m| CovarianceMatrix4::from_matrix_unchecked(*m))
                .collect(),
        }
    }
}

struct Plan {
    drift: DriftMatrix,
    noise_factor: Matrix2<f64>,
    stationary_factor: Matrix2<C64>,
    sqrt_eta: f64,
    pedestal: Option<(f64, f64)>,
    dt: f64,
    n_samples: usize,
    seg_len: usize,
    seg_starts: Vec<usize>,
    n_bins: usize,
    window: Vec<f64>,
    norm: f64,
    fft: Arc<dyn Fft<f64>>,
}

#[derive(Clone)]
struct Accumulator {
    sum: Vec<Matrix4<f64>>,
    sum_sq: Vec<Matrix4<f64>>,
}

impl Accumulator {
    fn new(n_bins: usize) -> Self {
        Self {
            sum: vec![Matrix4::zeros(); n_bins],
            sum_sq: vec![Matrix4::zeros(); n_bins],
        }
    }

    fn add(&mut self, est: &[Matrix4<f64>]) {
        for ((s, q), e) in self.sum.iter_mut().zip(&mut self.sum_sq).zip(est) {
            *s += e;
            *q += e.component_mul(e);
        }
    }

    fn merge(&mut self, other: &Accumulator) {
        for (a, b) in self.sum.iter_mut().zip(&other.sum) {
            *a += b;
        }
        for (a, b) in self.sum_sq.iter_mut().zip(&other.sum_sq) {
            *a += b;
        }
    }
}

/// Stationary `Σ = ⟨v v†⟩` solving `M Σ + Σ M† + D = 0`.
fn stationary_covariance(m: &Matrix2<C64>, d: &Matrix2<f64>) -> Result<Matrix2<C64>> {
    let mut k = nalgebra::Matrix4::<C64>::zeros();
    let mut rhs = nalgebra::Vector4::<C64>::zeros();
    for i in 0..2 {
        for j in 0..2 {
            let row = 2 * i + j;
            for l in 0..2 {
                k[(row, 2 * l + j)] += m[(i, l)];
                k[(row, 2 * i + l)] += m[(j, l)].conj();
            }
            rhs[row] = C64::new(-d[(i, j)], 0.0);
        }
    }
    let x = k.lu().solve(&rhs).ok_or(Error::Singular("stationary covariance"))?;
    let s = Matrix2::new(x[0], x[1], x[2], x[3]);
    Ok((s + s.adjoint()) * C64::new(0.5, 0.0))
}

/// Lower-triangular `L` with `L L† = Σ` for a Hermitian PSD 2×2 matrix.
fn cholesky2(s: &Matrix2<C64>) -> Matrix2<C64> {
    let l11 = s[(0, 0)].re.max(0.0).sqrt();
    let l21 = if l11 > 0.0 { s[(1, 0)] / l11 } else { C64::default() };
    let l22 = (s[(1, 1)].re - l21.norm_sqr()).max(0.0).sqrt();
    Matrix2::new(C64::new(l11, 0.0), C64::default(), l21, C64::new(l22, 0.0))
}

impl Plan {
    fn new(params: &SystemParams, cfg: &TimeDomainConfig) -> Result<Self> {
        params.validate()?;
        let g12 = params.gamma12();
        let limit = 0.1 / g12;
        if !(cfg.dt > 0.0) || cfg.dt >= limit {
            return Err(Error::Stability { dt: cfg.dt, limit });
        }
        if cfg.n_traj == 0 || cfg.segments == 0 {
            return Err(Error::InvalidParams("n_traj and segments must be >= 1".into()));
        }
        let n_samples = (cfg.t_total / cfg.dt).round() as usize;
        let seg_len = if cfg.segments == 1 {
            n_samples
        } else {
            2 * n_samples / (cfg.segments + 1)
        };
        if seg_len < 16 {
            return Err(Error::InvalidParams(format!(
                "segment of {seg_len} samples is too short; increase t_total"
            )));
        }
        let hop = seg_len / 2;
        let seg_starts = (0..cfg.segments).map(|s| s * hop).collect();
        let bin_width = TAU / (seg_len as f64 * cfg.dt);
        let n_bins = ((cfg.omega_max / bin_width).floor() as usize + 1).min(seg_len / 2 + 1);

        let drift = drift_matrix(params);
        let noise = noise_model(params)?;
        let stationary = stationary_covariance(&drift.m, &noise.d_in)?;
        let window: Vec<f64> = (0..seg_len)
            .map(|k| 0.5 * (1.0 - (TAU * k as f64 / seg_len as f64).cos()))
            .collect();
        let norm = cfg.dt / window.iter().map(|w| w * w).sum::<f64>();
        let pedestal = (params.broad_amp > 0.0).then(|| {
            let a = (-params.broad_width * cfg.dt).exp();
            let var = 0.5 * params.broad_amp * params.broad_width;
            (a, var)
        });
        Ok(Self {
            drift,
            noise_factor: sym2_sqrt(&noise.d_in),
            stationary_factor: cholesky2(&stationary),
            sqrt_eta: params.eta_read.sqrt(),
            pedestal,
            dt: cfg.dt,
            n_samples,
            seg_len,
            seg_starts,
            n_bins,
            window,
            norm,
            fft: FftPlanner::new().plan_fft_forward(seg_len),
        })
    }

    fn circular(rng: &mut ChaCha8Rng) -> Vector2<C64> {
        let mut c = || {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            C64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
        };
        Vector2::new(c(), c())
    }

    /// Synthesizes one record and returns its Welch estimate per bin.
    fn trajectory(&self, seed: u64, index: usize, scratch: &mut Scratch) -> Result<Vec<Matrix4<f64>>> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(index as u64);

        let m = self.drift.m;
        let dt = self.dt;
        let step = Matrix2::identity() + m * C64::new(dt, 0.0);
        let kick = self.noise_factor.map(|x| C64::new(x * dt.sqrt(), 0.0));
        let shot_sd = (1.0 / dt).sqrt();
        let mut v = self.stationary_factor * Self::circular(&mut rng);
        let mut ped = [0.0f64; 4];
        if let Some((_, var)) = self.pedestal {
            for p in &mut ped {
                *p = var.sqrt() * rng.sample::<f64, _>(StandardNormal);
            }
        }

        let rec = &mut scratch.record;
        for k in 0..self.n_samples {
            let atom = [2.0 * v[0].re, 2.0 * v[0].im, 2.0 * v[1].re, -2.0 * v[1].im];
            for q in 0..4 {
                let shot: f64 = rng.sample(StandardNormal);
                rec[q][k] = self.sqrt_eta * atom[q] + shot_sd * shot + ped[q];
            }
            if let Some((a, var)) = self.pedestal {
                let sd = (var * (1.0 - a * a)).sqrt();
                for p in &mut ped {
                    *p = a * *p + sd * rng.sample::<f64, _>(StandardNormal);
                }
            }
            v = step * v + kick * Self::circular(&mut rng);
        }
        if rec.iter().any(|r| r[..self.n_samples].iter().any(|x| !x.is_finite())) {
            return Err(Error::NonFinite("time-domain trajectory"));
        }

        let mut est = vec![Matrix4::zeros(); self.n_bins];
        let l = self.seg_len;
        for &start in &self.seg_starts {
            for (pair, buf) in scratch.fft_buf.iter_mut().enumerate() {
                let (x, y) = (&rec[2 * pair], &rec[2 * pair + 1]);
                for k in 0..l {
                    let w = self.window[k];
                    buf[k] = C64::new(w * x[start + k], w * y[start + k]);
                }
                self.fft.process(buf);
            }
            for j in 0..self.n_bins {
                let jm = (l - j) % l;
                let mut f = [C64::default(); 4];
                for pair in 0..2 {
                    let z = scratch.fft_buf[pair][j];
                    let zc = scratch.fft_buf[pair][jm].conj();
                    f[2 * pair] = 0.5 * (z + zc);
                    f[2 * pair + 1] = C64::new(0.0, -0.5) * (z - zc);
                }
                let e = &mut est[j];
                for a in 0..4 {
                    for b in 0..4 {
                        e[(a, b)] += (f[a] * f[b].conj()).re * self.norm;
                    }
                }
            }
        }
        let inv = 1.0 / self.seg_starts.len() as f64;
        for e in &mut est {
            *e *= inv;
        }
        Ok(est)
    }
}

struct Scratch {
    record: [Vec<f64>; 4],
    fft_buf: [Vec<C64>; 2],
}

impl Scratch {
    fn new(n: usize, l: usize) -> Self {
        Self {
            record: std::array::from_fn(|_| vec![0.0; n]),
            fft_buf: std::array::from_fn(|_| vec![C64::default(); l]),
        }
    }
}

/// Monte Carlo estimate of the spectral covariance matrices.
pub fn simulate_time_domain(params: &SystemParams, cfg: &TimeDomainConfig) -> Result<SpectrumEstimate> {
    let plan = Plan::new(params, cfg)?;
    let n_blocks = cfg.n_traj.div_ceil(BLOCK);
    let partials: Vec<Result<Accumulator>> = (0..n_blocks)
        .into_par_iter()
        .map(|b| {
            let mut acc = Accumulator::new(plan.n_bins);
            let mut scratch = Scratch::new(plan.n_samples, plan.seg_len);
            for t in b * BLOCK..((b + 1) * BLOCK).min(cfg.n_traj) {
                acc.add(&plan.trajectory(cfg.seed, t, &mut scratch)?);
            }
            Ok(acc)
        })
        .collect();
    let mut total = Accumulator::new(plan.n_bins);
    for p in partials {
        total.merge(&p?);
    }

    let n = cfg.n_traj as f64;
    let mean: Vec<Matrix4<f64>> = total.sum.iter().map(|s| s / n).collect();
    let std_err = total
        .sum_sq
        .iter()
        .zip(&mean)
        .map(|(q, mu)| {
            if cfg.n_traj < 2 {
                return Matrix4::from_element(f64::INFINITY);
            }
            (q / n - mu.component_mul(mu)).map(|v| (v.max(0.0) * n / (n - 1.0) / n).sqrt())
        })
        .collect();
    let bin_width = 2.0 * PI / (plan.seg_len as f64 * plan.dt);
    Ok(SpectrumEstimate {
        omega_grid: (0..plan.n_bins).map(|j| j as f64 * bin_width).collect(),
        mean,
        std_err,
        n_traj: cfg.n_traj,
    })
}
