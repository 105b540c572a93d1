//! One function per subcommand. Each reads a validated [`RunConfig`],
//! runs the library operation and writes its tables.

use std::path::{Path, PathBuf};

use super::config::RunConfig;
use super::output::{write_table, Table};
use crate::effective_model::{eigengap_sweep, SystemParams};
use crate::eit_semiclassical::{eit_spectrum, phase_sweep};
use crate::error::{Error, Result};
use crate::gaussian_info::{duan_criterion, gaussian_discord};
use crate::langevin_spectra::{cm_at_analysis_frequency, spectral_cm, variance_traces};
use crate::microscopic_exchange::{
    compartment_ode, extract_effective_coupling, fit_full_response, monte_carlo_exchange, CompartmentState, McConfig,
};

/// Files written by a command.
#[derive(Debug, Clone, PartialEq)]
pub struct CommandOutput {
    pub files: Vec<PathBuf>,
}

fn emit(cfg: &RunConfig, stem: &str, table: &Table) -> Result<Vec<PathBuf>> {
    write_table(&cfg.outputs.directory, stem, table, &cfg.outputs.formats)
}

fn opt(x: Option<f64>) -> f64 {
    x.unwrap_or(f64::NAN)
}

pub fn cmd_eigen(cfg: &RunConfig) -> Result<CommandOutput> {
    let rows = eigengap_sweep(&cfg.system(), &cfg.sweep_grid("delta0")?)?;
    let mut t = Table::new(["delta0", "re_gap", "im_gap"]);
    for r in rows {
        t.push(vec![r.delta0, r.re_gap, r.im_gap]);
    }
    Ok(CommandOutput { files: emit(cfg, "eigen", &t)? })
}

pub fn cmd_spectra(cfg: &RunConfig) -> Result<CommandOutput> {
    let base = cfg.system();
    let omegas = cfg.spectrum_grid()?;
    let mut files = Vec::new();
    let mut index = Table::new(["index", "delta0"]);
    for (i, delta0) in cfg.sweep_grid("delta0")?.into_iter().enumerate() {
        let spec = spectral_cm(&SystemParams { delta0, ..base }, &omegas)?;
        let mut t = Table::new(["omega", "varx1_db", "varx2_db", "varxdiff_db", "varpsum_db"]);
        for r in variance_traces(&spec) {
            t.push(vec![r.omega, r.varx1_db, r.varx2_db, r.varxdiff_db, r.varpsum_db]);
        }
        files.extend(emit(cfg, &format!("spectra_{i:03}"), &t)?);
        index.push(vec![i as f64, delta0]);
    }
    files.extend(emit(cfg, "spectra_index", &index)?);
    Ok(CommandOutput { files })
}

pub fn cmd_discord_sweep(cfg: &RunConfig) -> Result<CommandOutput> {
    let base = cfg.system();
    let delta_b = cfg.spectrum_grid()?;
    let mut t = Table::new(["delta0", "discord", "duan", "separation"]);
    for delta0 in cfg.sweep_grid("delta0")? {
        let p = SystemParams { delta0, ..base };
        let cm = cm_at_analysis_frequency(&p)?;
        let d = gaussian_discord(&cm)?;
        let sep = eit_spectrum(&p, &delta_b, &cfg.probes)?.separation;
        t.push(vec![delta0, d.discord, duan_criterion(&cm), opt(sep)]);
    }
    Ok(CommandOutput { files: emit(cfg, "discord_sweep", &t)? })
}

pub fn cmd_eit(cfg: &RunConfig) -> Result<CommandOutput> {
    let p = cfg.system();
    let grid = cfg.spectrum_grid()?;
    let coupled = eit_spectrum(&p, &grid, &cfg.probes)?;
    let only_1 = eit_spectrum(&p, &grid, &cfg.probes.channel_only(1))?;
    let only_2 = eit_spectrum(&p, &grid, &cfg.probes.channel_only(2))?;

    let mut t = Table::new(["delta_b", "gain_1", "gain_2", "gain_1_uncoupled", "gain_2_uncoupled"]);
    for k in 0..grid.len() {
        t.push(vec![grid[k], coupled.gain_1[k], coupled.gain_2[k], only_1.gain_1[k], only_2.gain_2[k]]);
    }
    let mut s = Table::new([
        "peak_1",
        "peak_2",
        "separation",
        "peak_1_uncoupled",
        "peak_2_uncoupled",
        "separation_uncoupled",
    ]);
    let sep_u = only_1.peak_1.zip(only_2.peak_2).map(|(a, b)| (a - b).abs());
    s.push(vec![
        opt(coupled.peak_1),
        opt(coupled.peak_2),
        opt(coupled.separation),
        opt(only_1.peak_1),
        opt(only_2.peak_2),
        opt(sep_u),
    ]);
    let mut files = emit(cfg, "eit", &t)?;
    files.extend(emit(cfg, "eit_summary", &s)?);
    Ok(CommandOutput { files })
}

pub fn cmd_phase(cfg: &RunConfig) -> Result<CommandOutput> {
    let rows = phase_sweep(&cfg.system(), &cfg.sweep_grid("phi")?, &cfg.probes)?;
    let mut t = Table::new(["phi", "gain_1", "gain_2"]);
    for r in rows {
        t.push(vec![r.phi, r.gain_1, r.gain_2]);
    }
    Ok(CommandOutput { files: emit(cfg, "phase", &t)? })
}

pub fn cmd_micro(cfg: &RunConfig) -> Result<CommandOutput> {
    let seed = cfg.require_seed()?;
    let (mp, mc) = cfg.micro_scaled()?;
    let eff = extract_effective_coupling(&mp)?;
    let fit = fit_full_response(&mp)?;
    let mut c = Table::new([
        "gamma_c_eff",
        "gamma12_eff",
        "residual",
        "fit_gamma_c",
        "fit_gamma12",
        "fit_residual",
        "relative_difference",
    ]);
    c.push(vec![
        eff.gamma_c_eff,
        eff.gamma12_eff,
        eff.residual,
        fit.gamma_c,
        fit.gamma12,
        fit.residual,
        (eff.gamma_c_eff - fit.gamma_c) / fit.gamma_c,
    ]);

    let run = monte_carlo_exchange(
        &mp,
        &CompartmentState::prepared(&mp),
        &McConfig { seed, n_atoms: mc.n_atoms, dt: mc.dt, t_total: mc.t_total },
    )?;
    let ode = compartment_ode(&mp, &run.mean[0], mc.dt, mc.t_total)?;
    if ode.len() != run.mean.len() {
        return Err(Error::InternalConsistency("ODE and Monte Carlo sample counts differ".into()));
    }
    let mut header = vec!["t".to_string()];
    for name in ["beam1", "beam2", "dark"] {
        for q in ["re_ode", "im_ode", "re_mc", "im_mc", "re_se", "im_se", "occ_ode", "occ_mc", "occ_se"] {
            header.push(format!("{name}_{q}"));
        }
    }
    let mut t = Table::new(header);
    for (i, &time) in run.times.iter().enumerate() {
        let (o, m, e) = (&ode[i], &run.mean[i], &run.std_err[i]);
        let mut row = vec![time];
        for k in 0..3 {
            row.extend([
                o.coherence[k].re,
                o.coherence[k].im,
                m.coherence[k].re,
                m.coherence[k].im,
                e.coherence[k].re,
                e.coherence[k].im,
                o.occupancy[k],
                m.occupancy[k],
                e.occupancy[k],
            ]);
        }
        t.push(row);
    }
    let mut files = emit(cfg, "micro_coupling", &c)?;
    files.extend(emit(cfg, "micro_trajectory", &t)?);
    Ok(CommandOutput { files })
}

/// Subcommand names accepted by [`run`].
pub const COMMANDS: [&str; 6] = ["eigen", "spectra", "discord-sweep", "eit", "phase", "micro"];

/// Loads `config`, applies the overrides and dispatches `command`.
pub fn run(command: &str, config: &Path, out: Option<&Path>, seed: Option<u64>) -> Result<CommandOutput> {
    let mut cfg = RunConfig::load(config)?;
    if let Some(dir) = out {
        cfg.outputs.directory = dir.to_path_buf();
    }
    if seed.is_some() {
        cfg.seed = seed;
    }
    run_config(command, &cfg)
}

pub fn run_config(command: &str, cfg: &RunConfig) -> Result<CommandOutput> {
    match command {
        "eigen" => cmd_eigen(cfg),
        "spectra" => cmd_spectra(cfg),
        "discord-sweep" => cmd_discord_sweep(cfg),
        "eit" => cmd_eit(cfg),
        "phase" => cmd_phase(cfg),
        "micro" => cmd_micro(cfg),
        other => Err(Error::Config(format!("unknown command {other:?}; expected one of {COMMANDS:?}"))),
    }
}
