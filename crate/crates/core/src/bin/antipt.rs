use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

#[derive(Parser)]
#[command(name = "antipt", version, about = "Coupled spin-wave channels near an exceptional point")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// JSON run configuration
    #[arg(long)]
    config: PathBuf,
    /// Output directory (overrides outputs.directory)
    #[arg(long)]
    out: Option<PathBuf>,
    /// RNG seed (overrides seed)
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Subcommand)]
enum Command {
    /// Supermode gaps across a delta0 sweep
    Eigen(Common),
    /// Homodyne variance spectra for each delta0
    Spectra(Common),
    /// Discord, Duan value and EIT separation across delta0
    DiscordSweep(Common),
    /// Coupled and uncoupled probe gain spectra
    Eit(Common),
    /// On-resonance gain versus probe phase
    Phase(Common),
    /// Compartment-model reduction and Monte Carlo trajectories
    Micro(Common),
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (name, c) = match &cli.command {
        Command::Eigen(c) => ("eigen", c),
        Command::Spectra(c) => ("spectra", c),
        Command::DiscordSweep(c) => ("discord-sweep", c),
        Command::Eit(c) => ("eit", c),
        Command::Phase(c) => ("phase", c),
        Command::Micro(c) => ("micro", c),
    };
    match antipt::cli::run(name, &c.config, c.out.as_deref(), c.seed) {
        Ok(out) => {
            for f in out.files {
                println!("{}", f.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("antipt {name}: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
