//! Homodyne variance spectra in dB relative to shot noise for a few
//! detunings, showing the narrow correlated feature at the Larmor
//! frequency on top of a broad pedestal.
//!
//! Run with `cargo run --example noise_spectra`.

use antipt::langevin_spectra::{spectral_cm, variance_traces};
use antipt::SystemParams;

fn main() -> antipt::Result<()> {
    let base = SystemParams { broad_amp: 0.5, broad_width: 40.0, ..SystemParams::default() };
    let omegas: Vec<f64> = (0..=16).map(|k| -24.0 + 3.0 * k as f64).collect();
    for delta0 in [0.0, 4.0, 12.0] {
        let spec = spectral_cm(&SystemParams { delta0, ..base }, &omegas)?;
        println!("delta0 = {delta0}");
        println!("{:>8} {:>9} {:>9} {:>9} {:>9}", "omega", "VarX1", "VarX2", "Var(X1-X2)", "Var(P1+P2)");
        for r in variance_traces(&spec) {
            println!(
                "{:>8.1} {:>9.3} {:>9.3} {:>9.3} {:>9.3}",
                r.omega, r.varx1_db, r.varx2_db, r.varxdiff_db, r.varpsum_db
            );
        }
    }
    Ok(())
}
