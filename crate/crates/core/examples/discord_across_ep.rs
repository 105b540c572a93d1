//! Gaussian discord and Duan value at the Larmor frequency as the
//! detuning crosses the exceptional point.
//!
//! Run with `cargo run --example discord_across_ep`.

use antipt::gaussian_info::{discord_numeric_oracle, duan_criterion, gaussian_discord};
use antipt::langevin_spectra::cm_at_analysis_frequency;
use antipt::SystemParams;

fn main() -> antipt::Result<()> {
    let p = SystemParams::default();
    println!("{:>8} {:>12} {:>12} {:>8}", "d0/gc", "discord", "oracle", "duan");
    for k in 0..=12 {
        let delta0 = 0.25 * k as f64 * p.gamma_c;
        let cm = cm_at_analysis_frequency(&SystemParams { delta0, ..p })?;
        let d = gaussian_discord(&cm)?;
        let brute = discord_numeric_oracle(&cm, 64)?;
        println!(
            "{:>8.2} {:>12.4e} {:>12.4e} {:>8.4}",
            delta0 / p.gamma_c,
            d.discord,
            brute,
            duan_criterion(&cm)
        );
    }
    Ok(())
}
