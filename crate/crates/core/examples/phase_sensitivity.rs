//! On-resonance gain of both channels as the channel-1 probe phase turns.
//!
//! Run with `cargo run --example phase_sensitivity`.

use std::f64::consts::TAU;

use antipt::eit_semiclassical::{phase_sweep, ProbeConfig};
use antipt::SystemParams;

fn main() -> antipt::Result<()> {
    let phi: Vec<f64> = (0..=24).map(|k| TAU * k as f64 / 24.0).collect();
    for gamma_c in [4.0, 0.0] {
        let p = SystemParams { gamma_c, delta0: 1.0, ..SystemParams::default() };
        println!("gamma_c = {gamma_c}");
        for r in phase_sweep(&p, &phi, &ProbeConfig::default())?.iter().step_by(3) {
            println!("  phi {:>6.3}  gain_1 {:>9.5}  gain_2 {:>9.5}", r.phi, r.gain_1, r.gain_2);
        }
    }
    Ok(())
}
