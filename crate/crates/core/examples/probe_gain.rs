//! Probe gain of the coupled pair against each channel on its own.
//!
//! Run with `cargo run --example probe_gain`.

use antipt::eit_semiclassical::{eit_spectrum, probe_gain, ProbeConfig};
use antipt::SystemParams;

fn main() -> antipt::Result<()> {
    let p = SystemParams { delta0: 2.0, ..SystemParams::default() };
    let probes = ProbeConfig::default();
    let grid: Vec<f64> = (0..=400).map(|k| -20.0 + 0.1 * k as f64).collect();

    let coupled = eit_spectrum(&p, &grid, &probes)?;
    let alone_1 = eit_spectrum(&p, &grid, &probes.channel_only(1))?;
    let alone_2 = eit_spectrum(&p, &grid, &probes.channel_only(2))?;

    println!("{:>8} {:>10} {:>10} {:>10} {:>10}", "delta_b", "gain_1", "gain_2", "alone_1", "alone_2");
    for k in (0..grid.len()).step_by(25) {
        println!(
            "{:>8.2} {:>10.5} {:>10.5} {:>10.5} {:>10.5}",
            grid[k], coupled.gain_1[k], coupled.gain_2[k], alone_1.gain_1[k], alone_2.gain_2[k]
        );
    }
    println!("coupled peaks   {:?} {:?}", coupled.peak_1, coupled.peak_2);
    println!("uncoupled peaks {:?} {:?}", alone_1.peak_1, alone_2.peak_2);

    let on_res = probe_gain(&SystemParams::default(), 0.0, &probes)?;
    println!("on resonance at delta0 = 0: gain {:.4}", on_res.gain_1);
    Ok(())
}
