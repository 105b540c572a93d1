//! Supermode frequencies and linewidths across the exceptional point.
//!
//! Run with `cargo run --example supermodes`.

use antipt::effective_model::{eigengap_sweep, supermodes, DEFAULT_EP_TOL};
use antipt::SystemParams;

fn main() -> antipt::Result<()> {
    let p = SystemParams::default();
    let gc = p.gamma_c;
    println!("gamma12 = {:.3}, gamma_c = {gc:.3}", p.gamma12());

    println!("{:>8} {:>16} {:>16} {:>12}", "delta0", "omega+", "omega-", "regime");
    for k in 0..=8 {
        let delta0 = 0.25 * k as f64 * gc;
        let s = supermodes(&SystemParams { delta0, ..p }, DEFAULT_EP_TOL)?;
        println!(
            "{delta0:>8.3} {:>7.3}{:+8.3}i {:>7.3}{:+8.3}i {:>12?}",
            s.omega_plus.re, s.omega_plus.im, s.omega_minus.re, s.omega_minus.im, s.regime
        );
    }

    // the real gap opens where the imaginary gap closes
    let grid: Vec<f64> = (0..=60).map(|k| 0.05 * k as f64 * gc).collect();
    let rows = eigengap_sweep(&p, &grid)?;
    let ep = rows.iter().find(|r| r.im_gap == 0.0).map(|r| r.delta0);
    println!("first delta0 with equal linewidths: {ep:?}");
    Ok(())
}
