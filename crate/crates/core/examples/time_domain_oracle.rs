//! Euler–Maruyama ensemble against the frequency-domain spectrum.
//!
//! Run with `cargo run --release --example time_domain_oracle`.

use antipt::langevin_spectra::{simulate_time_domain, spectral_cm, TimeDomainConfig};
use antipt::SystemParams;

fn main() -> antipt::Result<()> {
    let p = SystemParams { n_exc: 1.0, ..SystemParams::with_gamma12(0.3, 0.45, 1.0) };
    let cfg = TimeDomainConfig { seed: 7, n_traj: 500, dt: 0.01, t_total: 81.92, segments: 4, omega_max: 3.0 };
    let est = simulate_time_domain(&p, &cfg)?;
    let exact = spectral_cm(&p, &est.omega_grid)?;

    println!("{:>8} {:>10} {:>10} {:>8} {:>7}", "omega", "estimate", "exact", "se", "z");
    for j in (1..est.omega_grid.len()).step_by(4) {
        let (m, s, e) = (est.mean[j][(0, 0)], est.std_err[j][(0, 0)], exact.cm_per_omega[j].get(0, 0));
        println!("{:>8.3} {:>10.4} {:>10.4} {:>8.4} {:>7.2}", est.omega_grid[j], m, e, s, (m - e) / s);
    }
    Ok(())
}
