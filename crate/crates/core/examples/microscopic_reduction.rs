//! Beam / dark compartment model: adiabatic coupling, full-response fit
//! and the Monte Carlo ensemble against the compartment ODE.
//!
//! Run with `cargo run --release --example microscopic_reduction`.

use antipt::microscopic_exchange::{
    compartment_ode, extract_effective_coupling, fit_full_response, monte_carlo_exchange, CompartmentState, McConfig,
    MicroParams,
};

fn main() -> antipt::Result<()> {
    let mp = MicroParams { delta0: 2.0, ..MicroParams::default() };
    let eff = extract_effective_coupling(&mp)?;
    let fit = fit_full_response(&mp)?;
    println!("adiabatic: gamma_c {:.5}  gamma12 {:.5}  residual {:.2e}", eff.gamma_c_eff, eff.gamma12_eff, eff.residual);
    println!("fitted:    gamma_c {:.5}  gamma12 {:.5}  residual {:.2e}", fit.gamma_c, fit.gamma12, fit.residual);

    let cfg = McConfig { seed: 1, n_atoms: 5000, dt: 0.001, t_total: 0.5 };
    let mc = monte_carlo_exchange(&mp, &CompartmentState::prepared(&mp), &cfg)?;
    let ode = compartment_ode(&mp, &mc.mean[0], cfg.dt, cfg.t_total)?;
    println!("{:>6} {:>18} {:>18} {:>10}", "t", "beam1 (ODE)", "beam1 (MC)", "dark occ");
    for i in (0..mc.times.len()).step_by(50) {
        let (o, m) = (ode[i].coherence[0], mc.mean[i].coherence[0]);
        println!(
            "{:>6.3} {:>8.4}{:+9.4}i {:>8.4}{:+9.4}i {:>10.4}",
            mc.times[i], o.re, o.im, m.re, m.im, mc.mean[i].occupancy[2]
        );
    }
    Ok(())
}
