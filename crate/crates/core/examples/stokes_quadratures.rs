//! Quadratures from Stokes readings, a covariance matrix estimated from
//! samples, and the information quantities built on it.
//!
//! Run with `cargo run --example stokes_quadratures`.

use antipt::gaussian_info::{
    duan_criterion, gaussian_discord, quadratures_from_stokes, standard_form, symplectic_eigenvalues,
    CovarianceMatrix4,
};
use nalgebra::{Matrix4, Vector4};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

fn main() -> antipt::Result<()> {
    // synthetic Stokes records: a strong S_z reference and correlated
    // fluctuations in S_x, S_y of two beams
    let sz = 1e6_f64;
    let target = CovarianceMatrix4::two_mode_squeezed_vacuum(0.3).matrix() * 1.5;
    let l = target.cholesky().expect("positive definite").l();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let n = 200_000;
    let mut acc = Matrix4::zeros();
    for _ in 0..n {
        let g = Vector4::from_fn(|_, _| StandardNormal.sample(&mut rng));
        let x = l * g * sz.sqrt();
        let (x1, p1) = quadratures_from_stokes(x[0], x[1], sz)?;
        let (x2, p2) = quadratures_from_stokes(x[2], x[3], -sz)?;
        let q = Vector4::new(x1, p1, x2, p2);
        acc += q * q.transpose();
    }
    let cm = CovarianceMatrix4::new(acc / n as f64)?;

    let (nu_p, nu_m) = symplectic_eigenvalues(&cm)?;
    let sf = standard_form(&cm)?;
    let d = gaussian_discord(&cm)?;
    println!("estimated CM {}", cm.matrix());
    println!("standard form a {:.4} b {:.4} c+ {:.4} c- {:.4}", sf.a, sf.b, sf.c_plus, sf.c_minus);
    println!("symplectic eigenvalues {nu_p:.4} {nu_m:.4}");
    println!("discord {:.4} bits, duan {:.4}", d.discord, duan_criterion(&cm));
    Ok(())
}
