//! Spectral transition density of the Jacobi factor at daily, weekly and
//! monthly steps, with its convergence report.
//!
//! `cargo run --release --example jacobi_density`

use polyspot::jacobi::{simulate_path, JacobiParams, TransitionDensityConfig, TransitionKernel};

fn main() -> polyspot::Result<()> {
    let p = JacobiParams::new(140.10, 0.42, 6.09)?;
    let (a, b) = p.shape();
    let class = p.boundary_class();
    println!("kappa {:.2} theta {:.2} sigma {:.2} -> a {a:.3} b {b:.3}", p.kappa(), p.theta(), p.sigma());
    println!("boundaries unattainable: 0 {} 1 {}", class.zero_unattainable, class.one_unattainable);
    println!("stationary mean {:.4} variance {:.5}", p.stationary_mean(), p.stationary_variance());

    let cfg = TransitionDensityConfig::default();
    let y = 0.3;
    for (label, dt) in [("day", 1.0 / 365.0), ("week", 1.0 / 52.0), ("month", 1.0 / 12.0)] {
        let k = TransitionKernel::new(&p, dt, &cfg)?;
        print!("{label:>5}: {:>2} terms, converged {:<5} p(x | {y}) =", k.degree() + 1, k.converged());
        for x in [0.1, 0.3, 0.5, 0.7] {
            print!(" {:8.4}", k.density(x, y)?);
        }
        println!();
    }

    let path = simulate_path(&p, 0.1, 1.0 / 365.0, 3650, 16, 1)?;
    let mean = path.iter().sum::<f64>() / path.len() as f64;
    println!("ten simulated years from x0 = 0.1: sample mean {mean:.4}");
    Ok(())
}
