//! Simulate a one-factor series from a degree-3 map and fit the degree ladder.
//!
//! `cargo run --release --example calibrate_ladder`

use polyspot::calibrate::{best_row, fit_ladder, PriceSeries, DAY};
use polyspot::jacobi::{JacobiParams, TransitionDensityConfig};
use polyspot::model::{ModelSpec, OneFactorModel};
use polyspot::optim::OptimizerConfig;
use polyspot::polymap::IncreasingPolyMap;

fn main() -> polyspot::Result<()> {
    let s_max = 1000.0;
    let truth = JacobiParams::new(140.10, 0.42, 6.09)?;
    let map = IncreasingPolyMap::from_codes(&[0.93, 0.61], s_max)?;
    let model = ModelSpec::OneFactor(OneFactorModel { x: truth, map });
    let path = model.simulate(truth.theta(), 0.0, DAY, 1500, 16, 2024)?;
    let series = PriceSeries::new(path.prices, DAY)?;

    let start = std::time::Instant::now();
    let rows = fit_ladder(&series, s_max, 5, &OptimizerConfig::default(), &TransitionDensityConfig::default(), 7)?;
    let best = best_row(&rows);
    println!("deg    kappa   theta   sigma      a      b        LL        BIC  codes");
    for (i, r) in rows.iter().enumerate() {
        println!(
            "{:>3} {:>8.2} {:>7.3} {:>7.3} {:>6.2} {:>6.2} {:>9.2} {:>10.2}  {:?}{}",
            r.degree,
            r.params[0],
            r.params[1],
            r.params[2],
            r.a,
            r.b,
            r.ll,
            r.bic,
            r.codes[0].iter().map(|c| (c * 100.0).round() / 100.0).collect::<Vec<_>>(),
            if Some(i) == best { "  *" } else { "" }
        );
    }
    println!("truth: kappa 140.10, theta 0.42, sigma 6.09; {:.1}s", start.elapsed().as_secs_f64());
    Ok(())
}
