//! Simulate a regime-switching series and fit the two-factor degree ladder
//! with the exact two-point filter.
//!
//! `cargo run --release --example calibrate_regime`

use polyspot::calibrate::{best_row, PriceSeries, DAY};
use polyspot::filter::{fit_2f, FilterConfig, TwoFactorKind};
use polyspot::jacobi::JacobiParams;
use polyspot::model::{ModelSpec, RegimeModel};
use polyspot::optim::OptimizerConfig;
use polyspot::polymap::IncreasingPolyMap;

fn main() -> polyspot::Result<()> {
    let s_max = 1000.0;
    let x = JacobiParams::from_shape(5.69, 17.04, 3.29)?;
    let maps = [IncreasingPolyMap::from_codes(&[0.5, 0.9], s_max)?, IncreasingPolyMap::from_codes(&[0.5, -0.9], s_max)?];
    let model = ModelSpec::Regime(RegimeModel::new(x, 21.60, 217.12, maps)?);
    let path = model.simulate(x.theta(), 0.0, DAY, 1500, 16, 99)?;
    let series = PriceSeries::new(path.prices, DAY)?;
    let spikes = path.y.iter().filter(|&&y| y == 1.0).count();
    println!("{} of {} days in regime 1", spikes, path.y.len());

    let start = std::time::Instant::now();
    let rows = fit_2f(TwoFactorKind::Regime, &series, s_max, 4, &OptimizerConfig::default(), &FilterConfig::default(), 3)?;
    let best = best_row(&rows);
    println!("deg    kappa   theta   sigma  lambda01  lambda10        LL        BIC");
    for (i, r) in rows.iter().enumerate() {
        println!(
            "{:>3} {:>8.2} {:>7.3} {:>7.3} {:>9.2} {:>9.2} {:>9.2} {:>10.2}{}",
            r.degree,
            r.params[0],
            r.params[1],
            r.params[2],
            r.params[3],
            r.params[4],
            r.ll,
            r.bic,
            if Some(i) == best { "  *" } else { "" }
        );
    }
    println!(
        "truth: kappa {:.2}, theta {:.3}, sigma 3.29, lambda01 21.60, lambda10 217.12; {:.1}s",
        x.kappa(),
        x.theta(),
        start.elapsed().as_secs_f64()
    );
    Ok(())
}
