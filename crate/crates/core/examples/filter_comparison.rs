//! Exact and quadrature filters against the bootstrap particle filter on
//! short synthetic series.
//!
//! `cargo run --release --example filter_comparison`

use polyspot::calibrate::{PriceSeries, DAY};
use polyspot::filter::{filter_ll, particle_filter_ll, FilterConfig, ParticleConfig};
use polyspot::jacobi::JacobiParams;
use polyspot::model::{DoubleJacobiModel, ModelSpec, RegimeModel};
use polyspot::polymap::IncreasingPolyMap;

fn main() -> polyspot::Result<()> {
    let s_max = 1000.0;
    let regime = ModelSpec::Regime(RegimeModel::new(
        JacobiParams::from_shape(5.69, 17.04, 3.29)?,
        21.60,
        217.12,
        [IncreasingPolyMap::from_codes(&[0.93, 0.61], s_max)?, IncreasingPolyMap::from_codes(&[1.0, -0.31], s_max)?],
    )?);
    let double = ModelSpec::DoubleJacobi(DoubleJacobiModel::new(
        JacobiParams::from_shape(2.52, 4.33, 7.16)?,
        JacobiParams::from_shape(7.27, 2.72, 1.06)?,
        [IncreasingPolyMap::from_codes(&[0.5, 0.3], s_max)?, IncreasingPolyMap::from_codes(&[0.8, -0.4], s_max)?],
    )?);
    let n_particles: usize = std::env::args().nth(1).and_then(|v| v.parse().ok()).unwrap_or(100_000);

    for (name, model, y0) in [("regime", &regime, 0.0), ("double_jacobi", &double, 0.7)] {
        let path = model.simulate(0.3, y0, DAY, 200, 64, 11)?;
        let series = PriceSeries::new(path.prices.clone(), DAY)?;
        let exact = filter_ll(model, &series, &FilterConfig::default())?;
        println!("{name}: filter LL = {:.4}", exact.ll);
        if matches!(model, ModelSpec::DoubleJacobi(_)) {
            let fine = filter_ll(model, &series, &FilterConfig { quad_nodes: 64, ..Default::default() })?;
            println!("{name}: filter LL with 64 nodes = {:.4}", fine.ll);
        }
        for width in [1e-2, 1e-3] {
            let cfg = ParticleConfig { n_particles, obs_width: width, ..Default::default() };
            let t = std::time::Instant::now();
            let pf = particle_filter_ll(model, &series, &cfg, 5)?;
            println!(
                "{name}: particle LL (width {width}) = {:.4} ± {:.4}  [min ESS {:.1}, {:.1}s]",
                pf.ll,
                pf.se,
                pf.min_ess,
                t.elapsed().as_secs_f64()
            );
        }
    }
    Ok(())
}
