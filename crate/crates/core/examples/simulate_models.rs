//! Ten simulated years of the three model kinds, with spike statistics.
//!
//! `cargo run --release --example simulate_models`

use polyspot::calibrate::DAY;
use polyspot::jacobi::JacobiParams;
use polyspot::model::{DoubleJacobiModel, ModelSpec, OneFactorModel, RegimeModel};
use polyspot::polymap::IncreasingPolyMap;

fn main() -> polyspot::Result<()> {
    let s_max = 1000.0;
    let map = |c: &[f64]| IncreasingPolyMap::from_codes(c, s_max);
    let models = [
        ModelSpec::OneFactor(OneFactorModel { x: JacobiParams::new(140.10, 0.42, 6.09)?, map: map(&[0.17, 0.91, 0.96, 0.59])? }),
        ModelSpec::Regime(RegimeModel::new(
            JacobiParams::from_shape(5.69, 17.04, 3.29)?,
            21.6,
            217.12,
            [map(&[0.93, 0.61])?, map(&[1.0, -0.31])?],
        )?),
        ModelSpec::DoubleJacobi(DoubleJacobiModel::new(
            JacobiParams::from_shape(2.52, 4.33, 7.16)?,
            JacobiParams::from_shape(7.27, 2.72, 1.06)?,
            [map(&[0.5, 0.3])?, map(&[0.8, -0.4])?],
        )?),
    ];
    for model in &models {
        // y starts in the normal regime, or mid-range for the second Jacobi factor
        let y0 = if model.kind_name() == "regime" { 0.0 } else { 0.5 };
        let path = model.simulate(0.3, y0, DAY, 3650, 16, 7)?;
        let mut sorted = path.prices.clone();
        sorted.sort_by(f64::total_cmp);
        let q = |p: f64| sorted[((sorted.len() - 1) as f64 * p) as usize];
        let mean = sorted.iter().sum::<f64>() / sorted.len() as f64;
        let spikes = path.prices.iter().filter(|&&s| s > 300.0).count();
        println!(
            "{:<13} mean {mean:7.2}  median {:7.2}  p99 {:7.2}  max {:7.2}  days above 300: {spikes}",
            model.kind_name(),
            q(0.5),
            q(0.99),
            q(1.0)
        );
    }
    Ok(())
}
