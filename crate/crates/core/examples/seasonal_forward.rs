//! Delivery-period forwards with a cosine seasonal factor: closed form
//! against Gauss-Legendre quadrature over the delivery window.
//!
//! `cargo run --release --example seasonal_forward`

use std::f64::consts::PI;

use polyspot::jacobi::JacobiParams;
use polyspot::model::{ModelSpec, OneFactorModel};
use polyspot::polymap::IncreasingPolyMap;
use polyspot::pricing::{ForwardMethod, Pricer, SeasonalMode, Seasonality};

fn main() -> polyspot::Result<()> {
    let model = ModelSpec::OneFactor(OneFactorModel {
        x: JacobiParams::new(140.10, 0.42, 6.09)?,
        map: IncreasingPolyMap::from_codes(&[0.93, 0.61], 1000.0)?,
    });
    let pricer = Pricer::new(model, 0);
    let spot = pricer.spot_coefficients()?;
    let winter: Vec<f64> = spot.iter().map(|v| 0.25 * v).collect();
    let season = Seasonality::new(vec![SeasonalMode::constant(spot), SeasonalMode::cos(2.0 * PI, 0.0, winter)])?;

    let state = [0.2];
    println!("spot now {:.2}", pricer.spot(&state, 0.0, Some(&season))?);
    println!(" month      closed form    quadrature(64)");
    for month in 0..12 {
        let start = month as f64 / 12.0;
        let end = start + 1.0 / 12.0;
        let cf = pricer.forward(&state, 0.0, start, end, &season, ForwardMethod::ClosedForm)?;
        let q = pricer.forward(&state, 0.0, start, end, &season, ForwardMethod::Quadrature(64))?;
        println!("{:>6} {:>16.8} {:>16.8}", month + 1, cf.value, q.value);
    }
    Ok(())
}
