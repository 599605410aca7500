//! Calls on the spot by polynomial interpolation of the payoff, for the
//! one-factor and regime models.
//!
//! `cargo run --release --example spot_options`

use polyspot::jacobi::JacobiParams;
use polyspot::model::{ModelSpec, OneFactorModel, RegimeModel};
use polyspot::polymap::IncreasingPolyMap;
use polyspot::pricing::{Pricer, DEFAULT_OPTION_DEGREE};

fn main() -> polyspot::Result<()> {
    let s_max = 1000.0;
    let one = ModelSpec::OneFactor(OneFactorModel {
        x: JacobiParams::new(140.10, 0.42, 6.09)?,
        map: IncreasingPolyMap::from_codes(&[0.93, 0.61], s_max)?,
    });
    let regime = ModelSpec::Regime(RegimeModel::new(
        JacobiParams::from_shape(5.69, 17.04, 3.29)?,
        21.6,
        217.12,
        [IncreasingPolyMap::from_codes(&[0.93, 0.61], s_max)?, IncreasingPolyMap::from_codes(&[1.0, -0.31], s_max)?],
    )?);
    let degree = DEFAULT_OPTION_DEGREE;
    for (name, model, state) in [("one factor", one, vec![0.3]), ("regime, normal state", regime, vec![0.3, 0.0])] {
        let pricer = Pricer::for_options(model, degree);
        println!("{name}: spot {:.2}", pricer.model().spot(&state)?);
        for maturity in [1.0 / 52.0, 0.25] {
            for strike in [0.0, 50.0, 100.0, 250.0, 500.0] {
                let q = pricer.option(&state, strike, maturity, degree)?;
                println!("  T {maturity:.3} K {strike:>5}: {:>9.4}  (payoff residual {:.1e})", q.value, q.residual);
            }
        }
    }
    Ok(())
}
