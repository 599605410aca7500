//! Conditional moments from the generator matrix exponential, for the
//! Jacobi factor and the regime-switching pair.
//!
//! `cargo run --release --example conditional_moments`

use polyspot::generator::{BasisDescriptor, GeneratorMatrix, OneFactorDynamics, RegimeDynamics};
use polyspot::jacobi::JacobiParams;

fn unit(len: usize, k: usize) -> Vec<f64> {
    let mut e = vec![0.0; len];
    e[k] = 1.0;
    e
}

fn main() -> polyspot::Result<()> {
    let p = JacobiParams::new(140.10, 0.42, 6.09)?;
    let g = GeneratorMatrix::build_1f(&OneFactorDynamics::Jacobi(p), 4);
    println!("Jacobi generator, degree 4 (column k is the image of x^k):\n{:.2}", g.matrix());
    let x0 = 0.1;
    for t in [0.0, 1.0 / 365.0, 1.0 / 52.0, 1.0 / 12.0, 1.0] {
        let m: Vec<f64> = (1..=4).map(|k| g.expect(t, &unit(5, k), &[x0])).collect::<Result<_, _>>()?;
        println!("t {t:.4}: E[X^k], k = 1..4: {:.5?}", m);
    }

    let d = RegimeDynamics::new(&p, 21.6, 217.12);
    let gr = GeneratorMatrix::build_regime(&d, 2);
    let ey = unit(gr.dimension(), BasisDescriptor::index_regime(0, true));
    for h in [1.0 / 365.0, 1.0 / 52.0, 0.25] {
        let from0 = gr.expect(h, &ey, &[0.3, 0.0])?;
        let from1 = gr.expect(h, &ey, &[0.3, 1.0])?;
        println!("P(spike regime after {h:.4} y) from normal {from0:.5}, from spike {from1:.5}");
    }
    Ok(())
}
