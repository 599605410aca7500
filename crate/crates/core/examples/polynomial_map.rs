//! Increasing polynomial price maps built from unconstrained codes.
//!
//! `cargo run --release --example polynomial_map`

use polyspot::polymap::{alpha_from_code, beta_bar, IncreasingPolyMap};

fn main() -> polyspot::Result<()> {
    let s_max = 1000.0;
    for alpha in [-3.0, -1.0, 0.0, 0.6, 1.5] {
        println!("alpha {alpha:>5.2}: largest admissible beta {:.4}", beta_bar(alpha)?);
    }
    println!("code 0.93 -> alpha {:.4}", alpha_from_code(0.93));

    for codes in [vec![], vec![0.93, 0.61], vec![0.17, 0.91, 0.96, 0.59]] {
        let m = IncreasingPolyMap::from_codes(&codes, s_max)?;
        println!("\ncodes {codes:?}: degree {}", m.degree());
        println!("  coefficients {:?}", m.coefficients().iter().map(|c| (c * 1e3).round() / 1e3).collect::<Vec<_>>());
        for x in [0.0, 0.25, 0.5, 0.75, 0.9, 1.0] {
            let s = m.eval(x);
            println!("  x {x:.2} -> price {s:8.2}, slope {:8.2}, back {:.6}", m.deriv(x), m.invert(s)?);
        }
    }
    Ok(())
}
