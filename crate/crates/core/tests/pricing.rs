mod common;

use std::f64::consts::PI;

use common::{mean_sd, table1_deg5, S_MAX};
use polyspot::jacobi::{euler_step, JacobiParams};
use polyspot::model::{DoubleJacobiModel, ModelSpec, OneFactorModel, RegimeModel};
use polyspot::polymap::IncreasingPolyMap;
use polyspot::pricing::{ForwardMethod, Pricer, SeasonalMode, Seasonality};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

fn map(c: &[f64]) -> IncreasingPolyMap {
    IncreasingPolyMap::from_codes(c, S_MAX).unwrap()
}

fn one_factor(c: &[f64]) -> ModelSpec {
    ModelSpec::OneFactor(OneFactorModel { x: table1_deg5(), map: map(c) })
}

fn regime() -> ModelSpec {
    let x = JacobiParams::from_shape(5.69, 17.04, 3.29).unwrap();
    ModelSpec::Regime(RegimeModel::new(x, 21.6, 217.12, [map(&[0.93, 0.61]), map(&[1.0, -0.31])]).unwrap())
}

fn double_jacobi() -> ModelSpec {
    let x = JacobiParams::from_shape(5.69, 17.04, 3.29).unwrap();
    let y = JacobiParams::new(30.0, 0.2, 4.0).unwrap();
    ModelSpec::DoubleJacobi(DoubleJacobiModel::new(x, y, [map(&[0.5, 0.3]), map(&[0.8, -0.4])]).unwrap())
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1e-12)
}

#[test]
fn identity_map_spot() {
    let p = Pricer::new(one_factor(&[]), 1);
    assert_eq!(p.spot(&[0.5], 0.0, None).unwrap(), 500.0);
}

#[test]
fn regime_spot_endpoints() {
    let model = regime();
    let ModelSpec::Regime(r) = &model else { unreachable!() };
    let p = Pricer::new(model.clone(), 0);
    let season = Seasonality::constant(p.spot_coefficients().unwrap());
    for x in [0.0, 0.13, 0.5, 0.92, 1.0] {
        assert_eq!(p.spot(&[x, 0.0], 0.0, None).unwrap(), r.maps[0].eval(x));
        assert_eq!(p.spot(&[x, 1.0], 0.0, None).unwrap(), r.maps[1].eval(x));
        // the same through the basis representation
        assert!((p.spot(&[x, 0.0], 0.0, Some(&season)).unwrap() - r.maps[0].eval(x)).abs() < 1e-9);
        assert!((p.spot(&[x, 1.0], 0.0, Some(&season)).unwrap() - r.maps[1].eval(x)).abs() < 1e-9);
    }
    assert!(p.spot(&[0.5, 0.5], 0.0, None).is_err());
}

#[test]
fn spot_stays_in_range() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for model in [one_factor(&[0.93, 0.61, -0.2]), regime(), double_jacobi()] {
        let p = Pricer::new(model.clone(), 0);
        for _ in 0..10_000 {
            let x: f64 = rng.random();
            let state = match model {
                ModelSpec::OneFactor(_) => vec![x],
                ModelSpec::Regime(_) => vec![x, f64::from(rng.random_range(0..2u8))],
                ModelSpec::DoubleJacobi(_) => vec![x, rng.random()],
            };
            let s = p.spot(&state, 0.0, None).unwrap();
            assert!((0.0..=S_MAX).contains(&s), "{state:?} → {s}");
        }
    }
}

fn cosine_season(p: &Pricer, c: f64) -> Seasonality {
    let spot = p.spot_coefficients().unwrap();
    let scaled: Vec<f64> = spot.iter().map(|v| 0.2 * v).collect();
    let sin: Vec<f64> = spot.iter().map(|v| -0.05 * v).collect();
    Seasonality::new(vec![
        SeasonalMode::constant(spot.clone()),
        SeasonalMode::cos(c, 0.3, scaled),
        SeasonalMode::sin(c, -1.1, sin),
    ])
    .unwrap()
}

#[test]
fn instantaneous_delivery_is_expectation() {
    let p = Pricer::new(one_factor(&[0.93, 0.61]), 0);
    let coeffs = p.spot_coefficients().unwrap();
    let season = Seasonality::constant(coeffs.clone());
    for (t, start) in [(0.0, 0.1), (0.2, 0.45), (0.0, 1.0)] {
        let f = p.forward(&[0.3], t, start, start + 1e-8, &season, ForwardMethod::default()).unwrap();
        let e = p.generator().expect(start - t, &coeffs, &[0.3]).unwrap();
        assert!(rel(f.value, e) < 1e-6, "{} vs {e}", f.value);
    }
}

#[test]
fn forward_collapses_to_spot() {
    for model in [one_factor(&[0.93, 0.61]), regime(), double_jacobi()] {
        let p = Pricer::new(model.clone(), 0);
        let season = cosine_season(&p, 2.0 * PI);
        let state = if model.state_dim() == 1 { vec![0.4] } else { vec![0.4, 1.0] };
        for t in [0.0, 0.37] {
            let spot = p.spot(&state, t, Some(&season)).unwrap();
            let f = p.forward(&state, t, t, t + 1e-9, &season, ForwardMethod::default()).unwrap();
            assert!(rel(f.value, spot) < 1e-6, "{} vs {spot}", f.value);
        }
    }
}

#[test]
fn cosine_closed_form_matches_quadrature() {
    let p = Pricer::new(one_factor(&[0.93, 0.61]), 0);
    for c in [PI, 2.0 * PI, 8.0 * PI] {
        let season = cosine_season(&p, c);
        for tau in [0.02, 0.25, 1.5] {
            let (t, start) = (0.1, 0.1 + tau);
            let end = start + 1.0 / 12.0;
            let q = p.forward(&[0.3], t, start, end, &season, ForwardMethod::Quadrature(64)).unwrap();
            let cf = p.forward(&[0.3], t, start, end, &season, ForwardMethod::ClosedForm).unwrap();
            assert!(rel(cf.value, q.value) < 1e-8, "c={c} τ={tau}: {} vs {}", cf.value, q.value);
        }
    }
}

#[test]
fn closed_form_two_factor() {
    for model in [regime(), double_jacobi()] {
        let p = Pricer::new(model, 0);
        let season = cosine_season(&p, 2.0 * PI);
        let q = p.forward(&[0.2, 0.0], 0.0, 0.25, 0.5, &season, ForwardMethod::Quadrature(64)).unwrap();
        let cf = p.forward(&[0.2, 0.0], 0.0, 0.25, 0.5, &season, ForwardMethod::ClosedForm).unwrap();
        assert!(rel(cf.value, q.value) < 1e-8);
    }
}

#[test]
fn constant_forward_is_one() {
    let p = Pricer::new(regime(), 3);
    let mut e0 = vec![0.0; p.generator().dimension()];
    e0[0] = 1.0;
    let season = Seasonality::constant(e0);
    for (start, end) in [(0.0, 0.01), (0.5, 1.5), (2.0, 7.0)] {
        for method in [ForwardMethod::Quadrature(16), ForwardMethod::ClosedForm] {
            let f = p.forward(&[0.6, 1.0], 0.0, start, end, &season, method).unwrap();
            assert!((f.value - 1.0).abs() < 1e-12, "{method:?}: {}", f.value);
        }
    }
}

#[test]
fn forward_is_linear() {
    let p = Pricer::new(one_factor(&[0.93, 0.61, 0.2]), 0);
    let n = p.generator().dimension();
    let p1: Vec<f64> = (0..n).map(|i| (i as f64 * 0.7).sin()).collect();
    let p2: Vec<f64> = (0..n).map(|i| 1.0 / (1.0 + i as f64)).collect();
    let combo: Vec<f64> = p1.iter().zip(&p2).map(|(a, b)| a - 2.5 * b).collect();
    let f = |s: Seasonality| p.forward(&[0.3], 0.0, 0.2, 0.3, &s, ForwardMethod::default()).unwrap().value;
    let lhs = f(Seasonality::constant(combo.clone()));
    let rhs = f(Seasonality::constant(p1.clone())) - 2.5 * f(Seasonality::constant(p2.clone()));
    assert!((lhs - rhs).abs() < 1e-10 * (1.0 + lhs.abs()));
    // in the seasonal weights as well
    let two = Seasonality::new(vec![SeasonalMode::constant(p1.clone()), SeasonalMode::cos(3.0, 0.0, p2.clone())]).unwrap();
    let sum = f(Seasonality::constant(p1)) + f(Seasonality::new(vec![SeasonalMode::cos(3.0, 0.0, p2)]).unwrap());
    assert!((f(two) - sum).abs() < 1e-10 * (1.0 + sum.abs()));
}

#[test]
fn forward_rejects_bad_windows() {
    let p = Pricer::new(one_factor(&[]), 0);
    let s = Seasonality::constant(p.spot_coefficients().unwrap());
    assert!(p.forward(&[0.3], 0.5, 0.4, 0.6, &s, ForwardMethod::default()).is_err());
    assert!(p.forward(&[0.3], 0.0, 0.4, 0.4, &s, ForwardMethod::default()).is_err());
    assert!(p.forward(&[1.3], 0.0, 0.4, 0.5, &s, ForwardMethod::default()).is_err());
}

#[test]
fn option_bounds_and_monotonicity() {
    for model in [one_factor(&[0.93, 0.61]), regime()] {
        let state = if model.state_dim() == 1 { vec![0.3] } else { vec![0.3, 0.0] };
        let p = Pricer::for_options(model.clone(), 40);
        let t = 0.25;
        let spot = Pricer::new(model, 0);
        let mean = spot.generator().expect(t, &spot.spot_coefficients().unwrap(), &state).unwrap();
        let at_zero = p.option(&state, 0.0, t, 40).unwrap();
        assert!((at_zero.value - mean).abs() <= at_zero.residual + 1e-8, "{} vs {mean}", at_zero.value);
        let top = p.option(&state, S_MAX, t, 40).unwrap();
        assert!(top.value.abs() <= top.residual + 1e-8);
        let mut prev = f64::INFINITY;
        for i in 0..=50 {
            let k = S_MAX * i as f64 / 50.0;
            let q = p.option(&state, k, t, 40).unwrap();
            assert!(q.value <= prev + 2.0 * q.residual + 1e-9, "not monotone at K={k}");
            let slack = q.residual + 1e-9;
            assert!(q.value >= mean - k - slack && q.value <= mean + slack, "bounds at K={k}: {} mean {mean} residual {} state {state:?}", q.value, q.residual);
            prev = q.value;
        }
    }
}

#[test]
fn option_on_double_jacobi_is_unsupported() {
    let p = Pricer::for_options(double_jacobi(), 10);
    assert!(p.option(&[0.3, 0.3], 100.0, 0.25, 10).is_err());
}

#[test]
fn option_matches_monte_carlo() {
    let model = one_factor(&[0.93, 0.61]);
    let ModelSpec::OneFactor(m) = &model else { unreachable!() };
    let (x0, strike, t) = (0.3, 100.0, 0.25);
    let quote = Pricer::for_options(model.clone(), 40).option(&[x0], strike, t, 40).unwrap();

    // Euler at step h and 2h on shared increments; 2·V(h) - V(2h) cancels
    // the first-order bias.
    let (paths, fine) = (1_000_000usize, 512usize);
    let h = t / fine as f64;
    let samples: Vec<f64> = (0..paths)
        .into_par_iter()
        .chunks(10_000)
        .enumerate()
        .flat_map_iter(|(chunk, ids)| {
            let mut rng = ChaCha8Rng::seed_from_u64(77);
            rng.set_stream(chunk as u64);
            let p = m.x;
            let phi = m.map.clone();
            ids.into_iter()
                .map(|_| {
                    let (mut xf, mut xc) = (x0, x0);
                    for _ in 0..fine / 2 {
                        let z1: f64 = StandardNormal.sample(&mut rng);
                        let z2: f64 = StandardNormal.sample(&mut rng);
                        xf = euler_step(&p, euler_step(&p, xf, h, z1), h, z2);
                        xc = euler_step(&p, xc, 2.0 * h, (z1 + z2) / 2f64.sqrt());
                    }
                    2.0 * (phi.eval(xf) - strike).max(0.0) - (phi.eval(xc) - strike).max(0.0)
                })
                .collect::<Vec<_>>()
        })
        .collect();
    let (mean, sd) = mean_sd(&samples);
    let se = sd / (paths as f64).sqrt();
    let gap = (quote.value - mean).abs();
    assert!(gap < 3.0 * se + quote.residual, "poly {} (residual {}) vs mc {mean} ± {se}", quote.value, quote.residual);
}
