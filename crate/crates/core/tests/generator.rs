mod common;

use std::collections::HashMap;

use common::{mean_sd, table1_deg5};
use nalgebra::DMatrix;
use polyspot::generator::{
    expm, BasisDescriptor, DoubleJacobiDynamics, GeneratorMatrix, OneFactorDynamics, PolyFamily, RegimeDynamics,
};
use polyspot::jacobi::{euler_step, JacobiParams};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

fn unit(len: usize, k: usize) -> Vec<f64> {
    let mut e = vec![0.0; len];
    e[k] = 1.0;
    e
}

/// `ψ_n` power coefficients from the terminating hypergeometric series.
fn psi_coefficients(n: usize, u: f64, v: f64) -> Vec<f64> {
    let mut c = vec![0.0; n + 1];
    let mut term = 1.0;
    c[0] = 1.0;
    for k in 0..n {
        let kf = k as f64;
        term *= (kf - n as f64) * (n as f64 + u + kf) / ((v + kf) * (kf + 1.0));
        c[k + 1] = term;
    }
    c
}

fn one_factor_all() -> Vec<OneFactorDynamics> {
    vec![
        OneFactorDynamics::Ou { kappa: 3.0, theta: 0.4, sigma: 0.7 },
        OneFactorDynamics::Igbm { kappa: 2.0, theta: 1.5, sigma: 0.3 },
        OneFactorDynamics::Cir { kappa: 1.2, theta: 0.05, sigma: 0.2 },
        OneFactorDynamics::Jacobi(table1_deg5()),
    ]
}

/// `(A, B, C, D, E)` of `(A + Bx)∂ + ½(C + Dx + Ex²)∂²`, written out per model.
fn drift_diffusion(d: &OneFactorDynamics) -> [f64; 5] {
    match *d {
        OneFactorDynamics::Ou { kappa, theta, sigma } => [kappa * theta, -kappa, sigma * sigma, 0.0, 0.0],
        OneFactorDynamics::Igbm { kappa, theta, sigma } => [kappa * theta, -kappa, 0.0, 0.0, sigma * sigma],
        OneFactorDynamics::Cir { kappa, theta, sigma } => [kappa * theta, -kappa, 0.0, sigma * sigma, 0.0],
        OneFactorDynamics::Jacobi(p) => {
            let s2 = p.sigma().powi(2);
            [p.kappa() * p.theta(), -p.kappa(), 0.0, s2, -s2]
        }
    }
}

#[test]
fn jacobi_diagonal_is_minus_eigenvalue() {
    let p = table1_deg5();
    let g = GeneratorMatrix::build_1f(&OneFactorDynamics::Jacobi(p), 10);
    for n in 0..=10 {
        let nf = n as f64;
        let mu = p.kappa() * nf + 0.5 * p.sigma().powi(2) * nf * (nf - 1.0);
        assert!((g.matrix()[(n, n)] + mu).abs() <= 1e-12 * mu.max(1.0), "n={n}");
    }
}

#[test]
fn ou_entries() {
    let (kappa, sigma) = (2.5, 0.8);
    let g = GeneratorMatrix::build_1f(&OneFactorDynamics::Ou { kappa, theta: 0.0, sigma }, 4);
    let m = g.matrix();
    assert_eq!(m[(1, 1)], -kappa);
    assert!((m[(0, 2)] - sigma * sigma).abs() < 1e-15);
    assert_eq!(m[(0, 1)], 0.0);
}

#[test]
fn degree_zero_is_zero_matrix() {
    for d in one_factor_all() {
        let g = GeneratorMatrix::build_1f(&d, 0);
        assert_eq!(g.matrix(), &DMatrix::zeros(1, 1));
    }
    let dj = DoubleJacobiDynamics::independent(&table1_deg5(), &JacobiParams::new(5.0, 0.5, 1.0).unwrap());
    assert_eq!(GeneratorMatrix::build_2f_jacobi(&dj, 0).matrix(), &DMatrix::zeros(1, 1));
}

#[test]
fn one_factor_columns_match_symbolic_generator() {
    for d in one_factor_all() {
        let [a, b, c, dd, e] = drift_diffusion(&d);
        let n = 8;
        let g = GeneratorMatrix::build_1f(&d, n);
        for k in 0..=n {
            let kf = k as f64;
            let half = 0.5 * kf * (kf - 1.0);
            let mut col = vec![0.0; n + 1];
            if k >= 1 {
                col[k - 1] += kf * a + half * dd;
            }
            col[k] += kf * b + half * e;
            if k >= 2 {
                col[k - 2] += half * c;
            }
            for i in 0..=n {
                let got = g.matrix()[(i, k)];
                assert!((got - col[i]).abs() <= 1e-12 * (1.0 + col[i].abs()), "{d:?} ({i},{k}): {got} vs {}", col[i]);
            }
        }
    }
}

#[test]
fn chebyshev_family_represents_the_same_operator() {
    let d = OneFactorDynamics::Jacobi(table1_deg5());
    let gm = GeneratorMatrix::build_1f(&d, 6);
    let gc = GeneratorMatrix::build_1f_in(&d, 6, PolyFamily::Chebyshev);
    let power = [0.3, -1.0, 2.0, 0.5, -0.25, 0.1, 0.05];
    let cheb = PolyFamily::Chebyshev.from_monomial(&power);
    for x in [0.0, 0.2, 0.77, 1.0] {
        let a = gm.expect(0.01, &power, &[x]).unwrap();
        let b = gc.expect(0.01, &cheb, &[x]).unwrap();
        assert!((a - b).abs() < 1e-10, "x={x}: {a} vs {b}");
    }
}

#[test]
fn expect_at_time_zero_evaluates_polynomial() {
    let g = GeneratorMatrix::build_1f(&OneFactorDynamics::Jacobi(table1_deg5()), 3);
    let p = [1.0, -2.0, 0.5, 3.0];
    let x: f64 = 0.37;
    let want = 1.0 - 2.0 * x + 0.5 * x * x + 3.0 * x.powi(3);
    assert!((g.expect(0.0, &p, &[x]).unwrap() - want).abs() < 1e-15);
    assert!(g.expect(0.1, &p[..3], &[x]).is_err());
    assert!(g.expect(0.1, &p, &[x, 0.0]).is_err());
}

#[test]
fn eigenpolynomials_decay_exponentially() {
    for p in [table1_deg5(), JacobiParams::new(3.0, 0.3, 1.5).unwrap()] {
        let (a, b) = p.shape();
        let (u, v) = (a + b - 1.0, a);
        for n in 1..=8 {
            let c = psi_coefficients(n, u, v);
            let g = GeneratorMatrix::build_1f(&OneFactorDynamics::Jacobi(p), n);
            let scale: f64 = c.iter().map(|x| x.abs()).sum();
            for t in [1.0 / 365.0, 1.0 / 52.0, 1.0 / 12.0] {
                for x0 in [0.05, 0.4, 0.9] {
                    let want = (-p.eigenvalue(n) * t).exp() * common::poly(&c, x0);
                    let got = g.expect(t, &c, &[x0]).unwrap();
                    assert!((got - want).abs() <= 1e-8 * scale.max(1.0), "n={n} t={t} x0={x0}: {got} vs {want}");
                }
            }
        }
    }
}

#[test]
fn constants_are_conserved() {
    let p = table1_deg5();
    let gens = vec![
        GeneratorMatrix::build_1f(&OneFactorDynamics::Jacobi(p), 6),
        GeneratorMatrix::build_2f_jacobi(&DoubleJacobiDynamics::independent(&p, &p), 4),
        GeneratorMatrix::build_regime(&RegimeDynamics::new(&p, 21.6, 217.1), 5),
    ];
    for g in gens {
        let n = g.dimension();
        let col: Vec<f64> = g.matrix().column(0).iter().copied().collect();
        assert!(col.iter().all(|v| *v == 0.0));
        let e0 = unit(n, 0);
        for t in [0.01, 0.5, 3.0] {
            let v = g.propagate(t, &e0).unwrap();
            assert!((v[0] - 1.0).abs() < 1e-12);
            assert!(v[1..].iter().all(|x| x.abs() < 1e-12));
        }
    }
}

fn feedback_dynamics() -> DoubleJacobiDynamics {
    DoubleJacobiDynamics { b1: 2.0, b2: 1.0, b11: -5.0, b12: 1.0, b21: 0.0, b22: -3.0, sigma: 0.9, rho: 0.6 }
}

#[test]
fn degree_one_block_is_drift_transpose() {
    let d = DoubleJacobiDynamics { b21: 0.7, ..feedback_dynamics() };
    let g = GeneratorMatrix::build_2f_jacobi(&d, 3);
    let block = g.matrix().view((0, 0), (3, 3)).transpose();
    let want = DMatrix::from_row_slice(3, 3, &[0.0, 0.0, 0.0, d.b1, d.b11, d.b12, d.b2, d.b21, d.b22]);
    assert!((block - want).abs().max() < 1e-15);
}

#[test]
fn mean_pair_matches_linear_ode() {
    let d = feedback_dynamics();
    let g = GeneratorMatrix::build_2f_jacobi(&d, 2);
    let (x0, y0) = (0.2, 0.9);
    let y_inf = -d.b2 / d.b22;
    let x_inf = -(d.b1 + d.b12 * y_inf) / d.b11;
    let v0 = y0 - y_inf;
    let k = d.b12 * v0 / (d.b22 - d.b11);
    let ix = BasisDescriptor::index_2f(1, 0);
    let iy = BasisDescriptor::index_2f(0, 1);
    for t in [0.05, 0.3, 1.0, 4.0] {
        let my = y_inf + v0 * (d.b22 * t).exp();
        let mx = x_inf + (x0 - x_inf - k) * (d.b11 * t).exp() + k * (d.b22 * t).exp();
        let gx = g.expect(t, &unit(g.dimension(), ix), &[x0, y0]).unwrap();
        let gy = g.expect(t, &unit(g.dimension(), iy), &[x0, y0]).unwrap();
        assert!((gx - mx).abs() < 1e-12 && (gy - my).abs() < 1e-12, "t={t}: ({gx}, {gy}) vs ({mx}, {my})");
    }
}

/// Symbolic action on `x^i y^j` for the two-factor Jacobi generator.
fn two_factor_symbolic(d: &DoubleJacobiDynamics, i: usize, j: usize) -> HashMap<(usize, usize), f64> {
    let mut out: HashMap<(usize, usize), f64> = HashMap::new();
    let mut add = |a: usize, b: usize, v: f64| *out.entry((a, b)).or_default() += v;
    let (fi, fj) = (i as f64, j as f64);
    if i >= 1 {
        add(i - 1, j, fi * d.b1);
        add(i, j, fi * d.b11);
        add(i - 1, j + 1, fi * d.b12);
    }
    if j >= 1 {
        add(i, j - 1, fj * d.b2);
        add(i + 1, j - 1, fj * d.b21);
        add(i, j, fj * d.b22);
    }
    if i >= 2 {
        let h = 0.5 * d.sigma * d.sigma * fi * (fi - 1.0);
        add(i - 1, j, h);
        add(i, j, -h);
    }
    if j >= 2 {
        let h = 0.5 * d.rho * d.rho * fj * (fj - 1.0);
        add(i, j - 1, h);
        add(i, j, -h);
    }
    out
}

#[test]
fn two_factor_columns_match_symbolic_generator() {
    let d = DoubleJacobiDynamics { b21: 0.7, ..feedback_dynamics() };
    let n = 5;
    let g = GeneratorMatrix::build_2f_jacobi(&d, n);
    for deg in 0..=n {
        for j in 0..=deg {
            let i = deg - j;
            let col = BasisDescriptor::index_2f(i, j);
            let mut want = vec![0.0; g.dimension()];
            for ((a, b), v) in two_factor_symbolic(&d, i, j) {
                want[BasisDescriptor::index_2f(a, b)] += v;
            }
            for r in 0..g.dimension() {
                assert!((g.matrix()[(r, col)] - want[r]).abs() < 1e-12, "x^{i}y^{j}, row {r}");
            }
        }
    }
}

#[test]
fn regime_columns_match_symbolic_generator() {
    let d = RegimeDynamics { b1: 3.0, b11: -8.0, b12: 2.5, sigma: 1.7, lambda01: 4.0, lambda10: 9.0 };
    let n = 5;
    let g = GeneratorMatrix::build_regime(&d, n);
    let s2 = d.sigma * d.sigma;
    let idx = |k: usize, y: bool| BasisDescriptor::index_regime(k, y);
    for k in 0..=n {
        for with_y in [false, true] {
            if with_y && k == n {
                continue;
            }
            let mut want = vec![0.0; g.dimension()];
            let kf = k as f64;
            if k >= 1 {
                want[idx(k - 1, with_y)] += kf * d.b1;
                want[idx(k, with_y)] += kf * d.b11;
                // B12·y·x^{k-1}·y^e, with y² = y
                want[idx(k - 1, true)] += kf * d.b12;
            }
            if k >= 2 {
                let h = 0.5 * s2 * kf * (kf - 1.0);
                want[idx(k - 1, with_y)] += h;
                want[idx(k, with_y)] -= h;
            }
            if with_y {
                // λ01(1-y)x^k - λ10 y x^k
                want[idx(k, false)] += d.lambda01;
                want[idx(k, true)] -= d.lambda01 + d.lambda10;
            }
            let col = idx(k, with_y);
            for r in 0..g.dimension() {
                assert!((g.matrix()[(r, col)] - want[r]).abs() < 1e-12, "col {col} row {r}");
            }
        }
    }
}

#[test]
fn regime_chain_restriction_matches_two_state_formula() {
    let d = RegimeDynamics::new(&table1_deg5(), 21.6, 217.12);
    let g = GeneratorMatrix::build_regime(&d, 4);
    let ey = unit(g.dimension(), BasisDescriptor::index_regime(0, true));
    let lam = d.lambda01 + d.lambda10;
    for h in [1.0 / 365.0, 1.0 / 52.0, 0.25] {
        let v = g.propagate(h, &ey).unwrap();
        assert!(v.iter().enumerate().all(|(i, x)| i == 0 || i == 2 || x.abs() < 1e-12));
        let p01 = d.lambda01 / lam * (1.0 - (-lam * h).exp());
        let p10 = d.lambda10 / lam * (1.0 - (-lam * h).exp());
        let from0 = g.expect(h, &ey, &[0.3, 0.0]).unwrap();
        let from1 = g.expect(h, &ey, &[0.3, 1.0]).unwrap();
        assert!((from0 - p01).abs() < 1e-10, "h={h}");
        assert!((1.0 - from1 - p10).abs() < 1e-10, "h={h}");
        // the same from a 2×2 rate-matrix exponential
        let q = DMatrix::from_row_slice(2, 2, &[-d.lambda01, d.lambda01, d.lambda10, -d.lambda10]);
        let pm = expm(&(q * h));
        assert!((pm[(0, 1)] - p01).abs() < 1e-12 && (pm[(1, 0)] - p10).abs() < 1e-12);
    }
}

#[test]
fn regime_without_switching_is_block_diagonal() {
    let p = table1_deg5();
    let n = 5;
    let g = GeneratorMatrix::build_regime(&RegimeDynamics::new(&p, 0.0, 0.0), n);
    let g1 = GeneratorMatrix::build_1f(&OneFactorDynamics::Jacobi(p), n);
    for k in 0..=n {
        for j in 0..=n {
            let plain = g.matrix()[(BasisDescriptor::index_regime(j, false), BasisDescriptor::index_regime(k, false))];
            assert!((plain - g1.matrix()[(j, k)]).abs() < 1e-12);
            if k < n {
                let cross = g.matrix()[(BasisDescriptor::index_regime(j, false), BasisDescriptor::index_regime(k, true))];
                assert_eq!(cross, 0.0);
                if j < n {
                    let yy = g.matrix()[(BasisDescriptor::index_regime(j, true), BasisDescriptor::index_regime(k, true))];
                    assert!((yy - g1.matrix()[(j, k)]).abs() < 1e-12);
                }
            }
            if j < n {
                let back = g.matrix()[(BasisDescriptor::index_regime(j, true), BasisDescriptor::index_regime(k, false))];
                assert_eq!(back, 0.0);
            }
        }
    }
}

#[test]
fn independent_factors_factorize() {
    let px = table1_deg5();
    let py = JacobiParams::new(12.0, 0.35, 2.2).unwrap();
    let g2 = GeneratorMatrix::build_2f_jacobi(&DoubleJacobiDynamics::independent(&px, &py), 6);
    let gx = GeneratorMatrix::build_1f(&OneFactorDynamics::Jacobi(px), 3);
    let gy = GeneratorMatrix::build_1f(&OneFactorDynamics::Jacobi(py), 3);
    let (x0, y0) = (0.25, 0.8);
    for t in [1.0 / 365.0, 0.1, 1.0] {
        for m in 0..=3 {
            for k in 0..=3 {
                let joint = g2.expect(t, &unit(g2.dimension(), BasisDescriptor::index_2f(m, k)), &[x0, y0]).unwrap();
                let ex = gx.expect(t, &unit(4, m), &[x0]).unwrap();
                let ey = gy.expect(t, &unit(4, k), &[y0]).unwrap();
                assert!((joint - ex * ey).abs() < 1e-10, "m={m} k={k} t={t}");
            }
        }
    }
}

#[test]
fn propagation_preserves_degree() {
    let p = table1_deg5();
    let g = GeneratorMatrix::build_2f_jacobi(&DoubleJacobiDynamics::independent(&p, &p), 5);
    let e = g.exp(0.2);
    for d in 0..=5 {
        for j in 0..=d {
            let col = BasisDescriptor::index_2f(d - j, j);
            for row in BasisDescriptor::index_2f(0, d + 1).min(g.dimension())..g.dimension() {
                assert_eq!(e[(row, col)], 0.0, "degree {d} leaked into row {row}");
            }
        }
    }
}

/// Classical RK4 on `m' = G m`.
fn rk4(g: &DMatrix<f64>, m0: &[f64], t: f64, steps: usize) -> Vec<f64> {
    let h = t / steps as f64;
    let mut m = nalgebra::DVector::from_column_slice(m0);
    for _ in 0..steps {
        let k1 = g * &m;
        let k2 = g * (&m + &k1 * (h / 2.0));
        let k3 = g * (&m + &k2 * (h / 2.0));
        let k4 = g * (&m + &k3 * h);
        m += (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (h / 6.0);
    }
    m.iter().copied().collect()
}

#[test]
fn moments_match_ode_integration() {
    let p = table1_deg5();
    let mut gens: Vec<GeneratorMatrix> =
        one_factor_all().iter().map(|d| GeneratorMatrix::build_1f(d, 4)).collect();
    gens.push(GeneratorMatrix::build_2f_jacobi(&DoubleJacobiDynamics { b21: 0.7, ..feedback_dynamics() }, 3));
    gens.push(GeneratorMatrix::build_regime(&RegimeDynamics::new(&p, 21.6, 217.12), 4));
    let t = 1.0 / 12.0;
    for g in gens {
        let n = g.dimension();
        let state: Vec<f64> = if g.basis().state_dim() == 1 { vec![0.3] } else { vec![0.3, 1.0] };
        for k in 0..n {
            let e = unit(n, k);
            let coarse = rk4(g.matrix(), &e, t, 4000);
            let fine = rk4(g.matrix(), &e, t, 8000);
            let h = g.basis().eval(&state).unwrap();
            let dot = |v: &[f64]| h.iter().zip(v).map(|(a, b)| a * b).sum::<f64>();
            let (mc, mf) = (dot(&coarse), dot(&fine));
            assert!((mc - mf).abs() < 1e-11 * (1.0 + mf.abs()), "ODE reference not settled");
            let got = g.expect(t, &e, &state).unwrap();
            assert!((got - mf).abs() < 1e-9 * (1.0 + mf.abs()), "{:?} k={k}: {got} vs {mf}", g.dynamics());
        }
    }
}

#[test]
fn moments_match_monte_carlo() {
    // Coupled Euler runs at step h and 2h; 2·m(h) - m(2h) removes the
    // first-order weak bias.
    let p = table1_deg5();
    let (x0, t, fine_steps, paths) = (0.3, 1.0 / 12.0, 256usize, 100_000usize);
    let h = t / fine_steps as f64;
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut samples: Vec<Vec<f64>> = (0..5).map(|_| Vec::with_capacity(paths)).collect();
    for _ in 0..paths {
        let (mut xf, mut xc) = (x0, x0);
        for _ in 0..fine_steps / 2 {
            let z1: f64 = StandardNormal.sample(&mut rng);
            let z2: f64 = StandardNormal.sample(&mut rng);
            xf = euler_step(&p, xf, h, z1);
            xf = euler_step(&p, xf, h, z2);
            xc = euler_step(&p, xc, 2.0 * h, (z1 + z2) / 2f64.sqrt());
        }
        for (k, s) in samples.iter_mut().enumerate() {
            s.push(2.0 * xf.powi(k as i32) - xc.powi(k as i32));
        }
    }
    let g = GeneratorMatrix::build_1f(&OneFactorDynamics::Jacobi(p), 4);
    for (k, s) in samples.iter().enumerate().skip(1) {
        let (m, sd) = mean_sd(s);
        let se = sd / (paths as f64).sqrt();
        let exact = g.expect(t, &unit(5, k), &[x0]).unwrap();
        assert!((m - exact).abs() < 4.0 * se, "k={k}: mc {m} ± {se} vs {exact}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn jacobi_conditional_moments_stay_in_unit_interval(
        kappa in 0.5f64..200.0, theta in 0.05f64..0.95, sigma in 0.1f64..8.0,
        x0 in 0.0f64..=1.0, t in 0.0f64..0.5,
    ) {
        let p = JacobiParams::new(kappa, theta, sigma).unwrap();
        let g = GeneratorMatrix::build_1f(&OneFactorDynamics::Jacobi(p), 4);
        let mut prev = 1.0 + 1e-9;
        for k in 1..=4 {
            let m = g.expect(t, &unit(5, k), &[x0]).unwrap();
            prop_assert!(m >= -1e-9 && m <= prev, "k={} m={} prev={}", k, m, prev);
            prev = m + 1e-9;
        }
    }
}
