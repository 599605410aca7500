//! Gauss–Legendre rules and Chebyshev interpolation helpers.

use std::f64::consts::PI;

/// An n-point Gauss–Legendre rule mapped onto a finite interval.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussLegendre {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussLegendre {
    /// Nodes and weights on `[-1, 1]` by Newton iteration on P_n.
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "Gauss–Legendre rule needs at least one node");
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let m = n.div_ceil(2);
        for i in 0..m {
            let mut z = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre_with_derivative(n, z);
                dp = d;
                let dz = p / d;
                z -= dz;
                if dz.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre_with_derivative(n, z);
            if d != 0.0 {
                dp = d;
            }
            let w = 2.0 / ((1.0 - z * z) * dp * dp);
            nodes[i] = -z;
            nodes[n - 1 - i] = z;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        Self { nodes, weights }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Nodes and weights for `∫_lo^hi`.
    pub fn on_interval(&self, lo: f64, hi: f64) -> impl Iterator<Item = (f64, f64)> + '_ {
        let half = 0.5 * (hi - lo);
        let mid = 0.5 * (hi + lo);
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(move |(&x, &w)| (mid + half * x, half * w))
    }

    pub fn integrate<F: FnMut(f64) -> f64>(&self, lo: f64, hi: f64, mut f: F) -> f64 {
        self.on_interval(lo, hi).map(|(x, w)| w * f(x)).sum()
    }

    /// Composite rule: `panels` equal sub-intervals, each with this rule.
    pub fn integrate_composite<F: FnMut(f64) -> f64>(
        &self,
        lo: f64,
        hi: f64,
        panels: usize,
        mut f: F,
    ) -> f64 {
        let h = (hi - lo) / panels as f64;
        (0..panels)
            .map(|k| {
                let a = lo + k as f64 * h;
                self.integrate(a, a + h, &mut f)
            })
            .sum()
    }
}

fn legendre_with_derivative(n: usize, z: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = z;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * z * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (z * p1 - p0) / (z * z - 1.0);
    (p1, d)
}

/// Chebyshev points of the first kind mapped to `[0, 1]`, in increasing order.
pub fn chebyshev_nodes_unit(count: usize) -> Vec<f64> {
    (0..count)
        .rev()
        .map(|j| 0.5 * (1.0 + (PI * (j as f64 + 0.5) / count as f64).cos()))
        .collect()
}

/// Coefficients in the shifted Chebyshev basis `T_k(2x-1)` of the degree
/// `count-1` interpolant through `values` sampled at [`chebyshev_nodes_unit`].
pub fn chebyshev_interpolant(values: &[f64]) -> Vec<f64> {
    let n = values.len();
    let nf = n as f64;
    (0..n)
        .map(|k| {
            let s: f64 = values
                .iter()
                .enumerate()
                .map(|(i, &v)| {
                    // node i (ascending) corresponds to j = n-1-i in cos ordering
                    let j = (n - 1 - i) as f64;
                    v * (PI * k as f64 * (j + 0.5) / nf).cos()
                })
                .sum();
            if k == 0 {
                s / nf
            } else {
                2.0 * s / nf
            }
        })
        .collect()
}
