//! The Jacobi diffusion `dX = κ(θ - X)dt + σ√(X(1-X)) dW` on `[0, 1]`.
//!
//! Densities are built from the spectral expansion in Jacobi polynomials
//! `ψ_n(x) = J_n(x; a+b-1, a)`, normalised so that `ψ_n(0) = 1` and
//! `∫ w ψ_m ψ_n = δ_mn / k_n` against the stationary Beta(a, b) density `w`.
//! All polynomial arguments live on `[0, 1]`.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};

/// Lower/upper clamp applied after every Euler step.
pub const CLAMP_MARGIN: f64 = 1e-12;

/// Mean-reversion rate κ (1/year), long-run level θ and volatility σ (1/√year).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JacobiParams {
    kappa: f64,
    theta: f64,
    sigma: f64,
}

/// Whether each boundary of `[0, 1]` can be reached.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BoundaryClass {
    pub zero_unattainable: bool,
    pub one_unattainable: bool,
}

impl JacobiParams {
    /// `sigma = 0` is accepted so that deterministic paths can be simulated;
    /// every density routine rejects it.
    pub fn new(kappa: f64, theta: f64, sigma: f64) -> Result<Self> {
        if !(kappa.is_finite() && kappa > 0.0) {
            return Err(Error::param("kappa", format!("must be finite and > 0, got {kappa}")));
        }
        if !(0.0..=1.0).contains(&theta) {
            return Err(Error::param("theta", format!("must lie in [0, 1], got {theta}")));
        }
        if !(sigma.is_finite() && sigma >= 0.0) {
            return Err(Error::param("sigma", format!("must be finite and >= 0, got {sigma}")));
        }
        Ok(Self { kappa, theta, sigma })
    }

    /// Build from the shape pair: κ = σ²(a+b)/2, θ = a/(a+b).
    pub fn from_shape(a: f64, b: f64, sigma: f64) -> Result<Self> {
        if !(a.is_finite() && b.is_finite() && a >= 0.0 && b >= 0.0 && a + b > 0.0) {
            return Err(Error::param("a/b", format!("need finite a, b >= 0 with a+b > 0, got ({a}, {b})")));
        }
        if !(sigma.is_finite() && sigma > 0.0) {
            return Err(Error::param("sigma", format!("must be finite and > 0, got {sigma}")));
        }
        Self::new(0.5 * sigma * sigma * (a + b), a / (a + b), sigma)
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    /// The shape pair `(a, b) = (2κθ/σ², 2κ(1-θ)/σ²)`.
    pub fn shape(&self) -> (f64, f64) {
        let s2 = self.sigma * self.sigma;
        (2.0 * self.kappa * self.theta / s2, 2.0 * self.kappa * (1.0 - self.theta) / s2)
    }

    pub fn a(&self) -> f64 {
        self.shape().0
    }

    pub fn b(&self) -> f64 {
        self.shape().1
    }

    /// `a >= 1` keeps 0 out of reach, `b >= 1` keeps 1 out of reach.
    pub fn boundary_class(&self) -> BoundaryClass {
        let (a, b) = self.shape();
        BoundaryClass { zero_unattainable: a >= 1.0, one_unattainable: b >= 1.0 }
    }

    /// `μ_n = κn + σ²n(n-1)/2`.
    pub fn eigenvalue(&self, n: usize) -> f64 {
        let n = n as f64;
        self.kappa * n + 0.5 * self.sigma * self.sigma * n * (n - 1.0)
    }

    /// Same quantity in shape form, `(nσ²/2)(a+b-1+n)`.
    pub fn eigenvalue_shape_form(&self, n: usize) -> f64 {
        let (a, b) = self.shape();
        let n = n as f64;
        0.5 * n * self.sigma * self.sigma * (a + b - 1.0 + n)
    }

    pub fn drift(&self, x: f64) -> f64 {
        self.kappa * (self.theta - x)
    }

    pub fn diffusion_sq(&self, x: f64) -> f64 {
        self.sigma * self.sigma * (x * (1.0 - x)).max(0.0)
    }

    pub fn stationary_mean(&self) -> f64 {
        self.theta
    }

    pub fn stationary_variance(&self) -> f64 {
        let (a, b) = self.shape();
        a * b / ((a + b) * (a + b) * (a + b + 1.0))
    }

    fn require_density_shape(&self) -> Result<(f64, f64)> {
        if self.sigma <= 0.0 {
            return Err(Error::param("sigma", "densities need sigma > 0"));
        }
        let (a, b) = self.shape();
        if !(a > 0.0 && b > 0.0 && a.is_finite() && b.is_finite()) {
            return Err(Error::param("theta", format!("densities need a, b > 0, got ({a}, {b})")));
        }
        Ok((a, b))
    }

    /// Log of the Beta(a, b) density; `x` must lie in `(0, 1)`.
    pub fn ln_stationary_density(&self, x: f64) -> Result<f64> {
        let (a, b) = self.require_density_shape()?;
        if !(x > 0.0 && x < 1.0) {
            return Err(Error::OutOfDomain { value: x, domain: "(0, 1)" });
        }
        Ok(ln_beta_norm(a, b) + (a - 1.0) * x.ln() + (b - 1.0) * (-x).ln_1p())
    }

    pub fn stationary_density(&self, x: f64) -> Result<f64> {
        self.ln_stationary_density(x).map(f64::exp)
    }
}

/// `ln Γ(a+b) - ln Γ(a) - ln Γ(b)`.
pub(crate) fn ln_beta_norm(a: f64, b: f64) -> f64 {
    ln_gamma(a + b) - ln_gamma(a) - ln_gamma(b)
}

/// Three-term recursion for `J_n(·; u, v)` on `[0, 1]`:
/// `x J_n = α_n J_{n-1} + β_n J_n + γ_n J_{n+1}`, `J_0 = 1`, `J_1 = 1 - (u+1)x/v`.
#[derive(Debug, Clone, PartialEq)]
pub struct JacobiBasis {
    u: f64,
    v: f64,
    alpha: Vec<f64>,
    beta: Vec<f64>,
    gamma: Vec<f64>,
}

impl JacobiBasis {
    pub fn new(u: f64, v: f64, max_degree: usize) -> Result<Self> {
        if !(v > 0.0 && u + 1.0 > 0.0 && u.is_finite() && v.is_finite()) {
            return Err(Error::param("u/v", format!("need v > 0 and u > -1, got ({u}, {v})")));
        }
        let mut alpha = Vec::with_capacity(max_degree + 1);
        let mut beta = Vec::with_capacity(max_degree + 1);
        let mut gamma = Vec::with_capacity(max_degree + 1);
        for n in 0..=max_degree {
            let (al, be, ga) = recursion_coefficients(u, v, n);
            alpha.push(al);
            beta.push(be);
            gamma.push(ga);
        }
        Ok(Self { u, v, alpha, beta, gamma })
    }

    /// Basis `ψ_n = J_n(·; a+b-1, a)` for the given process.
    pub fn for_params(params: &JacobiParams, max_degree: usize) -> Result<Self> {
        let (a, b) = params.require_density_shape()?;
        Self::new(a + b - 1.0, a, max_degree)
    }

    pub fn u(&self) -> f64 {
        self.u
    }

    pub fn v(&self) -> f64 {
        self.v
    }

    pub fn max_degree(&self) -> usize {
        self.alpha.len() - 1
    }

    /// `(α_n, β_n, γ_n)`.
    pub fn recursion(&self, n: usize) -> Option<(f64, f64, f64)> {
        Some((*self.alpha.get(n)?, self.beta[n], self.gamma[n]))
    }

    /// `J_n(x)`. Needs the recursion up to `n - 1`.
    pub fn eval(&self, n: usize, x: f64) -> Result<f64> {
        if n > self.max_degree() + 1 {
            return Err(Error::DegreeTooHigh { requested: n, available: self.max_degree() });
        }
        let mut out = vec![0.0; n + 1];
        self.eval_into(x, &mut out);
        Ok(out[n])
    }

    /// Fills `out[k] = J_k(x)` for `k < out.len()`; `out.len()` must not
    /// exceed `max_degree + 2`.
    pub fn eval_into(&self, x: f64, out: &mut [f64]) {
        if out.is_empty() {
            return;
        }
        out[0] = 1.0;
        if out.len() == 1 {
            return;
        }
        out[1] = 1.0 - (self.u + 1.0) / self.v * x;
        for n in 1..out.len() - 1 {
            out[n + 1] = ((x - self.beta[n]) * out[n] - self.alpha[n] * out[n - 1]) / self.gamma[n];
        }
    }

    /// Power-basis coefficients (ascending) of `J_0..=J_n`, built from the
    /// recursion. Only sensible for modest `n`.
    pub fn power_coefficients(&self, n: usize) -> Result<Vec<Vec<f64>>> {
        if n > self.max_degree() + 1 {
            return Err(Error::DegreeTooHigh { requested: n, available: self.max_degree() });
        }
        let mut polys: Vec<Vec<f64>> = vec![vec![1.0]];
        if n >= 1 {
            polys.push(vec![1.0, -(self.u + 1.0) / self.v]);
        }
        for k in 1..n {
            let (al, be, ga) = (self.alpha[k], self.beta[k], self.gamma[k]);
            let mut next = vec![0.0; k + 2];
            for (i, &c) in polys[k].iter().enumerate() {
                next[i + 1] += c / ga;
                next[i] -= be * c / ga;
            }
            for (i, &c) in polys[k - 1].iter().enumerate() {
                next[i] -= al * c / ga;
            }
            polys.push(next);
        }
        Ok(polys)
    }
}

fn recursion_coefficients(u: f64, v: f64, n: usize) -> (f64, f64, f64) {
    if n == 0 {
        return (0.0, v / (u + 1.0), -v / (u + 1.0));
    }
    let nf = n as f64;
    let alpha = nf * (v - u - nf) / ((u + 2.0 * nf) * (u + 2.0 * nf - 1.0));
    let beta = (2.0 * nf * (u + nf) + v * (u - 1.0)) / ((u + 2.0 * nf - 1.0) * (u + 2.0 * nf + 1.0));
    let gamma = -(v + nf) * (u + nf) / ((u + 2.0 * nf + 1.0) * (u + 2.0 * nf));
    (alpha, beta, gamma)
}

/// `ln k_n` for `n = 0..=n_max`, accumulated from the ratio `k_{n+1}/k_n`.
pub fn ln_norm_constants(a: f64, b: f64, n_max: usize) -> Vec<f64> {
    let u = a + b - 1.0;
    let mut out = Vec::with_capacity(n_max + 1);
    out.push(0.0);
    let mut ln_poch_a = 0.0;
    let mut ln_poch_ab = 0.0;
    let mut ln_poch_b = 0.0;
    let mut ln_fact = 0.0;
    for n in 1..=n_max {
        let m = (n - 1) as f64;
        ln_poch_a += (a + m).ln();
        ln_poch_ab += (a + b + m).ln();
        ln_poch_b += (b + m).ln();
        ln_fact += (n as f64).ln();
        let nf = n as f64;
        out.push((u + 2.0 * nf).ln() + ln_poch_a + ln_poch_ab - ln_fact - (u + nf).ln() - ln_poch_b);
    }
    out
}

/// Truncation control for the spectral transition density.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransitionDensityConfig {
    /// Highest polynomial degree the series may use.
    pub max_terms: usize,
    /// Stop once `e^{-μ_n dt}` times an envelope of `sup k_n w ψ_n²` falls below this.
    pub tolerance: f64,
}

impl Default for TransitionDensityConfig {
    fn default() -> Self {
        Self { max_terms: 64, tolerance: 1e-12 }
    }
}

impl TransitionDensityConfig {
    pub fn validate(&self) -> Result<()> {
        if self.max_terms < 1 {
            return Err(Error::param("max_terms", "must be >= 1"));
        }
        if !(self.tolerance > 0.0) {
            return Err(Error::param("tolerance", "must be > 0"));
        }
        Ok(())
    }
}

/// The truncated series `p(x, dt; y) = Σ k_n e^{-μ_n dt} w(x) ψ_n(x) ψ_n(y)`
/// for one `(params, dt)` pair.
#[derive(Debug, Clone)]
pub struct TransitionKernel {
    params: JacobiParams,
    dt: f64,
    basis: JacobiBasis,
    /// `k_n e^{-μ_n dt}` for the retained terms.
    coef: Vec<f64>,
    converged: bool,
    tolerance: f64,
}

impl TransitionKernel {
    /// Never fails on truncation; check [`converged`](Self::converged).
    pub fn new(params: &JacobiParams, dt: f64, cfg: &TransitionDensityConfig) -> Result<Self> {
        cfg.validate()?;
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::param("dt", format!("must be > 0, got {dt}")));
        }
        let (a, b) = params.require_density_shape()?;
        let ln_k = ln_norm_constants(a, b, cfg.max_terms);
        let mut coef = vec![1.0];
        let mut converged = false;
        let ln_shape = a.max(b).max(1.0).ln();
        let mut prev_bound = f64::INFINITY;
        for n in 1..=cfg.max_terms {
            let ln_c = ln_k[n] - params.eigenvalue(n) * dt;
            coef.push(ln_c.exp());
            // envelope of sup k_n w ψ_n², which grows roughly linearly in n
            let ln_bound = -params.eigenvalue(n) * dt + (2.0 * n as f64 + a + b).ln() + ln_shape;
            let bound = ln_bound.exp();
            if bound < cfg.tolerance && bound <= prev_bound {
                converged = true;
                break;
            }
            prev_bound = bound;
        }
        let basis = JacobiBasis::new(a + b - 1.0, a, coef.len().saturating_sub(1))?;
        Ok(Self { params: *params, dt, basis, coef, converged, tolerance: cfg.tolerance })
    }

    pub fn params(&self) -> &JacobiParams {
        &self.params
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn converged(&self) -> bool {
        self.converged
    }

    /// Highest degree retained.
    pub fn degree(&self) -> usize {
        self.coef.len() - 1
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coef
    }

    pub fn basis(&self) -> &JacobiBasis {
        &self.basis
    }

    pub fn require_converged(&self) -> Result<()> {
        if self.converged {
            Ok(())
        } else {
            Err(Error::SeriesNotConverged {
                max_terms: self.degree(),
                tolerance: self.tolerance,
                dt: self.dt,
            })
        }
    }

    /// `ψ_0(x)..=ψ_N(x)` for the retained degree `N`.
    pub fn eigenfunctions(&self, x: f64) -> Vec<f64> {
        let mut out = vec![0.0; self.coef.len()];
        self.basis.eval_into(x, &mut out);
        out
    }

    /// Series value from precomputed eigenfunction values and `w(x)`.
    pub fn density_from(&self, w_x: f64, psi_x: &[f64], psi_y: &[f64]) -> f64 {
        let s: f64 = self
            .coef
            .iter()
            .zip(psi_x)
            .zip(psi_y)
            .map(|((c, px), py)| c * px * py)
            .sum();
        w_x * s
    }

    /// `p(x, dt; y)`: density of landing at `x` after `dt` from `y`.
    pub fn density(&self, x: f64, y: f64) -> Result<f64> {
        for v in [x, y] {
            if !(v > 0.0 && v < 1.0) {
                return Err(Error::OutOfDomain { value: v, domain: "(0, 1)" });
            }
        }
        let w_x = self.params.stationary_density(x)?;
        let px = self.eigenfunctions(x);
        let py = self.eigenfunctions(y);
        Ok(self.density_from(w_x, &px, &py))
    }
}

/// One-shot transition density; errors when the truncation did not converge.
pub fn transition_density(
    params: &JacobiParams,
    cfg: &TransitionDensityConfig,
    x: f64,
    y: f64,
    dt: f64,
) -> Result<f64> {
    let kernel = TransitionKernel::new(params, dt, cfg)?;
    kernel.require_converged()?;
    kernel.density(x, y)
}

/// Gauss rule for the stationary Beta(a, b) weight on `[0, 1]`, with the
/// orthonormal polynomials tabulated at the nodes.
#[derive(Debug, Clone)]
pub struct StationaryGaussRule {
    pub nodes: Vec<f64>,
    /// Probability weights; they sum to one.
    pub weights: Vec<f64>,
    /// `modes[n][i] = sqrt(weights[i]) · p_n(nodes[i])` with `p_n` orthonormal.
    pub modes: Vec<Vec<f64>>,
}

impl StationaryGaussRule {
    /// Golub–Welsch on the symmetrised recursion of `ψ_n`.
    pub fn new(params: &JacobiParams, n: usize) -> Result<Self> {
        if n < 1 {
            return Err(Error::param("nodes", "need at least one node"));
        }
        let basis = JacobiBasis::for_params(params, n)?;
        let mut jac = nalgebra::DMatrix::<f64>::zeros(n, n);
        for k in 0..n {
            let (_, be, ga) = basis.recursion(k).expect("degree within basis");
            jac[(k, k)] = be;
            if k + 1 < n {
                let (al_next, _, _) = basis.recursion(k + 1).expect("degree within basis");
                let off = (ga * al_next).max(0.0).sqrt();
                jac[(k, k + 1)] = off;
                jac[(k + 1, k)] = off;
            }
        }
        let eig = nalgebra::SymmetricEigen::new(jac);
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
        let mut nodes = Vec::with_capacity(n);
        let mut weights = Vec::with_capacity(n);
        let mut modes = vec![vec![0.0; n]; n];
        for (col, &i) in order.iter().enumerate() {
            let vec = eig.eigenvectors.column(i);
            let sign = if vec[0] < 0.0 { -1.0 } else { 1.0 };
            nodes.push(eig.eigenvalues[i].clamp(0.0, 1.0));
            weights.push(vec[0] * vec[0]);
            for k in 0..n {
                modes[k][col] = sign * vec[k];
            }
        }
        Ok(Self { nodes, weights, modes })
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }
}

/// One clamped Euler step of length `h` driven by the standard normal `z`.
#[inline]
pub fn euler_step(params: &JacobiParams, x: f64, h: f64, z: f64) -> f64 {
    let next = x + params.drift(x) * h + params.diffusion_sq(x).sqrt() * h.sqrt() * z;
    next.clamp(CLAMP_MARGIN, 1.0 - CLAMP_MARGIN)
}

/// Advance `x` over `dt` with `substeps` clamped Euler steps.
pub fn advance<R: Rng + ?Sized>(params: &JacobiParams, x: f64, dt: f64, substeps: usize, rng: &mut R) -> f64 {
    let h = dt / substeps as f64;
    let mut x = x;
    for _ in 0..substeps {
        let z: f64 = rng.sample(StandardNormal);
        x = euler_step(params, x, h, z);
    }
    x
}

/// A path observed every `dt_obs`, starting at `x0`, with `n_obs + 1` points.
pub fn simulate_path_with<R: Rng + ?Sized>(
    params: &JacobiParams,
    x0: f64,
    dt_obs: f64,
    n_obs: usize,
    substeps: usize,
    rng: &mut R,
) -> Result<Vec<f64>> {
    if !(0.0..=1.0).contains(&x0) {
        return Err(Error::OutOfDomain { value: x0, domain: "[0, 1]" });
    }
    if substeps == 0 {
        return Err(Error::param("substeps", "must be >= 1"));
    }
    if !(dt_obs > 0.0) {
        return Err(Error::param("dt_obs", "must be > 0"));
    }
    let mut path = Vec::with_capacity(n_obs + 1);
    path.push(x0);
    let mut x = x0;
    for _ in 0..n_obs {
        x = advance(params, x, dt_obs, substeps, rng);
        path.push(x);
    }
    Ok(path)
}

/// Deterministic under `seed`.
pub fn simulate_path(
    params: &JacobiParams,
    x0: f64,
    dt_obs: f64,
    n_obs: usize,
    substeps: usize,
    seed: u64,
) -> Result<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    simulate_path_with(params, x0, dt_obs, n_obs, substeps, &mut rng)
}
