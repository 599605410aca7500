//! Likelihoods of two-factor models from the optimal Bayes filter.
//!
//! Prices are exact functions of the state, so after observing `s_m` the
//! posterior lives on the curve `x = x̂(s_m, y)`. For the regime model that
//! curve is two points and the recursion is exact. For the double-Jacobi model
//! the posterior over `y` is carried on the nodes of the Gauss rule for the
//! stationary law of `Y`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Beta, Distribution, StandardNormal};
use rayon::prelude::*;

use crate::calibrate::{
    moment_estimates, CalibrationRow, KernelCache, Ladder, PriceSeries, KAPPA_RANGE, SIGMA_RANGE, THETA_RANGE,
};
use crate::error::{Error, Result};
use crate::jacobi::{euler_step, JacobiParams, StationaryGaussRule, TransitionDensityConfig};
use crate::model::{blended, DoubleJacobiModel, ModelSpec, RegimeModel};
use crate::optim::{with_thread_cap, Bounds, OptimizerConfig};
use crate::polymap::{invert_increasing, IncreasingPolyMap};

/// `P[i][j]` is the probability of moving from regime `i` to `j` in time `h`.
pub fn regime_transition(lambda01: f64, lambda10: f64, h: f64) -> [[f64; 2]; 2] {
    let l = lambda01 + lambda10;
    if l <= 0.0 || h <= 0.0 {
        return [[1.0, 0.0], [0.0, 1.0]];
    }
    let decay = -(-l * h).exp_m1();
    let p01 = lambda01 / l * decay;
    let p10 = lambda10 / l * decay;
    [[1.0 - p01, p01], [p10, 1.0 - p10]]
}

/// Root of `(1-y)Φ₀(x) + yΦ₁(x) = s`.
pub fn xhat(maps: &[IncreasingPolyMap; 2], s: f64, y: f64) -> Result<f64> {
    let s_max = maps[0].s_max();
    if !(0.0..=s_max).contains(&s) {
        return Err(Error::PriceOutOfRange { price: s, s_max });
    }
    if !(0.0..=1.0).contains(&y) {
        return Err(Error::OutOfDomain { value: y, domain: "y in [0, 1]" });
    }
    if y == 0.0 {
        return maps[0].invert(s);
    }
    if y == 1.0 {
        return maps[1].invert(s);
    }
    Ok(invert_increasing(|x| (blended(maps, x, y), blended_slope(maps, x, y)), s, s_max))
}

fn blended_slope(maps: &[IncreasingPolyMap; 2], x: f64, y: f64) -> f64 {
    (1.0 - y) * maps[0].deriv(x) + y * maps[1].deriv(x)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RegimePrior {
    /// `(λ10/λ, λ01/λ)`, or `(1/2, 1/2)` without switching.
    Stationary,
    Fixed([f64; 2]),
}

#[derive(Debug, Clone, PartialEq)]
pub struct FilterConfig {
    pub density: TransitionDensityConfig,
    pub regime_prior: RegimePrior,
    /// Gauss nodes for the double-Jacobi posterior over `y`.
    pub quad_nodes: usize,
}

impl Default for FilterConfig {
    fn default() -> Self {
        Self { density: TransitionDensityConfig::default(), regime_prior: RegimePrior::Stationary, quad_nodes: 32 }
    }
}

/// Posterior after each observation.
#[derive(Debug, Clone, PartialEq)]
pub enum FilterState {
    /// Masses at `(x̂(s_m, 0), 0)` and `(x̂(s_m, 1), 1)`.
    Regime { xhat: [f64; 2], weights: [f64; 2] },
    /// Masses on the `y` nodes, located at `x̂(s_m, y_i)`.
    Curve { masses: Vec<f64> },
}

#[derive(Debug, Clone, PartialEq)]
pub struct FilterOutput {
    pub ll: f64,
    pub ln_z: Vec<f64>,
    pub states: Vec<FilterState>,
    pub clipped: usize,
    /// Steps whose posterior put 99% of its mass on fewer than three nodes.
    pub degenerate_steps: usize,
    /// Negative predictive masses set to zero (series truncation artefacts).
    pub zeroed: usize,
}

pub fn regime_filter_ll(model: &RegimeModel, series: &PriceSeries, cfg: &FilterConfig) -> Result<FilterOutput> {
    let (prices, clipped) = series.clipped(model.maps[0].s_max())?;
    let prior = match cfg.regime_prior {
        RegimePrior::Stationary => model.stationary_weights(),
        RegimePrior::Fixed(w) => {
            if w.iter().any(|v| !(*v >= 0.0)) || (w[0] + w[1] - 1.0).abs() > 1e-12 {
                return Err(Error::param("regime_prior", "weights must be >= 0 and sum to 1"));
            }
            w
        }
    };
    let x = model.x;
    let mut cache = KernelCache::new(x, &cfg.density);
    for m in 1..prices.len() {
        cache.get(series.step(m))?;
    }
    let terms = cache.max_len();
    let basis = crate::jacobi::JacobiBasis::for_params(&x, terms.max(1))?;
    let psi_at = |v: f64| {
        let mut out = vec![0.0; terms];
        basis.eval_into(v, &mut out);
        out
    };

    let mut ln_z = Vec::with_capacity(prices.len());
    let mut states = Vec::with_capacity(prices.len());
    let mut weights = prior;
    let mut prev_psi: [Vec<f64>; 2] = [Vec::new(), Vec::new()];
    let mut zeroed = 0;
    for (m, &s) in prices.iter().enumerate() {
        let xh = [model.maps[0].invert(s)?, model.maps[1].invert(s)?];
        let psi = [psi_at(xh[0]), psi_at(xh[1])];
        let mut term = [0.0; 2];
        for j in 0..2 {
            let slope = model.maps[j].deriv(xh[j]);
            if !(slope > 0.0) {
                return Err(Error::NonPositiveDensity { index: m });
            }
            let w_x = x.stationary_density(xh[j])?;
            let pred = if m == 0 {
                weights[j] * w_x
            } else {
                let trans = regime_transition(model.lambda01, model.lambda10, series.step(m));
                let c = cache.get(series.step(m))?.coefficients();
                let mut acc = 0.0;
                for jp in 0..2 {
                    let mix = weights[jp] * trans[jp][j];
                    if mix == 0.0 {
                        continue;
                    }
                    let sum: f64 = c.iter().zip(&psi[j]).zip(&prev_psi[jp]).map(|((c, a), b)| c * a * b).sum();
                    acc += mix * w_x * sum;
                }
                acc
            };
            term[j] = if pred < 0.0 {
                zeroed += 1;
                0.0
            } else {
                pred / slope
            };
        }
        let z = term[0] + term[1];
        if !(z > 0.0 && z.is_finite()) {
            return Err(Error::NonPositiveDensity { index: m });
        }
        ln_z.push(z.ln());
        weights = [term[0] / z, term[1] / z];
        states.push(FilterState::Regime { xhat: xh, weights });
        prev_psi = psi;
    }
    Ok(FilterOutput { ll: ln_z.iter().sum(), ln_z, states, clipped, degenerate_steps: 0, zeroed })
}

/// Discrete transition of `Y` between Gauss nodes over `h`:
/// `M[i][j] = sqrt(λ_i/λ_j) Σ_{n<N} e^{-μ_n h} v_n(i) v_n(j)` with `v_n(i)` the
/// orthonormal modes of the rule.
fn node_kernel(y: &JacobiParams, rule: &StationaryGaussRule, h: f64) -> Vec<Vec<f64>> {
    let n = rule.len();
    let decay: Vec<f64> = (0..n).map(|k| (-y.eigenvalue(k) * h).exp()).collect();
    let mut out = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in 0..n {
            let s: f64 = (0..n).map(|k| decay[k] * rule.modes[k][i] * rule.modes[k][j]).sum();
            out[i][j] = (rule.weights[i] / rule.weights[j]).sqrt() * s;
        }
    }
    out
}

fn degenerate(masses: &[f64]) -> bool {
    let mut sorted = masses.to_vec();
    sorted.sort_by(|a, b| b.total_cmp(a));
    let mut acc = 0.0;
    for (k, v) in sorted.iter().enumerate() {
        acc += v;
        if acc >= 0.99 {
            return k + 1 < 3;
        }
    }
    false
}

pub fn double_jacobi_filter_ll(
    model: &DoubleJacobiModel,
    series: &PriceSeries,
    cfg: &FilterConfig,
) -> Result<FilterOutput> {
    if cfg.quad_nodes < 8 {
        return Err(Error::param("quad_nodes", format!("need at least 8, got {}", cfg.quad_nodes)));
    }
    let (prices, clipped) = series.clipped(model.maps[0].s_max())?;
    let rule = StationaryGaussRule::new(&model.y, cfg.quad_nodes)?;
    let nq = rule.len();
    let x = model.x;
    let mut cache = KernelCache::new(x, &cfg.density);
    let mut kernels: Vec<(f64, Vec<Vec<f64>>)> = Vec::new();
    for m in 1..prices.len() {
        let h = series.step(m);
        cache.get(h)?;
        if !kernels.iter().any(|(k, _)| *k == h) {
            kernels.push((h, node_kernel(&model.y, &rule, h)));
        }
    }
    let terms = cache.max_len();
    let basis = crate::jacobi::JacobiBasis::for_params(&x, terms.max(1))?;

    let mut ln_z = Vec::with_capacity(prices.len());
    let mut states = Vec::with_capacity(prices.len());
    let mut masses: Vec<f64> = rule.weights.clone();
    let mut prev_psi: Vec<Vec<f64>> = Vec::new();
    let mut degenerate_steps = 0;
    let mut zeroed = 0;
    for (m, &s) in prices.iter().enumerate() {
        let mut psi = Vec::with_capacity(nq);
        let mut scale = Vec::with_capacity(nq); // w_X(x̂_i)/Φ'_{y_i}(x̂_i)
        for &yi in &rule.nodes {
            let xi = xhat(&model.maps, s, yi)?;
            let slope = blended_slope(&model.maps, xi, yi);
            if !(slope > 0.0) {
                return Err(Error::NonPositiveDensity { index: m });
            }
            let mut p = vec![0.0; terms];
            basis.eval_into(xi, &mut p);
            psi.push(p);
            scale.push(x.stationary_density(xi)? / slope);
        }
        let mut next = vec![0.0; nq];
        if m == 0 {
            for i in 0..nq {
                next[i] = masses[i] * scale[i];
            }
        } else {
            let h = series.step(m);
            let c = cache.get(h)?.coefficients();
            let kern = &kernels.iter().find(|(k, _)| *k == h).expect("kernel precomputed").1;
            for i in 0..nq {
                let mut acc = 0.0;
                for j in 0..nq {
                    if masses[j] == 0.0 || kern[i][j] == 0.0 {
                        continue;
                    }
                    let px: f64 = c.iter().zip(&psi[i]).zip(&prev_psi[j]).map(|((c, a), b)| c * a * b).sum();
                    acc += kern[i][j] * px * masses[j];
                }
                next[i] = acc * scale[i];
            }
        }
        for v in next.iter_mut() {
            if *v < 0.0 {
                *v = 0.0;
                zeroed += 1;
            }
        }
        let z: f64 = next.iter().sum();
        if !(z > 0.0 && z.is_finite()) {
            return Err(Error::NonPositiveDensity { index: m });
        }
        ln_z.push(z.ln());
        masses = next.iter().map(|v| v / z).collect();
        if degenerate(&masses) {
            degenerate_steps += 1;
        }
        states.push(FilterState::Curve { masses: masses.clone() });
        prev_psi = psi;
    }
    if degenerate_steps > 0 {
        log::warn!(
            "posterior concentrated on fewer than 3 of {nq} nodes at {degenerate_steps} steps; consider more nodes"
        );
    }
    Ok(FilterOutput { ll: ln_z.iter().sum(), ln_z, states, clipped, degenerate_steps, zeroed })
}

/// Likelihood of any model by its exact or quadrature filter.
pub fn filter_ll(model: &ModelSpec, series: &PriceSeries, cfg: &FilterConfig) -> Result<FilterOutput> {
    match model {
        ModelSpec::OneFactor(m) => {
            let l = crate::calibrate::log_likelihood(&m.x, &m.map, series, &cfg.density)?;
            Ok(FilterOutput {
                ll: l.ll,
                ln_z: Vec::new(),
                states: Vec::new(),
                clipped: l.clipped,
                degenerate_steps: 0,
                zeroed: 0,
            })
        }
        ModelSpec::Regime(m) => regime_filter_ll(m, series, cfg),
        ModelSpec::DoubleJacobi(m) => double_jacobi_filter_ll(m, series, cfg),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ParticleConfig {
    pub n_particles: usize,
    /// Euler substeps per observation interval.
    pub substeps: usize,
    /// Observation noise width as a fraction of `s_max`.
    pub obs_width: f64,
    /// Independent sub-filters used for the standard error.
    pub groups: usize,
}

impl Default for ParticleConfig {
    fn default() -> Self {
        Self { n_particles: 100_000, substeps: 32, obs_width: 1e-3, groups: 20 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ParticleEstimate {
    /// Log-likelihood from one filter over all particles.
    pub ll: f64,
    /// Standard deviation of the sub-filter log-likelihoods over `sqrt(groups)`.
    /// Each sub-filter holds `n_particles / groups` particles, and the
    /// variance of the estimate scales like `1/n`, so this tracks the spread
    /// of `ll` itself.
    pub se: f64,
    pub group_ll: Vec<f64>,
    pub min_ess: f64,
    /// Steps of the pooled filter with effective sample size below 10.
    pub degenerate_steps: usize,
}

struct RunResult {
    ll: f64,
    min_ess: f64,
    degenerate: usize,
}

fn systematic_resample<R: Rng>(w: &[f64], rng: &mut R, out: &mut Vec<usize>) {
    let n = w.len();
    out.clear();
    let total: f64 = w.iter().sum();
    let step = total / n as f64;
    let mut u = rng.random::<f64>() * step;
    let mut acc = w[0];
    let mut i = 0;
    for _ in 0..n {
        while u > acc && i + 1 < n {
            i += 1;
            acc += w[i];
        }
        out.push(i);
        u += step;
    }
}

fn stream(seed: u64, id: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(id);
    rng
}

/// One bootstrap filter with `n` particles. Propagation runs in `chunks`
/// independently seeded blocks; resampling is global.
fn run_filter(
    model: &ModelSpec,
    prices: &[f64],
    series: &PriceSeries,
    cfg: &ParticleConfig,
    n: usize,
    chunks: usize,
    seed: u64,
) -> Result<RunResult> {
    let mut master = stream(seed, 0);
    let mut rngs: Vec<ChaCha8Rng> = (0..chunks).map(|c| stream(seed, c as u64 + 1)).collect();
    let size = n.div_ceil(chunks);
    let s_max = model.s_max();
    let delta = cfg.obs_width * s_max;
    let ln_norm = -0.5 * (2.0 * std::f64::consts::PI).ln() - delta.ln();
    let (xp, yp) = match model {
        ModelSpec::OneFactor(m) => (m.x, None),
        ModelSpec::Regime(m) => (m.x, None),
        ModelSpec::DoubleJacobi(m) => (m.x, Some(m.y)),
    };
    let beta = |p: &JacobiParams| Beta::new(p.a(), p.b()).map_err(|e| Error::param("beta", e.to_string()));
    let bx = beta(&xp)?;
    let by = match yp {
        Some(y) => Some(beta(&y)?),
        None => None,
    };
    let p1 = match model {
        ModelSpec::Regime(m) => m.stationary_weights()[1],
        _ => 0.0,
    };
    let mut xs = vec![0.0; n];
    let mut ys = vec![0.0; n];
    xs.par_chunks_mut(size).zip(ys.par_chunks_mut(size)).zip(rngs.par_iter_mut()).for_each(|((xc, yc), rng)| {
        for (x, y) in xc.iter_mut().zip(yc.iter_mut()) {
            *x = bx.sample(rng);
            *y = match (&by, model) {
                (Some(by), _) => by.sample(rng),
                (None, ModelSpec::Regime(_)) => f64::from(u8::from(rng.random::<f64>() < p1)),
                _ => 0.0,
            };
        }
    });
    let price = |x: f64, y: f64| match model {
        ModelSpec::OneFactor(m) => m.map.eval(x),
        ModelSpec::Regime(m) => blended(&m.maps, x, y),
        ModelSpec::DoubleJacobi(m) => blended(&m.maps, x, y),
    };
    let mut ll = 0.0;
    let mut min_ess = f64::INFINITY;
    let mut degenerate = 0;
    let mut lw = vec![0.0; n];
    let mut idx = Vec::with_capacity(n);
    for (m, &s) in prices.iter().enumerate() {
        if m > 0 {
            let h = series.step(m);
            let sub = h / cfg.substeps as f64;
            let trans = match model {
                ModelSpec::Regime(r) => Some(regime_transition(r.lambda01, r.lambda10, sub)),
                _ => None,
            };
            xs.par_chunks_mut(size).zip(ys.par_chunks_mut(size)).zip(rngs.par_iter_mut()).for_each(
                |((xc, yc), rng)| {
                    for (x, y) in xc.iter_mut().zip(yc.iter_mut()) {
                        for _ in 0..cfg.substeps {
                            let z: f64 = rng.sample(StandardNormal);
                            *x = euler_step(&xp, *x, sub, z);
                            if let Some(t) = &trans {
                                let j = *y as usize;
                                if rng.random::<f64>() < t[j][1 - j] {
                                    *y = 1.0 - *y;
                                }
                            } else if let Some(py) = &yp {
                                let z: f64 = rng.sample(StandardNormal);
                                *y = euler_step(py, *y, sub, z);
                            }
                        }
                    }
                },
            );
        }
        lw.par_iter_mut().zip(xs.par_iter().zip(ys.par_iter())).for_each(|(l, (&x, &y))| {
            let r = (s - price(x, y)) / delta;
            *l = ln_norm - 0.5 * r * r;
        });
        let max = lw.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        if !max.is_finite() {
            return Err(Error::NonPositiveDensity { index: m });
        }
        let w: Vec<f64> = lw.iter().map(|v| (v - max).exp()).collect();
        let sum: f64 = w.iter().sum();
        let sum_sq: f64 = w.iter().map(|v| v * v).sum();
        let ess = sum * sum / sum_sq;
        min_ess = min_ess.min(ess);
        if ess < 10.0 {
            degenerate += 1;
        }
        ll += max + (sum / n as f64).ln();
        systematic_resample(&w, &mut master, &mut idx);
        xs = idx.iter().map(|&i| xs[i]).collect();
        ys = idx.iter().map(|&i| ys[i]).collect();
    }
    Ok(RunResult { ll, min_ess, degenerate })
}

/// Bootstrap particle filter with a narrow Gaussian observation density.
pub fn particle_filter_ll(
    model: &ModelSpec,
    series: &PriceSeries,
    cfg: &ParticleConfig,
    seed: u64,
) -> Result<ParticleEstimate> {
    if cfg.n_particles < 1000 {
        return Err(Error::param("n_particles", format!("need at least 1000, got {}", cfg.n_particles)));
    }
    if cfg.groups < 2 || cfg.substeps < 1 || !(cfg.obs_width > 0.0) {
        return Err(Error::param("particle_config", "need groups >= 2, substeps >= 1, obs_width > 0"));
    }
    let (prices, _) = series.clipped(model.s_max())?;
    let per = cfg.n_particles / cfg.groups;
    let group_seed = |g: usize| seed.wrapping_mul(0x9E37_79B9_7F4A_7C15).wrapping_add(g as u64 + 1);
    let (pooled, groups) = with_thread_cap(|| {
        let pooled = run_filter(model, &prices, series, cfg, cfg.n_particles, cfg.groups, seed);
        let groups: Vec<Result<RunResult>> = (0..cfg.groups)
            .into_par_iter()
            .map(|g| run_filter(model, &prices, series, cfg, per, 1, group_seed(g)))
            .collect();
        (pooled, groups)
    });
    let pooled = pooled?;
    let group_ll: Vec<f64> = groups.into_iter().map(|r| r.map(|r| r.ll)).collect::<Result<_>>()?;
    let g = group_ll.len() as f64;
    let mean = group_ll.iter().sum::<f64>() / g;
    let var = group_ll.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (g - 1.0);
    if pooled.degenerate > 0 {
        log::warn!("particle filter: effective sample size fell below 10 at {} steps", pooled.degenerate);
    }
    Ok(ParticleEstimate {
        ll: pooled.ll,
        se: (var / g).sqrt(),
        group_ll,
        min_ess: pooled.min_ess,
        degenerate_steps: pooled.degenerate,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TwoFactorKind {
    Regime,
    DoubleJacobi,
}

pub(crate) const LAMBDA_RANGE: (f64, f64) = (1e-2, 1e3);

/// Degree ladder for a two-factor model: `k = 5 + 2n` (regime) or `6 + 2n`
/// (double-Jacobi) for maps of degree `n + 1`.
pub fn fit_2f(
    kind: TwoFactorKind,
    series: &PriceSeries,
    s_max: f64,
    max_degree: usize,
    optimizer: &OptimizerConfig,
    cfg: &FilterConfig,
    seed: u64,
) -> Result<Vec<CalibrationRow>> {
    let (kappa, theta, sigma) = moment_estimates(series, s_max)?;
    let (_, clipped) = series.clipped(s_max)?;
    let jac = |z: &[f64]| JacobiParams::new(z[0].exp(), z[1], z[2].exp());
    let maps_from = |z: &[f64], base: usize, n: usize| -> Result<[IncreasingPolyMap; 2]> {
        Ok([
            IncreasingPolyMap::from_codes(&z[base..base + n], s_max)?,
            IncreasingPolyMap::from_codes(&z[base + n..base + 2 * n], s_max)?,
        ])
    };
    let log_box = |r: (f64, f64)| (r.0.ln(), r.1.ln());
    let (kl, kh) = log_box(KAPPA_RANGE);
    let (sl, sh) = log_box(SIGMA_RANGE);
    let (ll_, lh) = log_box(LAMBDA_RANGE);
    let (tl, th) = THETA_RANGE;
    let rows = match kind {
        TwoFactorKind::Regime => {
            let objective = |z: &[f64], n: usize| -> Result<f64> {
                let model = RegimeModel::new(jac(z)?, z[3].exp(), z[4].exp(), maps_from(z, 5, n)?)?;
                Ok(regime_filter_ll(&model, series, cfg)?.ll)
            };
            let describe = |z: &[f64]| {
                let p = jac(z).expect("box keeps parameters valid");
                (
                    vec![p.kappa(), p.theta(), p.sigma(), z[3].exp(), z[4].exp()],
                    vec!["kappa", "theta", "sigma", "lambda01", "lambda10"],
                    p.a(),
                    p.b(),
                )
            };
            let ladder = Ladder {
                base_bounds: Bounds::new(vec![kl, tl, sl, ll_, ll_], vec![kh, th, sh, lh, lh]),
                base_start: vec![kappa.ln(), theta, sigma.ln(), 10f64.ln(), 10f64.ln()],
                maps: 2,
                objective: &objective,
                describe: &describe,
                clipped,
                m_obs: series.m_obs(),
            };
            with_thread_cap(|| ladder.run(max_degree, optimizer, seed))
        }
        TwoFactorKind::DoubleJacobi => {
            let objective = |z: &[f64], n: usize| -> Result<f64> {
                let model = DoubleJacobiModel::new(jac(z)?, jac(&z[3..])?, maps_from(z, 6, n)?)?;
                Ok(double_jacobi_filter_ll(&model, series, cfg)?.ll)
            };
            let describe = |z: &[f64]| {
                let p = jac(z).expect("box keeps parameters valid");
                let q = jac(&z[3..]).expect("box keeps parameters valid");
                (
                    vec![p.kappa(), p.theta(), p.sigma(), q.kappa(), q.theta(), q.sigma()],
                    vec!["kappa_x", "theta_x", "sigma_x", "kappa_y", "theta_y", "sigma_y"],
                    p.a(),
                    p.b(),
                )
            };
            let ladder = Ladder {
                base_bounds: Bounds::new(vec![kl, tl, sl, kl, tl, sl], vec![kh, th, sh, kh, th, sh]),
                base_start: vec![kappa.ln(), theta, sigma.ln(), 0.0, 0.5, 0.5f64.ln()],
                maps: 2,
                objective: &objective,
                describe: &describe,
                clipped,
                m_obs: series.m_obs(),
            };
            with_thread_cap(|| ladder.run(max_degree, optimizer, seed))
        }
    };
    Ok(rows)
}
