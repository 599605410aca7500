//! One-factor maximum likelihood, BIC and the degree ladder.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::jacobi::{JacobiParams, TransitionDensityConfig, TransitionKernel};
use crate::optim::{differential_evolution, nelder_mead, with_thread_cap, Bounds, OptimizerConfig};
use crate::polymap::{alpha_zero_code, IncreasingPolyMap};

/// Observation spacing in years when dates are reduced to day indices.
pub const DAY: f64 = 1.0 / 365.0;
/// Relative distance from `0` and `s_max` used when clipping boundary prices.
pub const CLIP_FRACTION: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq)]
pub struct PriceSeries {
    days: Vec<i64>,
    prices: Vec<f64>,
    dt: f64,
    calendar: bool,
}

impl PriceSeries {
    /// Consecutive observations, `dt` apart.
    pub fn new(prices: Vec<f64>, dt: f64) -> Result<Self> {
        let days = (0..prices.len() as i64).collect();
        Self::with_days(days, prices, dt, false)
    }

    /// With `calendar = true` the step between observations is
    /// `dt·(day_m - day_{m-1})`; otherwise every step is `dt`.
    pub fn with_days(days: Vec<i64>, prices: Vec<f64>, dt: f64, calendar: bool) -> Result<Self> {
        if days.len() != prices.len() {
            return Err(Error::DimensionMismatch { expected: days.len(), got: prices.len() });
        }
        if prices.len() < 2 {
            return Err(Error::InvalidData("a series needs at least two observations".into()));
        }
        if let Some(w) = days.windows(2).position(|w| w[1] <= w[0]) {
            return Err(Error::InvalidData(format!("day indices not strictly increasing at row {}", w + 1)));
        }
        if let Some(i) = prices.iter().position(|p| !p.is_finite()) {
            return Err(Error::InvalidData(format!("non-finite price at row {i}")));
        }
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::param("dt", format!("must be > 0, got {dt}")));
        }
        Ok(Self { days, prices, dt, calendar })
    }

    pub fn len(&self) -> usize {
        self.prices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.prices.is_empty()
    }

    pub fn prices(&self) -> &[f64] {
        &self.prices
    }

    pub fn days(&self) -> &[i64] {
        &self.days
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn calendar(&self) -> bool {
        self.calendar
    }

    /// Year fraction between observations `m-1` and `m`.
    pub fn step(&self, m: usize) -> f64 {
        if self.calendar {
            self.dt * (self.days[m] - self.days[m - 1]) as f64
        } else {
            self.dt
        }
    }

    /// Number of likelihood terms, used as `M_obs` in the BIC.
    pub fn m_obs(&self) -> usize {
        self.prices.len()
    }

    /// Prices moved off the endpoints of `[0, s_max]`, with the number moved.
    /// Prices outside the interval are an error.
    pub fn clipped(&self, s_max: f64) -> Result<(Vec<f64>, usize)> {
        let eps = CLIP_FRACTION * s_max;
        let mut count = 0;
        let mut out = Vec::with_capacity(self.prices.len());
        for &p in &self.prices {
            if !(0.0..=s_max).contains(&p) {
                return Err(Error::PriceOutOfRange { price: p, s_max });
            }
            let c = p.clamp(eps, s_max - eps);
            if c != p {
                count += 1;
            }
            out.push(c);
        }
        Ok((out, count))
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self { prices: self.prices.iter().map(|p| p * factor).collect(), ..self.clone() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Likelihood {
    pub ll: f64,
    pub clipped: usize,
}

/// Caches one transition kernel per distinct step length.
pub(crate) struct KernelCache<'a> {
    params: JacobiParams,
    cfg: &'a TransitionDensityConfig,
    entries: Vec<(f64, TransitionKernel)>,
}

impl<'a> KernelCache<'a> {
    pub(crate) fn new(params: JacobiParams, cfg: &'a TransitionDensityConfig) -> Self {
        Self { params, cfg, entries: Vec::new() }
    }

    pub(crate) fn get(&mut self, dt: f64) -> Result<&TransitionKernel> {
        let pos = match self.entries.iter().position(|(h, _)| *h == dt) {
            Some(i) => i,
            None => {
                let k = TransitionKernel::new(&self.params, dt, self.cfg)?;
                k.require_converged()?;
                self.entries.push((dt, k));
                self.entries.len() - 1
            }
        };
        Ok(&self.entries[pos].1)
    }

    /// Longest retained series among cached kernels.
    pub(crate) fn max_len(&self) -> usize {
        self.entries.iter().map(|(_, k)| k.coefficients().len()).max().unwrap_or(1)
    }
}

/// `Σ_m [log p(x_m; x_{m-1}) - log Φ'(x_m)]` with the stationary density for
/// the first observation.
pub fn log_likelihood(
    params: &JacobiParams,
    map: &IncreasingPolyMap,
    series: &PriceSeries,
    cfg: &TransitionDensityConfig,
) -> Result<Likelihood> {
    let (prices, clipped) = series.clipped(map.s_max())?;
    let xs = prices.iter().map(|&s| map.invert(s)).collect::<Result<Vec<_>>>()?;
    let mut cache = KernelCache::new(*params, cfg);
    for m in 1..xs.len() {
        cache.get(series.step(m))?;
    }
    let terms = cache.max_len();
    let basis = crate::jacobi::JacobiBasis::for_params(params, terms.max(1))?;
    let mut ll = 0.0;
    let mut psi_prev = vec![0.0; terms];
    let mut psi = vec![0.0; terms];
    for (m, &x) in xs.iter().enumerate() {
        let slope = map.deriv(x);
        if !(slope > 0.0) {
            return Err(Error::NonPositiveDensity { index: m });
        }
        basis.eval_into(x, &mut psi);
        let mut term = params.ln_stationary_density(x)?;
        if m > 0 {
            let c = cache.get(series.step(m))?.coefficients();
            let s: f64 = c.iter().zip(&psi).zip(&psi_prev).map(|((c, a), b)| c * a * b).sum();
            if !(s > 0.0) {
                return Err(Error::NonPositiveDensity { index: m });
            }
            term += s.ln();
        }
        ll += term - slope.ln();
        std::mem::swap(&mut psi, &mut psi_prev);
    }
    Ok(Likelihood { ll, clipped })
}

/// `k·ln(M_obs) - 2·LL`.
pub fn bic(ll: f64, k: usize, m_obs: usize) -> f64 {
    k as f64 * (m_obs as f64).ln() - 2.0 * ll
}

/// One rung of a calibration ladder.
#[derive(Debug, Clone, PartialEq)]
pub struct CalibrationRow {
    /// Degree of `Φ` (number of codes per map plus one).
    pub degree: usize,
    /// Factor and switching parameters, in the model's natural order.
    pub params: Vec<f64>,
    pub param_names: Vec<&'static str>,
    /// One code vector per map.
    pub codes: Vec<Vec<f64>>,
    pub a: f64,
    pub b: f64,
    pub ll: f64,
    pub bic: f64,
    pub k: usize,
    pub m_obs: usize,
    pub clipped: usize,
    pub converged: bool,
}

/// Index of the minimum-BIC row.
pub fn best_row(rows: &[CalibrationRow]) -> Option<usize> {
    let mut best: Option<usize> = None;
    for (i, r) in rows.iter().enumerate() {
        if r.bic.is_finite() && best.is_none_or(|b| r.bic < rows[b].bic) {
            best = Some(i);
        }
    }
    best
}

/// A ladder over map degree. Optimisation coordinates are
/// `[base..., codes of map 0 (n), codes of map 1 (n), ...]`.
pub(crate) struct Ladder<'a> {
    pub base_bounds: Bounds,
    pub base_start: Vec<f64>,
    pub maps: usize,
    /// Log-likelihood at coordinates `z` with `n` codes per map; errors mean
    /// an infeasible point.
    pub objective: &'a (dyn Fn(&[f64], usize) -> Result<f64> + Sync),
    /// Natural parameters, their names and the X-factor shape `(a, b)`.
    pub describe: &'a (dyn Fn(&[f64]) -> (Vec<f64>, Vec<&'static str>, f64, f64) + Sync),
    pub clipped: usize,
    pub m_obs: usize,
}

/// Codes for `n + 1` factors that reproduce the map given by `codes`.
///
/// An even count gains an unpaired zero (a constant factor). An odd count has
/// its unpaired linear factor `(0, c)` re-expressed as the pair
/// `(alpha_zero_code(), c)`, which is the same linear polynomial, then a zero
/// is not needed.
pub fn warm_start_codes(codes: &[f64]) -> Vec<f64> {
    let mut out = codes.to_vec();
    if codes.len() % 2 == 0 {
        out.push(0.0);
    } else {
        let last = out.pop().expect("odd length is non-empty");
        out.push(alpha_zero_code());
        out.push(last);
    }
    out
}

fn split_codes(z: &[f64], base: usize, maps: usize, n: usize) -> Vec<Vec<f64>> {
    (0..maps).map(|j| z[base + j * n..base + (j + 1) * n].to_vec()).collect()
}

impl Ladder<'_> {
    pub(crate) fn run(&self, max_degree: usize, cfg: &OptimizerConfig, seed: u64) -> Vec<CalibrationRow> {
        let base = self.base_bounds.dim();
        let mut rows: Vec<CalibrationRow> = Vec::new();
        let mut prev: Option<Vec<f64>> = None;
        for n in 0..max_degree {
            let mut lo = self.base_bounds.lo.clone();
            let mut hi = self.base_bounds.hi.clone();
            lo.extend(std::iter::repeat_n(-1.0, self.maps * n));
            hi.extend(std::iter::repeat_n(1.0, self.maps * n));
            let bounds = Bounds::new(lo, hi);
            let warm: Vec<f64> = match &prev {
                None => self.base_start.clone(),
                Some(z) => {
                    let mut w = z[..base].to_vec();
                    for c in split_codes(z, base, self.maps, n.saturating_sub(1)) {
                        w.extend(warm_start_codes(&c));
                    }
                    w
                }
            };
            let neg = |z: &[f64]| match (self.objective)(z, n) {
                Ok(v) if v.is_finite() => -v,
                _ => f64::INFINITY,
            };
            let mut best = nelder_mead(&neg, &warm, &bounds, cfg);
            let warm_value = neg(&warm);
            for r in 0..=cfg.restarts {
                let mut rng = ChaCha8Rng::seed_from_u64(seed ^ ((n as u64) << 32) ^ r as u64);
                let seeds = if r == 0 { vec![warm.clone(), best.x.clone()] } else { vec![best.x.clone()] };
                let global = differential_evolution(&neg, &bounds, &seeds, cfg, &mut rng);
                let polished = nelder_mead(&neg, &global.x, &bounds, cfg);
                if polished.value < best.value {
                    best = polished;
                }
            }
            if warm_value < best.value {
                // the previous optimum is feasible here; never step backwards
                best.x = warm.clone();
                best.value = warm_value;
            }
            let ll = -best.value;
            let (params, param_names, a, b) = (self.describe)(&best.x);
            let k = base + self.maps * n;
            rows.push(CalibrationRow {
                degree: n + 1,
                params,
                param_names,
                codes: split_codes(&best.x, base, self.maps, n),
                a,
                b,
                ll,
                bic: bic(ll, k, self.m_obs),
                k,
                m_obs: self.m_obs,
                clipped: self.clipped,
                converged: best.converged && ll.is_finite(),
            });
            if !best.converged {
                log::warn!("degree {}: polish did not reach tolerance; reporting best so far", n + 1);
            }
            prev = Some(best.x);
        }
        rows
    }
}

pub(crate) const KAPPA_RANGE: (f64, f64) = (1e-2, 1e3);
pub(crate) const SIGMA_RANGE: (f64, f64) = (1e-3, 1e2);
pub(crate) const THETA_RANGE: (f64, f64) = (0.01, 0.99);

/// Method-of-moments `(κ, θ, σ)` from the latent path under the identity map.
pub fn moment_estimates(series: &PriceSeries, s_max: f64) -> Result<(f64, f64, f64)> {
    let (prices, _) = series.clipped(s_max)?;
    let x: Vec<f64> = prices.iter().map(|p| p / s_max).collect();
    let n = x.len() as f64;
    let mean = x.iter().sum::<f64>() / n;
    let var = x.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    let cov1 = x.windows(2).map(|w| (w[0] - mean) * (w[1] - mean)).sum::<f64>() / (n - 1.0);
    let rho = if var > 0.0 { (cov1 / var).clamp(1e-6, 1.0 - 1e-9) } else { 0.5 };
    let dt = series.dt();
    let kappa = (-rho.ln() / dt).clamp(KAPPA_RANGE.0, KAPPA_RANGE.1);
    let theta = mean.clamp(THETA_RANGE.0, THETA_RANGE.1);
    // Var = θ(1-θ)σ²/(2κ + σ²)
    let denom = (theta * (1.0 - theta) - var).max(1e-9);
    let sigma = (2.0 * kappa * var / denom).sqrt().clamp(SIGMA_RANGE.0, SIGMA_RANGE.1);
    Ok((kappa, theta, sigma))
}

/// Maximum likelihood for maps of degree `1..=max_degree`.
pub fn fit_ladder(
    series: &PriceSeries,
    s_max: f64,
    max_degree: usize,
    optimizer: &OptimizerConfig,
    density: &TransitionDensityConfig,
    seed: u64,
) -> Result<Vec<CalibrationRow>> {
    let (kappa, theta, sigma) = moment_estimates(series, s_max)?;
    let (_, clipped) = series.clipped(s_max)?;
    let decode = |z: &[f64]| JacobiParams::new(z[0].exp(), z[1], z[2].exp());
    let objective = |z: &[f64], n: usize| -> Result<f64> {
        let p = decode(z)?;
        let map = IncreasingPolyMap::from_codes(&z[3..3 + n], s_max)?;
        Ok(log_likelihood(&p, &map, series, density)?.ll)
    };
    let describe = |z: &[f64]| {
        let p = decode(z).expect("box keeps parameters valid");
        (vec![p.kappa(), p.theta(), p.sigma()], vec!["kappa", "theta", "sigma"], p.a(), p.b())
    };
    let ladder = Ladder {
        base_bounds: Bounds::new(
            vec![KAPPA_RANGE.0.ln(), THETA_RANGE.0, SIGMA_RANGE.0.ln()],
            vec![KAPPA_RANGE.1.ln(), THETA_RANGE.1, SIGMA_RANGE.1.ln()],
        ),
        base_start: vec![kappa.ln(), theta, sigma.ln()],
        maps: 1,
        objective: &objective,
        describe: &describe,
        clipped,
        m_obs: series.m_obs(),
    };
    Ok(with_thread_cap(|| ladder.run(max_degree, optimizer, seed)))
}
