//! Box-constrained derivative-free minimisation: differential evolution
//! (rand/1/bin) for the global phase, Nelder–Mead for the polish.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

#[derive(Debug, Clone, PartialEq)]
pub struct OptimizerConfig {
    /// Population size; `0` means `max(20, 10·dim)`.
    pub population: usize,
    pub generations: usize,
    pub mutation: f64,
    pub crossover: f64,
    pub polish_iters: usize,
    /// Simplex-size and value-spread tolerance for Nelder–Mead.
    pub polish_tol: f64,
    /// Extra independently seeded global searches per ladder rung.
    pub restarts: usize,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        Self {
            population: 0,
            generations: 150,
            mutation: 0.7,
            crossover: 0.9,
            polish_iters: 4000,
            polish_tol: 1e-9,
            restarts: 1,
        }
    }
}

impl OptimizerConfig {
    pub fn population_for(&self, dim: usize) -> usize {
        if self.population == 0 {
            (10 * dim).max(20)
        } else {
            self.population.max(4)
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Bounds {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

impl Bounds {
    pub fn new(lo: Vec<f64>, hi: Vec<f64>) -> Self {
        assert_eq!(lo.len(), hi.len());
        assert!(lo.iter().zip(&hi).all(|(l, h)| l <= h), "empty box");
        Self { lo, hi }
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    pub fn clamp(&self, x: &mut [f64]) {
        for ((v, l), h) in x.iter_mut().zip(&self.lo).zip(&self.hi) {
            *v = v.clamp(*l, *h);
        }
    }

    fn sample<R: Rng>(&self, rng: &mut R) -> Vec<f64> {
        self.lo.iter().zip(&self.hi).map(|(l, h)| l + (h - l) * rng.random::<f64>()).collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Minimum {
    pub x: Vec<f64>,
    pub value: f64,
    pub evaluations: usize,
    pub converged: bool,
}

fn eval_all<F>(f: &F, xs: &[Vec<f64>]) -> Vec<f64>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    // order-preserving, so results do not depend on the thread count
    xs.par_iter().map(|x| sanitize(f(x))).collect()
}

fn sanitize(v: f64) -> f64 {
    if v.is_nan() {
        f64::INFINITY
    } else {
        v
    }
}

/// `seeds` are injected into the initial population (clamped to the box).
pub fn differential_evolution<F>(
    f: &F,
    bounds: &Bounds,
    seeds: &[Vec<f64>],
    cfg: &OptimizerConfig,
    rng: &mut ChaCha8Rng,
) -> Minimum
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    let dim = bounds.dim();
    let np = cfg.population_for(dim);
    let mut pop: Vec<Vec<f64>> = seeds
        .iter()
        .take(np)
        .map(|s| {
            let mut s = s.clone();
            bounds.clamp(&mut s);
            s
        })
        .collect();
    while pop.len() < np {
        pop.push(bounds.sample(rng));
    }
    let mut fit = eval_all(f, &pop);
    let mut evaluations = np;
    for _ in 0..cfg.generations {
        let trials: Vec<Vec<f64>> = (0..np)
            .map(|i| {
                let mut pick = || loop {
                    let j = rng.random_range(0..np);
                    if j != i {
                        break j;
                    }
                };
                let (r1, r2, r3) = loop {
                    let (a, b, c) = (pick(), pick(), pick());
                    if a != b && b != c && a != c {
                        break (a, b, c);
                    }
                };
                let forced = rng.random_range(0..dim);
                let mut trial = pop[i].clone();
                for d in 0..dim {
                    if d == forced || rng.random::<f64>() < cfg.crossover {
                        let v = pop[r1][d] + cfg.mutation * (pop[r2][d] - pop[r3][d]);
                        // reflect back into the box
                        let (lo, hi) = (bounds.lo[d], bounds.hi[d]);
                        trial[d] = if v < lo {
                            lo + rng.random::<f64>() * (pop[i][d] - lo)
                        } else if v > hi {
                            hi - rng.random::<f64>() * (hi - pop[i][d])
                        } else {
                            v
                        };
                    }
                }
                trial
            })
            .collect();
        let tf = eval_all(f, &trials);
        evaluations += np;
        for (i, (t, v)) in trials.into_iter().zip(tf).enumerate() {
            if v <= fit[i] {
                pop[i] = t;
                fit[i] = v;
            }
        }
    }
    let best = argmin(&fit);
    Minimum { x: pop[best].clone(), value: fit[best], evaluations, converged: fit[best].is_finite() }
}

fn argmin(v: &[f64]) -> usize {
    let mut best = 0;
    for (i, x) in v.iter().enumerate() {
        if x < &v[best] {
            best = i;
        }
    }
    best
}

/// Nelder–Mead with projection onto the box.
pub fn nelder_mead<F>(f: &F, x0: &[f64], bounds: &Bounds, cfg: &OptimizerConfig) -> Minimum
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    let dim = x0.len();
    let proj = |x: Vec<f64>| {
        let mut x = x;
        bounds.clamp(&mut x);
        x
    };
    let mut simplex = vec![proj(x0.to_vec())];
    for d in 0..dim {
        let mut v = simplex[0].clone();
        let width = bounds.hi[d] - bounds.lo[d];
        let step = if width > 0.0 { 0.05 * width } else { 0.0 };
        v[d] = if v[d] + step <= bounds.hi[d] { v[d] + step } else { v[d] - step };
        simplex.push(v);
    }
    let mut vals = eval_all(f, &simplex);
    let mut evaluations = simplex.len();
    let mut converged = false;
    for _ in 0..cfg.polish_iters {
        let mut order: Vec<usize> = (0..=dim).collect();
        order.sort_by(|&a, &b| vals[a].total_cmp(&vals[b]));
        simplex = order.iter().map(|&i| simplex[i].clone()).collect();
        vals = order.iter().map(|&i| vals[i]).collect();

        let spread = (vals[dim] - vals[0]).abs();
        let size = simplex[1..]
            .iter()
            .map(|v| v.iter().zip(&simplex[0]).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max))
            .fold(0.0, f64::max);
        if vals[0].is_finite() && spread <= cfg.polish_tol * (1.0 + vals[0].abs()) && size <= cfg.polish_tol.sqrt() {
            converged = true;
            break;
        }

        let centroid: Vec<f64> =
            (0..dim).map(|d| simplex[..dim].iter().map(|v| v[d]).sum::<f64>() / dim as f64).collect();
        let along = |t: f64| -> Vec<f64> {
            proj(centroid.iter().zip(&simplex[dim]).map(|(c, w)| c + t * (c - w)).collect())
        };
        let xr = along(1.0);
        let fr = sanitize(f(&xr));
        evaluations += 1;
        if fr < vals[0] {
            let xe = along(2.0);
            let fe = sanitize(f(&xe));
            evaluations += 1;
            if fe < fr {
                simplex[dim] = xe;
                vals[dim] = fe;
            } else {
                simplex[dim] = xr;
                vals[dim] = fr;
            }
            continue;
        }
        if fr < vals[dim - 1] {
            simplex[dim] = xr;
            vals[dim] = fr;
            continue;
        }
        let (xc, fc) = if fr < vals[dim] {
            let x = along(0.5);
            let v = sanitize(f(&x));
            (x, v)
        } else {
            let x = along(-0.5);
            let v = sanitize(f(&x));
            (x, v)
        };
        evaluations += 1;
        if fc < vals[dim].min(fr) {
            simplex[dim] = xc;
            vals[dim] = fc;
            continue;
        }
        // shrink towards the best vertex
        let best = simplex[0].clone();
        let shrunk: Vec<Vec<f64>> = simplex[1..]
            .iter()
            .map(|v| proj(best.iter().zip(v).map(|(b, x)| b + 0.5 * (x - b)).collect()))
            .collect();
        let sv = eval_all(f, &shrunk);
        evaluations += dim;
        for (i, (x, v)) in shrunk.into_iter().zip(sv).enumerate() {
            simplex[i + 1] = x;
            vals[i + 1] = v;
        }
    }
    let best = argmin(&vals);
    Minimum { x: simplex[best].clone(), value: vals[best], evaluations, converged }
}

/// Rayon pool honouring `POLYSPOT_THREADS`.
pub fn with_thread_cap<T: Send>(f: impl FnOnce() -> T + Send) -> T {
    match std::env::var("POLYSPOT_THREADS").ok().and_then(|v| v.parse::<usize>().ok()) {
        Some(n) if n >= 1 => match rayon::ThreadPoolBuilder::new().num_threads(n).build() {
            Ok(pool) => pool.install(f),
            Err(_) => f(),
        },
        _ => f(),
    }
}
