//! Model specifications tying factor dynamics to price maps.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::generator::{
    BasisDescriptor, BasisKind, DoubleJacobiDynamics, GeneratorMatrix, OneFactorDynamics, PolyFamily,
    RegimeDynamics,
};
use crate::jacobi::{euler_step, JacobiParams};
use crate::polymap::IncreasingPolyMap;

#[derive(Debug, Clone, PartialEq)]
pub struct OneFactorModel {
    pub x: JacobiParams,
    pub map: IncreasingPolyMap,
}

/// Jacobi `X` with a two-state chain `Y` choosing between `Φ₀` and `Φ₁`.
#[derive(Debug, Clone, PartialEq)]
pub struct RegimeModel {
    pub x: JacobiParams,
    pub lambda01: f64,
    pub lambda10: f64,
    pub maps: [IncreasingPolyMap; 2],
}

/// Independent Jacobi factors; `Y` blends `Φ₀` and `Φ₁`.
#[derive(Debug, Clone, PartialEq)]
pub struct DoubleJacobiModel {
    pub x: JacobiParams,
    pub y: JacobiParams,
    pub maps: [IncreasingPolyMap; 2],
}

#[derive(Debug, Clone, PartialEq)]
pub enum ModelSpec {
    OneFactor(OneFactorModel),
    Regime(RegimeModel),
    DoubleJacobi(DoubleJacobiModel),
}

fn check_maps(maps: &[IncreasingPolyMap; 2]) -> Result<()> {
    let (a, b) = (maps[0].s_max(), maps[1].s_max());
    if a != b {
        return Err(Error::param("maps", format!("both maps need the same s_max, got {a} and {b}")));
    }
    Ok(())
}

impl RegimeModel {
    pub fn new(x: JacobiParams, lambda01: f64, lambda10: f64, maps: [IncreasingPolyMap; 2]) -> Result<Self> {
        for (name, l) in [("lambda01", lambda01), ("lambda10", lambda10)] {
            if !(l >= 0.0 && l.is_finite()) {
                return Err(Error::param(name, format!("must be finite and >= 0, got {l}")));
            }
        }
        check_maps(&maps)?;
        Ok(Self { x, lambda01, lambda10, maps })
    }

    /// Stationary chain weights `(λ10/λ, λ01/λ)`; `(1/2, 1/2)` without switching.
    pub fn stationary_weights(&self) -> [f64; 2] {
        let l = self.lambda01 + self.lambda10;
        if l > 0.0 {
            [self.lambda10 / l, self.lambda01 / l]
        } else {
            [0.5, 0.5]
        }
    }
}

impl DoubleJacobiModel {
    pub fn new(x: JacobiParams, y: JacobiParams, maps: [IncreasingPolyMap; 2]) -> Result<Self> {
        check_maps(&maps)?;
        Ok(Self { x, y, maps })
    }
}

/// `(1-y)Φ₀(x) + yΦ₁(x)`.
pub fn blended(maps: &[IncreasingPolyMap; 2], x: f64, y: f64) -> f64 {
    (1.0 - y) * maps[0].eval(x) + y * maps[1].eval(x)
}

impl ModelSpec {
    pub fn s_max(&self) -> f64 {
        match self {
            ModelSpec::OneFactor(m) => m.map.s_max(),
            ModelSpec::Regime(m) => m.maps[0].s_max(),
            ModelSpec::DoubleJacobi(m) => m.maps[0].s_max(),
        }
    }

    pub fn kind_name(&self) -> &'static str {
        match self {
            ModelSpec::OneFactor(_) => "one_factor",
            ModelSpec::Regime(_) => "regime",
            ModelSpec::DoubleJacobi(_) => "double_jacobi",
        }
    }

    pub fn basis_kind(&self) -> BasisKind {
        match self {
            ModelSpec::OneFactor(_) => BasisKind::OneFactor,
            ModelSpec::Regime(_) => BasisKind::Regime2f,
            ModelSpec::DoubleJacobi(_) => BasisKind::TotalDegree2f,
        }
    }

    pub fn state_dim(&self) -> usize {
        match self {
            ModelSpec::OneFactor(_) => 1,
            _ => 2,
        }
    }

    /// Smallest basis degree that holds the spot polynomial. The two-factor
    /// spot `Φ₀ + y(Φ₁ - Φ₀)` needs one more than the map degree.
    pub fn min_basis_degree(&self) -> usize {
        match self {
            ModelSpec::OneFactor(m) => m.map.degree(),
            ModelSpec::Regime(m) => m.maps[0].degree().max(m.maps[1].degree()) + 1,
            ModelSpec::DoubleJacobi(m) => m.maps[0].degree().max(m.maps[1].degree()) + 1,
        }
    }

    pub fn check_state(&self, state: &[f64]) -> Result<()> {
        if state.len() != self.state_dim() {
            return Err(Error::DimensionMismatch { expected: self.state_dim(), got: state.len() });
        }
        if !(0.0..=1.0).contains(&state[0]) {
            return Err(Error::OutOfDomain { value: state[0], domain: "x in [0, 1]" });
        }
        match self {
            ModelSpec::OneFactor(_) => {}
            ModelSpec::Regime(_) => {
                if state[1] != 0.0 && state[1] != 1.0 {
                    return Err(Error::OutOfDomain { value: state[1], domain: "y in {0, 1}" });
                }
            }
            ModelSpec::DoubleJacobi(_) => {
                if !(0.0..=1.0).contains(&state[1]) {
                    return Err(Error::OutOfDomain { value: state[1], domain: "y in [0, 1]" });
                }
            }
        }
        Ok(())
    }

    /// Spot price without seasonality.
    pub fn spot(&self, state: &[f64]) -> Result<f64> {
        self.check_state(state)?;
        Ok(match self {
            ModelSpec::OneFactor(m) => m.map.eval(state[0]),
            ModelSpec::Regime(m) => blended(&m.maps, state[0], state[1]),
            ModelSpec::DoubleJacobi(m) => blended(&m.maps, state[0], state[1]),
        })
    }

    pub fn generator(&self, degree: usize, family: PolyFamily) -> GeneratorMatrix {
        match self {
            ModelSpec::OneFactor(m) => {
                GeneratorMatrix::build_1f_in(&OneFactorDynamics::Jacobi(m.x), degree, family)
            }
            ModelSpec::Regime(m) => {
                GeneratorMatrix::build_regime_in(&RegimeDynamics::new(&m.x, m.lambda01, m.lambda10), degree, family)
            }
            ModelSpec::DoubleJacobi(m) => {
                GeneratorMatrix::build_2f_jacobi_in(&DoubleJacobiDynamics::independent(&m.x, &m.y), degree, family)
            }
        }
    }

    /// Coefficients of the spot polynomial on `basis`.
    pub fn spot_coefficients(&self, basis: &BasisDescriptor) -> Result<Vec<f64>> {
        if basis.kind != self.basis_kind() {
            return Err(Error::param("basis", "basis kind does not match the model"));
        }
        let need = self.min_basis_degree();
        if basis.degree < need {
            return Err(Error::DegreeTooHigh { requested: need, available: basis.degree });
        }
        let fam = basis.family;
        let n = basis.degree;
        let mut p = vec![0.0; basis.dimension()];
        match self {
            ModelSpec::OneFactor(m) => {
                for (k, v) in fam.from_monomial(m.map.coefficients()).into_iter().enumerate() {
                    p[k] = v;
                }
            }
            ModelSpec::Regime(m) => {
                let (c0, c1) = split_maps(&m.maps, fam, n);
                for k in 0..=n {
                    p[BasisDescriptor::index_regime(k, false)] = c0[k];
                    if k < n {
                        p[BasisDescriptor::index_regime(k, true)] = c1[k] - c0[k];
                    }
                }
            }
            ModelSpec::DoubleJacobi(m) => {
                let (c0, c1) = split_maps(&m.maps, fam, n);
                // y b_k(x) = b_k(x) b_1(y) up to the affine change for the family
                let y_in_family = fam.from_monomial(&[0.0, 1.0]);
                for k in 0..=n {
                    p[BasisDescriptor::index_2f(k, 0)] += c0[k];
                    if k < n {
                        let d = c1[k] - c0[k];
                        p[BasisDescriptor::index_2f(k, 0)] += d * y_in_family[0];
                        p[BasisDescriptor::index_2f(k, 1)] += d * y_in_family[1];
                    }
                }
            }
        }
        Ok(p)
    }
}

/// Factor paths and prices observed every `dt`.
#[derive(Debug, Clone, PartialEq)]
pub struct SimulatedPath {
    pub x: Vec<f64>,
    /// Empty for one-factor models.
    pub y: Vec<f64>,
    pub prices: Vec<f64>,
}

impl ModelSpec {
    /// Clamped Euler for the Jacobi factors with `substeps` steps per
    /// observation; the regime chain jumps with its exact per-step
    /// probabilities. Deterministic under `seed`.
    pub fn simulate(
        &self,
        x0: f64,
        y0: f64,
        dt: f64,
        n_obs: usize,
        substeps: usize,
        seed: u64,
    ) -> Result<SimulatedPath> {
        if substeps == 0 {
            return Err(Error::param("substeps", "must be >= 1"));
        }
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::param("dt", format!("must be > 0, got {dt}")));
        }
        let state = match self {
            ModelSpec::OneFactor(_) => vec![x0],
            _ => vec![x0, y0],
        };
        self.check_state(&state)?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let h = dt / substeps as f64;
        let (mut x, mut y) = (x0, y0);
        let mut out = SimulatedPath { x: vec![x], y: Vec::new(), prices: vec![self.spot(&state)?] };
        if self.state_dim() == 2 {
            out.y.push(y);
        }
        let switch = match self {
            ModelSpec::Regime(m) => Some(crate::filter::regime_transition(m.lambda01, m.lambda10, h)),
            _ => None,
        };
        for _ in 0..n_obs {
            for _ in 0..substeps {
                let z: f64 = rng.sample(StandardNormal);
                match self {
                    ModelSpec::OneFactor(m) => x = euler_step(&m.x, x, h, z),
                    ModelSpec::Regime(m) => {
                        x = euler_step(&m.x, x, h, z);
                        let p = switch.expect("regime transition");
                        let j = y as usize;
                        if rng.random::<f64>() < p[j][1 - j] {
                            y = 1.0 - y;
                        }
                    }
                    ModelSpec::DoubleJacobi(m) => {
                        x = euler_step(&m.x, x, h, z);
                        let zy: f64 = rng.sample(StandardNormal);
                        y = euler_step(&m.y, y, h, zy);
                    }
                }
            }
            out.x.push(x);
            let price = match self {
                ModelSpec::OneFactor(m) => m.map.eval(x),
                ModelSpec::Regime(m) => blended(&m.maps, x, y),
                ModelSpec::DoubleJacobi(m) => blended(&m.maps, x, y),
            };
            if self.state_dim() == 2 {
                out.y.push(y);
            }
            out.prices.push(price.clamp(0.0, self.s_max()));
        }
        Ok(out)
    }
}

fn split_maps(maps: &[IncreasingPolyMap; 2], fam: PolyFamily, n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut c0 = fam.from_monomial(maps[0].coefficients());
    let mut c1 = fam.from_monomial(maps[1].coefficients());
    c0.resize(n + 1, 0.0);
    c1.resize(n + 1, 0.0);
    (c0, c1)
}
