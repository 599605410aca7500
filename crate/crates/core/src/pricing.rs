//! Spot, delivery-period forwards and polynomial-approximation options.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::generator::{expm, BasisDescriptor, GeneratorMatrix, PolyFamily};
use crate::model::ModelSpec;
use crate::quadrature::{chebyshev_interpolant, chebyshev_nodes_unit, GaussLegendre};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SeasonShape {
    Constant,
    Cos,
    Sin,
}

/// One term `s_k(t) p_k` of a seasonal coefficient vector.
#[derive(Debug, Clone, PartialEq)]
pub struct SeasonalMode {
    pub shape: SeasonShape,
    /// Angular frequency, 1/year.
    pub frequency: f64,
    pub phase: f64,
    pub weights: Vec<f64>,
}

impl SeasonalMode {
    pub fn constant(weights: Vec<f64>) -> Self {
        Self { shape: SeasonShape::Constant, frequency: 0.0, phase: 0.0, weights }
    }

    pub fn cos(frequency: f64, phase: f64, weights: Vec<f64>) -> Self {
        Self { shape: SeasonShape::Cos, frequency, phase, weights }
    }

    pub fn sin(frequency: f64, phase: f64, weights: Vec<f64>) -> Self {
        Self { shape: SeasonShape::Sin, frequency, phase, weights }
    }

    pub fn factor(&self, t: f64) -> f64 {
        match self.shape {
            SeasonShape::Constant => 1.0,
            SeasonShape::Cos => (self.frequency * t + self.phase).cos(),
            SeasonShape::Sin => (self.frequency * t + self.phase).sin(),
        }
    }
}

/// `p(t) = Σ s_k(t) p_k`.
#[derive(Debug, Clone, PartialEq)]
pub struct Seasonality {
    modes: Vec<SeasonalMode>,
}

impl Seasonality {
    pub fn new(modes: Vec<SeasonalMode>) -> Result<Self> {
        let Some(first) = modes.first() else {
            return Err(Error::param("seasonality", "needs at least one mode"));
        };
        let dim = first.weights.len();
        for m in &modes {
            if m.weights.len() != dim {
                return Err(Error::DimensionMismatch { expected: dim, got: m.weights.len() });
            }
            if m.shape == SeasonShape::Constant && m.frequency != 0.0 {
                return Err(Error::param("frequency", "constant mode must have frequency 0"));
            }
            if !m.frequency.is_finite() || !m.phase.is_finite() {
                return Err(Error::param("frequency", "must be finite"));
            }
        }
        Ok(Self { modes })
    }

    pub fn constant(p: Vec<f64>) -> Self {
        Self { modes: vec![SeasonalMode::constant(p)] }
    }

    pub fn modes(&self) -> &[SeasonalMode] {
        &self.modes
    }

    pub fn dimension(&self) -> usize {
        self.modes[0].weights.len()
    }

    pub fn coefficients_at(&self, t: f64) -> Vec<f64> {
        let mut p = vec![0.0; self.dimension()];
        for m in &self.modes {
            let s = m.factor(t);
            for (acc, w) in p.iter_mut().zip(&m.weights) {
                *acc += s * w;
            }
        }
        p
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ForwardQuote {
    pub t: f64,
    pub start: f64,
    pub end: f64,
    pub value: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ForwardMethod {
    /// Gauss–Legendre over the delivery window with this many nodes.
    Quadrature(usize),
    /// Resolvent form for trigonometric modes, augmented exponential for
    /// constants.
    ClosedForm,
}

impl Default for ForwardMethod {
    fn default() -> Self {
        ForwardMethod::Quadrature(16)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OptionQuote {
    pub strike: f64,
    pub maturity: f64,
    pub value: f64,
    /// Sup-norm payoff interpolation error on a fine grid.
    pub residual: f64,
}

pub const DEFAULT_OPTION_DEGREE: usize = 40;
const RESIDUAL_GRID: usize = 2001;

/// A model with its generator built on a fixed basis.
#[derive(Debug, Clone)]
pub struct Pricer {
    model: ModelSpec,
    generator: GeneratorMatrix,
}

impl Pricer {
    /// Monomial basis of degree `max(degree, model.min_basis_degree())`.
    pub fn new(model: ModelSpec, degree: usize) -> Self {
        Self::with_family(model, degree, PolyFamily::Monomial)
    }

    pub fn with_family(model: ModelSpec, degree: usize, family: PolyFamily) -> Self {
        let degree = degree.max(model.min_basis_degree());
        let generator = model.generator(degree, family);
        Self { model, generator }
    }

    pub fn model(&self) -> &ModelSpec {
        &self.model
    }

    pub fn generator(&self) -> &GeneratorMatrix {
        &self.generator
    }

    pub fn basis(&self) -> &BasisDescriptor {
        self.generator.basis()
    }

    /// Coefficient vector of the unseasoned spot on this basis.
    pub fn spot_coefficients(&self) -> Result<Vec<f64>> {
        self.model.spot_coefficients(self.basis())
    }

    /// `H(state)ᵀ p(t)`, or the plain spot when `seasonality` is `None`.
    pub fn spot(&self, state: &[f64], t: f64, seasonality: Option<&Seasonality>) -> Result<f64> {
        self.model.check_state(state)?;
        match seasonality {
            None => self.model.spot(state),
            Some(s) => {
                self.check_dim(s.dimension())?;
                let h = self.basis().eval(state)?;
                Ok(dot(&h, &s.coefficients_at(t)))
            }
        }
    }

    fn check_dim(&self, got: usize) -> Result<()> {
        let expected = self.generator.dimension();
        if got != expected {
            return Err(Error::DimensionMismatch { expected, got });
        }
        Ok(())
    }

    /// Average over `[start, end]` of `E[S_u | state at t]`.
    pub fn forward(
        &self,
        state: &[f64],
        t: f64,
        start: f64,
        end: f64,
        seasonality: &Seasonality,
        method: ForwardMethod,
    ) -> Result<ForwardQuote> {
        self.model.check_state(state)?;
        self.check_dim(seasonality.dimension())?;
        if !(t <= start && start < end) || !end.is_finite() || !t.is_finite() {
            return Err(Error::param("delivery", format!("need t <= T < T', got t={t}, T={start}, T'={end}")));
        }
        let h = DVector::from_vec(self.basis().eval(state)?);
        let integral = match method {
            ForwardMethod::Quadrature(m) => self.integral_quadrature(&h, t, start, end, seasonality, m)?,
            ForwardMethod::ClosedForm => {
                let mut total = 0.0;
                for mode in seasonality.modes() {
                    total += match self.mode_integral_closed(&h, t, start, end, mode) {
                        Ok(v) => v,
                        Err(Error::Singular(why)) => {
                            log::warn!("resolvent singular ({why}); falling back to 64-node quadrature");
                            let single = Seasonality { modes: vec![mode.clone()] };
                            self.integral_quadrature(&h, t, start, end, &single, 64)?
                        }
                        Err(e) => return Err(e),
                    };
                }
                total
            }
        };
        Ok(ForwardQuote { t, start, end, value: integral / (end - start) })
    }

    fn integral_quadrature(
        &self,
        h: &DVector<f64>,
        t: f64,
        start: f64,
        end: f64,
        seasonality: &Seasonality,
        nodes: usize,
    ) -> Result<f64> {
        if nodes < 1 {
            return Err(Error::param("quad_nodes", "must be >= 1"));
        }
        let g = self.generator.matrix();
        let rule = GaussLegendre::new(nodes);
        let mut total = 0.0;
        for (u, w) in rule.on_interval(start, end) {
            let row = expm(&(g * (u - t))).transpose() * h;
            total += w * dot(row.as_slice(), &seasonality.coefficients_at(u));
        }
        Ok(total)
    }

    /// `hᵀ ∫_T^{T'} e^{(u-t)G} s(u) du p` for one mode.
    fn mode_integral_closed(&self, h: &DVector<f64>, t: f64, start: f64, end: f64, mode: &SeasonalMode) -> Result<f64> {
        let g = self.generator.matrix();
        let n = g.nrows();
        let p = DVector::from_column_slice(&mode.weights);
        let e_start = expm(&(g * (start - t)));
        if mode.shape == SeasonShape::Constant || mode.frequency == 0.0 {
            // ∫_0^τ e^{sG} ds is the top-right block of exp([[G, I], [0, 0]] τ)
            let tau = end - start;
            let mut aug = DMatrix::zeros(2 * n, 2 * n);
            aug.view_mut((0, 0), (n, n)).copy_from(&(g * tau));
            aug.view_mut((0, n), (n, n)).fill_with_identity();
            aug.view_mut((0, n), (n, n)).scale_mut(tau);
            let big = expm(&aug);
            let block = big.view((0, n), (n, n)).into_owned();
            let v = &e_start * (block * &p);
            return Ok(mode.factor(0.0) * h.dot(&v));
        }
        let c = mode.frequency;
        let e_end = expm(&(g * (end - t)));
        let a_end = e_end * &p;
        let a_start = e_start * &p;
        // r = e^{iφ}(e^{icT'} a_end - e^{icT} a_start), split into real and imaginary parts
        let (ce, se) = ((c * end + mode.phase).cos(), (c * end + mode.phase).sin());
        let (cs, ss) = ((c * start + mode.phase).cos(), (c * start + mode.phase).sin());
        let rr = &a_end * ce - &a_start * cs;
        let ri = &a_end * se - &a_start * ss;
        // (G + icI) z = r as a real system of doubled size
        let mut sys = DMatrix::zeros(2 * n, 2 * n);
        sys.view_mut((0, 0), (n, n)).copy_from(g);
        sys.view_mut((n, n), (n, n)).copy_from(g);
        for i in 0..n {
            sys[(i, n + i)] = -c;
            sys[(n + i, i)] = c;
        }
        let mut rhs = DVector::zeros(2 * n);
        rhs.rows_mut(0, n).copy_from(&rr);
        rhs.rows_mut(n, n).copy_from(&ri);
        let lu = sys.lu();
        let scale = g.amax().max(c.abs());
        let min_pivot = lu.u().diagonal().iter().fold(f64::INFINITY, |m, v| m.min(v.abs()));
        if !(min_pivot > 1e-13 * scale) {
            return Err(Error::Singular(format!("G + i·{c}·I has a near-zero pivot {min_pivot:e}")));
        }
        let z = lu.solve(&rhs).ok_or_else(|| Error::Singular("G + icI".into()))?;
        let part = match mode.shape {
            SeasonShape::Cos => z.rows(0, n).into_owned(),
            _ => z.rows(n, n).into_owned(),
        };
        Ok(h.dot(&part))
    }

    /// Call on the spot with strike `K`, maturity `T` (valuation at 0).
    ///
    /// The payoff of each map is interpolated at `degree + 1` Chebyshev nodes;
    /// the generator used here must be built on the Chebyshev family with
    /// enough room (see [`Pricer::for_options`]).
    pub fn option(&self, state: &[f64], strike: f64, maturity: f64, degree: usize) -> Result<OptionQuote> {
        self.model.check_state(state)?;
        let s_max = self.model.s_max();
        if !(strike >= 0.0 && strike <= s_max) {
            return Err(Error::param("strike", format!("must lie in [0, {s_max}], got {strike}")));
        }
        if !(maturity >= 0.0 && maturity.is_finite()) {
            return Err(Error::param("maturity", format!("must be >= 0, got {maturity}")));
        }
        let basis = *self.basis();
        let maps: Vec<&crate::polymap::IncreasingPolyMap> = match &self.model {
            ModelSpec::OneFactor(m) => vec![&m.map],
            ModelSpec::Regime(m) => m.maps.iter().collect(),
            ModelSpec::DoubleJacobi(_) => {
                return Err(Error::Unsupported(
                    "option approximation needs a payoff separable in y; double-Jacobi is not".into(),
                ))
            }
        };
        let need = degree + usize::from(maps.len() > 1);
        if basis.degree < need {
            return Err(Error::DegreeTooHigh { requested: need, available: basis.degree });
        }
        let nodes = chebyshev_nodes_unit(degree + 1);
        let mut coeffs = Vec::new();
        let mut residual: f64 = 0.0;
        for map in &maps {
            let vals: Vec<f64> = nodes.iter().map(|&x| (map.eval(x) - strike).max(0.0)).collect();
            let c = chebyshev_interpolant(&vals);
            for i in 0..RESIDUAL_GRID {
                let x = i as f64 / (RESIDUAL_GRID - 1) as f64;
                let err = PolyFamily::Chebyshev.eval(&c, x) - (map.eval(x) - strike).max(0.0);
                residual = residual.max(err.abs());
            }
            coeffs.push(basis.family_convert_from_chebyshev(&c));
        }
        let mut p = vec![0.0; basis.dimension()];
        match maps.len() {
            1 => p[..coeffs[0].len()].copy_from_slice(&coeffs[0]),
            _ => {
                let n = basis.degree;
                for k in 0..=n {
                    let c0 = coeffs[0].get(k).copied().unwrap_or(0.0);
                    let c1 = coeffs[1].get(k).copied().unwrap_or(0.0);
                    p[BasisDescriptor::index_regime(k, false)] = c0;
                    if k < n {
                        p[BasisDescriptor::index_regime(k, true)] = c1 - c0;
                    }
                }
            }
        }
        let value = self.generator.expect(maturity, &p, state)?;
        Ok(OptionQuote { strike, maturity, value, residual })
    }

    /// Pricer on the Chebyshev family sized for options of interpolation `degree`.
    pub fn for_options(model: ModelSpec, degree: usize) -> Self {
        let extra = usize::from(!matches!(model, ModelSpec::OneFactor(_)));
        Self::with_family(model, degree + extra, PolyFamily::Chebyshev)
    }
}

impl BasisDescriptor {
    /// Shifted-Chebyshev coefficients re-expressed in this basis family.
    pub fn family_convert_from_chebyshev(&self, c: &[f64]) -> Vec<f64> {
        match self.family {
            PolyFamily::Chebyshev => c.to_vec(),
            PolyFamily::Monomial => chebyshev_to_monomial(c),
        }
    }
}

fn chebyshev_to_monomial(c: &[f64]) -> Vec<f64> {
    // T_k(2x-1) in powers of x by the three-term recurrence
    let n = c.len();
    let mut out = vec![0.0; n];
    let mut prev = vec![0.0; n];
    let mut cur = vec![0.0; n];
    if n == 0 {
        return out;
    }
    prev[0] = 1.0;
    out[0] += c[0];
    if n == 1 {
        return out;
    }
    cur[0] = -1.0;
    cur[1] = 2.0;
    axpy(&mut out, c[1], &cur);
    for &ck in &c[2..] {
        let mut next = vec![0.0; n];
        for i in 0..n {
            next[i] = -2.0 * cur[i] - prev[i];
            if i > 0 {
                next[i] += 4.0 * cur[i - 1];
            }
        }
        axpy(&mut out, ck, &next);
        prev = cur;
        cur = next;
    }
    out
}

fn axpy(acc: &mut [f64], s: f64, v: &[f64]) {
    for (a, x) in acc.iter_mut().zip(v) {
        *a += s * x;
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}
