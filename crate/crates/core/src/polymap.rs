//! Increasing polynomial maps `Φ: [0, 1] → [0, S_max]` built as the
//! normalised integral of a product of nonnegative quadratics.

use crate::error::{Error, Result};

pub const ALPHA_MIN: f64 = -3.0;
pub const ALPHA_MAX: f64 = 1.5;
/// Where the endpoint cone meets the vertex ellipse.
pub const ALPHA_CROSSOVER: f64 = 0.6;

const GRID_CHECK_POINTS: usize = 1001;
const GRID_CHECK_TOL: f64 = 1e-12;

/// Largest `|β|` for which `q_{α,β}(x) = αx² + 2βx + 1 - 2α/3` stays
/// nonnegative on `[-1, 1]`.
///
/// For `α ≤ 3/5` the binding constraint is `q(±1) ≥ 0`, i.e. `|β| ≤ 1/2 + α/6`;
/// above it the interior minimum binds, `β² ≤ α - 2α²/3`.
pub fn beta_bar(alpha: f64) -> Result<f64> {
    if !(ALPHA_MIN..=ALPHA_MAX).contains(&alpha) {
        return Err(Error::param("alpha", format!("must lie in [-3, 3/2], got {alpha}")));
    }
    Ok(if alpha <= ALPHA_CROSSOVER {
        0.5 + alpha / 6.0
    } else {
        (alpha - 2.0 * alpha * alpha / 3.0).max(0.0).sqrt()
    })
}

/// One quadratic factor `q_{α,β}` on `[-1, 1]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadFactor {
    alpha: f64,
    beta: f64,
    linear: bool,
}

impl QuadFactor {
    pub fn new(alpha: f64, beta: f64) -> Result<Self> {
        let bound = beta_bar(alpha)?;
        if !beta.is_finite() || beta.abs() > bound * (1.0 + 1e-12) + 1e-15 {
            return Err(Error::param("beta", format!("|{beta}| exceeds beta_bar({alpha}) = {bound}")));
        }
        let f = Self { alpha, beta, linear: false };
        let min = (0..GRID_CHECK_POINTS)
            .map(|i| f.eval(-1.0 + 2.0 * i as f64 / (GRID_CHECK_POINTS - 1) as f64))
            .fold(f64::INFINITY, f64::min);
        if min < -GRID_CHECK_TOL {
            return Err(Error::param("beta", format!("q dips to {min} on [-1, 1]")));
        }
        Ok(f)
    }

    /// The degenerate `α = 0` factor, counted as degree one.
    pub fn linear(beta: f64) -> Result<Self> {
        let f = Self::new(0.0, beta)?;
        Ok(Self { linear: true, ..f })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn is_linear(&self) -> bool {
        self.linear
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.alpha * x * x + 2.0 * self.beta * x + 1.0 - 2.0 / 3.0 * self.alpha
    }

    /// Ascending power coefficients of `x ↦ q(2x - 1)`.
    pub fn unit_coefficients(&self) -> [f64; 3] {
        let (a, b) = (self.alpha, self.beta);
        [1.0 + a / 3.0 - 2.0 * b, 4.0 * (b - a), 4.0 * a]
    }
}

/// `[-1, 1] → [α_min, α_max]`, affine.
pub fn alpha_from_code(c: f64) -> f64 {
    ALPHA_MIN + (c + 1.0) * (ALPHA_MAX - ALPHA_MIN) / 2.0
}

/// Inverse of [`alpha_from_code`].
pub fn code_from_alpha(alpha: f64) -> f64 {
    2.0 * (alpha - ALPHA_MIN) / (ALPHA_MAX - ALPHA_MIN) - 1.0
}

/// Code of the neutral `α = 0` slot; pairing `(ALPHA_ZERO_CODE, c)` reproduces
/// the unpaired factor encoded by `c`.
pub fn alpha_zero_code() -> f64 {
    code_from_alpha(0.0)
}

/// Decode a vector of codes in `[-1, 1]` into quadratic factors: consecutive
/// pairs give `(α, β)`, an unpaired last code gives the linear factor
/// `(0, c·beta_bar(0))`.
pub fn factors_from_codes(c: &[f64]) -> Result<Vec<QuadFactor>> {
    if let Some(bad) = c.iter().find(|v| !(-1.0..=1.0).contains(*v)) {
        return Err(Error::param("c", format!("codes must lie in [-1, 1], got {bad}")));
    }
    let mut out = Vec::with_capacity(c.len().div_ceil(2));
    for pair in c.chunks(2) {
        let f = match *pair {
            [ca, cb] => {
                let alpha = alpha_from_code(ca).clamp(ALPHA_MIN, ALPHA_MAX);
                QuadFactor::new(alpha, cb * beta_bar(alpha)?)?
            }
            [cb] => QuadFactor::linear(cb * beta_bar(0.0)?)?,
            _ => unreachable!("chunks(2) yields one or two items"),
        };
        out.push(f);
    }
    Ok(out)
}

/// Inverse of [`factors_from_codes`] up to rounding.
pub fn codes_from_factors(factors: &[QuadFactor]) -> Vec<f64> {
    let mut out = Vec::with_capacity(2 * factors.len());
    for (i, f) in factors.iter().enumerate() {
        let bar = beta_bar(f.alpha()).unwrap_or(1.0);
        let cb = if bar > 0.0 { f.beta() / bar } else { 0.0 };
        if f.is_linear() && i + 1 == factors.len() {
            out.push(cb);
        } else {
            out.push(if f.is_linear() { alpha_zero_code() } else { code_from_alpha(f.alpha()) });
            out.push(cb);
        }
    }
    out
}

/// An increasing polynomial map onto `[0, s_max]`.
#[derive(Debug, Clone, PartialEq)]
pub struct IncreasingPolyMap {
    factors: Vec<QuadFactor>,
    s_max: f64,
    /// Unnormalised `φ = Π q_i(2x-1)`, ascending powers.
    phi: Vec<f64>,
    /// `Φ`, ascending powers, `Φ(0) = 0`.
    big_phi: Vec<f64>,
    /// `Φ'`.
    slope: Vec<f64>,
}

impl IncreasingPolyMap {
    pub fn from_factors(factors: Vec<QuadFactor>, s_max: f64) -> Result<Self> {
        if !(s_max.is_finite() && s_max > 0.0) {
            return Err(Error::param("s_max", format!("must be finite and > 0, got {s_max}")));
        }
        let mut phi = vec![1.0];
        for f in &factors {
            let q = f.unit_coefficients();
            let q: &[f64] = if f.is_linear() { &q[..2] } else { &q };
            phi = poly_mul(&phi, q);
        }
        let integral: f64 = phi.iter().enumerate().map(|(k, c)| c / (k + 1) as f64).sum();
        if !(integral > 0.0) {
            return Err(Error::param("c", "product of factors integrates to zero"));
        }
        let scale = s_max / integral;
        let slope: Vec<f64> = phi.iter().map(|c| c * scale).collect();
        let mut big_phi = Vec::with_capacity(phi.len() + 1);
        big_phi.push(0.0);
        big_phi.extend(slope.iter().enumerate().map(|(k, c)| c / (k + 1) as f64));
        Ok(Self { factors, s_max, phi, big_phi, slope })
    }

    /// Map of nominal degree `c.len() + 1`.
    pub fn from_codes(c: &[f64], s_max: f64) -> Result<Self> {
        Self::from_factors(factors_from_codes(c)?, s_max)
    }

    pub fn identity(s_max: f64) -> Result<Self> {
        Self::from_factors(Vec::new(), s_max)
    }

    pub fn s_max(&self) -> f64 {
        self.s_max
    }

    pub fn factors(&self) -> &[QuadFactor] {
        &self.factors
    }

    /// Nominal degree of `Φ` (one more than that of `φ`).
    pub fn degree(&self) -> usize {
        self.big_phi.len() - 1
    }

    pub fn phi_coefficients(&self) -> &[f64] {
        &self.phi
    }

    /// Ascending power coefficients of `Φ`.
    pub fn coefficients(&self) -> &[f64] {
        &self.big_phi
    }

    pub fn slope_coefficients(&self) -> &[f64] {
        &self.slope
    }

    /// `Φ(x)`; pinned to `0` and `s_max` at and beyond the endpoints.
    pub fn eval(&self, x: f64) -> f64 {
        if x <= 0.0 {
            0.0
        } else if x >= 1.0 {
            self.s_max
        } else {
            horner(&self.big_phi, x)
        }
    }

    /// `Φ'(x)`.
    pub fn deriv(&self, x: f64) -> f64 {
        horner(&self.slope, x)
    }

    /// Unique `x ∈ [0, 1]` with `Φ(x) = s`.
    pub fn invert(&self, s: f64) -> Result<f64> {
        if !(0.0..=self.s_max).contains(&s) {
            return Err(Error::PriceOutOfRange { price: s, s_max: self.s_max });
        }
        Ok(invert_increasing(|x| (self.eval(x), self.deriv(x)), s, self.s_max))
    }
}

/// Root of `f(x) = target` for an increasing `f` on `[0, 1]` with `f(0) = 0`,
/// `f(1) = scale`; bisection-safeguarded Newton. `fd` returns `(f, f')`.
pub(crate) fn invert_increasing<F: Fn(f64) -> (f64, f64)>(fd: F, target: f64, scale: f64) -> f64 {
    if target <= 0.0 {
        return 0.0;
    }
    if target >= scale {
        return 1.0;
    }
    let tol = 1e-12 * scale;
    let (mut lo, mut hi) = (0.0_f64, 1.0_f64);
    let mut x = target / scale;
    for _ in 0..200 {
        let (f, d) = fd(x);
        let r = f - target;
        if r == 0.0 {
            return x;
        }
        if r > 0.0 {
            hi = x;
        } else {
            lo = x;
        }
        let newton = if d > 0.0 { x - r / d } else { f64::NAN };
        let next = if newton > lo && newton < hi { newton } else { 0.5 * (lo + hi) };
        let step = (next - x).abs();
        x = next;
        if (r.abs() <= tol && step <= 1e-15) || hi - lo <= 2.0 * f64::EPSILON * x.max(f64::MIN_POSITIVE) {
            break;
        }
    }
    x
}

pub(crate) fn horner(c: &[f64], x: f64) -> f64 {
    c.iter().rev().fold(0.0, |acc, &k| acc * x + k)
}

pub(crate) fn poly_mul(p: &[f64], q: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; p.len() + q.len() - 1];
    for (i, a) in p.iter().enumerate() {
        for (j, b) in q.iter().enumerate() {
            out[i + j] += a * b;
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn beta_bar_landmarks() {
        assert!(beta_bar(-3.0).unwrap().abs() < 1e-15);
        let left = 0.5 + ALPHA_CROSSOVER / 6.0;
        let right = (ALPHA_CROSSOVER - 2.0 * ALPHA_CROSSOVER * ALPHA_CROSSOVER / 3.0).sqrt();
        assert!((left - 0.6).abs() < 1e-15 && (right - 0.6).abs() < 1e-15);
        assert!(beta_bar(1.5).unwrap().abs() < 1e-15);
        assert!(beta_bar(1.6).is_err());
        assert!(beta_bar(-3.1).is_err());
    }

    #[test]
    fn empty_and_neutral_codes_give_linear_map() {
        for c in [&[][..], &[0.0][..]] {
            let m = IncreasingPolyMap::from_codes(c, 1000.0).unwrap();
            for x in [0.0, 0.25, 0.5, 1.0] {
                assert!((m.eval(x) - 1000.0 * x).abs() < 1e-12);
            }
            assert!((m.invert(250.0).unwrap() - 0.25).abs() < 1e-14);
        }
    }

    #[test]
    fn degree_follows_code_length() {
        for n in 0..7 {
            let c = vec![0.3; n];
            assert_eq!(IncreasingPolyMap::from_codes(&c, 1.0).unwrap().degree(), n + 1);
        }
    }

    #[test]
    fn rejects_codes_out_of_range() {
        assert!(IncreasingPolyMap::from_codes(&[1.2], 1.0).is_err());
        assert!(QuadFactor::new(1.0, 0.7).is_err());
    }

    #[test]
    fn out_of_range_price() {
        let m = IncreasingPolyMap::from_codes(&[0.5, 0.5], 1000.0).unwrap();
        assert!(matches!(m.invert(1000.5), Err(Error::PriceOutOfRange { .. })));
        assert!(m.invert(-1.0).is_err());
        assert_eq!(m.invert(0.0).unwrap(), 0.0);
        assert_eq!(m.invert(1000.0).unwrap(), 1.0);
    }

    #[test]
    fn unpaired_code_matches_explicit_pair() {
        let single = IncreasingPolyMap::from_codes(&[0.4], 10.0).unwrap();
        let paired = IncreasingPolyMap::from_codes(&[alpha_zero_code(), 0.4], 10.0).unwrap();
        for x in [0.1, 0.5, 0.9] {
            assert!((single.eval(x) - paired.eval(x)).abs() < 1e-12);
        }
    }
}
