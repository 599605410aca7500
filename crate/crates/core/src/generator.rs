//! Matrix representations of polynomial generators and the action
//! `p ↦ e^{tG} p` that yields conditional expectations.
//!
//! Convention: column `k` of `G` holds the basis coefficients of `𝒢 h_k`, so
//! for `f = H(·)ᵀ p` we have `𝒢 f = H(·)ᵀ G p` and
//! `E[f(X_t) | X_0 = x] = H(x)ᵀ e^{tG} p`.
//!
//! Basis orderings:
//! * one factor: `b_0, b_1, …, b_n`;
//! * two factors, total degree: by total degree `d`, then `x^d, x^{d-1}y, …, y^d`;
//! * regime: `1, x, y, x², xy, …, x^n, x^{n-1}y`.
//!
//! `b_k` is `x^k` for [`PolyFamily::Monomial`] and `T_k(2x-1)` for
//! [`PolyFamily::Chebyshev`]; the latter is better conditioned at high degree.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::jacobi::JacobiParams;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PolyFamily {
    #[default]
    Monomial,
    /// Shifted Chebyshev polynomials `T_k(2x - 1)` on `[0, 1]`.
    Chebyshev,
}

impl PolyFamily {
    /// `b_0(x)..=b_n(x)`.
    pub fn eval_all(self, x: f64, n: usize) -> Vec<f64> {
        let mut out = vec![0.0; n + 1];
        out[0] = 1.0;
        if n == 0 {
            return out;
        }
        match self {
            PolyFamily::Monomial => {
                for k in 1..=n {
                    out[k] = out[k - 1] * x;
                }
            }
            PolyFamily::Chebyshev => {
                let t = 2.0 * x - 1.0;
                out[1] = t;
                for k in 2..=n {
                    out[k] = 2.0 * t * out[k - 1] - out[k - 2];
                }
            }
        }
        out
    }

    pub fn eval(self, c: &[f64], x: f64) -> f64 {
        match self {
            PolyFamily::Monomial => crate::polymap::horner(c, x),
            PolyFamily::Chebyshev => {
                let t = 2.0 * x - 1.0;
                let (mut b1, mut b2) = (0.0, 0.0);
                for &ck in c.iter().skip(1).rev() {
                    let b0 = 2.0 * t * b1 - b2 + ck;
                    b2 = b1;
                    b1 = b0;
                }
                c.first().copied().unwrap_or(0.0) + t * b1 - b2
            }
        }
    }

    /// d/dx, same length as the input.
    pub fn deriv(self, c: &[f64]) -> Vec<f64> {
        let m = c.len();
        let mut d = vec![0.0; m];
        if m < 2 {
            return d;
        }
        match self {
            PolyFamily::Monomial => {
                for k in 1..m {
                    d[k - 1] = k as f64 * c[k];
                }
            }
            PolyFamily::Chebyshev => {
                // d/dt recurrence, then chain rule dt/dx = 2
                let mut dt = vec![0.0; m + 1];
                for k in (1..m).rev() {
                    dt[k - 1] = dt[k + 1] + 2.0 * k as f64 * c[k];
                }
                dt[0] *= 0.5;
                for k in 0..m {
                    d[k] = 2.0 * dt[k];
                }
            }
        }
        d
    }

    /// Multiply by `x`; the output is one longer.
    pub fn mul_x(self, c: &[f64]) -> Vec<f64> {
        let m = c.len();
        let mut out = vec![0.0; m + 1];
        match self {
            PolyFamily::Monomial => out[1..].copy_from_slice(c),
            PolyFamily::Chebyshev => {
                // x = (1 + t)/2, t T_0 = T_1, t T_k = (T_{k+1} + T_{k-1})/2
                for (k, &ck) in c.iter().enumerate() {
                    out[k] += 0.5 * ck;
                    if k == 0 {
                        out[1] += 0.5 * ck;
                    } else {
                        out[k + 1] += 0.25 * ck;
                        out[k - 1] += 0.25 * ck;
                    }
                }
            }
        }
        out
    }

    /// Re-express ascending power coefficients in this family.
    pub fn from_monomial(self, power: &[f64]) -> Vec<f64> {
        match self {
            PolyFamily::Monomial => power.to_vec(),
            PolyFamily::Chebyshev => {
                let mut acc: Vec<f64> = Vec::new();
                for &a in power.iter().rev() {
                    acc = if acc.is_empty() { vec![0.0] } else { self.mul_x(&acc) };
                    acc[0] += a;
                }
                acc.resize(power.len().max(1), 0.0);
                acc
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BasisKind {
    OneFactor,
    TotalDegree2f,
    Regime2f,
}

/// Which polynomial space a generator matrix acts on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BasisDescriptor {
    pub kind: BasisKind,
    pub degree: usize,
    pub family: PolyFamily,
}

impl BasisDescriptor {
    pub fn monomial_1f(degree: usize) -> Self {
        Self { kind: BasisKind::OneFactor, degree, family: PolyFamily::Monomial }
    }

    pub fn total_degree_2f(degree: usize) -> Self {
        Self { kind: BasisKind::TotalDegree2f, degree, family: PolyFamily::Monomial }
    }

    pub fn regime_2f(degree: usize) -> Self {
        Self { kind: BasisKind::Regime2f, degree, family: PolyFamily::Monomial }
    }

    pub fn with_family(self, family: PolyFamily) -> Self {
        Self { family, ..self }
    }

    pub fn dimension(&self) -> usize {
        let n = self.degree;
        match self.kind {
            BasisKind::OneFactor => n + 1,
            BasisKind::TotalDegree2f => (n + 1) * (n + 2) / 2,
            BasisKind::Regime2f => 2 * n + 1,
        }
    }

    /// Number of state coordinates expected by [`eval`](Self::eval).
    pub fn state_dim(&self) -> usize {
        match self.kind {
            BasisKind::OneFactor => 1,
            _ => 2,
        }
    }

    /// Position of `b_i(x) b_j(y)` in the total-degree ordering.
    pub fn index_2f(i: usize, j: usize) -> usize {
        let d = i + j;
        d * (d + 1) / 2 + j
    }

    /// Position of `b_k(x)` (`with_y = false`) or `y·b_k(x)` in the regime ordering.
    pub fn index_regime(k: usize, with_y: bool) -> usize {
        match (with_y, k) {
            (false, 0) => 0,
            (false, k) => 2 * k - 1,
            (true, k) => 2 * k + 2,
        }
    }

    /// The basis vector `H(state)`.
    pub fn eval(&self, state: &[f64]) -> Result<Vec<f64>> {
        if state.len() != self.state_dim() {
            return Err(Error::DimensionMismatch { expected: self.state_dim(), got: state.len() });
        }
        let n = self.degree;
        let bx = self.family.eval_all(state[0], n);
        Ok(match self.kind {
            BasisKind::OneFactor => bx,
            BasisKind::TotalDegree2f => {
                let by = self.family.eval_all(state[1], n);
                let mut h = vec![0.0; self.dimension()];
                for d in 0..=n {
                    for j in 0..=d {
                        h[Self::index_2f(d - j, j)] = bx[d - j] * by[j];
                    }
                }
                h
            }
            BasisKind::Regime2f => {
                let y = state[1];
                let mut h = vec![0.0; self.dimension()];
                for k in 0..=n {
                    h[Self::index_regime(k, false)] = bx[k];
                    if k < n {
                        h[Self::index_regime(k, true)] = y * bx[k];
                    }
                }
                h
            }
        })
    }
}

/// One-factor diffusions with affine drift and quadratic squared diffusion.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum OneFactorDynamics {
    /// `dX = κ(θ - X)dt + σ dW`.
    Ou { kappa: f64, theta: f64, sigma: f64 },
    /// `dX = κ(θ - X)dt + σX dW`.
    Igbm { kappa: f64, theta: f64, sigma: f64 },
    /// `dX = κ(θ - X)dt + σ√X dW`.
    Cir { kappa: f64, theta: f64, sigma: f64 },
    Jacobi(JacobiParams),
}

/// `𝒢f = (A + Bx) f' + ½(C + Dx + Ex²) f''`.
#[derive(Debug, Clone, Copy, PartialEq)]
struct Quadratic1d {
    a: f64,
    b: f64,
    c: f64,
    d: f64,
    e: f64,
}

impl OneFactorDynamics {
    fn coefficients(&self) -> Quadratic1d {
        match *self {
            OneFactorDynamics::Ou { kappa, theta, sigma } => {
                Quadratic1d { a: kappa * theta, b: -kappa, c: sigma * sigma, d: 0.0, e: 0.0 }
            }
            OneFactorDynamics::Igbm { kappa, theta, sigma } => {
                Quadratic1d { a: kappa * theta, b: -kappa, c: 0.0, d: 0.0, e: sigma * sigma }
            }
            OneFactorDynamics::Cir { kappa, theta, sigma } => {
                Quadratic1d { a: kappa * theta, b: -kappa, c: 0.0, d: sigma * sigma, e: 0.0 }
            }
            OneFactorDynamics::Jacobi(p) => {
                let s2 = p.sigma() * p.sigma();
                Quadratic1d { a: p.kappa() * p.theta(), b: -p.kappa(), c: 0.0, d: s2, e: -s2 }
            }
        }
    }

    fn tag(&self) -> DynamicsTag {
        match self {
            OneFactorDynamics::Ou { .. } => DynamicsTag::Ou,
            OneFactorDynamics::Igbm { .. } => DynamicsTag::Igbm,
            OneFactorDynamics::Cir { .. } => DynamicsTag::Cir,
            OneFactorDynamics::Jacobi(_) => DynamicsTag::Jacobi,
        }
    }
}

/// Drift and volatilities of the two-factor Jacobi system
/// `dX = (b1 + B11 X + B12 Y)dt + σ√(X(1-X))dW₁`,
/// `dY = (b2 + B21 X + B22 Y)dt + ρ√(Y(1-Y))dW₂`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DoubleJacobiDynamics {
    pub b1: f64,
    pub b2: f64,
    pub b11: f64,
    pub b12: f64,
    pub b21: f64,
    pub b22: f64,
    pub sigma: f64,
    pub rho: f64,
}

impl DoubleJacobiDynamics {
    /// Two independent Jacobi factors.
    pub fn independent(x: &JacobiParams, y: &JacobiParams) -> Self {
        Self {
            b1: x.kappa() * x.theta(),
            b2: y.kappa() * y.theta(),
            b11: -x.kappa(),
            b12: 0.0,
            b21: 0.0,
            b22: -y.kappa(),
            sigma: x.sigma(),
            rho: y.sigma(),
        }
    }
}

/// `dX = (b1 + B11 X + B12 Y)dt + σ√(X(1-X))dW` with `Y ∈ {0, 1}` switching
/// at rates `λ01` (0→1) and `λ10` (1→0).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegimeDynamics {
    pub b1: f64,
    pub b11: f64,
    pub b12: f64,
    pub sigma: f64,
    pub lambda01: f64,
    pub lambda10: f64,
}

impl RegimeDynamics {
    pub fn new(x: &JacobiParams, lambda01: f64, lambda10: f64) -> Self {
        Self {
            b1: x.kappa() * x.theta(),
            b11: -x.kappa(),
            b12: 0.0,
            sigma: x.sigma(),
            lambda01,
            lambda10,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DynamicsTag {
    Ou,
    Igbm,
    Cir,
    Jacobi,
    DoubleJacobi,
    Regime,
}

/// `G` on a declared basis, in units of 1/year.
#[derive(Debug, Clone, PartialEq)]
pub struct GeneratorMatrix {
    basis: BasisDescriptor,
    matrix: DMatrix<f64>,
    dynamics: DynamicsTag,
}

fn pad(mut v: Vec<f64>, len: usize) -> Vec<f64> {
    v.resize(len.max(v.len()), 0.0);
    v
}

fn axpy(acc: &mut [f64], s: f64, v: &[f64]) {
    for (a, x) in acc.iter_mut().zip(v) {
        *a += s * x;
    }
}

/// Apply `(A + Bx)∂ + ½(C + Dx + Ex²)∂²` to one coefficient vector.
fn apply_quadratic(fam: PolyFamily, q: &Quadratic1d, f: &[f64]) -> Vec<f64> {
    let len = f.len() + 2;
    let d1 = fam.deriv(f);
    let d2 = fam.deriv(&d1);
    let mut out = vec![0.0; len];
    axpy(&mut out, q.a, &d1);
    axpy(&mut out, q.b, &fam.mul_x(&d1));
    axpy(&mut out, 0.5 * q.c, &d2);
    let xd2 = fam.mul_x(&d2);
    axpy(&mut out, 0.5 * q.d, &xd2);
    axpy(&mut out, 0.5 * q.e, &fam.mul_x(&xd2));
    out
}

fn unit(len: usize, k: usize) -> Vec<f64> {
    let mut e = vec![0.0; len];
    e[k] = 1.0;
    e
}

/// Bivariate coefficients `c[i][j]` of `b_i(x) b_j(y)`.
#[derive(Clone)]
struct Bivariate {
    size: usize,
    c: Vec<f64>,
}

impl Bivariate {
    fn zeros(size: usize) -> Self {
        Self { size, c: vec![0.0; size * size] }
    }

    fn get(&self, i: usize, j: usize) -> f64 {
        self.c[i * self.size + j]
    }

    fn at(&mut self, i: usize, j: usize) -> &mut f64 {
        &mut self.c[i * self.size + j]
    }

    fn map_x<F: Fn(&[f64]) -> Vec<f64>>(&self, f: F) -> Self {
        let mut out = Self::zeros(self.size);
        for j in 0..self.size {
            let col: Vec<f64> = (0..self.size).map(|i| self.get(i, j)).collect();
            for (i, v) in f(&col).into_iter().enumerate().take(self.size) {
                *out.at(i, j) = v;
            }
        }
        out
    }

    fn map_y<F: Fn(&[f64]) -> Vec<f64>>(&self, f: F) -> Self {
        let mut out = Self::zeros(self.size);
        for i in 0..self.size {
            let row = &self.c[i * self.size..(i + 1) * self.size];
            for (j, v) in f(row).into_iter().enumerate().take(self.size) {
                *out.at(i, j) = v;
            }
        }
        out
    }

    fn add_scaled(&mut self, s: f64, other: &Self) {
        axpy(&mut self.c, s, &other.c);
    }
}

impl GeneratorMatrix {
    /// One-factor generator on the monomial basis `1, x, …, x^n`.
    pub fn build_1f(dynamics: &OneFactorDynamics, degree: usize) -> Self {
        Self::build_1f_in(dynamics, degree, PolyFamily::Monomial)
    }

    pub fn build_1f_in(dynamics: &OneFactorDynamics, degree: usize, family: PolyFamily) -> Self {
        let basis = BasisDescriptor::monomial_1f(degree).with_family(family);
        let dim = basis.dimension();
        let q = dynamics.coefficients();
        let mut m = DMatrix::zeros(dim, dim);
        for k in 0..dim {
            let col = apply_quadratic(family, &q, &unit(dim, k));
            for (j, v) in col.into_iter().take(dim).enumerate() {
                m[(j, k)] = v;
            }
        }
        Self { basis, matrix: m, dynamics: dynamics.tag() }
    }

    /// Two-factor Jacobi generator on the total-degree basis.
    pub fn build_2f_jacobi(dynamics: &DoubleJacobiDynamics, degree: usize) -> Self {
        Self::build_2f_jacobi_in(dynamics, degree, PolyFamily::Monomial)
    }

    pub fn build_2f_jacobi_in(dynamics: &DoubleJacobiDynamics, degree: usize, family: PolyFamily) -> Self {
        let basis = BasisDescriptor::total_degree_2f(degree).with_family(family);
        let dim = basis.dimension();
        let size = degree + 3;
        let dj = dynamics;
        let fam = family;
        let mut m = DMatrix::zeros(dim, dim);
        for d in 0..=degree {
            for j in 0..=d {
                let i = d - j;
                let mut f = Bivariate::zeros(size);
                *f.at(i, j) = 1.0;
                let fx = f.map_x(|v| fam.deriv(v));
                let fy = f.map_y(|v| fam.deriv(v));
                let fxx = fx.map_x(|v| fam.deriv(v));
                let fyy = fy.map_y(|v| fam.deriv(v));
                let mut out = Bivariate::zeros(size);
                out.add_scaled(dj.b1, &fx);
                out.add_scaled(dj.b11, &fx.map_x(|v| fam.mul_x(v)));
                out.add_scaled(dj.b12, &fx.map_y(|v| fam.mul_x(v)));
                out.add_scaled(dj.b2, &fy);
                out.add_scaled(dj.b21, &fy.map_x(|v| fam.mul_x(v)));
                out.add_scaled(dj.b22, &fy.map_y(|v| fam.mul_x(v)));
                let xfxx = fxx.map_x(|v| fam.mul_x(v));
                out.add_scaled(0.5 * dj.sigma * dj.sigma, &xfxx);
                out.add_scaled(-0.5 * dj.sigma * dj.sigma, &xfxx.map_x(|v| fam.mul_x(v)));
                let yfyy = fyy.map_y(|v| fam.mul_x(v));
                out.add_scaled(0.5 * dj.rho * dj.rho, &yfyy);
                out.add_scaled(-0.5 * dj.rho * dj.rho, &yfyy.map_y(|v| fam.mul_x(v)));
                let col = BasisDescriptor::index_2f(i, j);
                for dd in 0..=degree {
                    for jj in 0..=dd {
                        m[(BasisDescriptor::index_2f(dd - jj, jj), col)] = out.get(dd - jj, jj);
                    }
                }
            }
        }
        Self { basis, matrix: m, dynamics: DynamicsTag::DoubleJacobi }
    }

    /// Regime-switching generator on `1, x, y, x², xy, …, x^n, x^{n-1}y`.
    pub fn build_regime(dynamics: &RegimeDynamics, degree: usize) -> Self {
        Self::build_regime_in(dynamics, degree, PolyFamily::Monomial)
    }

    pub fn build_regime_in(dynamics: &RegimeDynamics, degree: usize, family: PolyFamily) -> Self {
        let basis = BasisDescriptor::regime_2f(degree).with_family(family);
        let dim = basis.dimension();
        let n = degree;
        let len = n + 1;
        let fam = family;
        let rd = dynamics;
        let lambda = rd.lambda01 + rd.lambda10;
        let x_only = Quadratic1d {
            a: rd.b1,
            b: rd.b11,
            c: 0.0,
            d: rd.sigma * rd.sigma,
            e: -rd.sigma * rd.sigma,
        };
        let mut m = DMatrix::zeros(dim, dim);
        let mut set_column = |col: usize, p0: &[f64], p1: &[f64]| {
            for k in 0..=n {
                m[(BasisDescriptor::index_regime(k, false), col)] = p0.get(k).copied().unwrap_or(0.0);
                if k < n {
                    m[(BasisDescriptor::index_regime(k, true), col)] = p1.get(k).copied().unwrap_or(0.0);
                }
            }
        };
        // f = p0(x) + y p1(x): the x-part evolves under the Jacobi operator,
        // B12 y ∂x feeds the y-part, and switching maps p1 to λ01 p1 - λ y p1.
        for k in 0..=n {
            let p0 = unit(len, k);
            let lx = apply_quadratic(fam, &x_only, &p0);
            let feed = pad(fam.deriv(&p0), len);
            let mut p1 = vec![0.0; len];
            axpy(&mut p1, rd.b12, &feed);
            set_column(BasisDescriptor::index_regime(k, false), &lx, &p1);
        }
        for k in 0..n {
            let p1 = unit(len, k);
            let mut y_part = apply_quadratic(fam, &x_only, &p1);
            axpy(&mut y_part, rd.b12, &fam.deriv(&p1));
            axpy(&mut y_part, -lambda, &p1);
            let mut x_part = vec![0.0; len];
            axpy(&mut x_part, rd.lambda01, &p1);
            set_column(BasisDescriptor::index_regime(k, true), &x_part, &y_part);
        }
        Self { basis, matrix: m, dynamics: DynamicsTag::Regime }
    }

    pub fn basis(&self) -> &BasisDescriptor {
        &self.basis
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn dynamics(&self) -> DynamicsTag {
        self.dynamics
    }

    pub fn dimension(&self) -> usize {
        self.matrix.nrows()
    }

    /// `e^{tG}`.
    pub fn exp(&self, t: f64) -> DMatrix<f64> {
        expm(&(&self.matrix * t))
    }

    /// `e^{tG} p`.
    pub fn propagate(&self, t: f64, p: &[f64]) -> Result<Vec<f64>> {
        if p.len() != self.dimension() {
            return Err(Error::DimensionMismatch { expected: self.dimension(), got: p.len() });
        }
        if !(t >= 0.0) {
            return Err(Error::param("t", format!("must be >= 0, got {t}")));
        }
        if t == 0.0 {
            return Ok(p.to_vec());
        }
        let v = self.exp(t) * DVector::from_column_slice(p);
        Ok(v.iter().copied().collect())
    }

    /// `H(state)ᵀ e^{tG} p`.
    pub fn expect(&self, t: f64, p: &[f64], state: &[f64]) -> Result<f64> {
        let h = self.basis.eval(state)?;
        let v = self.propagate(t, p)?;
        Ok(h.iter().zip(&v).map(|(a, b)| a * b).sum())
    }
}

const PADE13: [f64; 14] = [
    64764752532480000.0,
    32382376266240000.0,
    7771770303897600.0,
    1187353796428800.0,
    129060195264000.0,
    10559470521600.0,
    670442572800.0,
    33522128640.0,
    1323241920.0,
    40840800.0,
    960960.0,
    16380.0,
    182.0,
    1.0,
];
const THETA13: f64 = 5.371920351148152;

/// Matrix exponential by scaling and squaring with a degree-13 Padé approximant.
pub fn expm(a: &DMatrix<f64>) -> DMatrix<f64> {
    let n = a.nrows();
    assert_eq!(n, a.ncols(), "expm needs a square matrix");
    if n == 0 {
        return a.clone();
    }
    let norm1 = (0..n).map(|j| a.column(j).iter().map(|v| v.abs()).sum::<f64>()).fold(0.0, f64::max);
    let s = if norm1 > THETA13 { (norm1 / THETA13).log2().ceil() as i32 } else { 0 };
    let a = a / 2f64.powi(s);
    let b = &PADE13;
    let id = DMatrix::<f64>::identity(n, n);
    let a2 = &a * &a;
    let a4 = &a2 * &a2;
    let a6 = &a4 * &a2;
    let u_inner = &a6 * (&a6 * b[13] + &a4 * b[11] + &a2 * b[9]) + &a6 * b[7] + &a4 * b[5] + &a2 * b[3] + &id * b[1];
    let u = &a * u_inner;
    let v = &a6 * (&a6 * b[12] + &a4 * b[10] + &a2 * b[8]) + &a6 * b[6] + &a4 * b[4] + &a2 * b[2] + &id * b[0];
    let p = &v + &u;
    let q = &v - &u;
    let mut r = q.lu().solve(&p).expect("Padé denominator is nonsingular after scaling");
    for _ in 0..s {
        r = &r * &r;
    }
    r
}
