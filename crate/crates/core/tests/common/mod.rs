#![allow(dead_code)]

use polyspot::jacobi::JacobiParams;

pub const S_MAX: f64 = 1000.0;

/// Table 1, degree 5 row.
pub fn table1_deg5() -> JacobiParams {
    JacobiParams::new(140.10, 0.42, 6.09).unwrap()
}

/// Table 2, degree 4 row.
pub fn table2_deg4() -> JacobiParams {
    JacobiParams::new(162.62, 0.43, 6.94).unwrap()
}

pub const DTS: [f64; 3] = [1.0 / 365.0, 1.0 / 52.0, 1.0 / 12.0];

/// Composite Simpson on `[a, b]` with `n` (even) panels.
pub fn simpson<F: FnMut(f64) -> f64>(a: f64, b: f64, n: usize, mut f: F) -> f64 {
    assert!(n % 2 == 0);
    let h = (b - a) / n as f64;
    let mut acc = f(a) + f(b);
    for i in 1..n {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        acc += w * f(a + i as f64 * h);
    }
    acc * h / 3.0
}

/// Simpson over the open interval, skipping the endpoints where densities
/// are not defined (they vanish there for `a, b > 1`).
pub fn simpson_open<F: FnMut(f64) -> f64>(n: usize, mut f: F) -> f64 {
    simpson(0.0, 1.0, n, |x| if x <= 0.0 || x >= 1.0 { 0.0 } else { f(x) })
}

/// `J_n(x; u, v) = ₂F₁(-n, n+u; v; x)`, summed directly. Also returns the
/// sum of absolute terms, which bounds the cancellation error.
pub fn jacobi_hypergeometric(n: usize, u: f64, v: f64, x: f64) -> (f64, f64) {
    let mut term = 1.0;
    let mut sum = 1.0;
    let mut mag = 1.0;
    for k in 0..n {
        let kf = k as f64;
        term *= (kf - n as f64) * (n as f64 + u + kf) / ((v + kf) * (kf + 1.0)) * x;
        sum += term;
        mag += term.abs();
    }
    (sum, mag)
}

/// Coefficients of `Σ c_k x^k` evaluated by Horner.
pub fn poly(c: &[f64], x: f64) -> f64 {
    c.iter().rev().fold(0.0, |acc, v| acc * x + v)
}

pub fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1e-300)
}

pub fn mean_sd(v: &[f64]) -> (f64, f64) {
    let n = v.len() as f64;
    let m = v.iter().sum::<f64>() / n;
    let var = v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0);
    (m, var.sqrt())
}

/// Run the CLI in-process with `polyspot` prepended.
pub fn cli(args: &[&str]) -> i32 {
    polyspot::cli::run(std::iter::once("polyspot").chain(args.iter().copied()))
}

/// `date,price` file with consecutive days from 2020-01-01.
pub fn write_price_csv(path: &std::path::Path, prices: &[f64]) {
    let start = chrono::NaiveDate::from_ymd_opt(2020, 1, 1).unwrap();
    let mut text = String::from("date,price\n");
    for (i, p) in prices.iter().enumerate() {
        let d = start + chrono::Days::new(i as u64);
        text.push_str(&format!("{},{p}\n", d.format("%Y-%m-%d")));
    }
    std::fs::write(path, text).unwrap();
}

/// CLI output split into `#` metadata lines, the header row and data rows.
pub struct Table {
    pub meta: Vec<String>,
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn read(path: &std::path::Path) -> Self {
        Self::parse(&std::fs::read_to_string(path).unwrap())
    }

    pub fn parse(text: &str) -> Self {
        let mut meta = Vec::new();
        let mut body = Vec::new();
        for line in text.lines() {
            if line.starts_with('#') {
                meta.push(line.to_string());
            } else {
                body.push(line.split(',').map(String::from).collect::<Vec<_>>());
            }
        }
        let header = body.remove(0);
        Self { meta, header, rows: body }
    }

    pub fn col(&self, name: &str) -> usize {
        self.header.iter().position(|h| h == name).unwrap_or_else(|| panic!("no column {name} in {:?}", self.header))
    }

    pub fn f64s(&self, name: &str) -> Vec<f64> {
        let j = self.col(name);
        self.rows.iter().map(|r| r[j].parse().unwrap()).collect()
    }
}
