//! The `polyspot` command line: spec files, CSV ingestion and subcommands.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use chrono::NaiveDate;
use clap::{Parser, Subcommand};
use serde::{Deserialize, Serialize};

use crate::calibrate::{best_row, bic, fit_ladder, CalibrationRow, PriceSeries, DAY};
use crate::error::{Error, Result};
use crate::filter::{filter_ll, fit_2f, FilterConfig, TwoFactorKind};
use crate::jacobi::{JacobiParams, TransitionDensityConfig};
use crate::model::{DoubleJacobiModel, ModelSpec, OneFactorModel, RegimeModel};
use crate::optim::OptimizerConfig;
use crate::polymap::IncreasingPolyMap;
use crate::pricing::{ForwardMethod, Pricer, SeasonShape, SeasonalMode, Seasonality, DEFAULT_OPTION_DEGREE};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VALIDATION: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    OneFactor,
    Regime,
    DoubleJacobi,
}

/// A Jacobi factor given either as `(kappa, theta, sigma)` or `(a, b, sigma)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FactorSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kappa: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub theta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub a: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub b: Option<f64>,
    pub sigma: f64,
}

impl FactorSpec {
    pub fn from_params(p: &JacobiParams) -> Self {
        Self { kappa: Some(p.kappa()), theta: Some(p.theta()), a: None, b: None, sigma: p.sigma() }
    }

    fn resolve(&self, path: &str) -> std::result::Result<JacobiParams, String> {
        let wrap = |e: Error| format!("{path}: {e}");
        match (self.kappa, self.theta, self.a, self.b) {
            (Some(k), Some(t), None, None) => JacobiParams::new(k, t, self.sigma).map_err(wrap),
            (None, None, Some(a), Some(b)) => JacobiParams::from_shape(a, b, self.sigma).map_err(wrap),
            _ => Err(format!("{path}: give either kappa and theta, or a and b, together with sigma")),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MapsSpec {
    #[serde(default)]
    pub c0: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c1: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SwitchingSpec {
    pub lambda01: f64,
    pub lambda10: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ShapeSpec {
    Constant,
    Cos,
    Sin,
}

/// A seasonal mode scaling the spot polynomial: `amplitude · s(t) · p_spot`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SeasonSpec {
    pub shape: ShapeSpec,
    #[serde(default)]
    pub frequency: f64,
    #[serde(default)]
    pub phase: f64,
    pub amplitude: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulationSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub x0: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub y0: Option<f64>,
    #[serde(default = "default_substeps")]
    pub substeps: usize,
}

impl Default for SimulationSpec {
    fn default() -> Self {
        Self { x0: None, y0: None, substeps: default_substeps() }
    }
}

fn default_substeps() -> usize {
    16
}

/// Model spec file (TOML). Unknown keys are rejected.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpecFile {
    pub kind: ModelKind,
    pub s_max: f64,
    /// `0` selects the smallest basis holding the spot polynomial.
    #[serde(default)]
    pub basis_degree: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub x: Option<FactorSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub y: Option<FactorSpec>,
    #[serde(default)]
    pub maps: MapsSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub switching: Option<SwitchingSpec>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub seasonality: Vec<SeasonSpec>,
    #[serde(default)]
    pub simulation: SimulationSpec,
}

impl SpecFile {
    pub fn parse(text: &str) -> Result<Self> {
        let spec: SpecFile = toml::from_str(text).map_err(|e| Error::InvalidData(format!("spec: {e}")))?;
        if !(spec.s_max.is_finite() && spec.s_max > 0.0) {
            return Err(Error::InvalidData(format!("s_max: must be finite and > 0, got {}", spec.s_max)));
        }
        Ok(spec)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::InvalidData(format!("cannot read spec {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("spec serialises")
    }

    pub fn from_model(model: &ModelSpec) -> Self {
        let codes = |m: &IncreasingPolyMap| -> Vec<f64> {
            // maps built from codes keep them implicitly; recover via the factors
            crate::polymap::codes_from_factors(m.factors())
        };
        let (kind, x, y, maps, switching) = match model {
            ModelSpec::OneFactor(m) => {
                (ModelKind::OneFactor, &m.x, None, MapsSpec { c0: codes(&m.map), c1: None }, None)
            }
            ModelSpec::Regime(m) => (
                ModelKind::Regime,
                &m.x,
                None,
                MapsSpec { c0: codes(&m.maps[0]), c1: Some(codes(&m.maps[1])) },
                Some(SwitchingSpec { lambda01: m.lambda01, lambda10: m.lambda10 }),
            ),
            ModelSpec::DoubleJacobi(m) => (
                ModelKind::DoubleJacobi,
                &m.x,
                Some(FactorSpec::from_params(&m.y)),
                MapsSpec { c0: codes(&m.maps[0]), c1: Some(codes(&m.maps[1])) },
                None,
            ),
        };
        SpecFile {
            kind,
            s_max: model.s_max(),
            basis_degree: 0,
            x: Some(FactorSpec::from_params(x)),
            y,
            maps,
            switching,
            seasonality: Vec::new(),
            simulation: SimulationSpec::default(),
        }
    }

    /// Validated model; errors name the offending field.
    pub fn model(&self) -> Result<ModelSpec> {
        let invalid = |msg: String| Error::InvalidData(msg);
        let x = self.x.as_ref().ok_or_else(|| invalid("x: factor parameters missing".into()))?.resolve("x").map_err(invalid)?;
        let map = |c: &[f64], path: &str| {
            IncreasingPolyMap::from_codes(c, self.s_max).map_err(|e| invalid(format!("{path}: {e}")))
        };
        let m0 = map(&self.maps.c0, "maps.c0")?;
        match self.kind {
            ModelKind::OneFactor => {
                if self.maps.c1.is_some() || self.y.is_some() || self.switching.is_some() {
                    return Err(invalid("one_factor: maps.c1, [y] and [switching] are not allowed".into()));
                }
                Ok(ModelSpec::OneFactor(OneFactorModel { x, map: m0 }))
            }
            ModelKind::Regime => {
                let c1 = self.maps.c1.as_ref().ok_or_else(|| invalid("maps.c1: required for regime".into()))?;
                let sw = self.switching.as_ref().ok_or_else(|| invalid("switching: required for regime".into()))?;
                if self.y.is_some() {
                    return Err(invalid("y: not used by the regime model".into()));
                }
                let m1 = map(c1, "maps.c1")?;
                RegimeModel::new(x, sw.lambda01, sw.lambda10, [m0, m1])
                    .map(ModelSpec::Regime)
                    .map_err(|e| invalid(format!("switching: {e}")))
            }
            ModelKind::DoubleJacobi => {
                let c1 = self.maps.c1.as_ref().ok_or_else(|| invalid("maps.c1: required for double_jacobi".into()))?;
                let y = self.y.as_ref().ok_or_else(|| invalid("y: required for double_jacobi".into()))?;
                if self.switching.is_some() {
                    return Err(invalid("switching: not used by double_jacobi".into()));
                }
                let y = y.resolve("y").map_err(invalid)?;
                let m1 = map(c1, "maps.c1")?;
                DoubleJacobiModel::new(x, y, [m0, m1]).map(ModelSpec::DoubleJacobi)
            }
        }
    }

    /// Spot coefficients plus one scaled copy per declared mode.
    pub fn seasonality(&self, pricer: &Pricer) -> Result<Seasonality> {
        let p = pricer.spot_coefficients()?;
        let mut modes = vec![SeasonalMode::constant(p.clone())];
        for (i, s) in self.seasonality.iter().enumerate() {
            let w: Vec<f64> = p.iter().map(|v| v * s.amplitude).collect();
            let shape = match s.shape {
                ShapeSpec::Constant => SeasonShape::Constant,
                ShapeSpec::Cos => SeasonShape::Cos,
                ShapeSpec::Sin => SeasonShape::Sin,
            };
            if shape == SeasonShape::Constant && s.frequency != 0.0 {
                return Err(Error::InvalidData(format!("seasonality[{i}].frequency: must be 0 for a constant mode")));
            }
            modes.push(SeasonalMode { shape, frequency: s.frequency, phase: s.phase, weights: w });
        }
        Seasonality::new(modes)
    }
}

/// Parsed `date,price` file.
#[derive(Debug, Clone, PartialEq)]
pub struct Ingested {
    pub series: PriceSeries,
    pub dates: Vec<NaiveDate>,
    /// Prices outside `[0, s_max]` moved to the nearest bound.
    pub clipped: usize,
    /// Rows with an empty price field.
    pub dropped: usize,
}

pub fn read_price_csv(path: &Path, s_max: f64, calendar: bool) -> Result<Ingested> {
    let file = std::fs::File::open(path)
        .map_err(|e| Error::InvalidData(format!("cannot open {}: {e}", path.display())))?;
    parse_price_csv(file, s_max, calendar)
}

pub fn parse_price_csv<R: std::io::Read>(reader: R, s_max: f64, calendar: bool) -> Result<Ingested> {
    let mut rdr = csv::ReaderBuilder::new().comment(Some(b'#')).trim(csv::Trim::All).from_reader(reader);
    let headers = rdr.headers().map_err(|e| Error::InvalidData(format!("csv header: {e}")))?.clone();
    if headers.len() != 2 || &headers[0] != "date" || &headers[1] != "price" {
        return Err(Error::InvalidData(format!("csv header must be `date,price`, got `{}`", headers.iter().collect::<Vec<_>>().join(","))));
    }
    let (mut dates, mut prices) = (Vec::new(), Vec::new());
    let (mut clipped, mut dropped) = (0, 0);
    for (i, rec) in rdr.records().enumerate() {
        let line = i + 2;
        let rec = rec.map_err(|e| Error::InvalidData(format!("csv line {line}: {e}")))?;
        let date = NaiveDate::parse_from_str(&rec[0], "%Y-%m-%d")
            .map_err(|e| Error::InvalidData(format!("csv line {line}: date `{}`: {e}", &rec[0])))?;
        if rec[1].is_empty() {
            dropped += 1;
            continue;
        }
        let price: f64 =
            rec[1].parse().map_err(|_| Error::InvalidData(format!("csv line {line}: price `{}` is not a number", &rec[1])))?;
        if !price.is_finite() {
            return Err(Error::InvalidData(format!("csv line {line}: non-finite price")));
        }
        let c = price.clamp(0.0, s_max);
        if c != price {
            clipped += 1;
            log::warn!("csv line {line}: price {price} outside [0, {s_max}] moved to {c}");
        }
        if let Some(prev) = dates.last() {
            if date <= *prev {
                return Err(Error::InvalidData(format!("csv line {line}: dates must increase")));
            }
        }
        dates.push(date);
        prices.push(c);
    }
    let first = *dates.first().ok_or_else(|| Error::InvalidData("csv has no rows".into()))?;
    let days: Vec<i64> = dates.iter().map(|d| (*d - first).num_days()).collect();
    let series = PriceSeries::with_days(days, prices, DAY, calendar)?;
    Ok(Ingested { series, dates, clipped, dropped })
}

#[derive(Debug, Parser)]
#[command(name = "polyspot", version, about = "Polynomial-diffusion models for bounded spot prices")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, clap::Args)]
pub struct Common {
    /// Output file; standard output when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Simulate factor paths and prices.
    Simulate {
        #[arg(long)]
        spec: PathBuf,
        #[arg(long, default_value_t = 365)]
        days: usize,
        #[command(flatten)]
        common: Common,
    },
    /// Fit the degree ladder to a price series.
    Calibrate {
        #[arg(long)]
        spec: PathBuf,
        #[arg(long)]
        data: PathBuf,
        #[arg(long, default_value_t = 5)]
        max_degree: usize,
        #[arg(long, default_value_t = 1)]
        restarts: usize,
        #[arg(long, default_value_t = 150)]
        generations: usize,
        #[arg(long, default_value_t = 32)]
        quad_nodes: usize,
        /// Use calendar gaps between dates instead of one day per row.
        #[arg(long)]
        calendar_dt: bool,
        #[command(flatten)]
        common: Common,
    },
    /// Log-likelihood of a series under a fully specified model.
    FilterLl {
        #[arg(long)]
        spec: PathBuf,
        #[arg(long)]
        data: PathBuf,
        #[arg(long, default_value_t = 32)]
        quad_nodes: usize,
        #[arg(long)]
        calendar_dt: bool,
        #[command(flatten)]
        common: Common,
    },
    /// Delivery-period forwards over a grid of delivery starts.
    Forward {
        #[arg(long)]
        spec: PathBuf,
        /// `x` or `x,y`.
        #[arg(long)]
        state: String,
        #[arg(long, default_value_t = 0.0)]
        t: f64,
        /// Delivery starts `T`, comma separated.
        #[arg(long)]
        maturities: String,
        /// Delivery length `T' - T` in years.
        #[arg(long, default_value_t = 1.0 / 12.0)]
        delivery: f64,
        #[arg(long, default_value_t = 16)]
        quad_nodes: usize,
        #[command(flatten)]
        common: Common,
    },
    /// Calls on the spot by payoff interpolation.
    Option {
        #[arg(long)]
        spec: PathBuf,
        #[arg(long)]
        state: String,
        /// Strikes, comma separated.
        #[arg(long)]
        strikes: String,
        #[arg(long)]
        maturity: f64,
        #[arg(long, default_value_t = DEFAULT_OPTION_DEGREE)]
        degree: usize,
        #[command(flatten)]
        common: Common,
    },
    /// BIC for `label,ll,k` rows.
    BicTable {
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        m_obs: usize,
        #[command(flatten)]
        common: Common,
    },
}

fn list(text: &str, what: &str) -> Result<Vec<f64>> {
    text.split(',')
        .map(|v| v.trim().parse::<f64>().map_err(|_| Error::InvalidData(format!("{what}: `{v}` is not a number"))))
        .collect()
}

/// Output buffer with a `#` metadata header.
struct Report {
    text: String,
}

impl Report {
    fn new(command: &str, seed: u64) -> Self {
        let mut text = String::new();
        let _ = writeln!(text, "# polyspot {command} {}", env!("CARGO_PKG_VERSION"));
        let _ = writeln!(text, "# seed = {seed}");
        Self { text }
    }

    fn meta(&mut self, key: &str, value: impl std::fmt::Display) {
        let _ = writeln!(self.text, "# {key} = {value}");
    }

    fn spec(&mut self, spec: &SpecFile) {
        let _ = writeln!(self.text, "# resolved spec:");
        for line in spec.to_toml().lines() {
            let _ = writeln!(self.text, "#   {line}");
        }
    }

    fn row(&mut self, fields: &[String]) {
        let _ = writeln!(self.text, "{}", fields.join(","));
    }

    fn finish(self, out: &Option<PathBuf>) -> Result<()> {
        match out {
            Some(p) => std::fs::write(p, self.text)
                .map_err(|e| Error::InvalidData(format!("cannot write {}: {e}", p.display()))),
            None => {
                print!("{}", self.text);
                Ok(())
            }
        }
    }
}

fn codes_field(c: &[f64]) -> String {
    c.iter().map(|v| format!("{v:.6}")).collect::<Vec<_>>().join(";")
}

fn calibration_table(report: &mut Report, rows: &[CalibrationRow]) {
    let best = best_row(rows);
    let mut header: Vec<String> = vec!["degree".into()];
    if let Some(r) = rows.first() {
        header.extend(r.param_names.iter().map(|s| s.to_string()));
        header.extend(["a", "b"].map(String::from));
        for j in 0..r.codes.len() {
            header.push(format!("c{j}"));
        }
    }
    header.extend(["ll", "k", "m_obs", "bic", "converged", "best"].map(String::from));
    report.row(&header);
    for (i, r) in rows.iter().enumerate() {
        let mut f = vec![r.degree.to_string()];
        f.extend(r.params.iter().map(|v| format!("{v:.6}")));
        f.push(format!("{:.6}", r.a));
        f.push(format!("{:.6}", r.b));
        f.extend(r.codes.iter().map(|c| codes_field(c)));
        // printed LL is the one the BIC is computed from
        let ll: f64 = format!("{:.4}", r.ll).parse().unwrap_or(r.ll);
        f.push(format!("{ll:.4}"));
        f.push(r.k.to_string());
        f.push(r.m_obs.to_string());
        f.push(format!("{:.4}", bic(ll, r.k, r.m_obs)));
        f.push(r.converged.to_string());
        f.push(if Some(i) == best { "*".into() } else { String::new() });
        report.row(&f);
    }
}

fn execute(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Simulate { spec, days, common } => {
            let file = SpecFile::load(&spec)?;
            let model = file.model()?;
            let x0 = file.simulation.x0.unwrap_or(match &model {
                ModelSpec::OneFactor(m) => m.x.theta(),
                ModelSpec::Regime(m) => m.x.theta(),
                ModelSpec::DoubleJacobi(m) => m.x.theta(),
            });
            let y0 = file.simulation.y0.unwrap_or(match &model {
                ModelSpec::DoubleJacobi(m) => m.y.theta(),
                _ => 0.0,
            });
            let path = model.simulate(x0, y0, DAY, days, file.simulation.substeps, common.seed)?;
            let mut rep = Report::new("simulate", common.seed);
            rep.meta("days", days);
            rep.meta("dt", DAY);
            rep.spec(&file);
            let two = model.state_dim() == 2;
            rep.row(&if two { vec!["day", "x", "y", "price"] } else { vec!["day", "x", "price"] }.into_iter().map(String::from).collect::<Vec<_>>());
            for i in 0..path.x.len() {
                let mut f = vec![i.to_string(), format!("{:.12}", path.x[i])];
                if two {
                    f.push(format!("{:.12}", path.y[i]));
                }
                f.push(format!("{:.6}", path.prices[i]));
                rep.row(&f);
            }
            rep.finish(&common.out)
        }
        Command::Calibrate { spec, data, max_degree, restarts, generations, quad_nodes, calendar_dt, common } => {
            let file = SpecFile::load(&spec)?;
            let ing = read_price_csv(&data, file.s_max, calendar_dt)?;
            if ing.series.len() < 50 {
                return Err(Error::InvalidData(format!("calibration needs at least 50 observations, got {}", ing.series.len())));
            }
            let opt = OptimizerConfig { restarts, generations, ..Default::default() };
            let density = TransitionDensityConfig::default();
            let rows = match file.kind {
                ModelKind::OneFactor => fit_ladder(&ing.series, file.s_max, max_degree, &opt, &density, common.seed)?,
                kind => {
                    let k = if kind == ModelKind::Regime { TwoFactorKind::Regime } else { TwoFactorKind::DoubleJacobi };
                    let cfg = FilterConfig { quad_nodes, ..Default::default() };
                    fit_2f(k, &ing.series, file.s_max, max_degree, &opt, &cfg, common.seed)?
                }
            };
            let mut rep = Report::new("calibrate", common.seed);
            rep.meta("data", data.display());
            rep.meta("kind", format!("{:?}", file.kind));
            rep.meta("s_max", file.s_max);
            rep.meta("m_obs", ing.series.m_obs());
            rep.meta("rows_dropped", ing.dropped);
            rep.meta("prices_clipped_to_range", ing.clipped);
            rep.meta("prices_clipped_off_bounds", rows.first().map_or(0, |r| r.clipped));
            rep.meta("max_degree", max_degree);
            rep.meta("restarts", restarts);
            rep.meta("generations", generations);
            rep.meta("calendar_dt", calendar_dt);
            calibration_table(&mut rep, &rows);
            rep.finish(&common.out)
        }
        Command::FilterLl { spec, data, quad_nodes, calendar_dt, common } => {
            let file = SpecFile::load(&spec)?;
            let model = file.model()?;
            let ing = read_price_csv(&data, file.s_max, calendar_dt)?;
            let cfg = FilterConfig { quad_nodes, ..Default::default() };
            let out = filter_ll(&model, &ing.series, &cfg)?;
            let mut rep = Report::new("filter-ll", common.seed);
            rep.meta("data", data.display());
            rep.meta("rows_dropped", ing.dropped);
            rep.meta("prices_clipped_to_range", ing.clipped);
            rep.meta("prices_clipped_off_bounds", out.clipped);
            rep.meta("degenerate_steps", out.degenerate_steps);
            rep.spec(&file);
            rep.row(&["kind", "ll", "m_obs"].map(String::from));
            rep.row(&[model.kind_name().to_string(), format!("{:.6}", out.ll), ing.series.m_obs().to_string()]);
            rep.finish(&common.out)
        }
        Command::Forward { spec, state, t, maturities, delivery, quad_nodes, common } => {
            let file = SpecFile::load(&spec)?;
            let model = file.model()?;
            let state = list(&state, "state")?;
            let pricer = Pricer::new(model, file.basis_degree);
            let seas = file.seasonality(&pricer)?;
            let mut rep = Report::new("forward", common.seed);
            rep.meta("t", t);
            rep.meta("delivery", delivery);
            rep.meta("quad_nodes", quad_nodes);
            rep.meta("basis_degree", pricer.basis().degree);
            rep.spec(&file);
            rep.row(&["start", "end", "quadrature", "closed_form"].map(String::from));
            for start in list(&maturities, "maturities")? {
                let end = start + delivery;
                let q = pricer.forward(&state, t, start, end, &seas, ForwardMethod::Quadrature(quad_nodes))?;
                let c = pricer.forward(&state, t, start, end, &seas, ForwardMethod::ClosedForm)?;
                rep.row(&[format!("{start}"), format!("{end}"), format!("{:.10}", q.value), format!("{:.10}", c.value)]);
            }
            rep.finish(&common.out)
        }
        Command::Option { spec, state, strikes, maturity, degree, common } => {
            let file = SpecFile::load(&spec)?;
            let model = file.model()?;
            let state = list(&state, "state")?;
            let pricer = Pricer::for_options(model, degree);
            let mut rep = Report::new("option", common.seed);
            rep.meta("maturity", maturity);
            rep.meta("degree", degree);
            rep.spec(&file);
            rep.row(&["strike", "value", "residual"].map(String::from));
            for k in list(&strikes, "strikes")? {
                let q = pricer.option(&state, k, maturity, degree)?;
                rep.row(&[format!("{k}"), format!("{:.8}", q.value), format!("{:.3e}", q.residual)]);
            }
            rep.finish(&common.out)
        }
        Command::BicTable { data, m_obs, common } => {
            if m_obs == 0 {
                return Err(Error::InvalidData("m_obs must be >= 1".into()));
            }
            let mut rdr = csv::ReaderBuilder::new()
                .comment(Some(b'#'))
                .trim(csv::Trim::All)
                .from_path(&data)
                .map_err(|e| Error::InvalidData(format!("cannot open {}: {e}", data.display())))?;
            let mut rows = Vec::new();
            for (i, rec) in rdr.records().enumerate() {
                let rec = rec.map_err(|e| Error::InvalidData(format!("line {}: {e}", i + 2)))?;
                if rec.len() != 3 {
                    return Err(Error::InvalidData(format!("line {}: expected label,ll,k", i + 2)));
                }
                let ll: f64 = rec[1].parse().map_err(|_| Error::InvalidData(format!("line {}: bad ll", i + 2)))?;
                let k: usize = rec[2].parse().map_err(|_| Error::InvalidData(format!("line {}: bad k", i + 2)))?;
                rows.push((rec[0].to_string(), ll, k, bic(ll, k, m_obs)));
            }
            let best = rows.iter().enumerate().min_by(|a, b| a.1 .3.total_cmp(&b.1 .3)).map(|(i, _)| i);
            let mut rep = Report::new("bic-table", common.seed);
            rep.meta("m_obs", m_obs);
            rep.row(&["label", "ll", "k", "m_obs", "bic", "best"].map(String::from));
            for (i, (label, ll, k, b)) in rows.iter().enumerate() {
                rep.row(&[
                    label.clone(),
                    format!("{ll}"),
                    k.to_string(),
                    m_obs.to_string(),
                    format!("{b:.4}"),
                    if Some(i) == best { "*".into() } else { String::new() },
                ]);
            }
            rep.finish(&common.out)
        }
    }
}

pub fn exit_code(e: &Error) -> i32 {
    if e.is_numerical() {
        EXIT_NUMERICAL
    } else {
        EXIT_VALIDATION
    }
}

/// Parse arguments, run, and return the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_VALIDATION } else { EXIT_OK };
        }
    };
    match execute(cli) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}
