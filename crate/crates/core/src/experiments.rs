//! The batch commands behind the `bandqubo` binary.
//!
//! Each command reads a [`RunConfig`], writes its artifacts into an output
//! directory and returns a structured outcome. Exit codes: 0 success, 1 bad
//! input or I/O, 2 infeasible or unencodable bands, 3 solver refusal.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use nalgebra::DVector;
use thiserror::Error;

use crate::config::{CloudBands, ConfigError, RunConfig, SolverMethod};
use crate::encoding::{
    check_bands, decode, make_encoding, make_encoding_with, read_asset_table, read_sector_table,
    resolve_asset_bands, unit_width, AssetBand, BandSpec, EncodingError, EncodingOptions,
    EncodingSpec,
};
use crate::evaluator::{
    composition_csv, evaluate, ewi_return, frontier_csv, random_cloud, sweep_csv, EvalError,
    FrontierRow, Portfolio,
};
use crate::market_data::{
    annualize, estimate_inputs, load_prices, log_returns, DataError, LoadOptions, MarketInputs,
    Period, PriceSeries,
};
use crate::qubo::{
    build_qubo, constraint_value, cost_direct, default_lambda_vol, default_rho, refine_linear_weights, ModelConfig, ModelError, Qubo,
};
use crate::solver::{anneal, exhaustive_solve, AnnealSchedule, Solution, SolverError};
use crate::synthetic::SyntheticMarket;

#[derive(Debug, Error)]
pub enum RunError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Data(#[from] DataError),
    #[error(transparent)]
    Bands(#[from] EncodingError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Solver(#[from] SolverError),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error("usage: {0}")]
    Usage(String),
    #[error("cannot write {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl RunError {
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Bands(_) => 2,
            RunError::Eval(EvalError::Infeasible(_) | EvalError::Encoding(_)) => 2,
            RunError::Solver(SolverError::TooManyBits { .. }) => 3,
            _ => 1,
        }
    }
}

/// Market data, bands and encoding for one run.
#[derive(Debug, Clone)]
pub struct Prepared {
    pub series: PriceSeries,
    pub inputs: MarketInputs,
    pub bands: BandSpec,
    pub spec: EncodingSpec,
    /// Price-row indices bounding the estimation window.
    pub window_start: usize,
    pub as_of: usize,
}

fn load_series(cfg: &RunConfig) -> Result<(PriceSeries, Option<Vec<String>>), RunError> {
    if let Some(syn) = &cfg.data.synthetic {
        let market = if syn.dominant {
            SyntheticMarket::with_dominant_assets(syn.assets, syn.sectors, syn.days, syn.seed)
        } else {
            SyntheticMarket::graded(syn.assets, syn.sectors, syn.days, syn.seed)
        };
        let sectors = market.assets.iter().map(|a| a.sector.clone()).collect();
        return Ok((market.generate()?, Some(sectors)));
    }
    let path = cfg.resolve(cfg.data.path.as_deref().expect("checked at parse time"));
    let opts = LoadOptions {
        missing: cfg.data.missing_policy(),
        size_cap: cfg.data.size_cap,
    };
    Ok((load_prices(&path, &opts)?, None))
}

fn read_text(cfg: &RunConfig, p: &Path) -> Result<String, RunError> {
    let path = cfg.resolve(p);
    fs::read_to_string(&path).map_err(|source| {
        RunError::Data(DataError::Io {
            path: path.display().to_string(),
            source,
        })
    })
}

/// Per-asset bands in series order, before the budget check.
fn raw_bands(
    cfg: &RunConfig,
    series: &PriceSeries,
    default_sectors: Option<Vec<String>>,
) -> Result<Vec<AssetBand>, RunError> {
    let mut sectors: Vec<Option<String>> = match default_sectors {
        Some(s) => s.into_iter().map(Some).collect(),
        None => vec![None; series.n_assets()],
    };
    let mut overrides = BTreeMap::new();
    if let Some(p) = &cfg.bands.assets {
        let rows = read_asset_table(&read_text(cfg, p)?)?;
        for row in rows {
            let Some(n) = series.assets().iter().position(|a| *a == row.asset) else {
                return Err(RunError::Bands(EncodingError::InvalidBand {
                    asset: row.asset,
                    reason: "not in the price data".into(),
                }));
            };
            if row.sector.is_some() {
                sectors[n] = row.sector.clone();
            }
            match (row.w_min, row.w_max) {
                (Some(lo), Some(hi)) => {
                    overrides.insert(row.asset.clone(), (lo, hi));
                }
                (None, None) => {}
                _ => {
                    return Err(RunError::Bands(EncodingError::InvalidBand {
                        asset: row.asset,
                        reason: "give both w_min and w_max or neither".into(),
                    }))
                }
            }
        }
    }
    let sector_bands = match &cfg.bands.sectors {
        Some(p) => read_sector_table(&read_text(cfg, p)?)?,
        None => BTreeMap::new(),
    };
    let default = match cfg.bands.default {
        Some([lo, hi]) => Some((lo, hi)),
        None if cfg.bands.assets.is_none() && cfg.bands.sectors.is_none() => Some((0.0, 1.0)),
        None => None,
    };
    Ok(resolve_asset_bands(
        series.assets(),
        &sectors,
        &sector_bands,
        &overrides,
        default,
    )?)
}

fn encoding_options(cfg: &RunConfig) -> EncodingOptions {
    EncodingOptions {
        integrality: cfg.model.integrality.into(),
        forced_depth: cfg.model.bit_depth,
    }
}

fn market_inputs(cfg: &RunConfig, series: &PriceSeries) -> Result<(MarketInputs, usize), RunError> {
    let as_of = match cfg.data.as_of {
        Some(d) => series.index_on_or_before(d).ok_or_else(|| {
            RunError::Data(DataError::Insufficient(format!("no prices on or before {d}")))
        })?,
        None => series.n_dates().saturating_sub(1),
    };
    let returns = log_returns(series)?;
    let daily = estimate_inputs(&returns, cfg.data.window, as_of)?;
    let inputs = match cfg.period() {
        Period::Daily => daily,
        Period::Yearly => annualize(&daily, cfg.data.periods_per_year),
    };
    Ok((inputs, as_of))
}

pub fn prepare(cfg: &RunConfig) -> Result<Prepared, RunError> {
    let (series, sectors) = load_series(cfg)?;
    let (inputs, as_of) = market_inputs(cfg, &series)?;
    let bands = BandSpec::new(series.assets().to_vec(), raw_bands(cfg, &series, sectors)?)?;
    let spec = make_encoding_with(&bands, cfg.model.k, &encoding_options(cfg))?;
    Ok(Prepared {
        window_start: as_of - cfg.data.window,
        as_of,
        series,
        inputs,
        bands,
        spec,
    })
}

/// Model for risk aversion `gamma`, with the volatility penalty when a
/// target is given. Unset multipliers take their data-derived defaults.
pub fn model_for(
    prep: &Prepared,
    cfg: &RunConfig,
    gamma: f64,
    sigma_target: Option<f64>,
) -> Result<ModelConfig, RunError> {
    let n = prep.inputs.n_assets();
    let rho = cfg
        .model
        .rho
        .unwrap_or_else(|| default_rho(&prep.inputs, gamma, cfg.model.k));
    let mut model = ModelConfig::new(n, gamma);
    model.rho = rho;
    if let Some(w) = &cfg.model.k_weights {
        model.k_weights = w.clone();
    }
    if let Some(t) = sigma_target {
        let lambda = match cfg.model.lambda_vol {
            Some(l) => l,
            None => default_lambda_vol(rho, t)?,
        };
        model = model.with_target(t, lambda);
    }
    model.validate(n)?;
    Ok(model)
}

fn schedule_for(qubo: &Qubo, cfg: &RunConfig) -> AnnealSchedule {
    let mut s = AnnealSchedule::default_for(qubo, cfg.seed);
    let sc = &cfg.solver;
    if let Some(v) = sc.sweeps {
        s.sweeps = v;
    }
    if let Some(v) = sc.replicas {
        s.replicas = v;
    }
    if let Some(v) = sc.t_start {
        s.t_start = v;
    }
    if let Some(v) = sc.t_end {
        s.t_end = v;
    }
    s
}

pub fn run_solver(qubo: &Qubo, cfg: &RunConfig) -> Result<Solution, RunError> {
    Ok(match cfg.solver.method {
        SolverMethod::Anneal => anneal(qubo, &schedule_for(qubo, cfg))?,
        SolverMethod::Exhaustive => exhaustive_solve(qubo, cfg.solver.bit_cap)?,
    })
}

#[derive(Debug, Clone)]
pub struct SolveOutcome {
    pub portfolio: Portfolio,
    pub solution: Solution,
    pub qubo: Qubo,
    /// Final model, including refined linear weights.
    pub model: ModelConfig,
    /// Direct cost of the decoded weights.
    pub cost: f64,
    /// Every bit was fixed by the bands, so nothing was solved.
    pub pinned: bool,
    pub refinements: usize,
}

/// Builds, solves and decodes one model; with the volatility penalty on, the
/// linear weights are refined `model.refine_iters` times first.
pub fn solve_model(prep: &Prepared, cfg: &RunConfig, model: ModelConfig) -> Result<SolveOutcome, RunError> {
    let mut model = model;
    let iters = if model.vol_constraint { cfg.model.refine_iters } else { 0 };
    let mut refinements = 0;
    loop {
        let qubo = build_qubo(&prep.inputs, &model, &prep.spec, &prep.bands)?;
        let pinned = prep.spec.total_bits() == 0;
        let solution = if pinned {
            Solution {
                bits: Vec::new(),
                energy: qubo.offset(),
                replica_id: 0,
                sweep_found: 0,
            }
        } else {
            run_solver(&qubo, cfg)?
        };
        let weights = decode(&solution.bits, &prep.spec, &prep.bands)?;
        if refinements < iters {
            model.k_weights = refine_linear_weights(&model.k_weights, &weights, cfg.model.refine_damping);
            refinements += 1;
            continue;
        }
        let portfolio = evaluate(&weights, &prep.inputs, &model, &prep.bands)?;
        let cost = cost_direct(&weights, &prep.inputs, &model)?;
        return Ok(SolveOutcome {
            portfolio,
            solution,
            qubo,
            model,
            cost,
            pinned,
            refinements,
        });
    }
}

/// `key=value` summary lines.
#[derive(Debug, Default, Clone)]
pub struct Summary(Vec<(String, String)>);

impl Summary {
    pub fn push(&mut self, key: &str, value: impl ToString) {
        self.0.push((key.to_string(), value.to_string()));
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.0.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    pub fn render(&self) -> String {
        self.0.iter().fold(String::new(), |mut out, (k, v)| {
            let _ = writeln!(out, "{k}={v}");
            out
        })
    }

    pub fn parse(text: &str) -> Option<Self> {
        text.lines()
            .filter(|l| !l.trim().is_empty())
            .map(|l| l.split_once('=').map(|(k, v)| (k.to_string(), v.to_string())))
            .collect::<Option<Vec<_>>>()
            .map(Summary)
    }
}

fn write_out(dir: &Path, name: &str, contents: &str) -> Result<(), RunError> {
    let path = dir.join(name);
    fs::create_dir_all(dir)
        .and_then(|_| fs::write(&path, contents))
        .map_err(|source| RunError::Io {
            path: path.display().to_string(),
            source,
        })
}

fn push_portfolio(s: &mut Summary, prefix: &str, p: &Portfolio) {
    s.push(&format!("{prefix}expected_return"), p.expected_return);
    s.push(&format!("{prefix}volatility"), p.volatility);
    s.push(&format!("{prefix}budget_residual"), p.budget_residual);
    s.push(&format!("{prefix}vol_gap"), p.vol_gap);
    s.push(&format!("{prefix}band_ok"), p.band_ok);
}

fn push_header(s: &mut Summary, experiment: &str, prep: &Prepared, cfg: &RunConfig) {
    s.push("experiment", experiment);
    s.push("assets", prep.inputs.n_assets());
    s.push("bits", prep.spec.total_bits());
    s.push("K", prep.spec.k());
    s.push("period", prep.inputs.period().as_str());
    s.push("as_of", prep.series.dates()[prep.as_of]);
    s.push("window", cfg.data.window);
    s.push("seed", cfg.seed);
}

/// Optimal banded portfolio at `model.sigma_target` (or plain mean-variance
/// when no target is set).
pub fn cmd_solve(cfg: &RunConfig, out: &Path) -> Result<SolveOutcome, RunError> {
    let prep = prepare(cfg)?;
    let model = model_for(&prep, cfg, cfg.model.gamma, cfg.model.sigma_target)?;
    let outcome = solve_model(&prep, cfg, model)?;

    write_out(out, "composition.csv", &composition_csv(&outcome.portfolio, &prep.bands)?)?;
    write_out(out, "solution.txt", &outcome.solution.to_record())?;
    write_out(out, "qubo.txt", &outcome.qubo.to_triplets())?;

    let mut s = Summary::default();
    push_header(&mut s, "solve", &prep, cfg);
    s.push("gamma", outcome.model.gamma);
    s.push("rho", outcome.model.rho);
    s.push("vol_constraint", outcome.model.vol_constraint);
    if outcome.model.vol_constraint {
        s.push("sigma_target", outcome.model.sigma_target);
        s.push("lambda_vol", outcome.model.lambda_vol);
        s.push("refinements", outcome.refinements);
    }
    s.push("pinned", outcome.pinned);
    s.push("energy", outcome.solution.energy);
    s.push("cost", outcome.cost);
    push_portfolio(&mut s, "", &outcome.portfolio);
    write_out(out, "summary.txt", &s.render())?;
    Ok(outcome)
}

#[derive(Debug, Clone)]
pub struct SweepOutcome {
    /// `(realized volatility, constraint value)`, sorted by volatility.
    pub points: Vec<(f64, f64)>,
    /// Point with the smallest constraint value.
    pub minimum: (f64, f64),
    pub sigma_target: f64,
    pub grid_step: f64,
    /// Optimum of the model with the volatility penalty switched on.
    pub target_optimum: SolveOutcome,
}

impl SweepOutcome {
    pub fn minimum_within_one_step(&self) -> bool {
        (self.minimum.0 - self.sigma_target).abs() <= self.grid_step
    }
}

pub fn log_grid(lo: f64, hi: f64, points: usize) -> Vec<f64> {
    if points == 1 {
        return vec![lo];
    }
    let (a, b) = (lo.ln(), hi.ln());
    (0..points)
        .map(|i| (a + (b - a) * i as f64 / (points - 1) as f64).exp())
        .collect()
}

/// Volatility penalty versus realized volatility along the mean-variance
/// frontier traced by scanning the risk aversion.
pub fn cmd_sweep(cfg: &RunConfig, out: &Path) -> Result<SweepOutcome, RunError> {
    let target = cfg
        .model
        .sigma_target
        .ok_or_else(|| RunError::Usage("sweep needs model.sigma_target".into()))?;
    let grid = log_grid(cfg.sweep.gamma_min, cfg.sweep.gamma_max, cfg.sweep.points);
    if grid.is_empty() {
        return Err(RunError::Usage("empty risk-aversion grid".into()));
    }
    let prep = prepare(cfg)?;
    let target_optimum = solve_model(&prep, cfg, model_for(&prep, cfg, cfg.model.gamma, Some(target))?)?;
    let penalty = target_optimum.model.clone();

    let mut points = Vec::with_capacity(grid.len());
    for &gamma in &grid {
        let outcome = solve_model(&prep, cfg, model_for(&prep, cfg, gamma, None)?)?;
        let w = &outcome.portfolio.weights;
        points.push((outcome.portfolio.volatility, constraint_value(w, &prep.inputs, &penalty)?));
    }
    points.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
    points.dedup();
    let minimum = points
        .iter()
        .copied()
        .min_by(|a, b| a.1.total_cmp(&b.1).then(a.0.total_cmp(&b.0)))
        .expect("non-empty grid");

    let outcome = SweepOutcome {
        points,
        minimum,
        sigma_target: target,
        grid_step: cfg.sweep.grid_step,
        target_optimum,
    };
    write_out(out, "sweep.csv", &sweep_csv(&outcome.points)?)?;
    let mut s = Summary::default();
    push_header(&mut s, "sweep", &prep, cfg);
    s.push("sigma_target", target);
    s.push("lambda_vol", penalty.lambda_vol);
    s.push("gamma_points", grid.len());
    s.push("curve_points", outcome.points.len());
    s.push("min_realized_vol", outcome.minimum.0);
    s.push("min_constraint_value", outcome.minimum.1);
    s.push("grid_step", outcome.grid_step);
    s.push("min_within_one_step", outcome.minimum_within_one_step());
    push_portfolio(&mut s, "target_", &outcome.target_optimum.portfolio);
    write_out(out, "summary.txt", &s.render())?;
    Ok(outcome)
}

/// Bands and encoding used for the random cloud.
fn cloud_bands(prep: &Prepared, cfg: &RunConfig) -> Result<(BandSpec, EncodingSpec), RunError> {
    Ok(match cfg.frontier.cloud_bands {
        CloudBands::Optimizer => (prep.bands.clone(), prep.spec.clone()),
        CloudBands::Full => {
            let bands = BandSpec::uniform(prep.series.assets().to_vec(), 0.0, 1.0)?;
            let spec = make_encoding(&bands, cfg.model.k)?;
            (bands, spec)
        }
    })
}

/// Equal-weight baseline row. The return is the log return of the
/// buy-and-hold index over the estimation window, per period, in the units
/// of the market inputs.
pub fn ewi_row(prep: &Prepared, cfg: &RunConfig) -> Result<FrontierRow, RunError> {
    let n = prep.inputs.n_assets();
    let total = ewi_return(&prep.series, prep.window_start, prep.as_of, cfg.frontier.ewi.into())?;
    let periods = (prep.as_of - prep.window_start) as f64;
    let scale = match prep.inputs.period() {
        Period::Daily => 1.0,
        Period::Yearly => f64::from(cfg.data.periods_per_year),
    };
    let w = DVector::from_element(n, 1.0 / n as f64);
    let vol = w.dot(&(prep.inputs.sigma() * &w)).max(0.0).sqrt();
    Ok(FrontierRow {
        volatility: vol,
        expected_return: (1.0 + total).ln() / periods * scale,
        label: "ewi".into(),
    })
}

fn cloud_rows(prep: &Prepared, cfg: &RunConfig, sigma_target: f64) -> Result<Vec<Portfolio>, RunError> {
    let (bands, spec) = cloud_bands(prep, cfg)?;
    let mut model = ModelConfig::new(prep.inputs.n_assets(), cfg.model.gamma);
    model.sigma_target = sigma_target;
    Ok(random_cloud(cfg.frontier.cloud, &bands, &spec, &prep.inputs, &model, cfg.seed)?)
}

fn to_row(p: &Portfolio, label: &str) -> FrontierRow {
    FrontierRow {
        volatility: p.volatility,
        expected_return: p.expected_return,
        label: label.to_string(),
    }
}

#[derive(Debug, Clone)]
pub struct FrontierOutcome {
    pub optima: Vec<(f64, SolveOutcome)>,
    pub cloud: Vec<Portfolio>,
    pub ewi: FrontierRow,
}

/// One optimum per target volatility, a random cloud and the equal-weight
/// baseline, all in `frontier.csv`.
pub fn cmd_frontier(cfg: &RunConfig, out: &Path) -> Result<FrontierOutcome, RunError> {
    if cfg.frontier.targets.is_empty() {
        return Err(RunError::Usage("frontier needs at least one entry in frontier.targets".into()));
    }
    let prep = prepare(cfg)?;
    let mut optima = Vec::with_capacity(cfg.frontier.targets.len());
    for &t in &cfg.frontier.targets {
        let model = model_for(&prep, cfg, cfg.model.gamma, Some(t))?;
        optima.push((t, solve_model(&prep, cfg, model)?));
    }
    let cloud = cloud_rows(&prep, cfg, cfg.frontier.targets[0])?;
    let ewi = ewi_row(&prep, cfg)?;

    let mut rows: Vec<FrontierRow> = optima
        .iter()
        .map(|(t, o)| to_row(&o.portfolio, &format!("target_{t}")))
        .collect();
    rows.extend(cloud.iter().map(|p| to_row(p, "cloud")));
    rows.push(ewi.clone());
    write_out(out, "frontier.csv", &frontier_csv(&rows)?)?;

    let mut s = Summary::default();
    push_header(&mut s, "frontier", &prep, cfg);
    for (i, (t, o)) in optima.iter().enumerate() {
        s.push(&format!("target{i}_sigma_target"), t);
        s.push(&format!("target{i}_energy"), o.solution.energy);
        push_portfolio(&mut s, &format!("target{i}_"), &o.portfolio);
    }
    s.push("cloud_points", cloud.len());
    s.push("ewi_volatility", ewi.volatility);
    s.push("ewi_return", ewi.expected_return);
    write_out(out, "summary.txt", &s.render())?;
    Ok(FrontierOutcome { optima, cloud, ewi })
}

/// Random cloud and equal-weight baseline only.
pub fn cmd_cloud(cfg: &RunConfig, out: &Path) -> Result<(Vec<Portfolio>, FrontierRow), RunError> {
    let prep = prepare(cfg)?;
    let target = cfg.model.sigma_target.unwrap_or(0.0);
    let cloud = cloud_rows(&prep, cfg, target)?;
    let ewi = ewi_row(&prep, cfg)?;
    let mut rows: Vec<FrontierRow> = cloud.iter().map(|p| to_row(p, "cloud")).collect();
    rows.push(ewi.clone());
    write_out(out, "frontier.csv", &frontier_csv(&rows)?)?;
    let mut s = Summary::default();
    push_header(&mut s, "cloud", &prep, cfg);
    s.push("cloud_points", cloud.len());
    s.push("ewi_volatility", ewi.volatility);
    s.push("ewi_return", ewi.expected_return);
    write_out(out, "summary.txt", &s.render())?;
    Ok((cloud, ewi))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Severity {
    Error,
    Warning,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Diagnostic {
    pub severity: Severity,
    /// DATA, FEASIBILITY, ENCODING, PSD, MULTIPLIER or UNITS.
    pub code: &'static str,
    pub message: String,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ValidationReport {
    pub diagnostics: Vec<Diagnostic>,
}

impl ValidationReport {
    fn error(&mut self, code: &'static str, message: impl Into<String>) {
        self.diagnostics.push(Diagnostic {
            severity: Severity::Error,
            code,
            message: message.into(),
        });
    }

    fn warn(&mut self, code: &'static str, message: impl Into<String>) {
        self.diagnostics.push(Diagnostic {
            severity: Severity::Warning,
            code,
            message: message.into(),
        });
    }

    pub fn errors(&self) -> impl Iterator<Item = &Diagnostic> {
        self.diagnostics.iter().filter(|d| d.severity == Severity::Error)
    }

    pub fn has_code(&self, code: &str) -> bool {
        self.diagnostics.iter().any(|d| d.code == code)
    }

    pub fn render(&self) -> String {
        if self.diagnostics.is_empty() {
            return "ok: no issues found\n".into();
        }
        self.diagnostics.iter().fold(String::new(), |mut out, d| {
            let level = match d.severity {
                Severity::Error => "ERROR",
                Severity::Warning => "WARNING",
            };
            let _ = writeln!(out, "{level} {}: {}", d.code, d.message);
            out
        })
    }
}

/// Checks a configuration without solving or writing anything.
pub fn cmd_validate(cfg: &RunConfig) -> ValidationReport {
    let mut report = ValidationReport::default();
    let (series, sectors) = match load_series(cfg) {
        Ok(v) => v,
        Err(e) => {
            report.error("DATA", e.to_string());
            return report;
        }
    };
    let inputs = match market_inputs(cfg, &series) {
        Ok((inputs, _)) => {
            if !inputs.is_psd() {
                let (lo, hi) = inputs.eigen_range();
                report.error("PSD", format!("covariance eigenvalues span [{lo}, {hi}]"));
            }
            Some(inputs)
        }
        Err(e) => {
            report.error("DATA", e.to_string());
            None
        }
    };
    match raw_bands(cfg, &series, sectors) {
        Ok(bands) => {
            for issue in check_bands(series.assets(), &bands) {
                report.error("FEASIBILITY", issue.to_string());
            }
            let integrality = cfg.model.integrality.into();
            for (name, band) in series.assets().iter().zip(&bands) {
                if let Err(e) = unit_width(name, band, cfg.model.k, integrality) {
                    report.error("ENCODING", e.to_string());
                }
            }
        }
        Err(e) => report.error("FEASIBILITY", e.to_string()),
    }
    if let Some(inputs) = &inputs {
        let suggested = default_rho(inputs, cfg.model.gamma, cfg.model.k);
        if let Some(rho) = cfg.model.rho {
            if rho < 0.1 * suggested {
                report.warn(
                    "MULTIPLIER",
                    format!("rho = {rho} is small next to the objective scale; the default would be {suggested}"),
                );
            }
        }
        if cfg.model.lambda_vol.is_some() && cfg.model.sigma_target.is_none() {
            report.warn("MULTIPLIER", "lambda_vol is set but sigma_target is not; the penalty is off");
        }
        if let Some(k) = &cfg.model.k_weights {
            if k.len() != inputs.n_assets() {
                report.error("MULTIPLIER", format!("{} linear weights for {} assets", k.len(), inputs.n_assets()));
            }
        }
    }
    if let Some(t) = cfg.model.sigma_target {
        let suspicious = match cfg.period() {
            Period::Daily => t > 0.1,
            Period::Yearly => t < 0.01,
        };
        if suspicious {
            report.warn(
                "UNITS",
                format!("sigma_target = {t} looks off for {} units", cfg.period().as_str()),
            );
        }
    }
    report
}

/// Output directory: the CLI flag, then `out` in the config, then `out/`.
pub fn output_dir(cfg: &RunConfig, flag: Option<PathBuf>) -> PathBuf {
    flag.or_else(|| cfg.out.as_ref().map(|p| cfg.resolve(p)))
        .unwrap_or_else(|| PathBuf::from("out"))
}
