//! Run configuration. One TOML file fully determines a run.
//!
//! ```toml
//! seed = 7
//!
//! [data]
//! path = "prices.csv"          # or: synthetic = { assets = 10, days = 300 }
//! window = 63
//! periods = "yearly"
//!
//! [model]
//! K = 100
//! gamma = 1.0
//! sigma_target = 0.10
//!
//! [bands]
//! default = [0.0, 0.2]
//! assets = "bands.csv"         # asset,w_min,w_max,sector
//! sectors = "sectors.csv"      # sector,min,max
//! ```
//!
//! Relative paths are resolved against the directory of the config file.

use std::path::{Path, PathBuf};

use chrono::NaiveDate;
use serde::Deserialize;
use thiserror::Error;

use crate::encoding::Integrality;
use crate::evaluator::EwiMode;
use crate::market_data::{MissingPolicy, Period, DEFAULT_SIZE_CAP, TRADING_DAYS_PER_YEAR};

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read config {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("config {path}: {message}")]
    Parse { path: String, message: String },
    #[error("config: {0}")]
    Invalid(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Experiment {
    Solve,
    Sweep,
    Frontier,
    Cloud,
    Validate,
}

impl std::str::FromStr for Experiment {
    type Err = ConfigError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(match s {
            "solve" => Experiment::Solve,
            "sweep" => Experiment::Sweep,
            "frontier" => Experiment::Frontier,
            "cloud" => Experiment::Cloud,
            "validate" => Experiment::Validate,
            other => return Err(ConfigError::Invalid(format!("unknown experiment `{other}`"))),
        })
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SyntheticConfig {
    pub assets: usize,
    #[serde(default = "default_days")]
    pub days: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "one")]
    pub sectors: usize,
    /// Give the first asset of each sector a much higher drift.
    #[serde(default)]
    pub dominant: bool,
}

fn default_days() -> usize {
    300
}

fn one() -> usize {
    1
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MissingSetting {
    #[default]
    Reject,
    ForwardFill,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PeriodSetting {
    Daily,
    #[default]
    Yearly,
}

impl From<PeriodSetting> for Period {
    fn from(p: PeriodSetting) -> Self {
        match p {
            PeriodSetting::Daily => Period::Daily,
            PeriodSetting::Yearly => Period::Yearly,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DataConfig {
    pub path: Option<PathBuf>,
    pub synthetic: Option<SyntheticConfig>,
    #[serde(default)]
    pub missing: MissingSetting,
    #[serde(default = "default_size_cap")]
    pub size_cap: u64,
    /// Last date of the estimation window; defaults to the last date.
    pub as_of: Option<NaiveDate>,
    #[serde(default = "default_window")]
    pub window: usize,
    /// Units of returns, covariance and `sigma_target`.
    #[serde(default)]
    pub periods: PeriodSetting,
    #[serde(default = "default_ppy")]
    pub periods_per_year: u32,
}

fn default_size_cap() -> u64 {
    DEFAULT_SIZE_CAP
}

fn default_window() -> usize {
    63
}

fn default_ppy() -> u32 {
    TRADING_DAYS_PER_YEAR
}

impl DataConfig {
    pub fn missing_policy(&self) -> MissingPolicy {
        match self.missing {
            MissingSetting::Reject => MissingPolicy::Reject,
            MissingSetting::ForwardFill => MissingPolicy::ForwardFill,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IntegralitySetting {
    #[default]
    Strict,
    Continuous,
}

impl From<IntegralitySetting> for Integrality {
    fn from(i: IntegralitySetting) -> Self {
        match i {
            IntegralitySetting::Strict => Integrality::Strict,
            IntegralitySetting::Continuous => Integrality::Continuous,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSection {
    #[serde(rename = "K")]
    pub k: u64,
    #[serde(default = "default_gamma")]
    pub gamma: f64,
    /// Budget multiplier; derived from the data when absent.
    pub rho: Option<f64>,
    /// Volatility multiplier; `rho / sigma_target^4` when absent.
    pub lambda_vol: Option<f64>,
    /// Enables the volatility penalty when set.
    pub sigma_target: Option<f64>,
    pub k_weights: Option<Vec<f64>>,
    /// Solve, move the linear weights toward the solution, rebuild; this many times.
    #[serde(default)]
    pub refine_iters: usize,
    #[serde(default = "default_damping")]
    pub refine_damping: f64,
    #[serde(default)]
    pub integrality: IntegralitySetting,
    pub bit_depth: Option<u32>,
}

fn default_gamma() -> f64 {
    1.0
}

fn default_damping() -> f64 {
    0.5
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BandsConfig {
    /// Band for assets not listed in the asset table.
    pub default: Option<[f64; 2]>,
    /// `asset,w_min,w_max,sector` table.
    pub assets: Option<PathBuf>,
    /// `sector,min,max` table.
    pub sectors: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolverMethod {
    #[default]
    Anneal,
    Exhaustive,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverConfig {
    #[serde(default)]
    pub method: SolverMethod,
    pub sweeps: Option<usize>,
    pub replicas: Option<usize>,
    pub t_start: Option<f64>,
    pub t_end: Option<f64>,
    #[serde(default = "default_bit_cap")]
    pub bit_cap: usize,
}

fn default_bit_cap() -> usize {
    crate::solver::DEFAULT_BIT_CAP
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            method: SolverMethod::Anneal,
            sweeps: None,
            replicas: None,
            t_start: None,
            t_end: None,
            bit_cap: default_bit_cap(),
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    #[serde(default = "default_gamma_min")]
    pub gamma_min: f64,
    #[serde(default = "default_gamma_max")]
    pub gamma_max: f64,
    #[serde(default = "default_points")]
    pub points: usize,
    /// Width of one step of the volatility grid the curve minimum is judged on.
    #[serde(default = "default_grid_step")]
    pub grid_step: f64,
}

fn default_gamma_min() -> f64 {
    0.1
}

fn default_gamma_max() -> f64 {
    1000.0
}

fn default_points() -> usize {
    40
}

fn default_grid_step() -> f64 {
    0.01
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            gamma_min: default_gamma_min(),
            gamma_max: default_gamma_max(),
            points: default_points(),
            grid_step: default_grid_step(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CloudBands {
    /// Same bands as the optimizer.
    #[default]
    Optimizer,
    /// Every asset in `[0, 1]`.
    Full,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EwiSetting {
    #[default]
    BuyAndHold,
    Rebalanced,
}

impl From<EwiSetting> for EwiMode {
    fn from(e: EwiSetting) -> Self {
        match e {
            EwiSetting::BuyAndHold => EwiMode::BuyAndHold,
            EwiSetting::Rebalanced => EwiMode::Rebalanced,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FrontierConfig {
    #[serde(default)]
    pub targets: Vec<f64>,
    #[serde(default = "default_cloud")]
    pub cloud: usize,
    #[serde(default)]
    pub cloud_bands: CloudBands,
    #[serde(default)]
    pub ewi: EwiSetting,
}

fn default_cloud() -> usize {
    1000
}

impl Default for FrontierConfig {
    fn default() -> Self {
        Self {
            targets: Vec::new(),
            cloud: default_cloud(),
            cloud_bands: CloudBands::default(),
            ewi: EwiSetting::default(),
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub experiment: Option<Experiment>,
    #[serde(default)]
    pub seed: u64,
    pub out: Option<PathBuf>,
    pub data: DataConfig,
    pub model: ModelSection,
    #[serde(default)]
    pub bands: BandsConfig,
    #[serde(default)]
    pub solver: SolverConfig,
    #[serde(default)]
    pub sweep: SweepConfig,
    #[serde(default)]
    pub frontier: FrontierConfig,
    /// Directory that relative paths are resolved against.
    #[serde(skip)]
    pub base_dir: PathBuf,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.display().to_string(),
            source,
        })?;
        let mut cfg = Self::parse(&text).map_err(|e| match e {
            ConfigError::Parse { message, .. } => ConfigError::Parse {
                path: path.display().to_string(),
                message,
            },
            other => other,
        })?;
        cfg.base_dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Ok(cfg)
    }

    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let cfg: Self = toml::from_str(text).map_err(|e| ConfigError::Parse {
            path: "<string>".into(),
            message: e.to_string(),
        })?;
        cfg.check()?;
        Ok(cfg)
    }

    fn check(&self) -> Result<(), ConfigError> {
        match (&self.data.path, &self.data.synthetic) {
            (Some(_), Some(_)) => {
                return Err(ConfigError::Invalid(
                    "set either data.path or data.synthetic, not both".into(),
                ))
            }
            (None, None) => {
                return Err(ConfigError::Invalid("data.path or data.synthetic is required".into()))
            }
            _ => {}
        }
        if self.model.k == 0 {
            return Err(ConfigError::Invalid("model.K must be positive".into()));
        }
        if !(0.0..=1.0).contains(&self.model.refine_damping) {
            return Err(ConfigError::Invalid("model.refine_damping must lie in [0, 1]".into()));
        }
        if self.sweep.points == 0 || !(self.sweep.gamma_min > 0.0 && self.sweep.gamma_max >= self.sweep.gamma_min) {
            return Err(ConfigError::Invalid(
                "sweep needs points >= 1 and 0 < gamma_min <= gamma_max".into(),
            ));
        }
        Ok(())
    }

    pub fn resolve(&self, p: &Path) -> PathBuf {
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.base_dir.join(p)
        }
    }

    pub fn period(&self) -> Period {
        self.data.periods.into()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
        [data]
        synthetic = { assets = 5 }
        [model]
        K = 100
    "#;

    #[test]
    fn minimal_config_gets_defaults() {
        let cfg = RunConfig::parse(MINIMAL).unwrap();
        assert_eq!(cfg.data.window, 63);
        assert_eq!(cfg.data.periods_per_year, 252);
        assert_eq!(cfg.period(), Period::Yearly);
        assert_eq!(cfg.model.gamma, 1.0);
        assert_eq!(cfg.solver.bit_cap, 24);
        assert!(cfg.model.sigma_target.is_none());
        assert_eq!(cfg.data.synthetic.as_ref().unwrap().days, 300);
    }

    #[test]
    fn full_config() {
        let text = r#"
            experiment = "frontier"
            seed = 3
            out = "results"
            [data]
            path = "p.csv"
            missing = "forward_fill"
            as_of = "2021-04-23"
            periods = "daily"
            [model]
            K = 200
            gamma = 0.5
            rho = 4.0
            sigma_target = 0.01
            refine_iters = 3
            integrality = "continuous"
            [bands]
            default = [0.0, 0.1]
            sectors = "sectors.csv"
            [solver]
            method = "exhaustive"
            [frontier]
            targets = [0.005, 0.0075, 0.01]
            cloud_bands = "full"
            ewi = "rebalanced"
        "#;
        let cfg = RunConfig::parse(text).unwrap();
        assert_eq!(cfg.experiment, Some(Experiment::Frontier));
        assert_eq!(cfg.data.missing_policy(), MissingPolicy::ForwardFill);
        assert_eq!(cfg.data.as_of, NaiveDate::from_ymd_opt(2021, 4, 23));
        assert_eq!(cfg.period(), Period::Daily);
        assert_eq!(cfg.frontier.targets.len(), 3);
        assert_eq!(cfg.frontier.cloud_bands, CloudBands::Full);
        assert_eq!(cfg.solver.method, SolverMethod::Exhaustive);
        assert_eq!(cfg.bands.default, Some([0.0, 0.1]));
    }

    #[test]
    fn rejects_bad_configs() {
        assert!(RunConfig::parse("[model]\nK = 1\n").is_err());
        assert!(RunConfig::parse("[data]\nsynthetic = { assets = 2 }\n[model]\nK = 0\n").is_err());
        assert!(RunConfig::parse(
            "[data]\npath = \"a\"\nsynthetic = { assets = 2 }\n[model]\nK = 10\n"
        )
        .is_err());
        assert!(RunConfig::parse(&format!("{MINIMAL}\nbogus = 1\n")).is_err());
        assert!("nope".parse::<Experiment>().is_err());
        assert_eq!("sweep".parse::<Experiment>().unwrap(), Experiment::Sweep);
    }

    #[test]
    fn paths_resolve_against_config_dir() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.toml");
        std::fs::write(&path, MINIMAL).unwrap();
        let cfg = RunConfig::load(&path).unwrap();
        assert_eq!(cfg.resolve(Path::new("x.csv")), dir.path().join("x.csv"));
        assert_eq!(cfg.resolve(Path::new("/abs.csv")), PathBuf::from("/abs.csv"));
        assert!(matches!(
            RunConfig::load(&dir.path().join("missing.toml")),
            Err(ConfigError::Io { .. })
        ));
    }
}
