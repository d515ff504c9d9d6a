//! Price ingestion and estimation of the return vector and covariance matrix.
//!
//! Everything downstream keeps the asset order of the CSV header.

use std::fs;
use std::path::Path;

use chrono::NaiveDate;
use nalgebra::{DMatrix, DVector};
use thiserror::Error;

/// Default cap on input file size (100 MB).
pub const DEFAULT_SIZE_CAP: u64 = 100 * 1024 * 1024;

/// Default number of trading periods per year.
pub const TRADING_DAYS_PER_YEAR: u32 = 252;

const SYMMETRY_TOL: f64 = 1e-12;
const PSD_REL_TOL: f64 = 1e-10;

#[derive(Debug, Error)]
pub enum DataError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{path} is {size} bytes, above the {cap} byte cap")]
    TooLarge { path: String, size: u64, cap: u64 },
    #[error("parse error at line {line}: {message}")]
    Parse { line: u64, message: String },
    #[error("validation error: {0}")]
    Validation(String),
    #[error("insufficient data: {0}")]
    Insufficient(String),
    #[error("dimension mismatch: {0}")]
    Dimension(String),
}

/// How to treat empty cells in a price file.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum MissingPolicy {
    #[default]
    Reject,
    ForwardFill,
}

#[derive(Debug, Clone)]
pub struct LoadOptions {
    pub missing: MissingPolicy,
    pub size_cap: u64,
}

impl Default for LoadOptions {
    fn default() -> Self {
        Self {
            missing: MissingPolicy::Reject,
            size_cap: DEFAULT_SIZE_CAP,
        }
    }
}

/// Dated closing prices, one row per date and one column per asset.
#[derive(Debug, Clone, PartialEq)]
pub struct PriceSeries {
    assets: Vec<String>,
    dates: Vec<NaiveDate>,
    prices: DMatrix<f64>,
}

impl PriceSeries {
    pub fn new(
        assets: Vec<String>,
        dates: Vec<NaiveDate>,
        prices: DMatrix<f64>,
    ) -> Result<Self, DataError> {
        if prices.nrows() != dates.len() || prices.ncols() != assets.len() {
            return Err(DataError::Dimension(format!(
                "{}x{} price matrix for {} dates and {} assets",
                prices.nrows(),
                prices.ncols(),
                dates.len(),
                assets.len()
            )));
        }
        for (t, w) in dates.windows(2).enumerate() {
            if w[1] <= w[0] {
                return Err(DataError::Validation(format!(
                    "dates not strictly increasing at row {}: {} then {}",
                    t + 1,
                    w[0],
                    w[1]
                )));
            }
        }
        for t in 0..prices.nrows() {
            for n in 0..prices.ncols() {
                let p = prices[(t, n)];
                if !(p.is_finite() && p > 0.0) {
                    return Err(DataError::Validation(format!(
                        "non-positive price {p} for {} on {}",
                        assets[n], dates[t]
                    )));
                }
            }
        }
        Ok(Self {
            assets,
            dates,
            prices,
        })
    }

    pub fn assets(&self) -> &[String] {
        &self.assets
    }

    pub fn dates(&self) -> &[NaiveDate] {
        &self.dates
    }

    pub fn prices(&self) -> &DMatrix<f64> {
        &self.prices
    }

    pub fn n_assets(&self) -> usize {
        self.assets.len()
    }

    pub fn n_dates(&self) -> usize {
        self.dates.len()
    }

    /// Index of `date`, or of the last date on or before it.
    pub fn index_on_or_before(&self, date: NaiveDate) -> Option<usize> {
        match self.dates.binary_search(&date) {
            Ok(i) => Some(i),
            Err(0) => None,
            Err(i) => Some(i - 1),
        }
    }
}

/// Parses a price CSV with header `date,TICKER1,TICKER2,...`.
pub fn load_prices(path: &Path, opts: &LoadOptions) -> Result<PriceSeries, DataError> {
    let display = path.display().to_string();
    let meta = fs::metadata(path).map_err(|source| DataError::Io {
        path: display.clone(),
        source,
    })?;
    if meta.len() > opts.size_cap {
        return Err(DataError::TooLarge {
            path: display,
            size: meta.len(),
            cap: opts.size_cap,
        });
    }
    let text = fs::read_to_string(path).map_err(|source| DataError::Io {
        path: display,
        source,
    })?;
    parse_prices(&text, opts.missing)
}

/// Parses price CSV text; see [`load_prices`].
pub fn parse_prices(text: &str, missing: MissingPolicy) -> Result<PriceSeries, DataError> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let header = reader
        .headers()
        .map_err(|e| DataError::Parse {
            line: 1,
            message: e.to_string(),
        })?
        .clone();
    if header.len() < 2 {
        return Err(DataError::Parse {
            line: 1,
            message: "header must be `date,ASSET1,...`".into(),
        });
    }
    let assets: Vec<String> = header.iter().skip(1).map(str::to_owned).collect();
    let n = assets.len();

    let mut dates = Vec::new();
    let mut cells: Vec<Option<f64>> = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| DataError::Parse {
            line: e.position().map_or(0, |p| p.line()),
            message: e.to_string(),
        })?;
        let line = record.position().map_or(0, |p| p.line());
        if record.len() != n + 1 {
            return Err(DataError::Parse {
                line,
                message: format!("expected {} fields, found {}", n + 1, record.len()),
            });
        }
        let date = NaiveDate::parse_from_str(&record[0], "%Y-%m-%d").map_err(|e| {
            DataError::Parse {
                line,
                message: format!("bad date `{}`: {e}", &record[0]),
            }
        })?;
        dates.push(date);
        for (j, field) in record.iter().skip(1).enumerate() {
            if field.is_empty() {
                cells.push(None);
                continue;
            }
            let p: f64 = field.parse().map_err(|_| DataError::Parse {
                line,
                message: format!("bad price `{field}` for {}", assets[j]),
            })?;
            if !(p.is_finite() && p > 0.0) {
                return Err(DataError::Validation(format!(
                    "non-positive price {p} for {} on {date} (line {line})",
                    assets[j]
                )));
            }
            cells.push(Some(p));
        }
    }

    let rows = dates.len();
    let mut values = Vec::with_capacity(cells.len());
    for t in 0..rows {
        for j in 0..n {
            let v = match (cells[t * n + j], missing) {
                (Some(p), _) => p,
                (None, MissingPolicy::ForwardFill) if t > 0 => values[(t - 1) * n + j],
                (None, _) => {
                    return Err(DataError::Validation(format!(
                        "missing price for {} on {}",
                        assets[j], dates[t]
                    )))
                }
            };
            values.push(v);
        }
    }
    PriceSeries::new(assets, dates, DMatrix::from_row_slice(rows, n, &values))
}

/// Per-period log returns; row `t` is `ln(p[t+1] / p[t])`.
pub fn log_returns(series: &PriceSeries) -> Result<DMatrix<f64>, DataError> {
    let p = series.prices();
    if p.nrows() < 2 {
        return Err(DataError::Insufficient(format!(
            "log returns need at least 2 dates, have {}",
            p.nrows()
        )));
    }
    Ok(DMatrix::from_fn(p.nrows() - 1, p.ncols(), |t, n| {
        (p[(t + 1, n)] / p[(t, n)]).ln()
    }))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Period {
    Daily,
    Yearly,
}

impl Period {
    pub fn as_str(self) -> &'static str {
        match self {
            Period::Daily => "daily",
            Period::Yearly => "yearly",
        }
    }
}

/// Expected log-returns and their covariance for one trading date.
#[derive(Debug, Clone, PartialEq)]
pub struct MarketInputs {
    mu: DVector<f64>,
    sigma: DMatrix<f64>,
    period: Period,
}

impl MarketInputs {
    pub fn new(mu: DVector<f64>, sigma: DMatrix<f64>, period: Period) -> Result<Self, DataError> {
        let n = mu.len();
        if sigma.nrows() != n || sigma.ncols() != n {
            return Err(DataError::Dimension(format!(
                "mu has {n} entries but covariance is {}x{}",
                sigma.nrows(),
                sigma.ncols()
            )));
        }
        if mu.iter().chain(sigma.iter()).any(|v| !v.is_finite()) {
            return Err(DataError::Validation("non-finite market input".into()));
        }
        for i in 0..n {
            for j in 0..i {
                if (sigma[(i, j)] - sigma[(j, i)]).abs() > SYMMETRY_TOL {
                    return Err(DataError::Validation(format!(
                        "covariance not symmetric at ({i},{j})"
                    )));
                }
            }
        }
        Ok(Self { mu, sigma, period })
    }

    pub fn mu(&self) -> &DVector<f64> {
        &self.mu
    }

    pub fn sigma(&self) -> &DMatrix<f64> {
        &self.sigma
    }

    pub fn period(&self) -> Period {
        self.period
    }

    pub fn n_assets(&self) -> usize {
        self.mu.len()
    }

    /// Smallest and largest eigenvalue of the covariance matrix.
    pub fn eigen_range(&self) -> (f64, f64) {
        if self.sigma.is_empty() {
            return (0.0, 0.0);
        }
        let eig = self.sigma.clone().symmetric_eigenvalues();
        (eig.min(), eig.max())
    }

    /// Whether the covariance is positive semidefinite up to
    /// `-1e-10 * largest eigenvalue`.
    pub fn is_psd(&self) -> bool {
        let (lo, hi) = self.eigen_range();
        lo >= -PSD_REL_TOL * hi.abs().max(f64::MIN_POSITIVE)
    }
}

/// Mean and unbiased covariance over returns rows `as_of - window .. as_of`.
pub fn estimate_inputs(
    returns: &DMatrix<f64>,
    window: usize,
    as_of: usize,
) -> Result<MarketInputs, DataError> {
    if window < 2 {
        return Err(DataError::Insufficient(format!(
            "covariance window must be at least 2, got {window}"
        )));
    }
    if as_of > returns.nrows() || window > as_of {
        return Err(DataError::Insufficient(format!(
            "window {window} ending at row {as_of} exceeds the {} available return rows",
            as_of.min(returns.nrows())
        )));
    }
    let block = returns.rows(as_of - window, window);
    let n = returns.ncols();
    let w = window as f64;
    let mu = DVector::from_fn(n, |j, _| block.column(j).sum() / w);
    let centered = DMatrix::from_fn(window, n, |t, j| block[(t, j)] - mu[j]);
    let mut sigma = centered.transpose() * &centered / (w - 1.0);
    // exact mirroring
    for i in 0..n {
        for j in 0..i {
            let v = 0.5 * (sigma[(i, j)] + sigma[(j, i)]);
            sigma[(i, j)] = v;
            sigma[(j, i)] = v;
        }
    }
    MarketInputs::new(mu, sigma, Period::Daily)
}

/// Scales per-period inputs to yearly units. Yearly inputs pass through.
pub fn annualize(inputs: &MarketInputs, periods_per_year: u32) -> MarketInputs {
    if inputs.period == Period::Yearly {
        log::warn!("inputs already yearly; annualize is a no-op");
        return inputs.clone();
    }
    let f = f64::from(periods_per_year);
    MarketInputs {
        mu: &inputs.mu * f,
        sigma: &inputs.sigma * f,
        period: Period::Yearly,
    }
}
