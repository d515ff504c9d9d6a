//! Portfolio metrics, baselines and plot-data files.

use nalgebra::DVector;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use thiserror::Error;

use crate::encoding::{weights_from_units, BandSpec, EncodingError, EncodingSpec};
use crate::market_data::{MarketInputs, PriceSeries};
use crate::qubo::{ModelConfig, ModelError};

/// Redraws allowed per cloud sample.
const CLOUD_ATTEMPTS: usize = 100;

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Encoding(#[from] EncodingError),
    #[error("infeasible: {0}")]
    Infeasible(String),
    #[error("date range: {0}")]
    DateRange(String),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Portfolio {
    pub weights: Vec<f64>,
    /// `mu . w`
    pub expected_return: f64,
    /// `sqrt(w' Σ w)`
    pub volatility: f64,
    /// `Σ w - 1`
    pub budget_residual: f64,
    /// `volatility - sigma_target`, in the units of the market inputs.
    pub vol_gap: f64,
    pub band_ok: bool,
}

impl Portfolio {
    pub fn variance(&self) -> f64 {
        self.volatility * self.volatility
    }
}

pub fn evaluate(
    weights: &[f64],
    inputs: &MarketInputs,
    cfg: &ModelConfig,
    bands: &BandSpec,
) -> Result<Portfolio, EvalError> {
    let n = inputs.n_assets();
    if weights.len() != n || bands.len() != n {
        return Err(EvalError::Dimension(format!(
            "{} weights and {} bands for {n} assets",
            weights.len(),
            bands.len()
        )));
    }
    let w = DVector::from_column_slice(weights);
    let variance = w.dot(&(inputs.sigma() * &w)).max(0.0);
    let volatility = variance.sqrt();
    Ok(Portfolio {
        weights: weights.to_vec(),
        expected_return: inputs.mu().dot(&w),
        volatility,
        budget_residual: w.sum() - 1.0,
        vol_gap: volatility - cfg.sigma_target,
        band_ok: bands.contains(weights),
    })
}

/// Target unit total `K (1 - Σ w_min)`, rounded to whole units.
fn budget_units(spec: &EncodingSpec, bands: &BandSpec) -> i64 {
    let k = spec.k() as f64;
    (k * (1.0 - bands.w_min().iter().sum::<f64>())).round() as i64
}

/// Moves unit counts one step at a time toward `target`, picking a random
/// asset with room each step. `None` when the target is out of reach.
fn repair_units(units: &mut [u64], deltas: &[u64], target: i64, rng: &mut ChaCha8Rng) -> Option<()> {
    let mut total: i64 = units.iter().map(|&u| u as i64).sum();
    let mut order: Vec<usize> = (0..units.len()).collect();
    while total != target {
        let up = total < target;
        order.shuffle(rng);
        let pick = order
            .iter()
            .copied()
            .find(|&n| if up { units[n] < deltas[n] } else { units[n] > 0 })?;
        if up {
            units[pick] += 1;
            total += 1;
        } else {
            units[pick] -= 1;
            total -= 1;
        }
    }
    Some(())
}

/// Random feasible portfolios: uniform random bits, decoded, then repaired
/// toward the full budget without leaving the bands. Sample `i` uses RNG
/// stream `i` of `seed`.
pub fn random_cloud(
    count: usize,
    bands: &BandSpec,
    spec: &EncodingSpec,
    inputs: &MarketInputs,
    cfg: &ModelConfig,
    seed: u64,
) -> Result<Vec<Portfolio>, EvalError> {
    if spec.assets().len() != bands.len() {
        return Err(EvalError::Dimension("encoding and bands differ in asset count".into()));
    }
    let target = budget_units(spec, bands);
    let deltas: Vec<u64> = spec.assets().iter().map(|a| a.delta).collect();
    (0..count)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(i as u64);
            for _ in 0..CLOUD_ATTEMPTS {
                let bits: Vec<bool> = (0..spec.total_bits()).map(|_| rng.random()).collect();
                let mut units = spec.decode_units(&bits)?;
                if repair_units(&mut units, &deltas, target, &mut rng).is_some() {
                    let w = weights_from_units(&units, spec, bands);
                    return evaluate(&w, inputs, cfg, bands);
                }
            }
            Err(EvalError::Infeasible(format!(
                "no budget-feasible portfolio after {} attempts",
                CLOUD_ATTEMPTS * count
            )))
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum EwiMode {
    /// Equal weights at the start, held without trading.
    #[default]
    BuyAndHold,
    /// Equal weights restored every period.
    Rebalanced,
}

/// Total return of the equally weighted portfolio between two date indices.
pub fn ewi_return(series: &PriceSeries, start: usize, end: usize, mode: EwiMode) -> Result<f64, EvalError> {
    let rows = series.n_dates();
    if start >= end || end >= rows {
        return Err(EvalError::DateRange(format!(
            "need start < end < {rows}, got {start}..{end}"
        )));
    }
    let p = series.prices();
    let n = series.n_assets() as f64;
    Ok(match mode {
        EwiMode::BuyAndHold => {
            (0..series.n_assets())
                .map(|j| p[(end, j)] / p[(start, j)])
                .sum::<f64>()
                / n
                - 1.0
        }
        EwiMode::Rebalanced => {
            (start..end)
                .map(|t| {
                    (0..series.n_assets())
                        .map(|j| p[(t + 1, j)] / p[(t, j)])
                        .sum::<f64>()
                        / n
                })
                .product::<f64>()
                - 1.0
        }
    })
}

/// One point of a return/volatility scatter.
#[derive(Debug, Clone, PartialEq)]
pub struct FrontierRow {
    pub volatility: f64,
    pub expected_return: f64,
    pub label: String,
}

fn finish(writer: csv::Writer<Vec<u8>>) -> Result<String, EvalError> {
    let bytes = writer
        .into_inner()
        .map_err(|e| EvalError::Csv(e.into_error().into()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

/// `frontier.csv`: `volatility,return,label`.
pub fn frontier_csv(rows: &[FrontierRow]) -> Result<String, EvalError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["volatility", "return", "label"])?;
    for r in rows {
        w.write_record([
            r.volatility.to_string(),
            r.expected_return.to_string(),
            r.label.clone(),
        ])?;
    }
    finish(w)
}

/// `composition.csv`: `asset,sector,weight,w_min,w_max`.
pub fn composition_csv(portfolio: &Portfolio, bands: &BandSpec) -> Result<String, EvalError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["asset", "sector", "weight", "w_min", "w_max"])?;
    for ((name, band), weight) in bands.assets().iter().zip(bands.bands()).zip(&portfolio.weights) {
        w.write_record([
            name.clone(),
            band.sector.clone().unwrap_or_default(),
            weight.to_string(),
            band.w_min.to_string(),
            band.w_max.to_string(),
        ])?;
    }
    finish(w)
}

/// `sweep.csv`: `realized_vol,constraint_value`.
pub fn sweep_csv(points: &[(f64, f64)]) -> Result<String, EvalError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["realized_vol", "constraint_value"])?;
    for (vol, value) in points {
        w.write_record([vol.to_string(), value.to_string()])?;
    }
    finish(w)
}
