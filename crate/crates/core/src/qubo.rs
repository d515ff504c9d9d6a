//! Cost function and its compilation to a quadratic form over bits.
//!
//! The cost of a weight vector `w` is
//!
//! ```text
//! H(w) = -mu.w + gamma/2 w'Σw + rho (Σ_n w_n - 1)^2 + lambda (k'Σw - sigma_t^2)^2
//! ```
//!
//! where the last term is the linearized target-volatility penalty (`k` is a
//! fixed vector of linear weights, so the term stays quadratic in `w`). The
//! volatility multiplier is called `lambda_vol` here to keep it apart from the
//! return vector `mu`.
//!
//! Every term is a quadratic polynomial `w'Pw + l.w + c`. Substituting the
//! affine bit encoding `w = w_min + A x` gives the QUBO directly, with linear
//! bit terms folded onto the diagonal since `x_i^2 = x_i`.

use std::fmt::Write as _;

use nalgebra::{DMatrix, DVector};
use thiserror::Error;

use crate::encoding::{BandSpec, BitLabel, EncodingSpec};
use crate::market_data::MarketInputs;

#[derive(Debug, Error, PartialEq)]
pub enum ModelError {
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("invalid model parameter: {0}")]
    Invalid(String),
    #[error("volatility constraint is disabled")]
    VolConstraintDisabled,
    #[error("non-finite QUBO coefficient at ({0}, {1})")]
    NonFinite(usize, usize),
    #[error("QUBO file line {line}: {message}")]
    Format { line: usize, message: String },
}

/// Multipliers and targets of the cost function.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelConfig {
    pub gamma: f64,
    pub rho: f64,
    pub lambda_vol: f64,
    /// Target volatility in the same period units as the market inputs.
    /// Squared internally.
    pub sigma_target: f64,
    pub k_weights: Vec<f64>,
    pub vol_constraint: bool,
}

impl ModelConfig {
    /// Plain mean-variance model with uniform linear weights and no penalties.
    pub fn new(n_assets: usize, gamma: f64) -> Self {
        Self {
            gamma,
            rho: 0.0,
            lambda_vol: 0.0,
            sigma_target: 0.0,
            k_weights: default_linear_weights(n_assets),
            vol_constraint: false,
        }
    }

    pub fn with_target(mut self, sigma_target: f64, lambda_vol: f64) -> Self {
        self.sigma_target = sigma_target;
        self.lambda_vol = lambda_vol;
        self.vol_constraint = true;
        self
    }

    pub fn validate(&self, n_assets: usize) -> Result<(), ModelError> {
        for (name, v) in [
            ("gamma", self.gamma),
            ("rho", self.rho),
            ("lambda_vol", self.lambda_vol),
            ("sigma_target", self.sigma_target),
        ] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(ModelError::Invalid(format!("{name} = {v} must be finite and >= 0")));
            }
        }
        if self.k_weights.len() != n_assets {
            return Err(ModelError::Dimension(format!(
                "{} linear weights for {n_assets} assets",
                self.k_weights.len()
            )));
        }
        if self.k_weights.iter().any(|k| !k.is_finite()) {
            return Err(ModelError::Invalid("non-finite linear weight".into()));
        }
        Ok(())
    }

    /// Multiplier of the volatility penalty, or zero when disabled.
    fn effective_lambda(&self) -> f64 {
        if self.vol_constraint {
            self.lambda_vol
        } else {
            0.0
        }
    }
}

/// Default budget multiplier: ten times the largest change in the return and
/// risk terms that one unit of `1/K` can buy, measured against the `1/K^2`
/// cost of a one-unit budget miss.
pub fn default_rho(inputs: &MarketInputs, gamma: f64, k_units: u64) -> f64 {
    let mu_max = inputs.mu().amax();
    let sigma_max = inputs.sigma().amax();
    let scale = mu_max + gamma * sigma_max;
    let scale = if scale > 0.0 { scale } else { 1.0 };
    10.0 * k_units as f64 * scale
}

/// Default volatility multiplier `rho / sigma_target^4`.
pub fn default_lambda_vol(rho: f64, sigma_target: f64) -> Result<f64, ModelError> {
    if sigma_target.is_nan() || sigma_target <= 0.0 {
        return Err(ModelError::Invalid(
            "a positive sigma_target is needed for the default lambda_vol".into(),
        ));
    }
    Ok(rho / sigma_target.powi(4))
}

/// Uniform linear weights `1/N`.
pub fn default_linear_weights(n_assets: usize) -> Vec<f64> {
    vec![1.0 / n_assets as f64; n_assets]
}

/// One damped fixed-point step `k' = (1 - damping) k + damping w`.
pub fn refine_linear_weights(k: &[f64], weights: &[f64], damping: f64) -> Vec<f64> {
    assert_eq!(k.len(), weights.len(), "linear weights and portfolio differ in length");
    assert!((0.0..=1.0).contains(&damping), "damping {damping} outside [0, 1]");
    k.iter()
        .zip(weights)
        .map(|(k, w)| (1.0 - damping) * k + damping * w)
        .collect()
}

fn check_dims(weights: &[f64], inputs: &MarketInputs, cfg: &ModelConfig) -> Result<(), ModelError> {
    let n = inputs.n_assets();
    if weights.len() != n {
        return Err(ModelError::Dimension(format!(
            "{} weights for {n} assets",
            weights.len()
        )));
    }
    cfg.validate(n)
}

/// `k'Σw`, the linearized portfolio variance.
pub fn linearized_variance(weights: &[f64], inputs: &MarketInputs, k: &[f64]) -> f64 {
    let w = DVector::from_column_slice(weights);
    let k = DVector::from_column_slice(k);
    k.dot(&(inputs.sigma() * w))
}

/// Cost of a weight vector evaluated directly in weight space.
pub fn cost_direct(weights: &[f64], inputs: &MarketInputs, cfg: &ModelConfig) -> Result<f64, ModelError> {
    check_dims(weights, inputs, cfg)?;
    let w = DVector::from_column_slice(weights);
    let sigma_w = inputs.sigma() * &w;
    let mut h = -inputs.mu().dot(&w) + 0.5 * cfg.gamma * w.dot(&sigma_w);
    let budget = w.sum() - 1.0;
    h += cfg.rho * budget * budget;
    if cfg.vol_constraint {
        let gap = DVector::from_column_slice(&cfg.k_weights).dot(&sigma_w) - cfg.sigma_target.powi(2);
        h += cfg.lambda_vol * gap * gap;
    }
    Ok(h)
}

/// The volatility penalty `lambda (k'Σw - sigma_t^2)^2`.
pub fn constraint_value(weights: &[f64], inputs: &MarketInputs, cfg: &ModelConfig) -> Result<f64, ModelError> {
    if !cfg.vol_constraint {
        return Err(ModelError::VolConstraintDisabled);
    }
    check_dims(weights, inputs, cfg)?;
    let gap = linearized_variance(weights, inputs, &cfg.k_weights) - cfg.sigma_target.powi(2);
    Ok(cfg.lambda_vol * gap * gap)
}

/// Symmetric QUBO: energy is `x'Qx + offset`.
#[derive(Debug, Clone, PartialEq)]
pub struct Qubo {
    matrix: DMatrix<f64>,
    offset: f64,
    labels: Vec<BitLabel>,
}

impl Qubo {
    /// Wraps a symmetric matrix. Labels are left empty.
    pub fn from_matrix(matrix: DMatrix<f64>, offset: f64) -> Result<Self, ModelError> {
        if !matrix.is_square() {
            return Err(ModelError::Dimension("QUBO matrix must be square".into()));
        }
        let n = matrix.nrows();
        for i in 0..n {
            for j in 0..n {
                if !matrix[(i, j)].is_finite() {
                    return Err(ModelError::NonFinite(i, j));
                }
                if j < i && (matrix[(i, j)] - matrix[(j, i)]).abs() > 1e-12 {
                    return Err(ModelError::Invalid(format!("matrix not symmetric at ({i}, {j})")));
                }
            }
        }
        if !offset.is_finite() {
            return Err(ModelError::Invalid("non-finite offset".into()));
        }
        Ok(Self {
            matrix,
            offset,
            labels: Vec::new(),
        })
    }

    pub fn n_bits(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn offset(&self) -> f64 {
        self.offset
    }

    pub fn labels(&self) -> &[BitLabel] {
        &self.labels
    }

    /// `x'Qx + offset`.
    pub fn energy(&self, bits: &[bool]) -> f64 {
        assert_eq!(bits.len(), self.n_bits());
        let ones: Vec<usize> = bits.iter().enumerate().filter(|(_, &b)| b).map(|(i, _)| i).collect();
        let mut e = 0.0;
        for &i in &ones {
            let col = self.matrix.column(i);
            for &j in &ones {
                e += col[j];
            }
        }
        e + self.offset
    }

    /// Upper-triangular triplets `(i, j, v)` with `i <= j`, off-diagonal
    /// entries doubled, zeros skipped.
    pub fn upper_triangular(&self) -> Vec<(usize, usize, f64)> {
        let n = self.n_bits();
        let mut out = Vec::new();
        for i in 0..n {
            for j in i..n {
                let v = if i == j {
                    self.matrix[(i, i)]
                } else {
                    2.0 * self.matrix[(i, j)]
                };
                if v != 0.0 {
                    out.push((i, j, v));
                }
            }
        }
        out
    }

    /// Sparse triplet text: `# bits=<B> offset=<o>` then `i j value` lines.
    pub fn to_triplets(&self) -> String {
        let mut out = format!("# bits={} offset={}\n", self.n_bits(), self.offset);
        for (i, j, v) in self.upper_triangular() {
            let _ = writeln!(out, "{i} {j} {v}");
        }
        out
    }

    pub fn from_triplets(text: &str) -> Result<Self, ModelError> {
        let mut lines = text.lines().enumerate();
        let (_, header) = lines.next().ok_or(ModelError::Format {
            line: 1,
            message: "empty file".into(),
        })?;
        let bad_header = || ModelError::Format {
            line: 1,
            message: format!("expected `# bits=<B> offset=<o>`, got `{header}`"),
        };
        let mut bits = None;
        let mut offset = None;
        for tok in header.trim_start_matches('#').split_whitespace() {
            if let Some(v) = tok.strip_prefix("bits=") {
                bits = v.parse::<usize>().ok();
            } else if let Some(v) = tok.strip_prefix("offset=") {
                offset = v.parse::<f64>().ok();
            }
        }
        let (n, offset) = bits.zip(offset).ok_or_else(bad_header)?;
        let mut matrix = DMatrix::zeros(n, n);
        for (idx, line) in lines {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let err = |message: String| ModelError::Format { line: idx + 1, message };
            let parts: Vec<&str> = line.split_whitespace().collect();
            if parts.len() != 3 {
                return Err(err(format!("expected `i j value`, got `{line}`")));
            }
            let i: usize = parts[0].parse().map_err(|_| err(format!("bad index `{}`", parts[0])))?;
            let j: usize = parts[1].parse().map_err(|_| err(format!("bad index `{}`", parts[1])))?;
            let v: f64 = parts[2].parse().map_err(|_| err(format!("bad value `{}`", parts[2])))?;
            if i >= n || j >= n {
                return Err(err(format!("index ({i}, {j}) outside {n} bits")));
            }
            if i == j {
                matrix[(i, i)] += v;
            } else {
                matrix[(i, j)] += 0.5 * v;
                matrix[(j, i)] += 0.5 * v;
            }
        }
        Self::from_matrix(matrix, offset)
    }
}

/// Compiles the cost function over the bit encoding.
///
/// For every bit vector `x`, `energy(x) == cost_direct(decode(x))` up to
/// rounding.
pub fn build_qubo(
    inputs: &MarketInputs,
    cfg: &ModelConfig,
    spec: &EncodingSpec,
    bands: &BandSpec,
) -> Result<Qubo, ModelError> {
    let n = inputs.n_assets();
    if spec.assets().len() != n || bands.len() != n {
        return Err(ModelError::Dimension(format!(
            "{n} assets in market inputs, {} in encoding, {} in bands",
            spec.assets().len(),
            bands.len()
        )));
    }
    cfg.validate(n)?;

    let sigma = inputs.sigma();
    let lambda = cfg.effective_lambda();
    let target_var = cfg.sigma_target.powi(2);
    let sk = sigma * DVector::from_column_slice(&cfg.k_weights);

    // H(w) = w'Pw + l.w + c
    let p = DMatrix::from_fn(n, n, |i, j| {
        0.5 * cfg.gamma * sigma[(i, j)] + cfg.rho + lambda * sk[i] * sk[j]
    });
    let l = DVector::from_fn(n, |i, _| {
        -inputs.mu()[i] - 2.0 * cfg.rho - 2.0 * lambda * target_var * sk[i]
    });
    let c = cfg.rho + lambda * target_var * target_var;

    let w0 = DVector::from_vec(bands.w_min());
    let p_w0 = &p * &w0;
    let offset = w0.dot(&p_w0) + l.dot(&w0) + c;

    let kf = spec.k() as f64;
    let coeffs: Vec<(usize, f64)> = spec
        .bit_coefficients()
        .into_iter()
        .map(|(asset, units)| (asset, units as f64 / kf))
        .collect();
    let b = coeffs.len();
    let mut q = DMatrix::zeros(b, b);
    for (i, &(ni, ai)) in coeffs.iter().enumerate() {
        q[(i, i)] = ai * ai * p[(ni, ni)] + ai * (2.0 * p_w0[ni] + l[ni]);
        for (j, &(nj, aj)) in coeffs.iter().enumerate().take(i) {
            let v = ai * aj * p[(ni, nj)];
            q[(i, j)] = v;
            q[(j, i)] = v;
        }
    }
    for j in 0..b {
        for i in 0..b {
            if !q[(i, j)].is_finite() {
                return Err(ModelError::NonFinite(i, j));
            }
        }
    }
    if !offset.is_finite() {
        return Err(ModelError::Invalid("non-finite offset".into()));
    }
    Ok(Qubo {
        matrix: q,
        offset,
        labels: spec.labels(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::encoding::{decode, make_encoding, AssetBand};
    use crate::market_data::Period;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn inputs(mu: &[f64], sigma: &[f64]) -> MarketInputs {
        let n = mu.len();
        MarketInputs::new(
            DVector::from_column_slice(mu),
            DMatrix::from_row_slice(n, n, sigma),
            Period::Yearly,
        )
        .unwrap()
    }

    fn names(n: usize) -> Vec<String> {
        (0..n).map(|i| format!("A{i}")).collect()
    }

    #[test]
    fn pure_linear_cost() {
        let m = inputs(&[0.1, 0.2], &[0.3, 0.1, 0.1, 0.4]);
        let cfg = ModelConfig::new(2, 0.0);
        let h = cost_direct(&[0.5, 0.5], &m, &cfg).unwrap();
        assert!((h + 0.15).abs() < 1e-15);
    }

    #[test]
    fn risk_only_cost_with_budget_met() {
        let m = inputs(&[0.0, 0.0], &[1.0, 0.0, 0.0, 1.0]);
        for rho in [0.0, 3.0, 1e6] {
            let mut cfg = ModelConfig::new(2, 2.0);
            cfg.rho = rho;
            assert_eq!(cost_direct(&[1.0, 0.0], &m, &cfg).unwrap(), 1.0);
        }
        assert!(matches!(
            cost_direct(&[1.0], &m, &ModelConfig::new(2, 2.0)),
            Err(ModelError::Dimension(_))
        ));
    }

    /// Term-by-term polynomial expansion written with explicit sums.
    fn expanded_cost(w: &[f64], mu: &[f64], s: &[Vec<f64>], cfg: &ModelConfig) -> f64 {
        let n = w.len();
        let mut h = 0.0;
        for i in 0..n {
            h -= mu[i] * w[i];
            for j in 0..n {
                h += 0.5 * cfg.gamma * s[i][j] * w[i] * w[j];
                h += cfg.rho * w[i] * w[j];
            }
            h -= 2.0 * cfg.rho * w[i];
        }
        h += cfg.rho;
        if cfg.vol_constraint {
            let t2 = cfg.sigma_target * cfg.sigma_target;
            for i in 0..n {
                for j in 0..n {
                    for a in 0..n {
                        for b in 0..n {
                            h += cfg.lambda_vol
                                * cfg.k_weights[a] * s[a][i] * w[i]
                                * cfg.k_weights[b] * s[b][j] * w[j];
                        }
                    }
                }
            }
            for i in 0..n {
                for a in 0..n {
                    h -= 2.0 * cfg.lambda_vol * t2 * cfg.k_weights[a] * s[a][i] * w[i];
                }
            }
            h += cfg.lambda_vol * t2 * t2;
        }
        h
    }

    #[test]
    fn cost_matches_expansion() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..20 {
            let n = 4;
            let f: Vec<f64> = (0..n * n).map(|_| rng.random_range(-0.3..0.3)).collect();
            let mut s = vec![vec![0.0; n]; n];
            for i in 0..n {
                for j in 0..n {
                    s[i][j] = (0..n).map(|t| f[i * n + t] * f[j * n + t]).sum();
                }
            }
            let mu: Vec<f64> = (0..n).map(|_| rng.random_range(-0.2..0.3)).collect();
            let flat: Vec<f64> = s.iter().flatten().copied().collect();
            let m = inputs(&mu, &flat);
            let mut cfg = ModelConfig::new(n, rng.random_range(0.0..5.0))
                .with_target(rng.random_range(0.05..0.3), rng.random_range(0.0..50.0));
            cfg.rho = rng.random_range(0.0..10.0);
            cfg.k_weights = (0..n).map(|_| rng.random_range(0.0..0.5)).collect();
            let w: Vec<f64> = (0..n).map(|_| rng.random_range(0.0..0.6)).collect();
            let direct = cost_direct(&w, &m, &cfg).unwrap();
            let expanded = expanded_cost(&w, &mu, &s, &cfg);
            assert!((direct - expanded).abs() <= 1e-12 * (1.0 + expanded.abs()), "{direct} vs {expanded}");
        }
    }

    #[test]
    fn zero_model_gives_zero_qubo() {
        let m = inputs(&[0.0, 0.0], &[0.1, 0.02, 0.02, 0.2]);
        let bands = BandSpec::uniform(names(2), 0.0, 0.6).unwrap();
        let spec = make_encoding(&bands, 10).unwrap();
        let q = build_qubo(&m, &ModelConfig::new(2, 0.0), &spec, &bands).unwrap();
        assert!(q.matrix().iter().all(|&v| v == 0.0));
        assert_eq!(q.offset(), 0.0);
        assert_eq!(q.labels().len(), spec.total_bits());
    }

    #[test]
    fn single_bit_hand_expansion() {
        // one asset with a one-unit band: w = x / K, H = -x / K
        let m = inputs(&[1.0], &[0.0]);
        let bands = BandSpec::new(names(1), vec![AssetBand::new(0.9, 1.0)]).unwrap();
        let spec = make_encoding(&bands, 10).unwrap();
        assert_eq!(spec.total_bits(), 1);
        let q = build_qubo(&m, &ModelConfig::new(1, 0.0), &spec, &bands).unwrap();
        assert!((q.matrix()[(0, 0)] + 0.1).abs() < 1e-15);
        assert!((q.offset() + 0.9).abs() < 1e-15);
    }

    #[test]
    fn qubo_energy_equals_direct_cost() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let n = 5;
        let f: Vec<f64> = (0..n * n).map(|_| rng.random_range(-0.3..0.3)).collect();
        let sigma = DMatrix::from_fn(n, n, |i, j| (0..n).map(|t| f[i * n + t] * f[j * n + t]).sum());
        let mu = DVector::from_fn(n, |_, _| rng.random_range(-0.1..0.3));
        let m = MarketInputs::new(mu, sigma, Period::Yearly).unwrap();
        let bands = BandSpec::uniform(names(n), 0.05, 0.4).unwrap();
        let spec = make_encoding(&bands, 100).unwrap();
        let mut cfg = ModelConfig::new(n, 1.5).with_target(0.12, 200.0);
        cfg.rho = 7.0;
        let q = build_qubo(&m, &cfg, &spec, &bands).unwrap();
        assert_eq!(q.matrix().clone(), q.matrix().transpose());
        for _ in 0..1000 {
            let bits: Vec<bool> = (0..spec.total_bits()).map(|_| rng.random()).collect();
            let w = decode(&bits, &spec, &bands).unwrap();
            let direct = cost_direct(&w, &m, &cfg).unwrap();
            assert!((q.energy(&bits) - direct).abs() <= 1e-9 * (1.0 + q.offset().abs()));
        }
    }

    #[test]
    fn linear_weight_helpers() {
        assert_eq!(default_linear_weights(4), vec![0.25; 4]);
        assert_eq!(default_linear_weights(1), vec![1.0]);
        for n in 1..50 {
            let s: f64 = default_linear_weights(n).iter().sum();
            assert!((s - 1.0).abs() < 1e-12);
        }
        let k = [0.5, 0.5];
        assert_eq!(refine_linear_weights(&k, &[1.0, 0.0], 0.0), k.to_vec());
        assert_eq!(refine_linear_weights(&k, &[1.0, 0.0], 1.0), vec![1.0, 0.0]);
        assert_eq!(refine_linear_weights(&k, &[1.0, 0.0], 0.5), vec![0.75, 0.25]);
    }

    #[test]
    fn constraint_value_examples() {
        let m = inputs(&[0.0, 0.0], &[0.04, 0.0, 0.0, 0.01]);
        let mut cfg = ModelConfig::new(2, 0.0).with_target(0.0, 1.0);
        // k'Σw with k = (1/2, 1/2), w = (0.5, 0.5): 0.5 * (0.02 + 0.005) = 0.0125
        cfg.sigma_target = 0.0125f64.sqrt();
        assert!(constraint_value(&[0.5, 0.5], &m, &cfg).unwrap().abs() < 1e-30);

        cfg.sigma_target = (0.0125f64 - 0.01).sqrt();
        let v = constraint_value(&[0.5, 0.5], &m, &cfg).unwrap();
        assert!((v - 1e-4).abs() < 1e-15);

        cfg.vol_constraint = false;
        assert_eq!(
            constraint_value(&[0.5, 0.5], &m, &cfg),
            Err(ModelError::VolConstraintDisabled)
        );
    }

    #[test]
    fn default_multipliers() {
        let m = inputs(&[0.1, -0.3], &[0.04, 0.01, 0.01, 0.09]);
        let rho = default_rho(&m, 2.0, 100);
        assert!((rho - 10.0 * 100.0 * (0.3 + 2.0 * 0.09)).abs() < 1e-9);
        assert!((default_lambda_vol(rho, 0.1).unwrap() - rho * 1e4).abs() < 1e-6 * rho * 1e4);
        assert!(default_lambda_vol(rho, 0.0).is_err());
    }

    #[test]
    fn rejects_bad_config() {
        let m = inputs(&[0.1], &[0.04]);
        let bands = BandSpec::uniform(names(1), 0.0, 1.0).unwrap();
        let spec = make_encoding(&bands, 4).unwrap();
        let mut cfg = ModelConfig::new(1, -1.0);
        assert!(matches!(build_qubo(&m, &cfg, &spec, &bands), Err(ModelError::Invalid(_))));
        cfg.gamma = 1.0;
        cfg.k_weights = vec![0.5, 0.5];
        assert!(matches!(build_qubo(&m, &cfg, &spec, &bands), Err(ModelError::Dimension(_))));
        cfg.k_weights = vec![1.0];
        cfg.rho = f64::INFINITY;
        assert!(build_qubo(&m, &cfg, &spec, &bands).is_err());
    }

    #[test]
    fn triplet_round_trip() {
        let m = DMatrix::from_row_slice(3, 3, &[-1.0, 0.5, 0.0, 0.5, 2.0, -0.25, 0.0, -0.25, 0.125]);
        let q = Qubo::from_matrix(m, 1.5).unwrap();
        let text = q.to_triplets();
        assert!(text.starts_with("# bits=3 offset=1.5\n"));
        assert!(text.contains("\n0 1 1\n"));
        let back = Qubo::from_triplets(&text).unwrap();
        assert_eq!(back.matrix(), q.matrix());
        assert_eq!(back.offset(), q.offset());
        assert!(Qubo::from_triplets("bits=3\n").is_err());
        assert!(Qubo::from_triplets("# bits=2 offset=0\n0 5 1.0\n").is_err());
    }

    #[test]
    fn energy_of_small_matrix() {
        let q = Qubo::from_matrix(DMatrix::from_row_slice(2, 2, &[1.0, -2.0, -2.0, 3.0]), 0.5).unwrap();
        assert_eq!(q.energy(&[false, false]), 0.5);
        assert_eq!(q.energy(&[true, false]), 1.5);
        assert_eq!(q.energy(&[true, true]), 1.0 - 4.0 + 3.0 + 0.5);
        assert!(Qubo::from_matrix(DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 0.0, 1.0]), 0.0).is_err());
    }
}
