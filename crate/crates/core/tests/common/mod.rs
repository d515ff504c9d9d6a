//! Random problem generators shared by the integration tests.
#![allow(dead_code)]

use bandqubo::encoding::AssetBand;
use bandqubo::market_data::{MarketInputs, Period};
use bandqubo::{make_encoding, BandSpec, EncodingSpec, ModelConfig};
use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub fn names(n: usize) -> Vec<String> {
    (0..n).map(|i| format!("A{i}")).collect()
}

/// Random covariance `F F^T / n` and returns on a yearly-like scale.
pub fn random_inputs(rng: &mut ChaCha8Rng, n: usize) -> MarketInputs {
    let f = DMatrix::from_fn(n, n + 2, |_, _| rng.random_range(-0.3..0.3));
    let sigma = &f * f.transpose() / n as f64;
    let mu = DVector::from_fn(n, |_, _| rng.random_range(-0.1..0.3));
    MarketInputs::new(mu, sigma, Period::Yearly).unwrap()
}

/// Budget-feasible integral bands with at most `max_bits` bits in total.
/// Retries until one fits.
pub fn random_bands(
    rng: &mut ChaCha8Rng,
    n: usize,
    k: u64,
    max_bits: usize,
) -> (BandSpec, EncodingSpec) {
    loop {
        let mut bands = Vec::with_capacity(n);
        for _ in 0..n {
            let lo = rng.random_range(0..=k / (2 * n as u64).max(1));
            let hi = rng.random_range(lo..=k);
            bands.push(AssetBand::new(lo as f64 / k as f64, hi as f64 / k as f64));
        }
        let Ok(spec) = BandSpec::new(names(n), bands) else {
            continue;
        };
        let enc = make_encoding(&spec, k).unwrap();
        if enc.total_bits() <= max_bits && enc.total_bits() > 0 {
            return (spec, enc);
        }
    }
}

/// Every cost term switched on with random positive parameters.
pub fn full_model(rng: &mut ChaCha8Rng, n: usize) -> ModelConfig {
    let mut cfg = ModelConfig::new(n, rng.random_range(0.1..5.0))
        .with_target(rng.random_range(0.05..0.3), rng.random_range(0.5..50.0));
    cfg.rho = rng.random_range(0.5..20.0);
    cfg.k_weights = (0..n).map(|_| rng.random_range(0.0..1.0)).collect();
    cfg
}

pub fn random_bits(rng: &mut ChaCha8Rng, n: usize) -> Vec<bool> {
    (0..n).map(|_| rng.random()).collect()
}
