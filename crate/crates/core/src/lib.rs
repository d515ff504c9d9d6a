//! Banded, target-volatility portfolio optimization as a QUBO.
//!
//! Prices go in through [`market_data`], bands are turned into a bit
//! encoding by [`encoding`], [`qubo`] compiles the cost function, [`solver`]
//! anneals it and [`evaluator`] turns bits back into portfolios. The
//! [`experiments`] module wires these together for the command-line tool.

pub mod config;
pub mod encoding;
pub mod evaluator;
pub mod experiments;
pub mod market_data;
pub mod qubo;
pub mod solver;
pub mod synthetic;

pub use encoding::{decode, encode_nearest, make_encoding, BandSpec, EncodingSpec};
pub use evaluator::{evaluate, Portfolio};
pub use market_data::{MarketInputs, PriceSeries};
pub use qubo::{build_qubo, cost_direct, ModelConfig, Qubo};
pub use solver::{anneal, exhaustive_solve, AnnealSchedule, Solution};
