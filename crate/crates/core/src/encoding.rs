//! Investment bands and their fixed-width binary encoding.
//!
//! Asset `n` holds `w_min + u / K` of the budget, where the integer
//! `u = Σ_q 2^q x_q + M x_extra` ranges over exactly `0..=Δ` with
//! `Δ = K (w_max - w_min)`. The bit depth is the largest `n_q` with
//! `2^n_q - 1 <= Δ` and `M = Δ - (2^n_q - 1)`, so the all-ones state lands on
//! `w_max` and no bit vector can leave the band.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use thiserror::Error;

const BOUND_TOL: f64 = 1e-12;
const BUDGET_TOL: f64 = 1e-9;
const INTEGRAL_TOL: f64 = 1e-9;

#[derive(Debug, Error, PartialEq)]
pub enum EncodingError {
    #[error("invalid band for {asset}: {reason}")]
    InvalidBand { asset: String, reason: String },
    #[error("infeasible bands: {0}")]
    Infeasible(String),
    #[error("K*(w_max - w_min) = {value} for {asset} is not an integer")]
    NonIntegral { asset: String, value: f64 },
    #[error("bit depth {depth} for {asset} needs a band of at least {need} units, have {delta}")]
    DepthTooLarge {
        asset: String,
        depth: u32,
        need: u64,
        delta: u64,
    },
    #[error("expected {expected} entries, got {got}")]
    Length { expected: usize, got: usize },
    #[error("weight {weight} for {asset} outside band [{w_min}, {w_max}]")]
    OutOfBand {
        asset: String,
        weight: f64,
        w_min: f64,
        w_max: f64,
    },
    #[error("K must be positive")]
    ZeroBudget,
    #[error("band table line {line}: {message}")]
    Table { line: usize, message: String },
}

#[derive(Debug, Clone, PartialEq)]
pub struct AssetBand {
    pub w_min: f64,
    pub w_max: f64,
    pub sector: Option<String>,
}

impl AssetBand {
    pub fn new(w_min: f64, w_max: f64) -> Self {
        Self {
            w_min,
            w_max,
            sector: None,
        }
    }

    pub fn contains(&self, w: f64) -> bool {
        w >= self.w_min - BOUND_TOL && w <= self.w_max + BOUND_TOL
    }
}

/// Per-asset `[w_min, w_max]` bands, in asset order.
#[derive(Debug, Clone, PartialEq)]
pub struct BandSpec {
    assets: Vec<String>,
    bands: Vec<AssetBand>,
}

/// A problem found when checking a band table.
#[derive(Debug, Clone, PartialEq)]
pub enum BandIssue {
    Bounds { asset: String, reason: String },
    Budget(String),
}

impl std::fmt::Display for BandIssue {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            BandIssue::Bounds { asset, reason } => write!(f, "{asset}: {reason}"),
            BandIssue::Budget(msg) => f.write_str(msg),
        }
    }
}

/// Lists every bound and budget-feasibility violation.
pub fn check_bands(assets: &[String], bands: &[AssetBand]) -> Vec<BandIssue> {
    let mut issues = Vec::new();
    for (name, b) in assets.iter().zip(bands) {
        let reason = if !(b.w_min.is_finite() && b.w_max.is_finite()) {
            Some("non-finite bound".to_string())
        } else if b.w_min < 0.0 || b.w_max > 1.0 {
            Some(format!("[{}, {}] not within [0, 1]", b.w_min, b.w_max))
        } else if b.w_min > b.w_max {
            Some(format!("w_min {} above w_max {}", b.w_min, b.w_max))
        } else {
            None
        };
        if let Some(reason) = reason {
            issues.push(BandIssue::Bounds {
                asset: name.clone(),
                reason,
            });
        }
    }
    let lo: f64 = bands.iter().map(|b| b.w_min).sum();
    let hi: f64 = bands.iter().map(|b| b.w_max).sum();
    if lo > 1.0 + BUDGET_TOL {
        issues.push(BandIssue::Budget(format!(
            "sum of w_min is {lo}, above the full budget"
        )));
    }
    if hi < 1.0 - BUDGET_TOL {
        issues.push(BandIssue::Budget(format!(
            "sum of w_max is {hi}, below the full budget"
        )));
    }
    issues
}

impl BandSpec {
    pub fn new(assets: Vec<String>, bands: Vec<AssetBand>) -> Result<Self, EncodingError> {
        if assets.len() != bands.len() {
            return Err(EncodingError::Length {
                expected: assets.len(),
                got: bands.len(),
            });
        }
        if let Some(issue) = check_bands(&assets, &bands).into_iter().next() {
            return Err(match issue {
                BandIssue::Bounds { asset, reason } => EncodingError::InvalidBand { asset, reason },
                BandIssue::Budget(msg) => EncodingError::Infeasible(msg),
            });
        }
        Ok(Self { assets, bands })
    }

    /// Same band for every asset.
    pub fn uniform(assets: Vec<String>, w_min: f64, w_max: f64) -> Result<Self, EncodingError> {
        let bands = vec![AssetBand::new(w_min, w_max); assets.len()];
        Self::new(assets, bands)
    }

    pub fn assets(&self) -> &[String] {
        &self.assets
    }

    pub fn bands(&self) -> &[AssetBand] {
        &self.bands
    }

    pub fn len(&self) -> usize {
        self.bands.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bands.is_empty()
    }

    pub fn w_min(&self) -> Vec<f64> {
        self.bands.iter().map(|b| b.w_min).collect()
    }

    /// Whether every weight lies inside its band.
    pub fn contains(&self, weights: &[f64]) -> bool {
        weights.len() == self.bands.len()
            && self.bands.iter().zip(weights).all(|(b, &w)| b.contains(w))
    }
}

/// Splits each sector band equally among the sector's members.
///
/// `membership` lists `(asset, sector)` in asset order. Entries of
/// `overrides` replace the split band for that asset.
pub fn sector_to_asset_bands(
    sector_bands: &BTreeMap<String, (f64, f64)>,
    membership: &[(String, String)],
    overrides: &BTreeMap<String, (f64, f64)>,
) -> Result<BandSpec, EncodingError> {
    let assets: Vec<String> = membership.iter().map(|(a, _)| a.clone()).collect();
    let sectors: Vec<Option<String>> = membership.iter().map(|(_, s)| Some(s.clone())).collect();
    let bands = resolve_asset_bands(&assets, &sectors, sector_bands, overrides, None)?;
    BandSpec::new(assets, bands)
}

/// Per-asset bands without the budget check. Precedence: an explicit
/// override, then the equal share of the asset's sector band, then `default`.
pub fn resolve_asset_bands(
    assets: &[String],
    sectors: &[Option<String>],
    sector_bands: &BTreeMap<String, (f64, f64)>,
    overrides: &BTreeMap<String, (f64, f64)>,
    default: Option<(f64, f64)>,
) -> Result<Vec<AssetBand>, EncodingError> {
    if assets.len() != sectors.len() {
        return Err(EncodingError::Length {
            expected: assets.len(),
            got: sectors.len(),
        });
    }
    let mut counts: BTreeMap<&str, usize> = BTreeMap::new();
    for sector in sectors.iter().flatten() {
        *counts.entry(sector.as_str()).or_default() += 1;
    }
    for (sector, &(lo, _)) in sector_bands {
        if lo > 0.0 && !counts.contains_key(sector.as_str()) {
            return Err(EncodingError::Infeasible(format!(
                "sector {sector} has minimum {lo} but no member assets"
            )));
        }
    }
    assets
        .iter()
        .zip(sectors)
        .map(|(asset, sector)| {
            let split = sector
                .as_ref()
                .and_then(|s| sector_bands.get(s).map(|&(lo, hi)| (s, lo, hi)))
                .map(|(s, lo, hi)| {
                    let members = counts[s.as_str()] as f64;
                    (lo / members, hi / members)
                });
            let (w_min, w_max) = overrides
                .get(asset)
                .copied()
                .or(split)
                .or(default)
                .ok_or_else(|| EncodingError::InvalidBand {
                    asset: asset.clone(),
                    reason: match sector {
                        Some(s) => format!("sector {s} has no band"),
                        None => "no band given".into(),
                    },
                })?;
            Ok(AssetBand {
                w_min,
                w_max,
                sector: sector.clone(),
            })
        })
        .collect()
}

/// How a non-integral band width `K (w_max - w_min)` is handled.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Integrality {
    /// Reject non-integral widths.
    #[default]
    Strict,
    /// Round the width down to whole units.
    Continuous,
}

#[derive(Debug, Clone, Default)]
pub struct EncodingOptions {
    pub integrality: Integrality,
    /// Use this bit depth for every asset instead of the largest admissible one.
    pub forced_depth: Option<u32>,
}

/// Encoding of one asset's holding.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AssetEncoding {
    /// Band width in units of `1/K`.
    pub delta: u64,
    /// Number of power-of-two bits.
    pub n_q: u32,
    /// Coefficient of the extra bit; the extra bit exists only when nonzero.
    pub m_coeff: u64,
    /// Index of this asset's first bit in the global vector.
    pub offset: usize,
}

impl AssetEncoding {
    pub fn n_bits(&self) -> usize {
        self.n_q as usize + usize::from(self.m_coeff > 0)
    }

    pub fn range(&self) -> std::ops::Range<usize> {
        self.offset..self.offset + self.n_bits()
    }

    /// Unit value of the asset's `i`-th local bit.
    pub fn coefficient(&self, i: usize) -> u64 {
        if i < self.n_q as usize {
            1 << i
        } else {
            self.m_coeff
        }
    }

    /// Largest value reachable with the power-of-two bits alone.
    pub fn binary_max(&self) -> u64 {
        (1u64 << self.n_q) - 1
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BitRole {
    /// Bit worth `2^q` units.
    Power(u32),
    /// Bit worth `M` units.
    Extra,
}

/// Which asset a bit belongs to and what it is worth.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BitLabel {
    pub asset: usize,
    pub role: BitRole,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EncodingSpec {
    k: u64,
    assets: Vec<AssetEncoding>,
    total_bits: usize,
}

impl EncodingSpec {
    pub fn k(&self) -> u64 {
        self.k
    }

    pub fn assets(&self) -> &[AssetEncoding] {
        &self.assets
    }

    pub fn total_bits(&self) -> usize {
        self.total_bits
    }

    pub fn labels(&self) -> Vec<BitLabel> {
        let mut labels = Vec::with_capacity(self.total_bits);
        for (asset, enc) in self.assets.iter().enumerate() {
            labels.extend((0..enc.n_q).map(|q| BitLabel {
                asset,
                role: BitRole::Power(q),
            }));
            if enc.m_coeff > 0 {
                labels.push(BitLabel {
                    asset,
                    role: BitRole::Extra,
                });
            }
        }
        labels
    }

    /// Asset index and unit coefficient of every bit.
    pub fn bit_coefficients(&self) -> Vec<(usize, u64)> {
        self.assets
            .iter()
            .enumerate()
            .flat_map(|(n, enc)| (0..enc.n_bits()).map(move |i| (n, enc.coefficient(i))))
            .collect()
    }

    /// Per-asset unit counts `u_n` for a bit vector.
    pub fn decode_units(&self, bits: &[bool]) -> Result<Vec<u64>, EncodingError> {
        if bits.len() != self.total_bits {
            return Err(EncodingError::Length {
                expected: self.total_bits,
                got: bits.len(),
            });
        }
        Ok(self
            .assets
            .iter()
            .map(|enc| {
                bits[enc.range()]
                    .iter()
                    .enumerate()
                    .filter(|(_, &b)| b)
                    .map(|(i, _)| enc.coefficient(i))
                    .sum()
            })
            .collect())
    }

    /// Bits representing `units[n]` for every asset; prefers leaving the
    /// extra bit clear when both choices are exact.
    pub fn encode_units(&self, units: &[u64]) -> Result<Vec<bool>, EncodingError> {
        if units.len() != self.assets.len() {
            return Err(EncodingError::Length {
                expected: self.assets.len(),
                got: units.len(),
            });
        }
        let mut bits = vec![false; self.total_bits];
        for (enc, &u) in self.assets.iter().zip(units) {
            let u = u.min(enc.delta);
            let (rest, extra) = if enc.m_coeff > 0 && u > enc.binary_max() {
                (u - enc.m_coeff, true)
            } else {
                (u, false)
            };
            for q in 0..enc.n_q as usize {
                bits[enc.offset + q] = (rest >> q) & 1 == 1;
            }
            if extra {
                bits[enc.offset + enc.n_q as usize] = true;
            }
        }
        Ok(bits)
    }
}

/// Builds the encoding with the largest admissible bit depth per asset.
/// Band width `K (w_max - w_min)` in whole units.
pub fn unit_width(
    asset: &str,
    band: &AssetBand,
    k: u64,
    integrality: Integrality,
) -> Result<u64, EncodingError> {
    let width = k as f64 * (band.w_max - band.w_min);
    let rounded = width.round();
    let integral = (width - rounded).abs() <= INTEGRAL_TOL * rounded.max(1.0);
    match integrality {
        Integrality::Strict if !integral => Err(EncodingError::NonIntegral {
            asset: asset.to_string(),
            value: width,
        }),
        _ if integral => Ok(rounded as u64),
        _ => Ok(width.floor() as u64),
    }
}

pub fn make_encoding(bands: &BandSpec, k: u64) -> Result<EncodingSpec, EncodingError> {
    make_encoding_with(bands, k, &EncodingOptions::default())
}

pub fn make_encoding_with(
    bands: &BandSpec,
    k: u64,
    opts: &EncodingOptions,
) -> Result<EncodingSpec, EncodingError> {
    if k == 0 {
        return Err(EncodingError::ZeroBudget);
    }
    let mut assets = Vec::with_capacity(bands.len());
    let mut offset = 0;
    for (name, band) in bands.assets().iter().zip(bands.bands()) {
        let delta = unit_width(name, band, k, opts.integrality)?;
        let n_q = match opts.forced_depth {
            Some(depth) => {
                let need = (1u64 << depth) - 1;
                if need > delta {
                    return Err(EncodingError::DepthTooLarge {
                        asset: name.clone(),
                        depth,
                        need,
                        delta,
                    });
                }
                depth
            }
            // largest n with 2^n - 1 <= delta
            None => 63 - (delta + 1).leading_zeros(),
        };
        let enc = AssetEncoding {
            delta,
            n_q,
            m_coeff: delta - ((1u64 << n_q) - 1),
            offset,
        };
        offset += enc.n_bits();
        assets.push(enc);
    }
    Ok(EncodingSpec {
        k,
        assets,
        total_bits: offset,
    })
}

fn check_dims(spec: &EncodingSpec, bands: &BandSpec) -> Result<(), EncodingError> {
    if spec.assets.len() != bands.len() {
        return Err(EncodingError::Length {
            expected: spec.assets.len(),
            got: bands.len(),
        });
    }
    Ok(())
}

/// Weights `w_min + u / K` for a bit vector.
pub fn decode(bits: &[bool], spec: &EncodingSpec, bands: &BandSpec) -> Result<Vec<f64>, EncodingError> {
    check_dims(spec, bands)?;
    let units = spec.decode_units(bits)?;
    Ok(weights_from_units(&units, spec, bands))
}

pub fn weights_from_units(units: &[u64], spec: &EncodingSpec, bands: &BandSpec) -> Vec<f64> {
    let kf = spec.k as f64;
    units
        .iter()
        .zip(bands.bands())
        .map(|(&u, b)| b.w_min + u as f64 / kf)
        .collect()
}

/// Bit vector whose decode is the nearest representable weight per asset.
pub fn encode_nearest(
    weights: &[f64],
    spec: &EncodingSpec,
    bands: &BandSpec,
) -> Result<Vec<bool>, EncodingError> {
    check_dims(spec, bands)?;
    if weights.len() != bands.len() {
        return Err(EncodingError::Length {
            expected: bands.len(),
            got: weights.len(),
        });
    }
    let kf = spec.k as f64;
    let mut units = Vec::with_capacity(weights.len());
    for ((w, band), (enc, name)) in weights
        .iter()
        .zip(bands.bands())
        .zip(spec.assets.iter().zip(bands.assets()))
    {
        if !band.contains(*w) {
            return Err(EncodingError::OutOfBand {
                asset: name.clone(),
                weight: *w,
                w_min: band.w_min,
                w_max: band.w_max,
            });
        }
        let u = ((w - band.w_min) * kf).round().max(0.0) as u64;
        units.push(u.min(enc.delta));
    }
    spec.encode_units(&units)
}

/// One parsed row of an `asset,w_min,w_max,sector` table. Empty bounds mean
/// "take the band from the sector table".
#[derive(Debug, Clone, PartialEq)]
pub struct AssetRow {
    pub asset: String,
    pub w_min: Option<f64>,
    pub w_max: Option<f64>,
    pub sector: Option<String>,
}

fn parse_opt_f64(field: &str, line: usize) -> Result<Option<f64>, EncodingError> {
    if field.is_empty() {
        return Ok(None);
    }
    field.parse().map(Some).map_err(|_| EncodingError::Table {
        line,
        message: format!("bad number `{field}`"),
    })
}

fn table_reader(text: &str) -> csv::Reader<&[u8]> {
    csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .flexible(true)
        .from_reader(text.as_bytes())
}

pub fn read_asset_table(text: &str) -> Result<Vec<AssetRow>, EncodingError> {
    let mut rows = Vec::new();
    for rec in table_reader(text).records() {
        let rec = rec.map_err(|e| EncodingError::Table {
            line: e.position().map_or(0, |p| p.line() as usize),
            message: e.to_string(),
        })?;
        let line = rec.position().map_or(0, |p| p.line() as usize);
        if rec.is_empty() || rec[0].is_empty() {
            return Err(EncodingError::Table {
                line,
                message: "missing asset name".into(),
            });
        }
        let get = |i: usize| rec.get(i).unwrap_or("");
        rows.push(AssetRow {
            asset: rec[0].to_string(),
            w_min: parse_opt_f64(get(1), line)?,
            w_max: parse_opt_f64(get(2), line)?,
            sector: Some(get(3)).filter(|s| !s.is_empty()).map(str::to_owned),
        });
    }
    Ok(rows)
}

pub fn read_sector_table(text: &str) -> Result<BTreeMap<String, (f64, f64)>, EncodingError> {
    let mut out = BTreeMap::new();
    for rec in table_reader(text).records() {
        let rec = rec.map_err(|e| EncodingError::Table {
            line: e.position().map_or(0, |p| p.line() as usize),
            message: e.to_string(),
        })?;
        let line = rec.position().map_or(0, |p| p.line() as usize);
        let get = |i: usize| rec.get(i).unwrap_or("");
        let (Some(lo), Some(hi)) = (parse_opt_f64(get(1), line)?, parse_opt_f64(get(2), line)?)
        else {
            return Err(EncodingError::Table {
                line,
                message: "sector rows need `sector,min,max`".into(),
            });
        };
        out.insert(get(0).to_string(), (lo, hi));
    }
    Ok(out)
}

pub fn write_asset_table(bands: &BandSpec) -> String {
    let mut out = String::from("asset,w_min,w_max,sector\n");
    for (name, b) in bands.assets().iter().zip(bands.bands()) {
        let _ = writeln!(
            out,
            "{name},{},{},{}",
            b.w_min,
            b.w_max,
            b.sector.as_deref().unwrap_or("")
        );
    }
    out
}
