//! Simulated annealing over a [`Qubo`], plus an exhaustive solver for small
//! instances.
//!
//! Replica `r` of a run seeded with `s` draws from `ChaCha8Rng` seeded with
//! `s` on stream `r`. Replicas share nothing while sweeping, so results do not
//! depend on how many run in parallel.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use thiserror::Error;

use crate::qubo::Qubo;

/// Default bit cap for [`exhaustive_solve`].
pub const DEFAULT_BIT_CAP: usize = 24;

const SPARSE_DENSITY: f64 = 0.10;

#[derive(Debug, Error, PartialEq)]
pub enum SolverError {
    #[error("{bits} bits exceed the exhaustive-search cap of {cap}")]
    TooManyBits { bits: usize, cap: usize },
    #[error("invalid anneal schedule: {0}")]
    Schedule(String),
    #[error("bit index {index} out of range for {bits} bits")]
    Index { index: usize, bits: usize },
    #[error("solution record: {0}")]
    Record(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct AnnealSchedule {
    pub t_start: f64,
    pub t_end: f64,
    pub sweeps: usize,
    pub replicas: usize,
    pub seed: u64,
}

impl AnnealSchedule {
    /// Scale-free defaults derived from the coefficients of `qubo`.
    pub fn default_for(qubo: &Qubo, seed: u64) -> Self {
        let b = qubo.n_bits();
        let mut mags: Vec<f64> = qubo
            .matrix()
            .iter()
            .map(|v| v.abs())
            .filter(|&v| v > 0.0)
            .collect();
        let (t_start, t_end) = if mags.is_empty() {
            (1.0, 1.0)
        } else {
            mags.sort_by(f64::total_cmp);
            let max = mags[mags.len() - 1];
            let median = mags[mags.len() / 2];
            (max * b as f64, 1e-3 * median)
        };
        Self {
            t_start,
            t_end,
            sweeps: (200 * b).max(1),
            replicas: 16.max(b / 4),
            seed,
        }
    }

    pub fn validate(&self) -> Result<(), SolverError> {
        if !(self.t_end > 0.0 && self.t_start >= self.t_end && self.t_start.is_finite()) {
            return Err(SolverError::Schedule(format!(
                "need t_start >= t_end > 0, got {} and {}",
                self.t_start, self.t_end
            )));
        }
        if self.sweeps == 0 || self.replicas == 0 {
            return Err(SolverError::Schedule("sweeps and replicas must be >= 1".into()));
        }
        Ok(())
    }

    /// Temperature of sweep `s` on the geometric ladder.
    pub fn temperature(&self, sweep: usize) -> f64 {
        if self.sweeps <= 1 {
            return self.t_end;
        }
        let frac = sweep as f64 / (self.sweeps - 1) as f64;
        self.t_start * (self.t_end / self.t_start).powf(frac)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Solution {
    pub bits: Vec<bool>,
    /// `x'Qx + offset`, recomputed from `bits`.
    pub energy: f64,
    pub replica_id: usize,
    pub sweep_found: usize,
}

impl Solution {
    pub fn bit_string(&self) -> String {
        self.bits.iter().map(|&b| if b { '1' } else { '0' }).collect()
    }

    /// `key=value` record with energy, bits, replica and sweep.
    pub fn to_record(&self) -> String {
        format!(
            "energy={}\nbits={}\nreplica={}\nsweep={}\n",
            self.energy,
            self.bit_string(),
            self.replica_id,
            self.sweep_found
        )
    }

    pub fn from_record(text: &str) -> Result<Self, SolverError> {
        let mut energy = None;
        let mut bits = None;
        let mut replica = None;
        let mut sweep = None;
        for line in text.lines().map(str::trim).filter(|l| !l.is_empty()) {
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| SolverError::Record(format!("expected key=value, got `{line}`")))?;
            let bad = || SolverError::Record(format!("bad value for {key}: `{value}`"));
            match key {
                "energy" => energy = Some(value.parse::<f64>().map_err(|_| bad())?),
                "bits" => {
                    bits = Some(
                        value
                            .chars()
                            .map(|c| match c {
                                '0' => Ok(false),
                                '1' => Ok(true),
                                _ => Err(bad()),
                            })
                            .collect::<Result<Vec<_>, _>>()?,
                    )
                }
                "replica" => replica = Some(value.parse().map_err(|_| bad())?),
                "sweep" => sweep = Some(value.parse().map_err(|_| bad())?),
                _ => return Err(SolverError::Record(format!("unknown key `{key}`"))),
            }
        }
        match (energy, bits, replica, sweep) {
            (Some(energy), Some(bits), Some(replica_id), Some(sweep_found)) => Ok(Self {
                bits,
                energy,
                replica_id,
                sweep_found,
            }),
            _ => Err(SolverError::Record("missing field".into())),
        }
    }
}

/// Energy change from flipping bit `index`:
/// `(1 - 2x_i) (q_ii + 2 Σ_{j != i} q_ij x_j)`.
pub fn incremental_delta(qubo: &Qubo, bits: &[bool], index: usize) -> Result<f64, SolverError> {
    let n = qubo.n_bits();
    if index >= n || bits.len() != n {
        return Err(SolverError::Index { index, bits: n });
    }
    let col = qubo.matrix().column(index);
    let field: f64 = (0..n)
        .filter(|&j| j != index && bits[j])
        .map(|j| col[j])
        .sum();
    let sign = if bits[index] { -1.0 } else { 1.0 };
    Ok(sign * (col[index] + 2.0 * field))
}

/// Coupling storage for the sweep kernels.
struct Couplings {
    n: usize,
    diag: Vec<f64>,
    /// Row-major symmetric matrix with a zero diagonal.
    dense: Vec<f64>,
    /// Off-diagonal nonzeros per row; used when the matrix is sparse.
    sparse: Option<Vec<Vec<(usize, f64)>>>,
}

impl Couplings {
    fn new(qubo: &Qubo) -> Self {
        let m = qubo.matrix();
        let n = m.nrows();
        let diag = (0..n).map(|i| m[(i, i)]).collect();
        let mut dense = vec![0.0; n * n];
        let mut nnz = 0usize;
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    let v = m[(i, j)];
                    dense[i * n + j] = v;
                    if v != 0.0 {
                        nnz += 1;
                    }
                }
            }
        }
        let off = (n * n.saturating_sub(1)).max(1) as f64;
        let sparse = (n > 0 && (nnz as f64 / off) < SPARSE_DENSITY).then(|| {
            (0..n)
                .map(|i| {
                    (0..n)
                        .filter(|&j| j != i && dense[i * n + j] != 0.0)
                        .map(|j| (j, dense[i * n + j]))
                        .collect()
                })
                .collect()
        });
        Self {
            n,
            diag,
            dense,
            sparse,
        }
    }

    fn fields(&self, bits: &[bool]) -> Vec<f64> {
        (0..self.n)
            .map(|i| {
                let row = &self.dense[i * self.n..(i + 1) * self.n];
                row.iter().zip(bits).filter(|(_, &b)| b).map(|(v, _)| v).sum()
            })
            .collect()
    }

    /// Applies the flip of bit `i` (already toggled in `bits`) to the fields.
    #[inline]
    fn update_fields(&self, fields: &mut [f64], i: usize, now_set: bool) {
        let s = if now_set { 1.0 } else { -1.0 };
        match &self.sparse {
            Some(rows) => {
                for &(j, v) in &rows[i] {
                    fields[j] += s * v;
                }
            }
            None => {
                let row = &self.dense[i * self.n..(i + 1) * self.n];
                for (f, v) in fields.iter_mut().zip(row) {
                    *f += s * v;
                }
            }
        }
    }

    #[inline]
    fn delta(&self, fields: &[f64], bits: &[bool], i: usize) -> f64 {
        let d = self.diag[i] + 2.0 * fields[i];
        if bits[i] {
            -d
        } else {
            d
        }
    }
}

/// Per-sweep progress of one replica.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepTrace {
    pub replica: usize,
    pub sweep: usize,
    pub temperature: f64,
    pub current: f64,
    pub best: f64,
}

/// Best state over all replicas of a simulated-annealing run.
pub fn anneal(qubo: &Qubo, schedule: &AnnealSchedule) -> Result<Solution, SolverError> {
    anneal_observed(qubo, schedule, |_| {})
}

/// [`anneal`] with a callback after every sweep of every replica.
pub fn anneal_observed<F>(qubo: &Qubo, schedule: &AnnealSchedule, observer: F) -> Result<Solution, SolverError>
where
    F: Fn(&SweepTrace) + Sync,
{
    schedule.validate()?;
    let couplings = Couplings::new(qubo);
    let temps: Vec<f64> = (0..schedule.sweeps).map(|s| schedule.temperature(s)).collect();
    let results: Vec<Solution> = (0..schedule.replicas)
        .into_par_iter()
        .map(|r| run_replica(qubo, &couplings, &temps, schedule.seed, r, &observer))
        .collect();
    // minimum energy, lowest replica id on ties
    let best = results
        .into_iter()
        .reduce(|a, b| if b.energy < a.energy { b } else { a })
        .expect("at least one replica");
    Ok(best)
}

fn run_replica<F>(
    qubo: &Qubo,
    c: &Couplings,
    temps: &[f64],
    seed: u64,
    replica: usize,
    observer: &F,
) -> Solution
where
    F: Fn(&SweepTrace),
{
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(replica as u64);
    let n = c.n;
    let mut bits: Vec<bool> = (0..n).map(|_| rng.random()).collect();
    let mut fields = c.fields(&bits);
    let mut energy = qubo.energy(&bits);
    let mut best_bits = bits.clone();
    let mut best_energy = energy;
    let mut best_sweep = 0;

    for (sweep, &t) in temps.iter().enumerate() {
        for i in 0..n {
            let delta = c.delta(&fields, &bits, i);
            if delta <= 0.0 || rng.random::<f64>() < (-delta / t).exp() {
                bits[i] = !bits[i];
                c.update_fields(&mut fields, i, bits[i]);
                energy += delta;
                if energy < best_energy {
                    best_energy = energy;
                    best_bits.copy_from_slice(&bits);
                    best_sweep = sweep;
                }
            }
        }
        observer(&SweepTrace {
            replica,
            sweep,
            temperature: t,
            current: energy,
            best: best_energy,
        });
    }
    Solution {
        energy: qubo.energy(&best_bits),
        bits: best_bits,
        replica_id: replica,
        sweep_found: best_sweep,
    }
}

/// Global minimum by Gray-code enumeration; ties go to the lexicographically
/// smallest bit vector (bit 0 most significant).
pub fn exhaustive_solve(qubo: &Qubo, bit_cap: usize) -> Result<Solution, SolverError> {
    let n = qubo.n_bits();
    let cap = bit_cap.min(63);
    if n > cap {
        return Err(SolverError::TooManyBits { bits: n, cap: bit_cap });
    }
    let c = Couplings::new(qubo);
    let lex_key = |mask: u64| if n == 0 { 0 } else { mask.reverse_bits() >> (64 - n) };
    let mut bits = vec![false; n];
    let mut fields = vec![0.0; n];
    let mut energy = qubo.offset();
    let mut mask = 0u64;
    let mut best_mask = 0u64;
    let mut best_energy = energy;
    for step in 1u64..(1u64 << n) {
        let i = step.trailing_zeros() as usize;
        energy += c.delta(&fields, &bits, i);
        bits[i] = !bits[i];
        c.update_fields(&mut fields, i, bits[i]);
        mask ^= 1 << i;
        let tol = 1e-12 * best_energy.abs().max(1.0);
        if energy < best_energy - tol {
            best_energy = energy;
            best_mask = mask;
        } else if energy <= best_energy + tol && lex_key(mask) < lex_key(best_mask) {
            best_energy = best_energy.min(energy);
            best_mask = mask;
        }
    }
    let best_bits: Vec<bool> = (0..n).map(|i| best_mask >> i & 1 == 1).collect();
    Ok(Solution {
        energy: qubo.energy(&best_bits),
        bits: best_bits,
        replica_id: 0,
        sweep_found: 0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::DMatrix;
    use std::sync::Mutex;

    fn random_qubo(n: usize, seed: u64) -> Qubo {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut m = DMatrix::zeros(n, n);
        for i in 0..n {
            for j in 0..=i {
                let v = rng.random_range(-1.0..1.0);
                m[(i, j)] = v;
                m[(j, i)] = v;
            }
        }
        Qubo::from_matrix(m, rng.random_range(-2.0..2.0)).unwrap()
    }

    #[test]
    fn diagonal_minus_one() {
        let q = Qubo::from_matrix(DMatrix::from_diagonal_element(3, 3, -1.0), 0.0).unwrap();
        let s = exhaustive_solve(&q, DEFAULT_BIT_CAP).unwrap();
        assert_eq!(s.bits, vec![true; 3]);
        assert_eq!(s.energy, -3.0);
    }

    #[test]
    fn zero_matrix_ties_to_all_zeros() {
        let q = Qubo::from_matrix(DMatrix::zeros(5, 5), 2.5).unwrap();
        let s = exhaustive_solve(&q, DEFAULT_BIT_CAP).unwrap();
        assert_eq!(s.bits, vec![false; 5]);
        assert_eq!(s.energy, 2.5);
    }

    #[test]
    fn tie_break_is_lexicographic() {
        // 100 and 001 both reach -1; 001 < 100 lexicographically
        let q = Qubo::from_matrix(
            DMatrix::from_row_slice(3, 3, &[-1.0, 0.0, 1.0, 0.0, 0.0, 0.0, 1.0, 0.0, -1.0]),
            0.0,
        )
        .unwrap();
        let s = exhaustive_solve(&q, DEFAULT_BIT_CAP).unwrap();
        assert_eq!(s.bit_string(), "001");
    }

    #[test]
    fn refuses_large_instances() {
        let q = Qubo::from_matrix(DMatrix::zeros(25, 25), 0.0).unwrap();
        assert_eq!(
            exhaustive_solve(&q, DEFAULT_BIT_CAP),
            Err(SolverError::TooManyBits { bits: 25, cap: 24 })
        );
        let empty = Qubo::from_matrix(DMatrix::zeros(0, 0), 1.0).unwrap();
        let s = exhaustive_solve(&empty, DEFAULT_BIT_CAP).unwrap();
        assert!(s.bits.is_empty() && s.energy == 1.0);
    }

    #[test]
    fn exhaustive_matches_plain_enumeration() {
        for seed in 0..5 {
            let q = random_qubo(12, seed);
            let mut best = (f64::INFINITY, 0u32);
            // descending order, so later equal energies are lexicographically smaller
            for mask in (0u32..1 << 12).rev() {
                let bits: Vec<bool> = (0..12).map(|i| mask >> i & 1 == 1).collect();
                let e = q.energy(&bits);
                if e < best.0 {
                    best = (e, mask);
                }
            }
            let s = exhaustive_solve(&q, DEFAULT_BIT_CAP).unwrap();
            assert!((s.energy - best.0).abs() < 1e-12);
            let bits: Vec<bool> = (0..12).map(|i| best.1 >> i & 1 == 1).collect();
            assert_eq!(s.bits, bits);
        }
    }

    #[test]
    fn delta_matches_recomputation() {
        let q = random_qubo(8, 9);
        for mask in 0u32..256 {
            let bits: Vec<bool> = (0..8).map(|i| mask >> i & 1 == 1).collect();
            let e0 = q.energy(&bits);
            for i in 0..8 {
                let d = incremental_delta(&q, &bits, i).unwrap();
                let mut flipped = bits.clone();
                flipped[i] = !flipped[i];
                assert!((q.energy(&flipped) - e0 - d).abs() < 1e-12);
                let back = incremental_delta(&q, &flipped, i).unwrap();
                assert_eq!(back, -d);
            }
        }
        let zero = Qubo::from_matrix(DMatrix::zeros(4, 4), 0.0).unwrap();
        assert_eq!(incremental_delta(&zero, &[true, false, true, true], 2).unwrap(), 0.0);
        assert!(matches!(
            incremental_delta(&zero, &[true; 4], 4),
            Err(SolverError::Index { .. })
        ));
    }

    #[test]
    fn anneal_is_deterministic() {
        let q = random_qubo(16, 4);
        let sched = AnnealSchedule::default_for(&q, 99);
        let a = anneal(&q, &sched).unwrap();
        let b = anneal(&q, &sched).unwrap();
        assert_eq!(a, b);
        let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let c = pool.install(|| anneal(&q, &sched)).unwrap();
        assert_eq!(a, c);
        assert!((a.energy - q.energy(&a.bits)).abs() < 1e-9);
    }

    #[test]
    fn anneal_finds_small_optimum() {
        let q = random_qubo(12, 21);
        let exact = exhaustive_solve(&q, DEFAULT_BIT_CAP).unwrap();
        let hits = (0..20)
            .filter(|&seed| {
                let s = anneal(&q, &AnnealSchedule::default_for(&q, seed)).unwrap();
                (s.energy - exact.energy).abs() < 1e-9
            })
            .count();
        assert!(hits >= 18, "{hits}/20");
    }

    #[test]
    fn zero_temperature_descends() {
        let q = random_qubo(20, 5);
        let sched = AnnealSchedule {
            t_start: 1e-300,
            t_end: 1e-300,
            sweeps: 30,
            replicas: 4,
            seed: 1,
        };
        let traces = Mutex::new(Vec::new());
        anneal_observed(&q, &sched, |t| traces.lock().unwrap().push(*t)).unwrap();
        let mut traces = traces.into_inner().unwrap();
        traces.sort_by_key(|t| (t.replica, t.sweep));
        for w in traces.windows(2).filter(|w| w[0].replica == w[1].replica) {
            assert!(w[1].current <= w[0].current + 1e-12);
        }
    }

    #[test]
    fn best_so_far_never_increases() {
        let q = random_qubo(18, 8);
        let sched = AnnealSchedule::default_for(&q, 3);
        let traces = Mutex::new(Vec::new());
        anneal_observed(&q, &sched, |t| traces.lock().unwrap().push(*t)).unwrap();
        let mut traces = traces.into_inner().unwrap();
        traces.sort_by_key(|t| (t.replica, t.sweep));
        assert_eq!(traces.len(), sched.sweeps * sched.replicas);
        for w in traces.windows(2).filter(|w| w[0].replica == w[1].replica) {
            assert!(w[1].best <= w[0].best);
        }
    }

    #[test]
    fn schedule_validation_and_ladder() {
        let bad = AnnealSchedule {
            t_start: 0.1,
            t_end: 1.0,
            sweeps: 10,
            replicas: 1,
            seed: 0,
        };
        assert!(bad.validate().is_err());
        let q = random_qubo(3, 0);
        assert!(anneal(&q, &AnnealSchedule { sweeps: 0, ..AnnealSchedule::default_for(&q, 0) }).is_err());
        let s = AnnealSchedule {
            t_start: 8.0,
            t_end: 1.0,
            sweeps: 4,
            replicas: 1,
            seed: 0,
        };
        let t: Vec<f64> = (0..4).map(|i| s.temperature(i)).collect();
        for (a, b) in t.iter().zip([8.0, 4.0, 2.0, 1.0]) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn sparse_path_agrees_with_dense() {
        let mut m = DMatrix::zeros(30, 30);
        for i in 0..30 {
            m[(i, i)] = if i % 3 == 0 { -1.0 } else { 0.5 };
        }
        m[(0, 29)] = 0.75;
        m[(29, 0)] = 0.75;
        let q = Qubo::from_matrix(m, 0.0).unwrap();
        assert!(Couplings::new(&q).sparse.is_some());
        let s = anneal(&q, &AnnealSchedule::default_for(&q, 0)).unwrap();
        assert!((s.energy - q.energy(&s.bits)).abs() < 1e-12);
        assert_eq!(s.energy, -10.0);
    }

    #[test]
    fn record_round_trip() {
        let s = Solution {
            bits: vec![true, false, true],
            energy: -1.25,
            replica_id: 3,
            sweep_found: 17,
        };
        assert_eq!(s.to_record(), "energy=-1.25\nbits=101\nreplica=3\nsweep=17\n");
        assert_eq!(Solution::from_record(&s.to_record()).unwrap(), s);
        assert!(Solution::from_record("energy=1\nbits=2\nreplica=0\nsweep=0").is_err());
        assert!(Solution::from_record("energy=1").is_err());
    }
}
