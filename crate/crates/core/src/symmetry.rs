//! Local symmetry search: sample a block of the marked grid, push it through a move sequence
//! and compare every intermediate state with the original block.
//!
//! A block is called symmetric when the Hamming distance after the whole sequence is at most
//! the threshold η. The default η is the distance expected when cells are independent
//! Bernoulli(p̂) draws, so a block scores symmetric when it is at least as stable under the
//! moves as structureless noise with the same occupancy.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::digitize::MarkedGrid;
use crate::error::SymmetryError;
use crate::grid::{apply_sequence, hamming, Configuration, MoveSequence};

/// An `m × m` window of a marked grid. The offset is 0-based internally and 1-based in reports.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GridBlock {
    pub parent_n: usize,
    pub offset: (usize, usize),
    pub config: Configuration,
}

impl GridBlock {
    pub fn new(grid: &Configuration, offset: (usize, usize), size: usize) -> Result<Self, SymmetryError> {
        if size == 0 || size > grid.n() {
            return Err(SymmetryError::BlockSize { size, n: grid.n() });
        }
        let config = grid.window(offset.0, offset.1, size)?;
        Ok(Self { parent_n: grid.n(), offset, config })
    }

    /// The whole grid as one block.
    pub fn whole(grid: &Configuration) -> Self {
        Self { parent_n: grid.n(), offset: (0, 0), config: grid.clone() }
    }

    pub fn size(&self) -> usize {
        self.config.n()
    }
}

/// Draws a uniformly placed `size × size` block.
pub fn sample_block<R: Rng + ?Sized>(grid: &MarkedGrid, size: usize, rng: &mut R) -> Result<GridBlock, SymmetryError> {
    sample_config_block(&grid.config, size, rng)
}

pub fn sample_config_block<R: Rng + ?Sized>(
    grid: &Configuration,
    size: usize,
    rng: &mut R,
) -> Result<GridBlock, SymmetryError> {
    let n = grid.n();
    if size == 0 || size > n {
        return Err(SymmetryError::BlockSize { size, n });
    }
    let span = n - size + 1;
    let offset = (rng.gen_range(0..span), rng.gen_range(0..span));
    GridBlock::new(grid, offset, size)
}

/// Distance to the original block after each move. While a stabilization is open the grid
/// number differs from the original; those steps repeat the last comparable distance.
pub fn hamming_trace(block: &GridBlock, seq: &MoveSequence) -> Result<Vec<usize>, SymmetryError> {
    let mut trace = Vec::with_capacity(seq.len());
    let mut last = 0;
    for state in seq.states(&block.config)? {
        if state.n() == block.size() {
            last = hamming(&block.config, &state)?;
        }
        trace.push(last);
    }
    Ok(trace)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Symmetric,
    NotSymmetric,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SymmetryReport {
    /// 1-based `(row, col)` of the block's top-left cell.
    pub offset: [usize; 2],
    pub m: usize,
    pub sequence: MoveSequence,
    pub trace: Vec<usize>,
    #[serde(rename = "final_H")]
    pub final_h: usize,
    pub eta: usize,
    pub verdict: Verdict,
}

pub fn symmetry_test(block: &GridBlock, seq: &MoveSequence, eta: usize) -> Result<SymmetryReport, SymmetryError> {
    let trace = hamming_trace(block, seq)?;
    let final_h = trace.last().copied().unwrap_or(0);
    Ok(SymmetryReport {
        offset: [block.offset.0 + 1, block.offset.1 + 1],
        m: block.size(),
        sequence: seq.clone(),
        trace,
        final_h,
        eta,
        verdict: if final_h <= eta { Verdict::Symmetric } else { Verdict::NotSymmetric },
    })
}

/// `⌊2m²p(1−p)⌋`, the expected distance for independent Bernoulli(p) cells under a sequence
/// that moves every cell.
pub fn eta_default(m: usize, occupancy: f64) -> usize {
    eta_null(m, occupancy, 0)
}

/// `⌊2(m² − f)p(1−p)⌋` for a sequence whose net permutation leaves `fixed` cells in place.
pub fn eta_null(m: usize, occupancy: f64, fixed: usize) -> usize {
    let p = occupancy.clamp(0.0, 1.0);
    let displaced = (m * m).saturating_sub(fixed) as f64;
    // guard against 7.999… from rounding
    (2.0 * displaced * p * (1.0 - p) + 1e-9).floor() as usize
}

/// Produces the move sequence for one trial given the sampled block.
pub trait SequenceSampler: Sync {
    fn sample(&self, block: &Configuration, rng: &mut ChaCha8Rng) -> MoveSequence;
}

/// Always the same sequence.
#[derive(Debug, Clone)]
pub struct FixedSequence(pub MoveSequence);

impl SequenceSampler for FixedSequence {
    fn sample(&self, _block: &Configuration, _rng: &mut ChaCha8Rng) -> MoveSequence {
        self.0.clone()
    }
}

/// `T₁ᵃ ∘ T₂ᵇ ∘ T₃ᶜ` with `a` and `b` uniform on `0..=max_a` / `0..=max_b` and `kink_pairs`
/// stabilize/destabilize pairs at uniformly chosen occupied cells.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CanonicalSampler {
    pub max_a: usize,
    pub max_b: usize,
    pub kink_pairs: usize,
}

impl Default for CanonicalSampler {
    fn default() -> Self {
        Self { max_a: 4, max_b: 4, kink_pairs: 0 }
    }
}

impl SequenceSampler for CanonicalSampler {
    fn sample(&self, block: &Configuration, rng: &mut ChaCha8Rng) -> MoveSequence {
        let a = rng.gen_range(0..=self.max_a);
        let b = rng.gen_range(0..=self.max_b);
        if self.kink_pairs == 0 {
            return MoveSequence::canonical(a, b, &[]);
        }
        // kinks go after the permutation moves, so pick sites occupied at that point
        let moved = apply_sequence(block, &MoveSequence::canonical(a, b, &[])).expect("permutation moves always apply");
        let n = moved.n();
        let occupied: Vec<(usize, usize)> =
            (0..n * n).filter(|&k| moved.get(k / n, k % n)).map(|k| (k % n + 1, k / n + 1)).collect();
        let sites: Vec<(usize, usize)> = if occupied.is_empty() {
            Vec::new()
        } else {
            (0..self.kink_pairs).map(|_| occupied[rng.gen_range(0..occupied.len())]).collect()
        };
        MoveSequence::canonical(a, b, &sites)
    }
}

/// Monte Carlo estimate of Pr(H ≤ η) with its binomial standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProbabilityEstimate {
    pub probability: f64,
    pub std_error: f64,
    pub trials: usize,
    pub successes: usize,
}

/// RNG for trial `index` of a run seeded with `seed`: the ChaCha stream number is the trial
/// index, so results do not depend on how trials are scheduled.
pub fn trial_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Fraction of `(block, sequence)` draws whose final distance is at most `eta`.
pub fn estimate_prob_symmetric(
    grid: &MarkedGrid,
    m: usize,
    sampler: &dyn SequenceSampler,
    eta: usize,
    trials: usize,
    seed: u64,
) -> Result<ProbabilityEstimate, SymmetryError> {
    estimate_on_config(&grid.config, m, sampler, eta, trials, seed)
}

pub fn estimate_on_config(
    grid: &Configuration,
    m: usize,
    sampler: &dyn SequenceSampler,
    eta: usize,
    trials: usize,
    seed: u64,
) -> Result<ProbabilityEstimate, SymmetryError> {
    if trials == 0 {
        return Err(SymmetryError::NoTrials);
    }
    if m == 0 || m > grid.n() {
        return Err(SymmetryError::BlockSize { size: m, n: grid.n() });
    }
    let outcomes = (0..trials)
        .into_par_iter()
        .map(|t| {
            let mut rng = trial_rng(seed, t as u64);
            let block = sample_config_block(grid, m, &mut rng)?;
            let seq = sampler.sample(&block.config, &mut rng);
            let trace = hamming_trace(&block, &seq)?;
            Ok(trace.last().copied().unwrap_or(0) <= eta)
        })
        .collect::<Result<Vec<bool>, SymmetryError>>()?;
    let successes = outcomes.iter().filter(|&&ok| ok).count();
    let p = successes as f64 / trials as f64;
    Ok(ProbabilityEstimate {
        probability: p,
        std_error: (p * (1.0 - p) / trials as f64).sqrt(),
        trials,
        successes,
    })
}
