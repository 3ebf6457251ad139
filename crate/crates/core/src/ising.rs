//! Ising-type probability model over grid configurations.
//!
//! Occupied cells carry spin +1 and empty cells −1. The energy of a spin configuration is
//!
//! ```text
//! E(s) = −Σ_{⟨g,h⟩} J_{gh} s_g s_h − Γ Σ_g s_g
//! ```
//!
//! over 4-neighbour pairs, and configurations are weighted by `exp(−τ E) / Z`. Small lattices
//! (at most [`EXACT_CELL_LIMIT`] cells) are enumerated exhaustively; larger ones are sampled
//! with single-spin-flip Metropolis.

use std::collections::HashMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::IsingError;
use crate::grid::{Configuration, MoveSequence};

/// Largest lattice, in cells, that exact enumeration accepts.
pub const EXACT_CELL_LIMIT: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Boundary {
    #[default]
    Open,
    Periodic,
}

/// One explicitly weighted neighbour pair, cells given as 0-based `[row, col]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EdgeCoupling {
    pub from: [usize; 2],
    pub to: [usize; 2],
    #[serde(rename = "J")]
    pub j: f64,
}

/// Either one coupling for every neighbour pair, or explicit per-pair couplings where
/// unlisted pairs do not interact.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Coupling {
    Uniform(f64),
    PerEdge { edges: Vec<EdgeCoupling> },
}

#[derive(Debug, Clone, PartialEq)]
pub struct IsingParams {
    pub rows: usize,
    pub cols: usize,
    pub coupling: Coupling,
    pub gamma: f64,
    pub tau: f64,
    pub boundary: Boundary,
}

impl IsingParams {
    /// Square `n × n` lattice with uniform coupling and open boundary.
    pub fn square(n: usize, j: f64, gamma: f64, tau: f64) -> Self {
        Self::rect(n, n, j, gamma, tau)
    }

    pub fn rect(rows: usize, cols: usize, j: f64, gamma: f64, tau: f64) -> Self {
        Self { rows, cols, coupling: Coupling::Uniform(j), gamma, tau, boundary: Boundary::Open }
    }

    pub fn with_boundary(mut self, boundary: Boundary) -> Self {
        self.boundary = boundary;
        self
    }

    pub fn cells(&self) -> usize {
        self.rows * self.cols
    }

    pub fn validate(&self) -> Result<(), IsingError> {
        if self.rows == 0 || self.cols == 0 {
            return Err(IsingError::Params("lattice must have at least one cell".into()));
        }
        if !(self.tau.is_finite() && self.tau > 0.0) {
            return Err(IsingError::Params(format!("tau must be positive, got {}", self.tau)));
        }
        if !self.gamma.is_finite() {
            return Err(IsingError::Params("Gamma must be finite".into()));
        }
        match &self.coupling {
            Coupling::Uniform(j) if !j.is_finite() => Err(IsingError::Params("J must be finite".into())),
            Coupling::PerEdge { edges } if edges.iter().any(|e| !e.j.is_finite()) => {
                Err(IsingError::Params("edge couplings must be finite".into()))
            }
            _ => Ok(()),
        }
    }

    /// Neighbour pairs `(a, b)` with `a < b`, as row-major cell indices. Periodic wrap edges
    /// are added only along dimensions longer than two, where they are distinct from the open
    /// edges.
    pub fn neighbor_pairs(&self) -> Vec<(usize, usize)> {
        let (rows, cols) = (self.rows, self.cols);
        let idx = |r: usize, c: usize| r * cols + c;
        let mut pairs = Vec::new();
        for r in 0..rows {
            for c in 0..cols {
                if c + 1 < cols {
                    pairs.push((idx(r, c), idx(r, c + 1)));
                }
                if r + 1 < rows {
                    pairs.push((idx(r, c), idx(r + 1, c)));
                }
            }
        }
        if self.boundary == Boundary::Periodic {
            if cols > 2 {
                pairs.extend((0..rows).map(|r| (idx(r, 0), idx(r, cols - 1))));
            }
            if rows > 2 {
                pairs.extend((0..cols).map(|c| (idx(0, c), idx(rows - 1, c))));
            }
        }
        pairs
    }
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum ShapeRepr {
    Side(usize),
    Text(String),
}

#[derive(Serialize, Deserialize)]
struct ParamsRepr {
    n: ShapeRepr,
    #[serde(rename = "J")]
    j: Coupling,
    #[serde(rename = "Gamma", default)]
    gamma: f64,
    tau: f64,
    #[serde(default)]
    boundary: Boundary,
}

/// Parses `"3"` or `"1x2"` into `(rows, cols)`.
pub fn parse_shape(text: &str) -> Result<(usize, usize), IsingError> {
    let bad = || IsingError::Params(format!("bad lattice shape {text:?}, expected N or RxC"));
    let text = text.trim();
    match text.split_once(['x', 'X']) {
        Some((r, c)) => Ok((r.trim().parse().map_err(|_| bad())?, c.trim().parse().map_err(|_| bad())?)),
        None => {
            let n = text.parse().map_err(|_| bad())?;
            Ok((n, n))
        }
    }
}

impl Serialize for IsingParams {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let n = if self.rows == self.cols {
            ShapeRepr::Side(self.rows)
        } else {
            ShapeRepr::Text(format!("{}x{}", self.rows, self.cols))
        };
        ParamsRepr { n, j: self.coupling.clone(), gamma: self.gamma, tau: self.tau, boundary: self.boundary }
            .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for IsingParams {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        use serde::de::Error;
        let repr = ParamsRepr::deserialize(deserializer)?;
        let (rows, cols) = match repr.n {
            ShapeRepr::Side(n) => (n, n),
            ShapeRepr::Text(t) => parse_shape(&t).map_err(D::Error::custom)?,
        };
        let params = IsingParams { rows, cols, coupling: repr.j, gamma: repr.gamma, tau: repr.tau, boundary: repr.boundary };
        IsingModel::new(&params).map_err(D::Error::custom)?;
        Ok(params)
    }
}

/// ±1 spins on a `rows × cols` lattice, row-major.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SpinConfig {
    pub rows: usize,
    pub cols: usize,
    pub spins: Vec<i8>,
}

impl SpinConfig {
    pub fn from_configuration(config: &Configuration) -> Self {
        let n = config.n();
        Self { rows: n, cols: n, spins: config.cells().iter().map(|&c| if c { 1 } else { -1 }).collect() }
    }

    /// Square lattices only.
    pub fn to_configuration(&self) -> Option<Configuration> {
        if self.rows != self.cols {
            return None;
        }
        Configuration::from_cells(self.rows, self.spins.iter().map(|&s| s > 0).collect()).ok()
    }

    /// Bit `k` of `index` set means cell `k` has spin +1.
    pub fn from_index(rows: usize, cols: usize, index: u64) -> Self {
        Self { rows, cols, spins: (0..rows * cols).map(|k| if (index >> k) & 1 == 1 { 1 } else { -1 }).collect() }
    }

    /// Inverse of [`SpinConfig::from_index`]; needs at most 64 cells.
    pub fn index(&self) -> u64 {
        self.spins.iter().enumerate().filter(|(_, &s)| s > 0).fold(0, |acc, (k, _)| acc | 1 << k)
    }

    pub fn flipped(&self) -> Self {
        Self { spins: self.spins.iter().map(|s| -s).collect(), ..self.clone() }
    }

    /// `{"n": …, "cells": …}` line for square lattices, `{"rows","cols","cells"}` otherwise.
    pub fn to_json(&self) -> serde_json::Value {
        let cells: Vec<Vec<u8>> =
            self.spins.chunks(self.cols.max(1)).map(|row| row.iter().map(|&s| u8::from(s > 0)).collect()).collect();
        if self.rows == self.cols {
            serde_json::json!({ "n": self.rows, "cells": cells })
        } else {
            serde_json::json!({ "rows": self.rows, "cols": self.cols, "cells": cells })
        }
    }
}

/// Parameters compiled into an adjacency list.
#[derive(Debug, Clone)]
pub struct IsingModel {
    params: IsingParams,
    edges: Vec<(usize, usize, f64)>,
    neighbors: Vec<Vec<(usize, f64)>>,
}

impl IsingModel {
    pub fn new(params: &IsingParams) -> Result<Self, IsingError> {
        params.validate()?;
        let pairs = params.neighbor_pairs();
        let edges: Vec<(usize, usize, f64)> = match &params.coupling {
            Coupling::Uniform(j) => pairs.iter().map(|&(a, b)| (a, b, *j)).collect(),
            Coupling::PerEdge { edges } => {
                let cols = params.cols;
                let mut weights: HashMap<(usize, usize), f64> = HashMap::new();
                for e in edges {
                    let in_range = |[r, c]: [usize; 2]| r < params.rows && c < cols;
                    if !in_range(e.from) || !in_range(e.to) {
                        return Err(IsingError::Params(format!("edge {:?}-{:?} leaves the lattice", e.from, e.to)));
                    }
                    let (a, b) = (e.from[0] * cols + e.from[1], e.to[0] * cols + e.to[1]);
                    let key = (a.min(b), a.max(b));
                    if !pairs.contains(&key) {
                        return Err(IsingError::Params(format!("cells {:?} and {:?} are not neighbours", e.from, e.to)));
                    }
                    weights.insert(key, e.j);
                }
                pairs.iter().filter_map(|p| weights.get(p).map(|&j| (p.0, p.1, j))).collect()
            }
        };
        let mut neighbors = vec![Vec::new(); params.cells()];
        for &(a, b, j) in &edges {
            neighbors[a].push((b, j));
            neighbors[b].push((a, j));
        }
        Ok(Self { params: params.clone(), edges, neighbors })
    }

    pub fn params(&self) -> &IsingParams {
        &self.params
    }

    pub fn energy(&self, spins: &[i8]) -> f64 {
        let interaction: f64 = self.edges.iter().map(|&(a, b, j)| j * f64::from(spins[a] * spins[b])).sum();
        let field: f64 = spins.iter().map(|&s| f64::from(s)).sum();
        -interaction - self.params.gamma * field
    }

    fn energy_of_index(&self, index: u64) -> f64 {
        let spin = |k: usize| if (index >> k) & 1 == 1 { 1.0 } else { -1.0 };
        let interaction: f64 = self.edges.iter().map(|&(a, b, j)| j * spin(a) * spin(b)).sum();
        let field: f64 = (0..self.params.cells()).map(spin).sum();
        -interaction - self.params.gamma * field
    }

    /// Energy change from flipping cell `k`.
    pub fn flip_delta(&self, spins: &[i8], k: usize) -> f64 {
        let local: f64 = self.neighbors[k].iter().map(|&(m, j)| j * f64::from(spins[m])).sum();
        2.0 * f64::from(spins[k]) * (local + self.params.gamma)
    }

    fn check_enumerable(&self) -> Result<(), IsingError> {
        let cells = self.params.cells();
        if cells > EXACT_CELL_LIMIT {
            return Err(IsingError::Capacity { cells, limit: EXACT_CELL_LIMIT });
        }
        Ok(())
    }

    fn check_shape(&self, spins: &SpinConfig) -> Result<(), IsingError> {
        if spins.rows != self.params.rows || spins.cols != self.params.cols || spins.spins.len() != self.params.cells() {
            return Err(IsingError::Dimension {
                got: format!("{}x{}", spins.rows, spins.cols),
                expected: format!("{}x{}", self.params.rows, self.params.cols),
            });
        }
        Ok(())
    }

    /// Gibbs probabilities of every configuration, indexed as in [`SpinConfig::from_index`].
    /// Weights are shifted by the minimum energy before exponentiating.
    pub fn exact_distribution(&self) -> Result<Vec<f64>, IsingError> {
        self.check_enumerable()?;
        let count = 1u64 << self.params.cells();
        let energies: Vec<f64> = (0..count).into_par_iter().map(|i| self.energy_of_index(i)).collect();
        let e_min = energies.iter().copied().fold(f64::INFINITY, f64::min);
        let tau = self.params.tau;
        let mut weights: Vec<f64> = energies.iter().map(|e| (-tau * (e - e_min)).exp()).collect();
        let total: f64 = weights.iter().sum();
        weights.iter_mut().for_each(|w| *w /= total);
        Ok(weights)
    }
}

pub fn hamiltonian(config: &SpinConfig, params: &IsingParams) -> Result<f64, IsingError> {
    let model = IsingModel::new(params)?;
    model.check_shape(config)?;
    Ok(model.energy(&config.spins))
}

/// Z = Σ_σ exp(−τ E(σ)) by enumerating all `2^(cells)` configurations.
pub fn exact_partition(params: &IsingParams) -> Result<f64, IsingError> {
    let model = IsingModel::new(params)?;
    model.check_enumerable()?;
    let count = 1u64 << params.cells();
    Ok((0..count).into_par_iter().map(|i| (-params.tau * model.energy_of_index(i)).exp()).sum())
}

pub fn gibbs_probability(config: &SpinConfig, params: &IsingParams, z: f64) -> Result<f64, IsingError> {
    Ok((-params.tau * hamiltonian(config, params)?).exp() / z)
}

/// Single-spin-flip Metropolis chain: each step proposes flipping a uniformly chosen cell and
/// accepts with probability `min(1, exp(−τ ΔE))`. A sweep is one proposal per cell.
#[derive(Debug, Clone)]
pub struct MetropolisChain {
    model: IsingModel,
    spins: Vec<i8>,
    rng: ChaCha8Rng,
    proposed: u64,
    accepted: u64,
}

impl MetropolisChain {
    /// Starts from a uniformly random configuration drawn from the seeded RNG.
    pub fn new(params: &IsingParams, seed: u64) -> Result<Self, IsingError> {
        let model = IsingModel::new(params)?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let spins = (0..params.cells()).map(|_| if rng.gen_bool(0.5) { 1 } else { -1 }).collect();
        Ok(Self { model, spins, rng, proposed: 0, accepted: 0 })
    }

    /// One proposal; returns the flipped cell when accepted.
    pub fn step(&mut self) -> Option<usize> {
        let k = self.rng.gen_range(0..self.spins.len());
        let delta = self.model.flip_delta(&self.spins, k);
        self.proposed += 1;
        if delta <= 0.0 || self.rng.gen::<f64>() < (-self.model.params.tau * delta).exp() {
            self.spins[k] = -self.spins[k];
            self.accepted += 1;
            Some(k)
        } else {
            None
        }
    }

    pub fn sweep(&mut self) {
        for _ in 0..self.spins.len() {
            let _ = self.step();
        }
    }

    pub fn state(&self) -> SpinConfig {
        SpinConfig { rows: self.model.params.rows, cols: self.model.params.cols, spins: self.spins.clone() }
    }

    pub fn state_index(&self) -> u64 {
        self.spins.iter().enumerate().filter(|(_, &s)| s > 0).fold(0, |acc, (k, _)| acc | 1 << k)
    }

    pub fn acceptance_rate(&self) -> f64 {
        if self.proposed == 0 {
            0.0
        } else {
            self.accepted as f64 / self.proposed as f64
        }
    }
}

/// Runs `burn_in` sweeps, then yields the configuration after each of the next `sweeps`
/// sweeps.
pub fn metropolis_sample(
    params: &IsingParams,
    sweeps: usize,
    burn_in: usize,
    seed: u64,
) -> Result<impl Iterator<Item = SpinConfig>, IsingError> {
    if sweeps == 0 {
        return Err(IsingError::Params("need at least one sweep".into()));
    }
    let mut chain = MetropolisChain::new(params, seed)?;
    for _ in 0..burn_in {
        chain.sweep();
    }
    Ok((0..sweeps).map(move |_| {
        chain.sweep();
        chain.state()
    }))
}

/// Empirical distribution of the states visited after every proposal of `sweeps` sweeps
/// (after `burn_in`), indexed like [`IsingModel::exact_distribution`].
pub fn metropolis_occupation(
    params: &IsingParams,
    sweeps: usize,
    burn_in: usize,
    seed: u64,
) -> Result<Vec<f64>, IsingError> {
    let cells = params.cells();
    if cells > EXACT_CELL_LIMIT {
        return Err(IsingError::Capacity { cells, limit: EXACT_CELL_LIMIT });
    }
    let mut chain = MetropolisChain::new(params, seed)?;
    for _ in 0..burn_in {
        chain.sweep();
    }
    let mut counts = vec![0u64; 1 << cells];
    // track the index incrementally: a flip of cell k toggles bit k
    let mut index = chain.state_index();
    for _ in 0..sweeps * cells {
        if let Some(k) = chain.step() {
            index ^= 1 << k;
        }
        counts[index as usize] += 1;
    }
    let total = (sweeps * cells) as f64;
    Ok(counts.into_iter().map(|c| c as f64 / total).collect())
}

/// Half the L1 distance between two distributions.
pub fn total_variation(p: &[f64], q: &[f64]) -> f64 {
    0.5 * p.iter().zip(q).map(|(a, b)| (a - b).abs()).sum::<f64>()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExpectationMode {
    Exact,
    MonteCarlo,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Expectation {
    pub value: f64,
    /// Zero for exact enumeration; batch-means estimate for Monte Carlo.
    pub std_error: f64,
    pub samples: usize,
}

/// Burn-in used by the Monte Carlo mode of [`expected_hamming`].
pub const MC_BURN_IN: usize = 1_000;
const MC_BATCHES: usize = 50;

/// ⟨H⟩ = Σ_σ H(σ, seq(σ)) P(σ). The sequence acts through its net cell permutation, so a
/// stabilize/destabilize pair contributes nothing. Monte Carlo mode averages over `trials`
/// Metropolis sweeps after [`MC_BURN_IN`] and reports a batch-means standard error.
pub fn expected_hamming(
    params: &IsingParams,
    seq: &MoveSequence,
    mode: ExpectationMode,
    trials: usize,
    seed: u64,
) -> Result<Expectation, IsingError> {
    if params.rows != params.cols {
        return Err(IsingError::Params("move sequences act on square lattices only".into()));
    }
    let model = IsingModel::new(params)?;
    let perm = seq.net_permutation(params.rows)?;
    let distance = |bit: &dyn Fn(usize) -> bool| perm.iter().enumerate().filter(|&(k, &src)| bit(k) != bit(src)).count();
    match mode {
        ExpectationMode::Exact => {
            let probs = model.exact_distribution()?;
            let value = probs
                .par_iter()
                .enumerate()
                .map(|(i, p)| p * distance(&|k| (i >> k) & 1 == 1) as f64)
                .sum();
            Ok(Expectation { value, std_error: 0.0, samples: probs.len() })
        }
        ExpectationMode::MonteCarlo => {
            if trials == 0 {
                return Err(IsingError::Params("need at least one Monte Carlo sample".into()));
            }
            let values: Vec<f64> = metropolis_sample(params, trials, MC_BURN_IN, seed)?
                .map(|s| distance(&|k| s.spins[k] > 0) as f64)
                .collect();
            let (value, std_error) = batch_means(&values, MC_BATCHES);
            Ok(Expectation { value, std_error, samples: values.len() })
        }
    }
}

/// Mean and batch-means standard error. Falls back to the naive error with fewer samples than
/// batches.
pub fn batch_means(values: &[f64], batches: usize) -> (f64, f64) {
    let n = values.len();
    let mean = values.iter().sum::<f64>() / n as f64;
    let (groups, size) = if n >= 2 * batches { (batches, n / batches) } else { (n, 1) };
    if groups < 2 {
        return (mean, 0.0);
    }
    let means: Vec<f64> = values.chunks(size).take(groups).map(|c| c.iter().sum::<f64>() / c.len() as f64).collect();
    let grand = means.iter().sum::<f64>() / groups as f64;
    let var = means.iter().map(|m| (m - grand).powi(2)).sum::<f64>() / (groups - 1) as f64;
    (mean, (var / groups as f64).sqrt())
}

/// `2(m² − f)p(1−p)`, where `f` counts the cells the sequence's net permutation leaves fixed.
pub fn bernoulli_expected_hamming(m: usize, p: f64, seq: &MoveSequence) -> Result<f64, IsingError> {
    if !(0.0..=1.0).contains(&p) {
        return Err(IsingError::Params(format!("probability {p} outside [0, 1]")));
    }
    let fixed = seq.fixed_points(m)?;
    Ok(2.0 * (m * m - fixed) as f64 * p * (1.0 - p))
}

#[cfg(test)]
mod tests {
    use super::*;

    const E: f64 = std::f64::consts::E;

    #[test]
    fn energy_examples() {
        let all_up = SpinConfig::from_configuration(&Configuration::filled(2, true));
        assert_eq!(hamiltonian(&all_up, &IsingParams::square(2, 1.0, 0.0, 1.0)).unwrap(), -4.0);
        assert_eq!(hamiltonian(&all_up, &IsingParams::square(2, 0.0, 0.0, 1.0)).unwrap(), 0.0);
        let pair = SpinConfig { rows: 1, cols: 2, spins: vec![1, -1] };
        assert_eq!(hamiltonian(&pair, &IsingParams::rect(1, 2, 1.0, 0.0, 1.0)).unwrap(), 1.0);
        assert!(matches!(
            hamiltonian(&pair, &IsingParams::square(2, 1.0, 0.0, 1.0)),
            Err(IsingError::Dimension { .. })
        ));
    }

    #[test]
    fn field_term_sign() {
        let up = SpinConfig { rows: 1, cols: 1, spins: vec![1] };
        assert_eq!(hamiltonian(&up, &IsingParams::square(1, 0.0, 1.0, 1.0)).unwrap(), -1.0);
    }

    #[test]
    fn partition_examples() {
        let z = exact_partition(&IsingParams::rect(1, 2, 1.0, 0.0, 1.0)).unwrap();
        assert!((z - (2.0 * E + 2.0 / E)).abs() < 1e-12);
        assert!((z - 6.172323).abs() < 1e-6);
        for n in 1..=4 {
            let z = exact_partition(&IsingParams::square(n, 0.0, 0.0, 2.5)).unwrap();
            assert_eq!(z, (1u64 << (n * n)) as f64);
        }
        let z1 = exact_partition(&IsingParams::square(1, 0.0, 1.0, 1.0)).unwrap();
        assert!((z1 - (E + 1.0 / E)).abs() < 1e-12);
        assert!(matches!(
            exact_partition(&IsingParams::square(5, 1.0, 0.0, 1.0)),
            Err(IsingError::Capacity { cells: 25, .. })
        ));
    }

    #[test]
    fn gibbs_examples() {
        let params = IsingParams::rect(1, 2, 1.0, 0.0, 1.0);
        let z = exact_partition(&params).unwrap();
        let up = SpinConfig { rows: 1, cols: 2, spins: vec![1, 1] };
        let p = gibbs_probability(&up, &params, z).unwrap();
        assert!((p - E / (2.0 * E + 2.0 / E)).abs() < 1e-12);
        assert!((p - 0.440399).abs() < 1e-6);
        let total: f64 = (0..4).map(|i| gibbs_probability(&SpinConfig::from_index(1, 2, i), &params, z).unwrap()).sum();
        assert!((total - 1.0).abs() < 1e-12);

        let flat = IsingParams::square(2, 0.0, 0.0, 1.0);
        let zf = exact_partition(&flat).unwrap();
        for i in 0..16 {
            let p = gibbs_probability(&SpinConfig::from_index(2, 2, i), &flat, zf).unwrap();
            assert!((p - 1.0 / 16.0).abs() < 1e-15);
        }
    }

    #[test]
    fn distribution_normalizes_and_is_flip_symmetric() {
        for &(j, tau) in &[(0.7, 1.0), (-0.4, 2.0), (1.3, 0.3)] {
            let params = IsingParams::square(3, j, 0.0, tau);
            let probs = IsingModel::new(&params).unwrap().exact_distribution().unwrap();
            assert!((probs.iter().sum::<f64>() - 1.0).abs() < 1e-12);
            let mask = (1u64 << 9) - 1;
            for i in 0..512u64 {
                assert!((probs[i as usize] - probs[(i ^ mask) as usize]).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn periodic_adds_wrap_edges() {
        let open = IsingParams::square(3, 1.0, 0.0, 1.0);
        let periodic = open.clone().with_boundary(Boundary::Periodic);
        assert_eq!(open.neighbor_pairs().len(), 12);
        assert_eq!(periodic.neighbor_pairs().len(), 18);
        let up = SpinConfig::from_configuration(&Configuration::filled(3, true));
        assert_eq!(hamiltonian(&up, &periodic).unwrap(), -18.0);
        // no doubled edges on a two-wide lattice
        assert_eq!(IsingParams::rect(1, 2, 1.0, 0.0, 1.0).with_boundary(Boundary::Periodic).neighbor_pairs().len(), 1);
    }

    #[test]
    fn per_edge_couplings() {
        let params = IsingParams {
            coupling: Coupling::PerEdge { edges: vec![EdgeCoupling { from: [0, 0], to: [0, 1], j: 2.0 }] },
            ..IsingParams::square(2, 0.0, 0.0, 1.0)
        };
        let up = SpinConfig::from_configuration(&Configuration::filled(2, true));
        assert_eq!(hamiltonian(&up, &params).unwrap(), -2.0);
        let bad = IsingParams {
            coupling: Coupling::PerEdge { edges: vec![EdgeCoupling { from: [0, 0], to: [1, 1], j: 2.0 }] },
            ..IsingParams::square(2, 0.0, 0.0, 1.0)
        };
        assert!(IsingModel::new(&bad).is_err());
    }

    #[test]
    fn params_json() {
        let p: IsingParams = serde_json::from_str(r#"{"n":"1x2","J":1,"Gamma":0,"tau":1}"#).unwrap();
        assert_eq!((p.rows, p.cols, p.boundary), (1, 2, Boundary::Open));
        let p: IsingParams = serde_json::from_str(
            r#"{"n":3,"J":{"edges":[{"from":[0,0],"to":[0,1],"J":0.5}]},"Gamma":0.1,"tau":2,"boundary":"periodic"}"#,
        )
        .unwrap();
        assert_eq!(p.boundary, Boundary::Periodic);
        assert!(matches!(p.coupling, Coupling::PerEdge { .. }));
        let back: IsingParams = serde_json::from_str(&serde_json::to_string(&p).unwrap()).unwrap();
        assert_eq!(back, p);
        assert!(serde_json::from_str::<IsingParams>(r#"{"n":3,"J":1,"Gamma":0,"tau":0}"#).is_err());
        assert_eq!(parse_shape("4").unwrap(), (4, 4));
        assert!(parse_shape("ax2").is_err());
    }

    #[test]
    fn spin_mapping_round_trips() {
        let c = Configuration::from_bit_rows(&["101", "010", "001"]).unwrap();
        let s = SpinConfig::from_configuration(&c);
        assert_eq!(s.to_configuration().unwrap(), c);
        assert_eq!(SpinConfig::from_index(3, 3, s.index()), s);
        assert_eq!(s.to_json()["cells"], serde_json::json!([[1, 0, 1], [0, 1, 0], [0, 0, 1]]));
    }

    #[test]
    fn flat_target_accepts_everything() {
        let params = IsingParams::square(4, 0.0, 0.0, 1.0);
        let mut chain = MetropolisChain::new(&params, 5).unwrap();
        let mut sums = vec![0.0; 16];
        let sweeps = 20_000;
        for _ in 0..sweeps {
            chain.sweep();
            for (acc, s) in sums.iter_mut().zip(&chain.spins) {
                *acc += f64::from(*s);
            }
        }
        assert_eq!(chain.acceptance_rate(), 1.0);
        // a cell flips Poisson(1) times per sweep, so the lag-t spin correlation is e^(−2t)
        let rho = (-2.0f64).exp();
        let tau_int = (1.0 + rho) / (1.0 - rho);
        let sigma = (tau_int / sweeps as f64).sqrt();
        for s in sums {
            assert!((s / sweeps as f64).abs() < 3.0 * sigma);
        }
    }

    #[test]
    fn sampler_is_deterministic() {
        let params = IsingParams::square(4, 0.4, 0.1, 1.0);
        let a: Vec<_> = metropolis_sample(&params, 50, 10, 3).unwrap().collect();
        let b: Vec<_> = metropolis_sample(&params, 50, 10, 3).unwrap().collect();
        assert_eq!(a, b);
        assert!(metropolis_sample(&params, 0, 10, 3).is_err());
    }

    #[test]
    fn uniform_weights_give_half_m_squared() {
        let seq = MoveSequence::parse("T2").unwrap();
        for m in 2..=4 {
            let e = expected_hamming(&IsingParams::square(m, 0.0, 0.0, 1.0), &seq, ExpectationMode::Exact, 0, 0).unwrap();
            assert!((e.value - (m * m) as f64 / 2.0).abs() < 1e-9);
        }
    }

    #[test]
    fn strong_coupling_freezes_distance() {
        let seq = MoveSequence::parse("T2,T1").unwrap();
        let e = expected_hamming(&IsingParams::square(3, 40.0, 0.0, 1.0), &seq, ExpectationMode::Exact, 0, 0).unwrap();
        assert!(e.value < 1e-12, "{}", e.value);
    }

    #[test]
    fn bernoulli_formula() {
        let t2 = MoveSequence::parse("T2").unwrap();
        assert!((bernoulli_expected_hamming(8, 0.3, &t2).unwrap() - 26.88).abs() < 1e-12);
        assert_eq!(bernoulli_expected_hamming(5, 0.0, &t2).unwrap(), 0.0);
        assert_eq!(bernoulli_expected_hamming(5, 1.0, &t2).unwrap(), 0.0);
        let swap = MoveSequence::parse("T1c1").unwrap();
        assert!((bernoulli_expected_hamming(4, 0.5, &swap).unwrap() - 4.0).abs() < 1e-12);
        assert!(bernoulli_expected_hamming(4, 1.5, &swap).is_err());
    }

    #[test]
    fn single_swap_formula_matches_simulation() {
        // independent check of the fixed-point count: simulate 10⁵ Bernoulli(½) 4×4 grids
        let swap = MoveSequence::parse("T1c1").unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        let trials = 100_000;
        let mut sum = 0.0;
        let mut sum_sq = 0.0;
        for _ in 0..trials {
            let c = Configuration::from_cells(4, (0..16).map(|_| rng.gen_bool(0.5)).collect()).unwrap();
            let h = crate::grid::hamming(&c, &crate::grid::apply_sequence(&c, &swap).unwrap()).unwrap() as f64;
            sum += h;
            sum_sq += h * h;
        }
        let mean = sum / trials as f64;
        let se = ((sum_sq / trials as f64 - mean * mean) / trials as f64).sqrt();
        assert!((mean - 4.0).abs() < 4.0 * se, "mean {mean}");
    }

    #[test]
    fn batch_means_on_constant_series() {
        assert_eq!(batch_means(&[2.0; 200], 50), (2.0, 0.0));
        let (m, _) = batch_means(&[1.0, 3.0], 50);
        assert_eq!(m, 2.0);
    }
}
