//! Discrete Hopfield network over `{0,1}` neuron states.
//!
//! Couplings are symmetric with a zero diagonal. Neuron `i` sees the
//! activation `S_i = Σ_j w_ji x_j` and takes state 1 iff `S_i >= 0`. Under
//! asynchronous single-neuron updates the energy
//!
//! ```text
//! E = -1/2 Σ_j Σ_{i≠j} w_ji x_i x_j
//! ```
//!
//! never increases: a 1→0 flip lowers it by `|S_i| > 0`, a 0→1 flip lowers it
//! by `S_i >= 0`, so the only energy-neutral move is a 0→1 flip at `S_i = 0`.
//!
//! Storage uses the corrective rule: for every training pattern and neuron,
//! a neuron that would switch on while it should be off has its couplings
//! lowered by `(rate + S_i)/n`, and one that would switch off while it
//! should be on has them raised by `(rate - S_i)/n`. Every correction is
//! written to `w_ij` and `w_ji` alike so the matrix stays symmetric.

use std::ops::Index;

use log::warn;
use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng;

/// Symmetric, zero-diagonal coupling matrix stored row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct WeightMatrix {
    n: usize,
    values: Vec<f64>,
}

impl WeightMatrix {
    pub fn zeros(n: usize) -> Self {
        WeightMatrix {
            n,
            values: vec![0.0; n * n],
        }
    }

    /// Builds a matrix from row-major values, checking symmetry, the zero
    /// diagonal and finiteness.
    pub fn from_row_major(n: usize, values: Vec<f64>) -> Result<Self> {
        if values.len() != n * n {
            return Err(Error::invalid(format!(
                "weight matrix of size {n} needs {} values, got {}",
                n * n,
                values.len()
            )));
        }
        let m = WeightMatrix { n, values };
        m.check_invariants()?;
        Ok(m)
    }

    /// Builds a matrix from a coupling function evaluated on the upper
    /// triangle; the lower triangle is mirrored and the diagonal is zero.
    pub fn from_fn(n: usize, mut coupling: impl FnMut(usize, usize) -> f64) -> Result<Self> {
        let mut m = WeightMatrix::zeros(n);
        for i in 0..n {
            for j in (i + 1)..n {
                let w = coupling(i, j);
                m.values[i * n + j] = w;
                m.values[j * n + i] = w;
            }
        }
        m.check_invariants()?;
        Ok(m)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.n + j]
    }

    /// Row `i`; by symmetry this is also the column of couplings into neuron `i`.
    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.n..(i + 1) * self.n]
    }

    pub fn as_row_major(&self) -> &[f64] {
        &self.values
    }

    pub fn check_invariants(&self) -> Result<()> {
        let n = self.n;
        for i in 0..n {
            if self.values[i * n + i] != 0.0 {
                return Err(Error::invalid(format!("nonzero diagonal at {i}")));
            }
            for j in (i + 1)..n {
                let a = self.values[i * n + j];
                let b = self.values[j * n + i];
                if !a.is_finite() || !b.is_finite() {
                    return Err(Error::invalid(format!("non-finite coupling at ({i},{j})")));
                }
                if a != b {
                    return Err(Error::invalid(format!("asymmetric coupling at ({i},{j})")));
                }
            }
        }
        Ok(())
    }

    fn add_symmetric(&mut self, i: usize, j: usize, delta: f64) {
        debug_assert_ne!(i, j);
        self.values[i * self.n + j] += delta;
        self.values[j * self.n + i] += delta;
    }
}

/// Vector of `{0,1}` neuron states.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<u8>", into = "Vec<u8>")]
pub struct StateVector {
    bits: Vec<u8>,
}

impl StateVector {
    pub fn new(bits: Vec<u8>) -> Result<Self> {
        if let Some(pos) = bits.iter().position(|&b| b > 1) {
            return Err(Error::invalid(format!(
                "state bit {pos} is {}, expected 0 or 1",
                bits[pos]
            )));
        }
        Ok(StateVector { bits })
    }

    pub fn zeros(n: usize) -> Self {
        StateVector { bits: vec![0; n] }
    }

    pub fn ones(n: usize) -> Self {
        StateVector { bits: vec![1; n] }
    }

    pub fn from_bools(bools: impl IntoIterator<Item = bool>) -> Self {
        StateVector {
            bits: bools.into_iter().map(u8::from).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn bits(&self) -> &[u8] {
        &self.bits
    }

    pub fn into_bits(self) -> Vec<u8> {
        self.bits
    }

    pub fn set(&mut self, i: usize, bit: bool) {
        self.bits[i] = u8::from(bit);
    }

    pub fn count_ones(&self) -> usize {
        self.bits.iter().filter(|&&b| b == 1).count()
    }

    pub fn hamming(&self, other: &StateVector) -> usize {
        self.bits
            .iter()
            .zip(&other.bits)
            .filter(|(a, b)| a != b)
            .count()
    }

    pub fn complement(&self) -> StateVector {
        StateVector {
            bits: self.bits.iter().map(|b| 1 - b).collect(),
        }
    }

    fn with_bias(&self) -> StateVector {
        let mut bits = Vec::with_capacity(self.bits.len() + 1);
        bits.extend_from_slice(&self.bits);
        bits.push(1);
        StateVector { bits }
    }
}

impl TryFrom<Vec<u8>> for StateVector {
    type Error = Error;

    fn try_from(bits: Vec<u8>) -> Result<Self> {
        StateVector::new(bits)
    }
}

impl From<StateVector> for Vec<u8> {
    fn from(s: StateVector) -> Self {
        s.bits
    }
}

impl Index<usize> for StateVector {
    type Output = u8;

    fn index(&self, i: usize) -> &u8 {
        &self.bits[i]
    }
}

fn check_dims(weights: &WeightMatrix, state: &StateVector) -> Result<()> {
    if weights.n() != state.len() {
        return Err(Error::invalid(format!(
            "state has {} neurons, weights expect {}",
            state.len(),
            weights.n()
        )));
    }
    Ok(())
}

fn check_index(n: usize, i: usize) -> Result<()> {
    if i >= n {
        return Err(Error::invalid(format!("neuron index {i} out of range 0..{n}")));
    }
    Ok(())
}

#[inline]
fn activation(weights: &WeightMatrix, bits: &[u8], i: usize) -> f64 {
    weights
        .row(i)
        .iter()
        .zip(bits)
        .filter(|(_, &b)| b == 1)
        .map(|(w, _)| w)
        .sum()
}

/// Activation `S_i = Σ_j w_ji x_j` of neuron `i`.
pub fn weighted_sum(weights: &WeightMatrix, state: &StateVector, i: usize) -> Result<f64> {
    check_dims(weights, state)?;
    check_index(weights.n(), i)?;
    Ok(activation(weights, state.bits(), i))
}

/// `E = -1/2 Σ_j Σ_{i≠j} w_ji x_i x_j`.
pub fn energy(weights: &WeightMatrix, state: &StateVector) -> Result<f64> {
    check_dims(weights, state)?;
    Ok(energy_unchecked(weights, state.bits()))
}

fn energy_unchecked(weights: &WeightMatrix, bits: &[u8]) -> f64 {
    let mut total = 0.0;
    for (j, &xj) in bits.iter().enumerate() {
        if xj == 1 {
            total += activation(weights, bits, j);
        }
    }
    -0.5 * total
}

fn sparse_energy(weights: &WeightMatrix, ones: &[usize]) -> f64 {
    let mut total = 0.0;
    for &j in ones {
        let row = weights.row(j);
        total += ones.iter().map(|&k| row[k]).sum::<f64>();
    }
    -0.5 * total
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct NeuronUpdate {
    pub bit: u8,
    pub flipped: bool,
}

/// Threshold rule for one neuron: state 1 iff its activation is `>= 0`.
///
/// The state is not modified; asynchronous callers write `bit` back before
/// updating the next neuron.
pub fn update_neuron(weights: &WeightMatrix, state: &StateVector, i: usize) -> Result<NeuronUpdate> {
    check_dims(weights, state)?;
    check_index(weights.n(), i)?;
    let bit = u8::from(activation(weights, state.bits(), i) >= 0.0);
    Ok(NeuronUpdate {
        bit,
        flipped: bit != state[i],
    })
}

/// True when no neuron changes under the threshold rule.
pub fn is_fixed_point(weights: &WeightMatrix, state: &StateVector) -> Result<bool> {
    check_dims(weights, state)?;
    Ok((0..weights.n()).all(|i| u8::from(activation(weights, state.bits(), i) >= 0.0) == state[i]))
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LearningRule {
    /// Corrective rule applied to the couplings from the pattern's active
    /// inputs (`x_j = 1`), i.e. the terms that make up `S_i`.
    #[default]
    Corrective,
    /// Corrective rule applied uniformly to every coupling of neuron `i`.
    /// The symmetrized matrix then has the form `w_ij = c_i + c_j`, which
    /// can hold a single pattern but rarely two.
    CorrectiveUniform,
    /// Outer-product storage over patterns mapped to `±1`, scaled by `1/n`.
    /// Included for comparison.
    Hebbian,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LearnConfig {
    pub learning_rate: f64,
    pub max_epochs: usize,
    /// Appends a neuron clamped to 1, which acts as a learned threshold.
    /// Without it the all-zero pattern can never be stable, and a single
    /// stored pattern holds its 1-bits only by the tie at `S = 0`, so one
    /// stray 1 in a probe can knock them over. On by default.
    pub include_bias_neuron: bool,
    pub rule: LearningRule,
}

impl Default for LearnConfig {
    fn default() -> Self {
        LearnConfig {
            learning_rate: 0.1,
            max_epochs: 100,
            include_bias_neuron: true,
            rule: LearningRule::Corrective,
        }
    }
}

impl LearnConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(Error::invalid(format!(
                "learning rate must be positive, got {}",
                self.learning_rate
            )));
        }
        if self.max_epochs == 0 {
            return Err(Error::invalid("max_epochs must be at least 1"));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrainSummary {
    pub epochs_used: usize,
    pub all_stable: bool,
    pub corrections: usize,
}

/// Learns couplings for `patterns`, starting from the zero matrix.
///
/// Epochs visit patterns in order and neurons in ascending index, applying
/// each correction immediately. Training stops after the first epoch with
/// no corrections (`all_stable`), or after `max_epochs`.
///
/// With `include_bias_neuron` the returned matrix has one extra trailing
/// neuron; see [`HopfieldMemory`] for recall with it clamped.
pub fn train(patterns: &[StateVector], config: &LearnConfig) -> Result<(WeightMatrix, TrainSummary)> {
    train_observed(patterns, config, |_, _| {})
}

/// [`train`], calling `on_epoch(epoch, weights)` after every epoch.
pub fn train_observed(
    patterns: &[StateVector],
    config: &LearnConfig,
    mut on_epoch: impl FnMut(usize, &WeightMatrix),
) -> Result<(WeightMatrix, TrainSummary)> {
    config.validate()?;
    let first = patterns
        .first()
        .ok_or_else(|| Error::invalid("training needs at least one pattern"))?;
    if first.len() < 2 {
        return Err(Error::invalid("patterns need at least two neurons"));
    }
    if let Some(bad) = patterns.iter().position(|p| p.len() != first.len()) {
        return Err(Error::invalid(format!(
            "pattern {bad} has length {}, expected {}",
            patterns[bad].len(),
            first.len()
        )));
    }

    let owned;
    let patterns = if config.include_bias_neuron {
        owned = patterns.iter().map(StateVector::with_bias).collect::<Vec<_>>();
        &owned[..]
    } else {
        patterns
    };
    let n = patterns[0].len();

    let (weights, summary) = match config.rule {
        LearningRule::Hebbian => {
            let weights = hebbian(patterns)?;
            on_epoch(1, &weights);
            let all_stable = patterns
                .iter()
                .all(|p| (0..n).all(|i| u8::from(activation(&weights, p.bits(), i) >= 0.0) == p[i]));
            let summary = TrainSummary {
                epochs_used: 1,
                all_stable,
                corrections: 0,
            };
            (weights, summary)
        }
        rule => corrective(patterns, config, rule == LearningRule::Corrective, &mut on_epoch),
    };
    if !summary.all_stable {
        warn!(
            "training stopped after {} epochs without every pattern being stable",
            summary.epochs_used
        );
    }
    Ok((weights, summary))
}

fn corrective(
    patterns: &[StateVector],
    config: &LearnConfig,
    active_only: bool,
    on_epoch: &mut impl FnMut(usize, &WeightMatrix),
) -> (WeightMatrix, TrainSummary) {
    let n = patterns[0].len();
    let scale = n as f64;
    let rate = config.learning_rate;
    let mut weights = WeightMatrix::zeros(n);
    let mut corrections = 0;
    let active: Vec<Vec<usize>> = patterns
        .iter()
        .map(|p| (0..n).filter(|&j| p[j] == 1).collect())
        .collect();

    for epoch in 1..=config.max_epochs {
        let mut epoch_corrections = 0;
        for (p, on) in patterns.iter().zip(&active) {
            for i in 0..n {
                let s: f64 = on.iter().map(|&j| weights.get(i, j)).sum();
                let delta = if s >= 0.0 && p[i] == 0 {
                    -(rate + s) / scale
                } else if s < 0.0 && p[i] == 1 {
                    (rate - s) / scale
                } else {
                    continue;
                };
                epoch_corrections += 1;
                if active_only {
                    for &j in on.iter().filter(|&&j| j != i) {
                        weights.add_symmetric(i, j, delta);
                    }
                } else {
                    for j in (0..n).filter(|&j| j != i) {
                        weights.add_symmetric(i, j, delta);
                    }
                }
            }
        }
        corrections += epoch_corrections;
        on_epoch(epoch, &weights);
        if epoch_corrections == 0 {
            return (
                weights,
                TrainSummary {
                    epochs_used: epoch,
                    all_stable: true,
                    corrections,
                },
            );
        }
    }
    (
        weights,
        TrainSummary {
            epochs_used: config.max_epochs,
            all_stable: false,
            corrections,
        },
    )
}

fn hebbian(patterns: &[StateVector]) -> Result<WeightMatrix> {
    let n = patterns[0].len();
    let bipolar: Vec<Vec<f64>> = patterns
        .iter()
        .map(|p| p.bits().iter().map(|&b| 2.0 * f64::from(b) - 1.0).collect())
        .collect();
    WeightMatrix::from_fn(n, |i, j| {
        bipolar.iter().map(|s| s[i] * s[j]).sum::<f64>() / n as f64
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRecord {
    pub sweep: usize,
    pub flips: usize,
    pub energy: f64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct RecallTrace {
    /// Seed of the per-sweep update permutations.
    pub seed: u64,
    pub sweeps: Vec<SweepRecord>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Recall {
    pub state: StateVector,
    pub trace: RecallTrace,
    /// A full sweep made no flips.
    pub converged: bool,
}

/// A flip accepted during recall. `state` is the state after the flip.
#[derive(Debug)]
pub struct FlipEvent<'a> {
    pub sweep: usize,
    pub neuron: usize,
    pub activation: f64,
    pub state: &'a StateVector,
}

/// Asynchronous retrieval from `probe`.
///
/// Each sweep updates every neuron once, in a permutation drawn from
/// `order_seed` and redrawn every sweep. Stops after the first sweep with no
/// flips or after `max_sweeps`.
pub fn recall(
    weights: &WeightMatrix,
    probe: &StateVector,
    max_sweeps: usize,
    order_seed: u64,
) -> Result<Recall> {
    recall_observed(weights, probe, max_sweeps, order_seed, |_| {})
}

pub fn recall_observed(
    weights: &WeightMatrix,
    probe: &StateVector,
    max_sweeps: usize,
    order_seed: u64,
    on_flip: impl FnMut(FlipEvent<'_>),
) -> Result<Recall> {
    check_dims(weights, probe)?;
    run_recall(weights, probe.clone(), weights.n(), max_sweeps, order_seed, on_flip)
}

/// Recall where only neurons `0..free` are updated; the rest stay clamped.
fn run_recall(
    weights: &WeightMatrix,
    mut state: StateVector,
    free: usize,
    max_sweeps: usize,
    order_seed: u64,
    mut on_flip: impl FnMut(FlipEvent<'_>),
) -> Result<Recall> {
    if max_sweeps == 0 {
        return Err(Error::invalid("max_sweeps must be at least 1"));
    }
    let mut rng = rng::seeded(order_seed);
    let mut order: Vec<usize> = (0..free).collect();
    let mut trace = RecallTrace {
        seed: order_seed,
        sweeps: Vec::new(),
    };
    let mut converged = false;
    // Ascending indices of active neurons; sums over it add the same terms
    // in the same order as `activation`.
    let mut ones: Vec<usize> = (0..state.len()).filter(|&j| state[j] == 1).collect();
    for sweep in 1..=max_sweeps {
        order.shuffle(&mut rng);
        let mut flips = 0;
        for &i in &order {
            let row = weights.row(i);
            let s: f64 = ones.iter().map(|&j| row[j]).sum();
            let bit = s >= 0.0;
            if u8::from(bit) != state[i] {
                state.set(i, bit);
                match ones.binary_search(&i) {
                    Ok(at) => {
                        ones.remove(at);
                    }
                    Err(at) => ones.insert(at, i),
                }
                flips += 1;
                on_flip(FlipEvent {
                    sweep,
                    neuron: i,
                    activation: s,
                    state: &state,
                });
            }
        }
        trace.sweeps.push(SweepRecord {
            sweep,
            flips,
            energy: sparse_energy(weights, &ones),
        });
        if flips == 0 {
            converged = true;
            break;
        }
    }
    Ok(Recall {
        state,
        trace,
        converged,
    })
}

/// Trained network together with its training patterns.
///
/// Serializes as `{"n": .., "weights": [row-major], "patterns": [[bits]..]}`,
/// with an extra `"bias_neuron": true` when a clamped bias neuron was
/// appended (the patterns are then one bit shorter than `n`).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "MemoryFile", into = "MemoryFile")]
pub struct HopfieldMemory {
    weights: WeightMatrix,
    patterns: Vec<StateVector>,
    bias_neuron: bool,
}

#[derive(Serialize, Deserialize)]
struct MemoryFile {
    n: usize,
    weights: Vec<f64>,
    patterns: Vec<StateVector>,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    bias_neuron: bool,
}

impl TryFrom<MemoryFile> for HopfieldMemory {
    type Error = Error;

    fn try_from(file: MemoryFile) -> Result<Self> {
        let weights = WeightMatrix::from_row_major(file.n, file.weights)?;
        let expected = file.n - usize::from(file.bias_neuron);
        if let Some(bad) = file.patterns.iter().position(|p| p.len() != expected) {
            return Err(Error::invalid(format!(
                "pattern {bad} has length {}, expected {expected}",
                file.patterns[bad].len()
            )));
        }
        Ok(HopfieldMemory {
            weights,
            patterns: file.patterns,
            bias_neuron: file.bias_neuron,
        })
    }
}

impl From<HopfieldMemory> for MemoryFile {
    fn from(m: HopfieldMemory) -> Self {
        MemoryFile {
            n: m.weights.n,
            weights: m.weights.values,
            patterns: m.patterns,
            bias_neuron: m.bias_neuron,
        }
    }
}

impl HopfieldMemory {
    pub fn store(patterns: Vec<StateVector>, config: &LearnConfig) -> Result<(Self, TrainSummary)> {
        let (weights, summary) = train(&patterns, config)?;
        let memory = HopfieldMemory {
            weights,
            patterns,
            bias_neuron: config.include_bias_neuron,
        };
        Ok((memory, summary))
    }

    pub fn weights(&self) -> &WeightMatrix {
        &self.weights
    }

    pub fn patterns(&self) -> &[StateVector] {
        &self.patterns
    }

    pub fn has_bias_neuron(&self) -> bool {
        self.bias_neuron
    }

    /// Length of the patterns this memory stores and recalls.
    pub fn pattern_len(&self) -> usize {
        self.weights.n - usize::from(self.bias_neuron)
    }

    /// Recall with the bias neuron (if any) clamped to 1 and stripped from
    /// the result.
    pub fn recall(&self, probe: &StateVector, max_sweeps: usize, order_seed: u64) -> Result<Recall> {
        if probe.len() != self.pattern_len() {
            return Err(Error::invalid(format!(
                "probe has {} bits, memory stores {}",
                probe.len(),
                self.pattern_len()
            )));
        }
        if !self.bias_neuron {
            return recall(&self.weights, probe, max_sweeps, order_seed);
        }
        let mut out = run_recall(
            &self.weights,
            probe.with_bias(),
            self.pattern_len(),
            max_sweeps,
            order_seed,
            |_| {},
        )?;
        out.state.bits.pop();
        Ok(out)
    }

    pub fn is_fixed_point(&self, pattern: &StateVector) -> Result<bool> {
        if self.bias_neuron {
            is_fixed_point(&self.weights, &pattern.with_bias())
        } else {
            is_fixed_point(&self.weights, pattern)
        }
    }
}
