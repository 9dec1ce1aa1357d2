//! Node-per-pixel change-detection network.
//!
//! Every pixel of a difference image is a neuron whose state labels it
//! changed (1) or unchanged (0). Pixels are coupled with weight `beta` to
//! their 4- or 8-neighborhood, and each carries a bias
//! `I_p = gain * (2 d_p - 1)` where `d_p` is the difference magnitude
//! normalized by the threshold and clamped to `[0, 1]`. Asynchronous sweeps
//! set `x_p = 1` iff the local field is `>= 0`, which never raises
//!
//! ```text
//! E = -(beta / 2) Σ_{p~q} σ_p σ_q - Σ_p I_p x_p,   σ = 2x - 1   (bipolar)
//! E = -beta Σ_{p~q} x_p x_q - Σ_p I_p x_p                        (unipolar)
//! ```
//!
//! where `p~q` runs over unordered neighbor pairs. The bipolar form is the
//! default: a neighbor votes for its own label either way, so a changed
//! region cannot grow into unchanged pixels just by being adjacent to them.

use std::fmt::Write as _;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::imageops::{init_states, BinaryImage, DifferenceImage, Raster};
use crate::rng;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Neighborhood {
    Four,
    #[default]
    Eight,
}

impl Neighborhood {
    fn offsets(self) -> &'static [(isize, isize)] {
        const FOUR: [(isize, isize); 4] = [(0, -1), (-1, 0), (1, 0), (0, 1)];
        const EIGHT: [(isize, isize); 8] = [
            (-1, -1),
            (0, -1),
            (1, -1),
            (-1, 0),
            (1, 0),
            (-1, 1),
            (0, 1),
            (1, 1),
        ];
        match self {
            Neighborhood::Four => &FOUR,
            Neighborhood::Eight => &EIGHT,
        }
    }
}

/// How a neighbor's state enters the local field.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CouplingForm {
    /// `beta * Σ (2 x_q - 1)`: unchanged neighbors pull toward unchanged.
    #[default]
    Bipolar,
    /// `beta * Σ x_q`: only changed neighbors contribute.
    Unipolar,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitStrategy {
    /// Labels start as the thresholded difference image.
    #[default]
    Thresholded,
    AllUnchanged,
    /// Independent fair coin per pixel, from the build seed.
    Random,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ChangeParams {
    pub beta: f64,
    /// With binary evidence and eight neighbours, a gain between 2 and 4
    /// lets a pixel keep its evidence unless six or more neighbours
    /// disagree. Below 2 the evidence only breaks ties.
    pub bias_gain: f64,
    pub neighborhood: Neighborhood,
    pub coupling: CouplingForm,
}

impl Default for ChangeParams {
    fn default() -> Self {
        ChangeParams {
            beta: 1.0,
            bias_gain: 3.0,
            neighborhood: Neighborhood::Eight,
            coupling: CouplingForm::Bipolar,
        }
    }
}

impl ChangeParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.beta >= 0.0 && self.beta.is_finite()) {
            return Err(Error::invalid(format!("beta must be >= 0, got {}", self.beta)));
        }
        if !(self.bias_gain > 0.0 && self.bias_gain.is_finite()) {
            return Err(Error::invalid(format!(
                "bias_gain must be > 0, got {}",
                self.bias_gain
            )));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PixelNetwork {
    width: usize,
    height: usize,
    labels: BinaryImage,
    bias: Vec<f64>,
    params: ChangeParams,
}

/// Builds the network for `diff`, labels initialized per `init`.
pub fn build(
    diff: &DifferenceImage,
    threshold: u8,
    params: &ChangeParams,
    init: InitStrategy,
    seed: u64,
) -> Result<PixelNetwork> {
    params.validate()?;
    if diff.is_empty() {
        return Err(Error::invalid("difference image is empty"));
    }
    let scale = f64::from(threshold.max(1));
    let bias = diff
        .magnitudes()
        .iter()
        .map(|&m| {
            let evidence = (f64::from(m) / scale).clamp(0.0, 1.0);
            params.bias_gain * (2.0 * evidence - 1.0)
        })
        .collect();
    let (w, h) = (diff.width(), diff.height());
    let labels = match init {
        InitStrategy::Thresholded => init_states(diff, threshold),
        InitStrategy::AllUnchanged => BinaryImage::zeros(w, h),
        InitStrategy::Random => {
            let mut rng = rng::seeded(seed);
            BinaryImage::from_fn(w, h, |_, _| rng.random_bool(0.5))
        }
    };
    Ok(PixelNetwork {
        width: w,
        height: h,
        labels,
        bias,
        params: *params,
    })
}

impl PixelNetwork {
    /// Network with an explicit bias field, mainly for experiments and tests.
    pub fn with_bias(labels: BinaryImage, bias: Vec<f64>, params: &ChangeParams) -> Result<Self> {
        params.validate()?;
        if labels.is_empty() {
            return Err(Error::invalid("network needs at least one pixel"));
        }
        if bias.len() != labels.len() {
            return Err(Error::invalid("bias field size does not match labels"));
        }
        if bias.iter().any(|b| !b.is_finite()) {
            return Err(Error::invalid("bias field must be finite"));
        }
        Ok(PixelNetwork {
            width: labels.width(),
            height: labels.height(),
            labels,
            bias,
            params: *params,
        })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn labels(&self) -> &BinaryImage {
        &self.labels
    }

    pub fn bias(&self) -> &[f64] {
        &self.bias
    }

    pub fn params(&self) -> &ChangeParams {
        &self.params
    }

    /// Indices of the pixels coupled to `p`.
    pub fn neighbors(&self, p: usize) -> impl Iterator<Item = usize> + '_ {
        let (x, y) = ((p % self.width) as isize, (p / self.width) as isize);
        let (w, h) = (self.width as isize, self.height as isize);
        self.params
            .neighborhood
            .offsets()
            .iter()
            .filter_map(move |&(dx, dy)| {
                let (nx, ny) = (x + dx, y + dy);
                (nx >= 0 && ny >= 0 && nx < w && ny < h).then(|| (ny * w + nx) as usize)
            })
    }

    fn field(&self, bits: &[u8], p: usize) -> f64 {
        let votes: f64 = match self.params.coupling {
            CouplingForm::Bipolar => self
                .neighbors(p)
                .map(|q| 2.0 * f64::from(bits[q]) - 1.0)
                .sum(),
            CouplingForm::Unipolar => self.neighbors(p).map(|q| f64::from(bits[q])).sum(),
        };
        self.params.beta * votes + self.bias[p]
    }

    /// Local field `S_p` under the current labels.
    pub fn local_field(&self, p: usize) -> f64 {
        self.field(self.labels.bits(), p)
    }

    fn energy_of(&self, bits: &[u8]) -> f64 {
        let mut coupling = 0.0;
        let mut data = 0.0;
        for p in 0..bits.len() {
            data += self.bias[p] * f64::from(bits[p]);
            // each unordered pair once
            for q in self.neighbors(p).filter(|&q| q > p) {
                coupling += match self.params.coupling {
                    CouplingForm::Bipolar => {
                        0.5 * (2.0 * f64::from(bits[p]) - 1.0) * (2.0 * f64::from(bits[q]) - 1.0)
                    }
                    CouplingForm::Unipolar => f64::from(bits[p] * bits[q]),
                };
            }
        }
        -self.params.beta * coupling - data
    }

    pub fn energy(&self) -> f64 {
        self.energy_of(self.labels.bits())
    }

    /// Energy of an arbitrary labeling of this network's pixels.
    pub fn energy_for(&self, labels: &BinaryImage) -> Result<f64> {
        self.check_grid(labels)?;
        Ok(self.energy_of(labels.bits()))
    }

    fn check_grid(&self, grid: &BinaryImage) -> Result<()> {
        if grid.width() != self.width || grid.height() != self.height {
            return Err(Error::invalid(format!(
                "grid is {}x{}, network is {}x{}",
                grid.width(),
                grid.height(),
                self.width,
                self.height
            )));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionCounts {
    /// Unchanged in truth and label.
    pub nt: u64,
    /// Changed in truth and label.
    pub pt: u64,
    /// Changed in truth, labeled unchanged.
    pub nf: u64,
    /// Unchanged in truth, labeled changed.
    pub pf: u64,
}

impl ConfusionCounts {
    pub fn total(&self) -> u64 {
        self.nt + self.pt + self.nf + self.pf
    }

    pub fn perc(&self) -> Result<f64> {
        perc(self)
    }
}

pub fn confusion(labels: &BinaryImage, truth: &BinaryImage) -> Result<ConfusionCounts> {
    if labels.width() != truth.width() || labels.height() != truth.height() {
        return Err(Error::invalid("labels and truth differ in size"));
    }
    let mut c = ConfusionCounts::default();
    for (&l, &t) in labels.bits().iter().zip(truth.bits()) {
        match (t, l) {
            (0, 0) => c.nt += 1,
            (1, 1) => c.pt += 1,
            (1, 0) => c.nf += 1,
            _ => c.pf += 1,
        }
    }
    Ok(c)
}

/// Percentage of pixels whose label agrees with the truth grid.
pub fn perc(counts: &ConfusionCounts) -> Result<f64> {
    let total = counts.total();
    if total == 0 {
        return Err(Error::degenerate("confusion counts are all zero"));
    }
    Ok(((counts.nt + counts.pt) as f64 / total as f64) * 100.0)
}

pub fn changed_count(labels: &BinaryImage) -> usize {
    labels.count_ones()
}

/// Pixels whose label differs from every one of their neighbors.
pub fn isolated_pixels(labels: &BinaryImage, neighborhood: Neighborhood) -> usize {
    let (w, h) = (labels.width() as isize, labels.height() as isize);
    let bits = labels.bits();
    (0..bits.len())
        .filter(|&p| {
            let (x, y) = ((p as isize) % w, (p as isize) / w);
            let mut any = false;
            for &(dx, dy) in neighborhood.offsets() {
                let (nx, ny) = (x + dx, y + dy);
                if nx >= 0 && ny >= 0 && nx < w && ny < h {
                    any = true;
                    if bits[(ny * w + nx) as usize] == bits[p] {
                        return false;
                    }
                }
            }
            any
        })
        .count()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub iteration: usize,
    pub energy: f64,
    pub perc: f64,
    pub changed_count: usize,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct IterationTrace {
    pub rows: Vec<IterationRecord>,
}

impl IterationTrace {
    pub const CSV_HEADER: &'static str = "iteration,energy,perc,changed_count";

    pub fn to_csv(&self) -> String {
        let mut out = String::from(Self::CSV_HEADER);
        out.push('\n');
        for r in &self.rows {
            let _ = writeln!(out, "{},{},{},{}", r.iteration, r.energy, r.perc, r.changed_count);
        }
        out
    }

    pub fn last(&self) -> Option<&IterationRecord> {
        self.rows.last()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RelaxConfig {
    pub goal_perc: f64,
    pub max_iterations: usize,
}

impl Default for RelaxConfig {
    fn default() -> Self {
        RelaxConfig {
            goal_perc: 95.0,
            max_iterations: 100,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Relaxation {
    pub labels: BinaryImage,
    pub trace: IterationTrace,
    pub reached_goal: bool,
    /// The last sweep made no flips.
    pub converged: bool,
}

/// A flip accepted during relaxation; `labels` is the labeling after it.
#[derive(Debug)]
pub struct RelaxFlip<'a> {
    pub iteration: usize,
    pub pixel: usize,
    pub field: f64,
    pub labels: &'a BinaryImage,
}

/// Runs asynchronous sweeps (seeded permutation, redrawn per sweep) until
/// the labels agree with `truth` on at least `goal_perc` percent of pixels,
/// a sweep makes no flips, or `max_iterations` sweeps have run.
pub fn relax(
    network: &PixelNetwork,
    truth: &BinaryImage,
    config: &RelaxConfig,
    order_seed: u64,
) -> Result<Relaxation> {
    relax_observed(network, truth, config, order_seed, |_| {})
}

pub fn relax_observed(
    network: &PixelNetwork,
    truth: &BinaryImage,
    config: &RelaxConfig,
    order_seed: u64,
    mut on_flip: impl FnMut(RelaxFlip<'_>),
) -> Result<Relaxation> {
    network.check_grid(truth)?;
    if !(config.goal_perc > 0.0 && config.goal_perc <= 100.0) {
        return Err(Error::invalid(format!(
            "goal_perc must be in (0, 100], got {}",
            config.goal_perc
        )));
    }
    if config.max_iterations == 0 {
        return Err(Error::invalid("max_iterations must be at least 1"));
    }

    let mut labels = network.labels.clone();
    let mut order: Vec<usize> = (0..labels.len()).collect();
    let mut rng = rng::seeded(order_seed);
    let mut trace = IterationTrace::default();
    let mut reached_goal = false;
    let mut converged = false;

    for iteration in 1..=config.max_iterations {
        order.shuffle(&mut rng);
        let mut flips = 0;
        for &p in &order {
            let s = network.field(labels.bits(), p);
            let bit = s >= 0.0;
            if u8::from(bit) != labels.bits()[p] {
                labels.set_index(p, bit);
                flips += 1;
                on_flip(RelaxFlip {
                    iteration,
                    pixel: p,
                    field: s,
                    labels: &labels,
                });
            }
        }
        let perc = confusion(&labels, truth)?.perc()?;
        trace.rows.push(IterationRecord {
            iteration,
            energy: network.energy_of(labels.bits()),
            perc,
            changed_count: labels.count_ones(),
        });
        reached_goal = perc >= config.goal_perc;
        converged = flips == 0;
        if reached_goal || converged {
            break;
        }
    }
    Ok(Relaxation {
        labels,
        trace,
        reached_goal,
        converged,
    })
}
