//! Enrollment and verification of signatures.
//!
//! Enrollment normalizes and binarizes each reference image, then stores the
//! binarizations in a Hopfield memory; the first usable sample is the
//! canonical reference. Verification binarizes the test image on the same
//! canvas, recalls from it, differences it against the reference, and
//! relaxes a change network on that difference until its labels agree with
//! the thresholded difference on `goal_perc` percent of pixels. The number
//! of pixels still labeled changed is the evidence: more than `tau` means
//! forged.

mod eval;
mod synth;

pub use eval::{
    curve_csv, evaluate, sweep_threshold, CustomerEntry, DatasetManifest, EvalReport, Evaluation,
    OperatingPoint, TrialEntry, TrialLabel, TrialOutcome, TrialStatus,
};
pub use synth::{synth_dataset, SynthParams, DEFAULT_SEED};

use serde::{Deserialize, Serialize};

use crate::change::{
    self, changed_count, ChangeParams, CouplingForm, InitStrategy, IterationTrace, Neighborhood,
    RelaxConfig,
};
use crate::error::{Error, Result};
use crate::hopfield::{HopfieldMemory, LearnConfig, RecallTrace, TrainSummary};
use crate::imageops::{
    binarize_otsu, difference, histogram_threshold, init_states, normalize_canvas, BinaryImage,
    GrayImage, Raster, ThresholdMethod,
};
use crate::rng::mix;

const RECALL_STREAM: u64 = 1;
const RELAX_STREAM: u64 = 2;
const INIT_STREAM: u64 = 3;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Canvas {
    pub width: usize,
    pub height: usize,
}

impl Canvas {
    pub fn pixels(&self) -> usize {
        self.width * self.height
    }
}

impl Default for Canvas {
    fn default() -> Self {
        Canvas {
            width: 64,
            height: 64,
        }
    }
}

/// Changed-pixel budget above which a signature is forged.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ForgeryThreshold {
    Pixels(u64),
    /// Fraction of the reference's ink pixels, rounded to whole pixels.
    ForegroundFraction(f64),
}

impl Default for ForgeryThreshold {
    fn default() -> Self {
        ForgeryThreshold::ForegroundFraction(0.12)
    }
}

impl ForgeryThreshold {
    pub fn resolve(&self, reference_foreground: usize) -> u64 {
        match *self {
            ForgeryThreshold::Pixels(n) => n,
            ForgeryThreshold::ForegroundFraction(f) => (f * reference_foreground as f64).round() as u64,
        }
    }

    fn validate(&self) -> Result<()> {
        match *self {
            ForgeryThreshold::ForegroundFraction(f) if !(f >= 0.0 && f.is_finite()) => Err(
                Error::invalid(format!("forgery threshold fraction must be >= 0, got {f}")),
            ),
            _ => Ok(()),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EnrollConfig {
    pub canvas: Canvas,
    pub learn: LearnConfig,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct VerificationConfig {
    pub forgery_threshold: ForgeryThreshold,
    pub goal_perc: f64,
    pub beta: f64,
    pub bias_gain: f64,
    pub neighborhood: Neighborhood,
    pub coupling: CouplingForm,
    pub threshold_method: ThresholdMethod,
    pub init: InitStrategy,
    pub seed: u64,
    pub recall_max_sweeps: usize,
    pub relax_max_iterations: usize,
}

impl Default for VerificationConfig {
    fn default() -> Self {
        let change = ChangeParams::default();
        let relax = RelaxConfig::default();
        VerificationConfig {
            forgery_threshold: ForgeryThreshold::default(),
            goal_perc: relax.goal_perc,
            beta: change.beta,
            bias_gain: change.bias_gain,
            neighborhood: change.neighborhood,
            coupling: change.coupling,
            threshold_method: ThresholdMethod::Otsu,
            init: InitStrategy::Thresholded,
            seed: DEFAULT_SEED,
            recall_max_sweeps: 50,
            relax_max_iterations: relax.max_iterations,
        }
    }
}

impl VerificationConfig {
    pub fn change_params(&self) -> ChangeParams {
        ChangeParams {
            beta: self.beta,
            bias_gain: self.bias_gain,
            neighborhood: self.neighborhood,
            coupling: self.coupling,
        }
    }

    pub fn relax_config(&self) -> RelaxConfig {
        RelaxConfig {
            goal_perc: self.goal_perc,
            max_iterations: self.relax_max_iterations,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.forgery_threshold.validate()?;
        self.change_params().validate()?;
        if !(self.goal_perc > 0.0 && self.goal_perc <= 100.0) {
            return Err(Error::invalid(format!(
                "goal_perc must be in (0, 100], got {}",
                self.goal_perc
            )));
        }
        if self.recall_max_sweeps == 0 || self.relax_max_iterations == 0 {
            return Err(Error::invalid("iteration limits must be at least 1"));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrainMeta {
    pub epochs_used: usize,
    pub all_stable: bool,
    pub corrections: usize,
    pub samples_used: usize,
    pub samples_rejected: usize,
    pub config: LearnConfig,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnrollmentRecord {
    pub customer_id: String,
    pub canvas: Canvas,
    /// Canonical reference: the binarization of the first usable sample.
    pub reference_pattern: BinaryImage,
    pub reference_foreground: usize,
    pub memory: HopfieldMemory,
    pub train_meta: TrainMeta,
}

impl EnrollmentRecord {
    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("records serialize")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let record: EnrollmentRecord =
            serde_json::from_str(text).map_err(|e| Error::invalid(format!("bad record: {e}")))?;
        record.validate()?;
        Ok(record)
    }

    fn validate(&self) -> Result<()> {
        let ref_dims = (self.reference_pattern.width(), self.reference_pattern.height());
        if ref_dims != (self.canvas.width, self.canvas.height) {
            return Err(Error::invalid("reference pattern does not match the canvas"));
        }
        if self.memory.pattern_len() != self.canvas.pixels() {
            return Err(Error::invalid("memory size does not match the canvas"));
        }
        Ok(())
    }
}

/// Normalizes `image` onto `canvas` and binarizes it at its own Otsu cut.
pub fn preprocess(image: &GrayImage, canvas: Canvas) -> Result<BinaryImage> {
    let normalized = normalize_canvas(image, canvas.width, canvas.height)?;
    let (bits, _) = binarize_otsu(&normalized)
        .map_err(|_| Error::degenerate("image has no foreground"))?;
    Ok(bits)
}

pub fn enroll(
    customer_id: &str,
    reference_images: &[GrayImage],
    config: &EnrollConfig,
) -> Result<EnrollmentRecord> {
    if reference_images.is_empty() {
        return Err(Error::invalid("enrollment needs at least one reference image"));
    }
    let mut patterns = Vec::new();
    let mut first_error = None;
    for image in reference_images {
        match preprocess(image, config.canvas) {
            Ok(bits) => patterns.push(bits),
            Err(e) => {
                log::warn!("{customer_id}: skipping reference image: {e}");
                first_error.get_or_insert(e);
            }
        }
    }
    if patterns.is_empty() {
        return Err(first_error.expect("every image failed"));
    }
    enroll_binary(customer_id, patterns, reference_images.len(), config)
}

/// Enrollment from already-binarized canvas patterns.
pub fn enroll_binary(
    customer_id: &str,
    patterns: Vec<BinaryImage>,
    samples_offered: usize,
    config: &EnrollConfig,
) -> Result<EnrollmentRecord> {
    let reference_pattern = patterns
        .first()
        .cloned()
        .ok_or_else(|| Error::invalid("enrollment needs at least one pattern"))?;
    if (reference_pattern.width(), reference_pattern.height())
        != (config.canvas.width, config.canvas.height)
    {
        return Err(Error::invalid("pattern does not match the canvas"));
    }
    let samples_used = patterns.len();
    let states = patterns.iter().map(BinaryImage::to_state).collect();
    let (memory, summary): (HopfieldMemory, TrainSummary) = HopfieldMemory::store(states, &config.learn)?;
    if !summary.all_stable {
        log::warn!(
            "{customer_id}: references not all stable after {} epochs",
            summary.epochs_used
        );
    }
    Ok(EnrollmentRecord {
        customer_id: customer_id.to_string(),
        canvas: config.canvas,
        reference_foreground: reference_pattern.count_ones(),
        reference_pattern,
        memory,
        train_meta: TrainMeta {
            epochs_used: summary.epochs_used,
            all_stable: summary.all_stable,
            corrections: summary.corrections,
            samples_used,
            samples_rejected: samples_offered.saturating_sub(samples_used),
            config: config.learn.clone(),
        },
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Genuine,
    Forged,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerificationResult {
    pub verdict: Verdict,
    pub changed_count: usize,
    pub tau: u64,
    pub perc_final: f64,
    pub reached_goal: bool,
    /// The change network's last sweep made no flips.
    pub converged: bool,
    /// Threshold applied to the difference image.
    pub threshold: u8,
    /// Pixels marked changed in the truth grid.
    pub truth_changed: usize,
    /// Pixels where the recalled state differs from the canonical reference.
    pub recall_mismatch: usize,
    pub recall_converged: bool,
    pub trace: IterationTrace,
    pub recall_trace: RecallTrace,
    pub labels: BinaryImage,
}

pub fn verify(
    record: &EnrollmentRecord,
    test_image: &GrayImage,
    config: &VerificationConfig,
) -> Result<VerificationResult> {
    let probe = preprocess(test_image, record.canvas)?;
    verify_binary(record, &probe, config)
}

/// Verification of a test pattern already binarized on the record's canvas.
pub fn verify_binary(
    record: &EnrollmentRecord,
    probe: &BinaryImage,
    config: &VerificationConfig,
) -> Result<VerificationResult> {
    config.validate()?;
    let canvas = record.canvas;
    if (probe.width(), probe.height()) != (canvas.width, canvas.height) {
        return Err(Error::invalid("test pattern does not match the record's canvas"));
    }

    let recall = record.memory.recall(
        &probe.to_state(),
        config.recall_max_sweeps,
        mix(config.seed, RECALL_STREAM),
    )?;
    let recalled = BinaryImage::from_state(canvas.width, canvas.height, recall.state)?;
    let recall_mismatch = difference(&recalled, &record.reference_pattern)?
        .magnitudes()
        .iter()
        .filter(|&&m| m > 0)
        .count();

    let raw = difference(probe, &record.reference_pattern)?;
    let threshold = match histogram_threshold(&raw, config.threshold_method) {
        Ok(t) => t,
        // all pixels agree, or all disagree: either way nothing to separate
        Err(Error::Degenerate(_)) => 0,
        Err(e) => return Err(e),
    };
    let truth = init_states(&raw, threshold);
    let network = change::build(
        &raw,
        threshold,
        &config.change_params(),
        config.init,
        mix(config.seed, INIT_STREAM),
    )?;
    let relaxation = change::relax(
        &network,
        &truth,
        &config.relax_config(),
        mix(config.seed, RELAX_STREAM),
    )?;

    let changed = changed_count(&relaxation.labels);
    let tau = config.forgery_threshold.resolve(record.reference_foreground);
    let verdict = if changed as u64 > tau {
        Verdict::Forged
    } else {
        Verdict::Genuine
    };
    Ok(VerificationResult {
        verdict,
        changed_count: changed,
        tau,
        perc_final: relaxation.trace.last().map_or(100.0, |r| r.perc),
        reached_goal: relaxation.reached_goal,
        converged: relaxation.converged,
        threshold,
        truth_changed: truth.count_ones(),
        recall_mismatch,
        recall_converged: recall.converged,
        trace: relaxation.trace,
        recall_trace: recall.trace,
        labels: relaxation.labels,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn glyph(width: usize, height: usize, shift: usize) -> GrayImage {
        GrayImage::from_fn(width, height, |x, y| {
            let on_bar = (4..8).contains(&y) && (3 + shift..20 + shift).contains(&x);
            let on_stem = (6 + shift..10 + shift).contains(&x) && (2..18).contains(&y);
            if on_bar || on_stem {
                30
            } else {
                240
            }
        })
    }

    fn small() -> EnrollConfig {
        EnrollConfig {
            canvas: Canvas {
                width: 16,
                height: 16,
            },
            learn: LearnConfig::default(),
        }
    }

    #[test]
    fn blank_reference_is_degenerate() {
        let err = enroll("c", &[GrayImage::filled(20, 20, 250)], &small()).unwrap_err();
        assert!(matches!(err, Error::Degenerate(_)));
    }

    #[test]
    fn record_dimensions() {
        let record = enroll("c", &[glyph(24, 24, 0)], &small()).unwrap();
        assert_eq!(record.memory.weights().n(), 257);
        assert_eq!(record.memory.pattern_len(), 256);
        assert!(record.train_meta.all_stable);
        assert!(record.memory.is_fixed_point(&record.reference_pattern.to_state()).unwrap());
    }

    #[test]
    fn duplicate_references_store_the_same_weights() {
        let one = enroll("c", &[glyph(24, 24, 0)], &small()).unwrap();
        let two = enroll("c", &[glyph(24, 24, 0), glyph(24, 24, 0)], &small()).unwrap();
        assert_eq!(one.memory.weights(), two.memory.weights());
        assert_eq!(one.reference_pattern, two.reference_pattern);
    }

    #[test]
    fn blank_sample_among_references_is_skipped() {
        let record = enroll(
            "c",
            &[GrayImage::filled(10, 10, 255), glyph(24, 24, 1)],
            &small(),
        )
        .unwrap();
        assert_eq!(record.train_meta.samples_used, 1);
        assert_eq!(record.train_meta.samples_rejected, 1);
    }

    #[test]
    fn self_match_is_genuine_with_zero_budget() {
        let img = glyph(24, 24, 0);
        let record = enroll("c", std::slice::from_ref(&img), &small()).unwrap();
        let config = VerificationConfig {
            forgery_threshold: ForgeryThreshold::Pixels(0),
            ..VerificationConfig::default()
        };
        let result = verify(&record, &img, &config).unwrap();
        assert_eq!(result.changed_count, 0);
        assert_eq!(result.verdict, Verdict::Genuine);
        assert_eq!(result.recall_mismatch, 0);
        // translation is removed by the canvas crop
        let shifted = verify(&record, &glyph(24, 24, 3), &config).unwrap();
        assert_eq!(shifted.changed_count, 0);
    }

    #[test]
    fn complement_is_forged() {
        let record = enroll("c", &[glyph(24, 24, 0)], &small()).unwrap();
        let flipped = record.reference_pattern.complement();
        let result = verify_binary(&record, &flipped, &VerificationConfig::default()).unwrap();
        assert_eq!(result.truth_changed, 256);
        assert_eq!(result.changed_count, 256);
        assert_eq!(result.verdict, Verdict::Forged);

        // a budget of the whole canvas accepts everything
        let lenient = VerificationConfig {
            forgery_threshold: ForgeryThreshold::Pixels(256),
            ..VerificationConfig::default()
        };
        let result = verify_binary(&record, &flipped, &lenient).unwrap();
        assert_eq!(result.verdict, Verdict::Genuine);
    }

    #[test]
    fn verdict_follows_budget() {
        let record = enroll("c", &[glyph(24, 24, 0)], &small()).unwrap();
        let mut probe = record.reference_pattern.clone();
        // a solid 4x4 block of extra ink survives relaxation
        for y in 10..14 {
            for x in 10..14 {
                probe.set_index(y * 16 + x, true);
            }
        }
        let result = verify_binary(&record, &probe, &VerificationConfig::default()).unwrap();
        assert!(result.changed_count > 0);
        assert_eq!(
            result.verdict == Verdict::Forged,
            result.changed_count as u64 > result.tau
        );
    }

    #[test]
    fn canvas_mismatch_is_rejected() {
        let record = enroll("c", &[glyph(24, 24, 0)], &small()).unwrap();
        assert!(verify_binary(&record, &BinaryImage::zeros(8, 8), &VerificationConfig::default()).is_err());
    }

    #[test]
    fn foreground_fraction_rounds() {
        assert_eq!(ForgeryThreshold::ForegroundFraction(0.12).resolve(100), 12);
        assert_eq!(ForgeryThreshold::ForegroundFraction(0.12).resolve(104), 12);
        assert_eq!(ForgeryThreshold::ForegroundFraction(0.12).resolve(105), 13);
        assert_eq!(ForgeryThreshold::Pixels(7).resolve(1000), 7);
    }

    #[test]
    fn record_json_round_trip() {
        let record = enroll("c", &[glyph(24, 24, 0)], &small()).unwrap();
        let back = EnrollmentRecord::from_json(&record.to_json()).unwrap();
        assert_eq!(back, record);
        assert!(EnrollmentRecord::from_json("{}").is_err());
    }
}
