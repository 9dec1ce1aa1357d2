//! Dataset evaluation: FRR/FAR over a labeled manifest, and operating curves.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{enroll, verify, EnrollConfig, EnrollmentRecord, Verdict, VerificationConfig};
use crate::error::{Error, Result};
use crate::imageops::{load_gray, GrayImage};
use crate::rng::mix;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TrialLabel {
    Genuine,
    Forged,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrialEntry {
    pub path: PathBuf,
    pub label: TrialLabel,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CustomerEntry {
    pub id: String,
    pub references: Vec<PathBuf>,
    pub trials: Vec<TrialEntry>,
}

/// Labeled trials grouped by customer. Relative paths resolve against the
/// directory the manifest was loaded from.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct DatasetManifest {
    pub customers: Vec<CustomerEntry>,
    #[serde(skip)]
    pub base_dir: PathBuf,
}

impl DatasetManifest {
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::input(path, e))?;
        let mut manifest: DatasetManifest =
            serde_json::from_str(&text).map_err(|e| Error::input(path, e))?;
        manifest.base_dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Ok(manifest)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let mut text = serde_json::to_string_pretty(self).expect("manifests serialize");
        text.push('\n');
        fs::write(path, text).map_err(|e| Error::output(path, e))
    }

    pub fn resolve(&self, path: &Path) -> PathBuf {
        if path.is_absolute() {
            path.to_path_buf()
        } else {
            self.base_dir.join(path)
        }
    }

    pub fn trial_count(&self) -> usize {
        self.customers.iter().map(|c| c.trials.len()).sum()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum TrialStatus {
    Verified {
        verdict: Verdict,
        changed_count: usize,
        tau: u64,
        perc_final: f64,
        reached_goal: bool,
        iterations: usize,
    },
    /// The trial could not be processed (unreadable image, failed
    /// enrollment, no foreground). Reported apart from FRR and FAR.
    Unprocessable { reason: String },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrialOutcome {
    pub customer: String,
    pub path: PathBuf,
    pub label: TrialLabel,
    #[serde(flatten)]
    pub status: TrialStatus,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub genuine_total: usize,
    pub genuine_verified: usize,
    pub genuine_discarded: usize,
    pub forged_total: usize,
    pub forged_verified: usize,
    pub forged_discarded: usize,
    pub unprocessable: usize,
    pub genuine_verified_pct: f64,
    pub genuine_discarded_pct: f64,
    pub forged_verified_pct: f64,
    pub forged_discarded_pct: f64,
    /// Percentage of genuine signatures rejected.
    pub frr: f64,
    /// Percentage of forged signatures accepted.
    pub far: f64,
}

fn percent(part: usize, whole: usize) -> f64 {
    if whole == 0 {
        0.0
    } else {
        part as f64 / whole as f64 * 100.0
    }
}

impl EvalReport {
    /// Tallies verdicts; `verdict_of` maps each processed trial to a verdict.
    fn tally<'a>(
        outcomes: impl IntoIterator<Item = &'a TrialOutcome>,
        verdict_of: impl Fn(&TrialStatus) -> Option<Verdict>,
    ) -> Self {
        let (mut gv, mut gd, mut fv, mut fd, mut bad) = (0, 0, 0, 0, 0);
        for o in outcomes {
            match (o.label, verdict_of(&o.status)) {
                (_, None) => bad += 1,
                (TrialLabel::Genuine, Some(Verdict::Genuine)) => gv += 1,
                (TrialLabel::Genuine, Some(Verdict::Forged)) => gd += 1,
                (TrialLabel::Forged, Some(Verdict::Genuine)) => fv += 1,
                (TrialLabel::Forged, Some(Verdict::Forged)) => fd += 1,
            }
        }
        let (gt, ft) = (gv + gd, fv + fd);
        EvalReport {
            genuine_total: gt,
            genuine_verified: gv,
            genuine_discarded: gd,
            forged_total: ft,
            forged_verified: fv,
            forged_discarded: fd,
            unprocessable: bad,
            genuine_verified_pct: percent(gv, gt),
            genuine_discarded_pct: percent(gd, gt),
            forged_verified_pct: percent(fv, ft),
            forged_discarded_pct: percent(fd, ft),
            frr: percent(gd, gt),
            far: percent(fv, ft),
        }
    }

    pub fn from_outcomes(outcomes: &[TrialOutcome]) -> Self {
        Self::tally(outcomes, |s| match s {
            TrialStatus::Verified { verdict, .. } => Some(*verdict),
            TrialStatus::Unprocessable { .. } => None,
        })
    }

    /// Two-row table of verified/discarded percentages.
    pub fn render_table(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "{:<20} {:>9} {:>10}", "Type", "Verified", "Discarded");
        let _ = writeln!(
            out,
            "{:<20} {:>8.2}% {:>9.2}%",
            "Genuine Signatures", self.genuine_verified_pct, self.genuine_discarded_pct
        );
        let _ = writeln!(
            out,
            "{:<20} {:>8.2}% {:>9.2}%",
            "Forge Signatures", self.forged_verified_pct, self.forged_discarded_pct
        );
        let _ = writeln!(
            out,
            "FRR {:.2}%  FAR {:.2}%  ({} genuine, {} forged, {} unprocessable)",
            self.frr, self.far, self.genuine_total, self.forged_total, self.unprocessable
        );
        out
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct OperatingPoint {
    pub tau: u64,
    pub frr: f64,
    pub far: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Evaluation {
    pub report: EvalReport,
    pub trials: Vec<TrialOutcome>,
}

impl Evaluation {
    /// Re-applies the verdict rule at each absolute budget in `taus` to the
    /// cached changed-pixel counts.
    pub fn operating_curve(&self, taus: &[u64]) -> Result<Vec<OperatingPoint>> {
        if taus.is_empty() {
            return Err(Error::invalid("tau list is empty"));
        }
        if taus.windows(2).any(|w| w[0] > w[1]) {
            return Err(Error::invalid("tau list must be ascending"));
        }
        Ok(taus
            .iter()
            .map(|&tau| {
                let report = EvalReport::tally(&self.trials, |s| match s {
                    TrialStatus::Verified { changed_count, .. } => Some(if *changed_count as u64 > tau {
                        Verdict::Forged
                    } else {
                        Verdict::Genuine
                    }),
                    TrialStatus::Unprocessable { .. } => None,
                });
                OperatingPoint {
                    tau,
                    frr: report.frr,
                    far: report.far,
                }
            })
            .collect())
    }
}

pub fn curve_csv(points: &[OperatingPoint]) -> String {
    let mut out = String::from("tau,frr,far\n");
    for p in points {
        let _ = writeln!(out, "{},{},{}", p.tau, p.frr, p.far);
    }
    out
}

/// Enrolls every customer and verifies each of their trials.
///
/// Trials of one customer run in parallel against a shared read-only
/// record; each trial gets its own seed derived from `config.seed` and its
/// position in the manifest, so results do not depend on scheduling.
pub fn evaluate(
    manifest: &DatasetManifest,
    enroll_config: &EnrollConfig,
    config: &VerificationConfig,
) -> Result<Evaluation> {
    config.validate()?;
    enroll_config.learn.validate()?;
    if manifest.trial_count() == 0 {
        return Err(Error::invalid("manifest lists no trials"));
    }

    let mut trials = Vec::with_capacity(manifest.trial_count());
    let mut ordinal = 0u64;
    for customer in &manifest.customers {
        let record = enroll_customer(manifest, customer, enroll_config);
        let first = ordinal;
        ordinal += customer.trials.len() as u64;
        let outcomes: Vec<TrialOutcome> = customer
            .trials
            .par_iter()
            .enumerate()
            .map(|(k, trial)| {
                let status = match &record {
                    Err(reason) => TrialStatus::Unprocessable {
                        reason: format!("enrollment failed: {reason}"),
                    },
                    Ok(record) => {
                        let trial_config = VerificationConfig {
                            seed: mix(config.seed, first + k as u64),
                            ..config.clone()
                        };
                        run_trial(manifest, record, trial, &trial_config)
                    }
                };
                TrialOutcome {
                    customer: customer.id.clone(),
                    path: trial.path.clone(),
                    label: trial.label,
                    status,
                }
            })
            .collect();
        trials.extend(outcomes);
    }
    let report = EvalReport::from_outcomes(&trials);
    Ok(Evaluation { report, trials })
}

fn enroll_customer(
    manifest: &DatasetManifest,
    customer: &CustomerEntry,
    config: &EnrollConfig,
) -> std::result::Result<EnrollmentRecord, String> {
    let images: Vec<GrayImage> = customer
        .references
        .iter()
        .filter_map(|p| match load_gray(manifest.resolve(p)) {
            Ok(img) => Some(img),
            Err(e) => {
                log::warn!("{}: {e}", customer.id);
                None
            }
        })
        .collect();
    if images.is_empty() {
        return Err("no readable reference images".into());
    }
    enroll(&customer.id, &images, config).map_err(|e| e.to_string())
}

fn run_trial(
    manifest: &DatasetManifest,
    record: &EnrollmentRecord,
    trial: &TrialEntry,
    config: &VerificationConfig,
) -> TrialStatus {
    let result = load_gray(manifest.resolve(&trial.path)).and_then(|img| verify(record, &img, config));
    match result {
        Ok(r) => TrialStatus::Verified {
            verdict: r.verdict,
            changed_count: r.changed_count,
            tau: r.tau,
            perc_final: r.perc_final,
            reached_goal: r.reached_goal,
            iterations: r.trace.rows.len(),
        },
        Err(e) => TrialStatus::Unprocessable {
            reason: e.to_string(),
        },
    }
}

/// One evaluation pass, then the operating curve over `taus`.
pub fn sweep_threshold(
    manifest: &DatasetManifest,
    enroll_config: &EnrollConfig,
    config: &VerificationConfig,
    taus: &[u64],
) -> Result<Vec<OperatingPoint>> {
    if taus.is_empty() {
        return Err(Error::invalid("tau list is empty"));
    }
    evaluate(manifest, enroll_config, config)?.operating_curve(taus)
}
