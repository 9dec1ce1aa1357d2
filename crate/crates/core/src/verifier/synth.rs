//! Seeded synthetic signature corpus.
//!
//! Each customer owns a base glyph: a few connected strokes that wander left
//! to right, drawn with a round pen through a Catmull-Rom spline. Genuine
//! samples jitter the glyph's control points and translate it; random
//! forgeries are genuine-style renderings of another customer's glyph, and
//! skilled forgeries perturb the customer's own control points by
//! `forgery_divergence`. Forgeries alternate between the two kinds.

use std::fs;
use std::path::{Path, PathBuf};

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use super::eval::{CustomerEntry, DatasetManifest, TrialEntry, TrialLabel};
use crate::error::{Error, Result};
use crate::imageops::GrayImage;
use crate::rng::{mix, seeded};

/// Seed of the bundled synthetic dataset.
pub const DEFAULT_SEED: u64 = 83;

const PAPER: f64 = 236.0;
const INK: f64 = 38.0;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SynthParams {
    pub customers: usize,
    pub references_per: usize,
    pub genuine_per: usize,
    pub forged_per: usize,
    /// Drawing field size in pixels.
    pub width: usize,
    pub height: usize,
    pub pen_radius: f64,
    /// Standard deviation of genuine control-point jitter, in pixels.
    pub jitter: f64,
    /// Standard deviation of skilled-forgery control-point displacement.
    pub forgery_divergence: f64,
    /// Largest translation of a sample inside the field, in pixels.
    pub max_shift: usize,
    /// Standard deviation of additive gray-level noise.
    pub noise: f64,
}

impl Default for SynthParams {
    fn default() -> Self {
        SynthParams {
            customers: 10,
            references_per: 4,
            genuine_per: 4,
            forged_per: 4,
            width: 128,
            height: 96,
            pen_radius: 3.0,
            jitter: 0.45,
            forgery_divergence: 2.0,
            max_shift: 6,
            noise: 5.0,
        }
    }
}

impl SynthParams {
    pub fn validate(&self) -> Result<()> {
        if self.customers == 0 || self.references_per == 0 || self.genuine_per == 0 || self.forged_per == 0 {
            return Err(Error::invalid("synthetic dataset counts must be at least 1"));
        }
        let margin = 2 * (self.max_shift + self.pen_radius.ceil() as usize + 4);
        if self.width <= margin || self.height <= margin {
            return Err(Error::invalid("drawing field too small for pen and shift"));
        }
        for (name, v) in [
            ("pen_radius", self.pen_radius),
            ("jitter", self.jitter),
            ("forgery_divergence", self.forgery_divergence),
            ("noise", self.noise),
        ] {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(Error::invalid(format!("{name} must be >= 0, got {v}")));
            }
        }
        Ok(())
    }
}

type Stroke = Vec<(f64, f64)>;

#[derive(Clone, Debug)]
struct Glyph {
    strokes: Vec<Stroke>,
}

impl Glyph {
    fn random(rng: &mut ChaCha8Rng, params: &SynthParams) -> Glyph {
        let margin = (params.max_shift as f64) + params.pen_radius + 6.0;
        let (x_min, x_max) = (margin, params.width as f64 - margin);
        let (y_min, y_max) = (margin, params.height as f64 - margin);
        let stroke_count = rng.random_range(2..=3);
        let span = (x_max - x_min) / stroke_count as f64;
        let strokes = (0..stroke_count)
            .map(|s| {
                let points = rng.random_range(5..=7);
                let x0 = x_min + span * s as f64;
                (0..points)
                    .map(|k| {
                        let base = x0 + span * (k as f64 + 0.5) / points as f64;
                        let x = (base + rng.random_range(-0.6..0.6) * span / points as f64)
                            .clamp(x_min, x_max);
                        let y = rng.random_range(y_min..y_max);
                        (x, y)
                    })
                    .collect()
            })
            .collect();
        Glyph { strokes }
    }

    fn perturbed(&self, rng: &mut ChaCha8Rng, sigma: f64, params: &SynthParams) -> Glyph {
        if sigma == 0.0 {
            return self.clone();
        }
        let normal = Normal::new(0.0, sigma).expect("sigma is finite and >= 0");
        let margin = (params.max_shift as f64) + params.pen_radius + 2.0;
        let (w, h) = (params.width as f64, params.height as f64);
        let strokes = self
            .strokes
            .iter()
            .map(|stroke| {
                stroke
                    .iter()
                    .map(|&(x, y)| {
                        (
                            (x + normal.sample(rng)).clamp(margin, w - margin),
                            (y + normal.sample(rng)).clamp(margin, h - margin),
                        )
                    })
                    .collect()
            })
            .collect();
        Glyph { strokes }
    }

    fn render(&self, rng: &mut ChaCha8Rng, params: &SynthParams) -> GrayImage {
        let (w, h) = (params.width, params.height);
        let shift = params.max_shift as i64;
        let dx = rng.random_range(-shift..=shift) as f64;
        let dy = rng.random_range(-shift..=shift) as f64;
        let mut ink = vec![false; w * h];
        let r = params.pen_radius;
        for stroke in &self.strokes {
            for (x, y) in spline(stroke) {
                stamp(&mut ink, w, h, x + dx, y + dy, r);
            }
        }
        let noise = (params.noise > 0.0).then(|| Normal::new(0.0, params.noise).expect("noise >= 0"));
        let pixels = ink
            .iter()
            .map(|&is_ink| {
                let base = if is_ink { INK } else { PAPER };
                let v = base + noise.as_ref().map_or(0.0, |n| n.sample(rng));
                v.round().clamp(0.0, 255.0) as u8
            })
            .collect();
        GrayImage::new(w, h, pixels).expect("field size matches")
    }
}

/// Catmull-Rom samples through the control points, about half a pixel apart.
fn spline(points: &[(f64, f64)]) -> Vec<(f64, f64)> {
    if points.len() < 2 {
        return points.to_vec();
    }
    let at = |i: isize| points[i.clamp(0, points.len() as isize - 1) as usize];
    let mut out = Vec::new();
    for i in 0..points.len() as isize - 1 {
        let (p0, p1, p2, p3) = (at(i - 1), at(i), at(i + 1), at(i + 2));
        let len = ((p2.0 - p1.0).powi(2) + (p2.1 - p1.1).powi(2)).sqrt();
        let steps = (len * 2.0).ceil().max(1.0) as usize;
        for s in 0..steps {
            let t = s as f64 / steps as f64;
            let (t2, t3) = (t * t, t * t * t);
            let c = |a: f64, b: f64, c: f64, d: f64| {
                0.5 * (2.0 * b + (c - a) * t + (2.0 * a - 5.0 * b + 4.0 * c - d) * t2
                    + (3.0 * b - a - 3.0 * c + d) * t3)
            };
            out.push((c(p0.0, p1.0, p2.0, p3.0), c(p0.1, p1.1, p2.1, p3.1)));
        }
    }
    out.push(*points.last().expect("nonempty"));
    out
}

fn stamp(ink: &mut [bool], w: usize, h: usize, cx: f64, cy: f64, r: f64) {
    let x0 = (cx - r).floor().max(0.0) as usize;
    let y0 = (cy - r).floor().max(0.0) as usize;
    let x1 = ((cx + r).ceil() as usize).min(w - 1);
    let y1 = ((cy + r).ceil() as usize).min(h - 1);
    for y in y0..=y1 {
        for x in x0..=x1 {
            let (px, py) = (x as f64 + 0.5, y as f64 + 0.5);
            if (px - cx).powi(2) + (py - cy).powi(2) <= r * r {
                ink[y * w + x] = true;
            }
        }
    }
}

fn write_image(dir: &Path, rel: &Path, image: &GrayImage) -> Result<()> {
    let path = dir.join(rel);
    fs::write(&path, image.to_pgm_bytes()).map_err(|e| Error::output(path, e))
}

/// Renders the corpus into `out_dir` as PGM files plus `manifest.json`, and
/// returns the manifest. Output is a pure function of `seed` and `params`.
pub fn synth_dataset(seed: u64, params: &SynthParams, out_dir: impl AsRef<Path>) -> Result<DatasetManifest> {
    params.validate()?;
    let out_dir = out_dir.as_ref();
    fs::create_dir_all(out_dir).map_err(|e| Error::output(out_dir, e))?;

    let bases: Vec<Glyph> = (0..params.customers)
        .map(|c| Glyph::random(&mut seeded(mix(seed, c as u64)), params))
        .collect();

    let mut customers = Vec::with_capacity(params.customers);
    for (c, base) in bases.iter().enumerate() {
        let id = format!("customer_{c:02}");
        let dir = PathBuf::from(&id);
        fs::create_dir_all(out_dir.join(&dir)).map_err(|e| Error::output(out_dir.join(&dir), e))?;
        let mut rng = seeded(mix(mix(seed, c as u64), 0xC0FFEE));

        let mut references = Vec::new();
        for k in 0..params.references_per {
            let rel = dir.join(format!("ref_{k:02}.pgm"));
            let img = base.perturbed(&mut rng, params.jitter, params).render(&mut rng, params);
            write_image(out_dir, &rel, &img)?;
            references.push(rel);
        }

        let mut trials = Vec::new();
        for k in 0..params.genuine_per {
            let rel = dir.join(format!("genuine_{k:02}.pgm"));
            let img = base.perturbed(&mut rng, params.jitter, params).render(&mut rng, params);
            write_image(out_dir, &rel, &img)?;
            trials.push(TrialEntry {
                path: rel,
                label: TrialLabel::Genuine,
            });
        }
        for k in 0..params.forged_per {
            let rel = dir.join(format!("forged_{k:02}.pgm"));
            let random_kind = k % 2 == 0 && params.customers > 1;
            let glyph = if random_kind {
                let other = (c + 1 + k / 2 % (params.customers - 1)) % params.customers;
                bases[other].perturbed(&mut rng, params.jitter, params)
            } else {
                base.perturbed(&mut rng, params.forgery_divergence, params)
            };
            write_image(out_dir, &rel, &glyph.render(&mut rng, params))?;
            trials.push(TrialEntry {
                path: rel,
                label: TrialLabel::Forged,
            });
        }
        customers.push(CustomerEntry {
            id,
            references,
            trials,
        });
    }

    let manifest = DatasetManifest {
        customers,
        base_dir: out_dir.to_path_buf(),
    };
    manifest.save(out_dir.join("manifest.json"))?;
    Ok(manifest)
}
