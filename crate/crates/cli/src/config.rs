use std::fs;
use std::path::Path;

use hopsig::hopfield::LearnConfig;
use hopsig::verifier::{Canvas, EnrollConfig, SynthParams, VerificationConfig};
use serde::Deserialize;

/// Settings read from `--config`. Every section is optional and missing
/// keys keep their built-in defaults.
#[derive(Clone, Debug, Default, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub seed: Option<u64>,
    pub canvas: Option<Canvas>,
    pub learn: LearnConfig,
    pub verify: VerificationConfig,
    pub synth: SynthParams,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, String> {
        let text = fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
        toml::from_str(&text).map_err(|e| format!("{}: {e}", path.display()))
    }

    /// Applies the global flags, which win over the file.
    pub fn override_with(&mut self, seed: Option<u64>, canvas: Option<Canvas>) {
        if seed.is_some() {
            self.seed = seed;
        }
        if canvas.is_some() {
            self.canvas = canvas;
        }
        if let Some(seed) = self.seed {
            self.verify.seed = seed;
        }
    }

    pub fn enroll_config(&self) -> EnrollConfig {
        EnrollConfig {
            canvas: self.canvas.unwrap_or_default(),
            learn: self.learn.clone(),
        }
    }

    pub fn validate(&self) -> Result<(), String> {
        let canvas = self.canvas.unwrap_or_default();
        if canvas.width == 0 || canvas.height == 0 {
            return Err("canvas dimensions must be at least 1".into());
        }
        self.learn.validate().map_err(|e| e.to_string())?;
        self.verify.validate().map_err(|e| e.to_string())?;
        self.synth.validate().map_err(|e| e.to_string())
    }
}

/// Parses `WxH`, e.g. `64x64`.
pub fn parse_canvas(text: &str) -> Result<Canvas, String> {
    let (w, h) = text
        .split_once(['x', 'X'])
        .ok_or_else(|| format!("expected WxH, got {text:?}"))?;
    let width: usize = w.trim().parse().map_err(|_| format!("bad width in {text:?}"))?;
    let height: usize = h.trim().parse().map_err(|_| format!("bad height in {text:?}"))?;
    if width == 0 || height == 0 {
        return Err("canvas dimensions must be at least 1".into());
    }
    Ok(Canvas { width, height })
}

#[derive(Clone, Debug, PartialEq)]
pub struct Taus(pub Vec<u64>);

/// Parses an ascending tau list: `A..B` (inclusive) or `a,b,c`.
pub fn parse_taus(text: &str) -> Result<Taus, String> {
    let taus: Vec<u64> = if let Some((a, b)) = text.split_once("..") {
        let lo: u64 = a.trim().parse().map_err(|_| format!("bad range start in {text:?}"))?;
        let hi: u64 = b.trim().parse().map_err(|_| format!("bad range end in {text:?}"))?;
        if lo > hi {
            return Err(format!("empty tau range {text:?}"));
        }
        (lo..=hi).collect()
    } else {
        text.split(',')
            .map(|t| t.trim().parse().map_err(|_| format!("bad tau {t:?}")))
            .collect::<Result<_, _>>()?
    };
    if taus.windows(2).any(|w| w[0] >= w[1]) {
        return Err("taus must be strictly ascending".into());
    }
    Ok(Taus(taus))
}
