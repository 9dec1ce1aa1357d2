//! Image ingestion and preprocessing.
//!
//! Signatures are dark ink on light stock, so a binary image uses 1 for ink
//! (intensity below the threshold) and 0 for background.

use std::fs;
use std::io::Write;
use std::path::Path;

use num_bigint::BigUint;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hopfield::StateVector;

/// Row-major grid of 8-bit values.
pub trait Raster {
    fn width(&self) -> usize;
    fn height(&self) -> usize;
    fn values(&self) -> &[u8];

    fn len(&self) -> usize {
        self.values().len()
    }

    fn is_empty(&self) -> bool {
        self.values().is_empty()
    }
}

fn check_len(width: usize, height: usize, len: usize) -> Result<()> {
    if width.checked_mul(height) != Some(len) {
        return Err(Error::invalid(format!(
            "{width}x{height} image needs {} values, got {len}",
            width.saturating_mul(height)
        )));
    }
    Ok(())
}

fn same_dims(a: &impl Raster, b: &impl Raster) -> Result<()> {
    if a.width() != b.width() || a.height() != b.height() {
        return Err(Error::invalid(format!(
            "image sizes differ: {}x{} vs {}x{}",
            a.width(),
            a.height(),
            b.width(),
            b.height()
        )));
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GrayImage {
    width: usize,
    height: usize,
    pixels: Vec<u8>,
}

impl Raster for GrayImage {
    fn width(&self) -> usize {
        self.width
    }
    fn height(&self) -> usize {
        self.height
    }
    fn values(&self) -> &[u8] {
        &self.pixels
    }
}

impl GrayImage {
    pub fn new(width: usize, height: usize, pixels: Vec<u8>) -> Result<Self> {
        check_len(width, height, pixels.len())?;
        Ok(GrayImage {
            width,
            height,
            pixels,
        })
    }

    pub fn filled(width: usize, height: usize, value: u8) -> Self {
        GrayImage {
            width,
            height,
            pixels: vec![value; width * height],
        }
    }

    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> u8) -> Self {
        let mut pixels = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                pixels.push(f(x, y));
            }
        }
        GrayImage {
            width,
            height,
            pixels,
        }
    }

    pub fn pixels(&self) -> &[u8] {
        &self.pixels
    }

    pub fn get(&self, x: usize, y: usize) -> u8 {
        self.pixels[y * self.width + x]
    }

    pub fn histogram(&self) -> [u64; 256] {
        histogram_of(&self.pixels)
    }

    pub fn inverted(&self) -> GrayImage {
        GrayImage {
            width: self.width,
            height: self.height,
            pixels: self.pixels.iter().map(|v| 255 - v).collect(),
        }
    }

    /// Binary P5 encoding with maxval 255.
    pub fn to_pgm_bytes(&self) -> Vec<u8> {
        let mut out = format!("P5\n{} {}\n255\n", self.width, self.height).into_bytes();
        out.extend_from_slice(&self.pixels);
        out
    }
}

/// Row-major `{0,1}` grid; 1 marks ink or, for label grids, a changed pixel.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct BinaryImage {
    width: usize,
    height: usize,
    bits: Vec<u8>,
}

impl Raster for BinaryImage {
    fn width(&self) -> usize {
        self.width
    }
    fn height(&self) -> usize {
        self.height
    }
    fn values(&self) -> &[u8] {
        &self.bits
    }
}

impl BinaryImage {
    pub fn new(width: usize, height: usize, bits: Vec<u8>) -> Result<Self> {
        check_len(width, height, bits.len())?;
        if bits.iter().any(|&b| b > 1) {
            return Err(Error::invalid("binary image values must be 0 or 1"));
        }
        Ok(BinaryImage {
            width,
            height,
            bits,
        })
    }

    pub fn zeros(width: usize, height: usize) -> Self {
        BinaryImage {
            width,
            height,
            bits: vec![0; width * height],
        }
    }

    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> bool) -> Self {
        let mut bits = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                bits.push(u8::from(f(x, y)));
            }
        }
        BinaryImage {
            width,
            height,
            bits,
        }
    }

    /// Reshapes a state vector into a `width x height` grid.
    pub fn from_state(width: usize, height: usize, state: StateVector) -> Result<Self> {
        check_len(width, height, state.len())?;
        Ok(BinaryImage {
            width,
            height,
            bits: state.into_bits(),
        })
    }

    pub fn to_state(&self) -> StateVector {
        // bits are validated on construction
        StateVector::new(self.bits.clone()).expect("binary image bits are 0/1")
    }

    pub fn bits(&self) -> &[u8] {
        &self.bits
    }

    pub fn get(&self, x: usize, y: usize) -> u8 {
        self.bits[y * self.width + x]
    }

    pub(crate) fn set_index(&mut self, p: usize, bit: bool) {
        self.bits[p] = u8::from(bit);
    }

    pub fn count_ones(&self) -> usize {
        self.bits.iter().filter(|&&b| b == 1).count()
    }

    pub fn complement(&self) -> BinaryImage {
        BinaryImage {
            width: self.width,
            height: self.height,
            bits: self.bits.iter().map(|b| 1 - b).collect(),
        }
    }

    /// Grayscale rendering with 1 → 255 and 0 → 0.
    pub fn to_gray(&self) -> GrayImage {
        GrayImage {
            width: self.width,
            height: self.height,
            pixels: self.bits.iter().map(|&b| b * 255).collect(),
        }
    }
}

/// Per-pixel magnitude `|a - b|` of two registered images, with its histogram.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DifferenceImage {
    width: usize,
    height: usize,
    magnitudes: Vec<u8>,
    histogram: Vec<u64>,
}

impl Raster for DifferenceImage {
    fn width(&self) -> usize {
        self.width
    }
    fn height(&self) -> usize {
        self.height
    }
    fn values(&self) -> &[u8] {
        &self.magnitudes
    }
}

impl DifferenceImage {
    pub fn from_magnitudes(width: usize, height: usize, magnitudes: Vec<u8>) -> Result<Self> {
        check_len(width, height, magnitudes.len())?;
        let histogram = histogram_of(&magnitudes).to_vec();
        Ok(DifferenceImage {
            width,
            height,
            magnitudes,
            histogram,
        })
    }

    pub fn magnitudes(&self) -> &[u8] {
        &self.magnitudes
    }

    /// 256-bin histogram of magnitudes.
    pub fn histogram(&self) -> &[u64] {
        &self.histogram
    }

    pub fn max_magnitude(&self) -> u8 {
        self.magnitudes.iter().copied().max().unwrap_or(0)
    }

    /// CSV with header `bin,count` and one row per bin.
    pub fn histogram_csv(&self) -> String {
        let mut out = String::from("bin,count\n");
        for (bin, count) in self.histogram.iter().enumerate() {
            out.push_str(&format!("{bin},{count}\n"));
        }
        out
    }
}

fn histogram_of(values: &[u8]) -> [u64; 256] {
    let mut hist = [0u64; 256];
    for &v in values {
        hist[v as usize] += 1;
    }
    hist
}

/// Loads a grayscale image from a binary PGM (P5) or PNG file.
///
/// Color PNGs are reduced to luminance.
pub fn load_gray(path: impl AsRef<Path>) -> Result<GrayImage> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| Error::input(path, e))?;
    decode_gray(&bytes).map_err(|msg| Error::input(path, msg))
}

pub fn decode_gray(bytes: &[u8]) -> std::result::Result<GrayImage, String> {
    if bytes.starts_with(b"P5") {
        parse_pgm(bytes)
    } else if bytes.starts_with(b"\x89PNG") {
        let img = image::load_from_memory_with_format(bytes, image::ImageFormat::Png)
            .map_err(|e| e.to_string())?
            .to_luma8();
        let (w, h) = img.dimensions();
        GrayImage::new(w as usize, h as usize, img.into_raw()).map_err(|e| e.to_string())
    } else {
        Err("unsupported image format (expected binary PGM or PNG)".into())
    }
}

fn parse_pgm(bytes: &[u8]) -> std::result::Result<GrayImage, String> {
    let mut pos = 2;
    let mut header = [0usize; 3];
    for field in header.iter_mut() {
        // whitespace and comments
        loop {
            match bytes.get(pos) {
                Some(b) if b.is_ascii_whitespace() => pos += 1,
                Some(b'#') => {
                    while bytes.get(pos).is_some_and(|&b| b != b'\n') {
                        pos += 1;
                    }
                }
                Some(_) => break,
                None => return Err("truncated PGM header".into()),
            }
        }
        let start = pos;
        while bytes.get(pos).is_some_and(u8::is_ascii_digit) {
            pos += 1;
        }
        if start == pos {
            return Err("malformed PGM header".into());
        }
        *field = std::str::from_utf8(&bytes[start..pos])
            .ok()
            .and_then(|s| s.parse().ok())
            .ok_or("malformed PGM header")?;
    }
    match bytes.get(pos) {
        Some(b) if b.is_ascii_whitespace() => pos += 1,
        _ => return Err("truncated PGM header".into()),
    }
    let [width, height, maxval] = header;
    if maxval == 0 || maxval > 65535 {
        return Err(format!("invalid PGM maxval {maxval}"));
    }
    let count = width
        .checked_mul(height)
        .ok_or("PGM dimensions overflow")?;
    let sample = if maxval < 256 { 1 } else { 2 };
    let data = &bytes[pos..];
    if data.len() < count * sample {
        return Err(format!(
            "truncated PGM data: expected {} bytes, found {}",
            count * sample,
            data.len()
        ));
    }
    let scale = |v: usize| -> u8 {
        if maxval == 255 {
            v.min(255) as u8
        } else {
            ((v.min(maxval) * 255 + maxval / 2) / maxval) as u8
        }
    };
    let pixels = if sample == 1 {
        data[..count].iter().map(|&v| scale(v as usize)).collect()
    } else {
        data[..2 * count]
            .chunks_exact(2)
            .map(|c| scale(u16::from_be_bytes([c[0], c[1]]) as usize))
            .collect()
    };
    GrayImage::new(width, height, pixels).map_err(|e| e.to_string())
}

pub fn write_pgm(path: impl AsRef<Path>, image: &GrayImage) -> Result<()> {
    let path = path.as_ref();
    let mut file = fs::File::create(path).map_err(|e| Error::output(path, e))?;
    file.write_all(&image.to_pgm_bytes())
        .map_err(|e| Error::output(path, e))
}

fn lower_median(image: &GrayImage) -> u8 {
    let hist = image.histogram();
    let target = (image.len() as u64 - 1) / 2;
    let mut seen = 0;
    for (v, &count) in hist.iter().enumerate() {
        seen += count;
        if seen > target {
            return v as u8;
        }
    }
    255
}

/// Crops to the ink bounding box and rescales it to `target_w x target_h`
/// with nearest-neighbor sampling.
///
/// Ink is taken as the pixels below the median intensity that also fall on
/// the dark side of the image's Otsu cut, so that mild paper noise does not
/// widen the box. An image without two intensity classes maps to a blank
/// (all-255) canvas.
pub fn normalize_canvas(image: &GrayImage, target_w: usize, target_h: usize) -> Result<GrayImage> {
    if target_w == 0 || target_h == 0 {
        return Err(Error::invalid("target canvas must be at least 1x1"));
    }
    let blank = GrayImage::filled(target_w, target_h, 255);
    if image.is_empty() {
        return Ok(blank);
    }
    let Ok(cut) = otsu_threshold(&image.histogram()) else {
        return Ok(blank);
    };
    let median = lower_median(image);
    let bbox = |is_ink: &dyn Fn(u8) -> bool| {
        let mut bounds: Option<(usize, usize, usize, usize)> = None;
        for y in 0..image.height {
            for x in 0..image.width {
                if is_ink(image.get(x, y)) {
                    let b = bounds.get_or_insert((x, y, x, y));
                    b.0 = b.0.min(x);
                    b.1 = b.1.min(y);
                    b.2 = b.2.max(x);
                    b.3 = b.3.max(y);
                }
            }
        }
        bounds
    };
    let Some((x0, y0, x1, y1)) = bbox(&|v| v < median && v <= cut).or_else(|| bbox(&|v| v <= cut))
    else {
        return Ok(blank);
    };
    let (bw, bh) = (x1 - x0 + 1, y1 - y0 + 1);
    Ok(GrayImage::from_fn(target_w, target_h, |x, y| {
        let sx = x0 + (2 * x + 1) * bw / (2 * target_w);
        let sy = y0 + (2 * y + 1) * bh / (2 * target_h);
        image.get(sx, sy)
    }))
}

/// Bit 1 where the intensity is strictly below `threshold`.
pub fn binarize(image: &GrayImage, threshold: u8) -> BinaryImage {
    BinaryImage {
        width: image.width,
        height: image.height,
        bits: image.pixels.iter().map(|&v| u8::from(v < threshold)).collect(),
    }
}

/// Binarizes at the image's own Otsu cut: ink is every intensity at or
/// below the cut. Returns the cut.
pub fn binarize_otsu(image: &GrayImage) -> Result<(BinaryImage, u8)> {
    let cut = otsu_threshold(&image.histogram())?;
    // the cut leaves a nonempty class above it, so cut < 255
    Ok((binarize(image, cut + 1), cut))
}

/// Removes a printed background: `max(signed - template, 0)` per pixel.
///
/// Both images are ink-density images (bright where ink is heavy); use
/// [`GrayImage::inverted`] on dark-ink scans first.
pub fn subtract_background(signed: &GrayImage, template: &GrayImage) -> Result<GrayImage> {
    same_dims(signed, template)?;
    Ok(GrayImage {
        width: signed.width,
        height: signed.height,
        pixels: signed
            .pixels
            .iter()
            .zip(&template.pixels)
            .map(|(s, t)| s.saturating_sub(*t))
            .collect(),
    })
}

/// `|a - b|` per pixel. On binary images this is exclusive-or.
pub fn difference<R: Raster>(a: &R, b: &R) -> Result<DifferenceImage> {
    same_dims(a, b)?;
    let magnitudes = a
        .values()
        .iter()
        .zip(b.values())
        .map(|(x, y)| x.abs_diff(*y))
        .collect();
    DifferenceImage::from_magnitudes(a.width(), a.height(), magnitudes)
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ThresholdMethod {
    #[default]
    Otsu,
    Fixed(u8),
}

pub fn histogram_threshold(diff: &DifferenceImage, method: ThresholdMethod) -> Result<u8> {
    match method {
        ThresholdMethod::Fixed(t) => Ok(t),
        ThresholdMethod::Otsu => otsu_threshold(diff.histogram()),
    }
}

/// Cut `t` maximizing the between-class variance of the classes `<= t` and
/// `> t`; the lowest `t` wins ties.
///
/// For class weights `w0, w1` and intensity sums `s0, s1` the variance is
/// proportional to `(w1 s0 - w0 s1)^2 / (w0 w1)`. Scores are compared exactly
/// by cross-multiplying in arbitrary precision.
pub fn otsu_threshold(histogram: &[u64]) -> Result<u8> {
    if histogram.len() > 256 {
        return Err(Error::invalid("histogram has more than 256 bins"));
    }
    let occupied = histogram.iter().filter(|&&c| c > 0).count();
    if occupied < 2 {
        return Err(Error::degenerate(
            "histogram has fewer than two occupied bins",
        ));
    }
    let total: u128 = histogram.iter().map(|&c| c as u128).sum();
    let total_sum: u128 = histogram
        .iter()
        .enumerate()
        .map(|(v, &c)| v as u128 * c as u128)
        .sum();

    // cut with the numerator d^2 and denominator of its score
    let mut best: Option<(u8, BigUint, BigUint)> = None;
    let (mut w0, mut s0) = (0u128, 0u128);
    for (t, &count) in histogram.iter().enumerate() {
        w0 += count as u128;
        s0 += t as u128 * count as u128;
        let w1 = total - w0;
        if w0 == 0 {
            continue;
        }
        if w1 == 0 {
            break;
        }
        let s1 = total_sum - s0;
        let (a, b) = (BigUint::from(w1) * s0, BigUint::from(w0) * s1);
        let d = if a >= b { a - b } else { b - a };
        let num = &d * &d;
        let den = BigUint::from(w0) * w1;
        let better = best
            .as_ref()
            .is_none_or(|(_, bnum, bden)| &num * bden > bnum * &den);
        if better {
            best = Some((t as u8, num, den));
        }
    }
    Ok(best.expect("two occupied bins give at least one cut").0)
}

/// Initial change labels: 1 where the magnitude strictly exceeds `threshold`.
pub fn init_states(diff: &DifferenceImage, threshold: u8) -> BinaryImage {
    BinaryImage {
        width: diff.width,
        height: diff.height,
        bits: diff
            .magnitudes
            .iter()
            .map(|&m| u8::from(m > threshold))
            .collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gray(w: usize, h: usize, px: &[u8]) -> GrayImage {
        GrayImage::new(w, h, px.to_vec()).unwrap()
    }

    #[test]
    fn pgm_passthrough() {
        let img = decode_gray(b"P5\n2 2\n255\n\x00\xff\x0a\xc8").unwrap();
        assert_eq!(img, gray(2, 2, &[0, 255, 10, 200]));
        let again = decode_gray(&img.to_pgm_bytes()).unwrap();
        assert_eq!(again, img);
    }

    #[test]
    fn pgm_comments_and_maxval() {
        let img = decode_gray(b"P5 # scanner\n# another\n2 1 15\n\x00\x0f").unwrap();
        assert_eq!(img.pixels(), &[0, 255]);
    }

    #[test]
    fn pgm_truncation_errors() {
        assert!(decode_gray(b"P5\n2 2").is_err());
        assert!(decode_gray(b"P5\n2 2\n255\n\x00").is_err());
        assert!(decode_gray(b"P5\nx 2\n255\n").is_err());
        assert!(decode_gray(b"GIF89a").is_err());
    }

    #[test]
    fn load_errors_carry_path() {
        let err = load_gray("/nonexistent/sig.pgm").unwrap_err();
        assert!(matches!(&err, Error::Input { path, .. } if path.ends_with("sig.pgm")));

        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("bad.pgm");
        fs::write(&p, b"P5\n4 4\n25").unwrap();
        assert!(matches!(load_gray(&p), Err(Error::Input { .. })));
    }

    #[test]
    fn png_is_reduced_to_luminance() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("rgb.png");
        let mut rgb = image::RgbImage::new(2, 1);
        rgb.put_pixel(0, 0, image::Rgb([255, 255, 255]));
        rgb.put_pixel(1, 0, image::Rgb([0, 0, 0]));
        rgb.save(&p).unwrap();
        let img = load_gray(&p).unwrap();
        assert_eq!(img.pixels(), &[255, 0]);
    }

    #[test]
    fn binarize_examples() {
        let img = gray(2, 1, &[10, 200]);
        assert_eq!(binarize(&img, 100).bits(), &[1, 0]);
        assert_eq!(binarize(&img, 0).count_ones(), 0);
        assert_eq!(binarize(&GrayImage::filled(3, 3, 0), 128).count_ones(), 9);
    }

    #[test]
    fn background_subtraction() {
        let signed = gray(3, 1, &[200, 30, 77]);
        let template = gray(3, 1, &[50, 90, 77]);
        assert_eq!(subtract_background(&signed, &template).unwrap().pixels(), &[150, 0, 0]);
        assert_eq!(
            subtract_background(&signed, &signed).unwrap(),
            GrayImage::filled(3, 1, 0)
        );
        assert!(subtract_background(&signed, &gray(1, 1, &[0])).is_err());
    }

    #[test]
    fn difference_examples() {
        let a = gray(2, 1, &[100, 30]);
        let b = gray(2, 1, &[30, 100]);
        assert_eq!(difference(&a, &b).unwrap().magnitudes(), &[70, 70]);
        assert_eq!(difference(&a, &a).unwrap().max_magnitude(), 0);

        let x = BinaryImage::new(2, 1, vec![1, 0]).unwrap();
        let y = BinaryImage::new(2, 1, vec![0, 0]).unwrap();
        let d = difference(&x, &y).unwrap();
        assert_eq!(d.magnitudes(), &[1, 0]);
        assert_eq!(d.histogram()[0], 1);
        assert_eq!(d.histogram()[1], 1);
        assert_eq!(d.histogram().iter().sum::<u64>(), 2);
        assert!(difference(&x, &BinaryImage::zeros(1, 2)).is_err());
    }

    #[test]
    fn otsu_two_spikes_returns_lowest_separating_cut() {
        let mut hist = [0u64; 256];
        hist[10] = 50;
        hist[200] = 50;
        assert_eq!(otsu_threshold(&hist).unwrap(), 10);
        let d = DifferenceImage::from_magnitudes(
            10,
            10,
            (0..100).map(|i| if i < 50 { 10 } else { 200 }).collect(),
        )
        .unwrap();
        assert_eq!(histogram_threshold(&d, ThresholdMethod::Otsu).unwrap(), 10);
        assert_eq!(histogram_threshold(&d, ThresholdMethod::Fixed(42)).unwrap(), 42);
    }

    #[test]
    fn otsu_uniform_is_degenerate() {
        let d = DifferenceImage::from_magnitudes(3, 3, vec![7; 9]).unwrap();
        assert!(matches!(
            histogram_threshold(&d, ThresholdMethod::Otsu),
            Err(Error::Degenerate(_))
        ));
    }

    #[test]
    fn otsu_gradient_matches_reference_value() {
        // 0, 10, ..., 250 once each
        let mut hist = [0u64; 256];
        for v in (0..26).map(|x| x * 10) {
            hist[v] = 1;
        }
        // classes {0..120} and {130..250} are symmetric around the cut
        assert_eq!(otsu_threshold(&hist).unwrap(), 120);
    }

    #[test]
    fn init_state_thresholds_are_strict() {
        let d = DifferenceImage::from_magnitudes(2, 1, vec![5, 50]).unwrap();
        assert_eq!(init_states(&d, 10).bits(), &[0, 1]);
        assert_eq!(init_states(&d, 255).count_ones(), 0);
        let zero = DifferenceImage::from_magnitudes(2, 2, vec![0; 4]).unwrap();
        assert_eq!(init_states(&zero, 0).count_ones(), 0);
    }

    #[test]
    fn canvas_crops_glyph() {
        let glyph: Vec<u8> = (0..100).map(|i| (i * 2 % 120) as u8).collect();
        let field = GrayImage::from_fn(100, 100, |x, y| {
            if (40..50).contains(&x) && (20..30).contains(&y) {
                glyph[(y - 20) * 10 + (x - 40)]
            } else {
                255
            }
        });
        let out = normalize_canvas(&field, 10, 10).unwrap();
        assert_eq!(out.pixels(), &glyph[..]);
    }

    #[test]
    fn canvas_blank_and_identity() {
        let out = normalize_canvas(&GrayImage::filled(7, 5, 128), 4, 4).unwrap();
        assert_eq!(out, GrayImage::filled(4, 4, 255));

        // corners dark: the box is the whole image
        let img = GrayImage::from_fn(4, 4, |x, y| if (x == 0 || x == 3) && (y == 0 || y == 3) { 0 } else { 255 });
        assert_eq!(normalize_canvas(&img, 4, 4).unwrap(), img);
    }

    #[test]
    fn canvas_ignores_paper_noise() {
        let img = GrayImage::from_fn(40, 40, |x, y| {
            if (10..20).contains(&x) && (5..25).contains(&y) {
                20
            } else {
                230 + ((x * 7 + y * 13) % 11) as u8
            }
        });
        let out = normalize_canvas(&img, 8, 8).unwrap();
        assert!(out.pixels().iter().all(|&v| v == 20));
    }

    #[test]
    fn histogram_csv_shape() {
        let d = DifferenceImage::from_magnitudes(2, 1, vec![0, 3]).unwrap();
        let csv = d.histogram_csv();
        let lines: Vec<_> = csv.lines().collect();
        assert_eq!(lines.len(), 257);
        assert_eq!(lines[0], "bin,count");
        assert_eq!(lines[1], "0,1");
        assert_eq!(lines[4], "3,1");
    }
}
