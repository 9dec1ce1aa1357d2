use hopsig::imageops::{
    binarize, decode_gray, difference, init_states, normalize_canvas, otsu_threshold, subtract_background,
    BinaryImage, DifferenceImage, GrayImage, Raster,
};
use hopsig::Error;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;
use proptest::prelude::*;

/// Between-class variance `w0 w1 (mu0 - mu1)^2` of every cut, from the class
/// definitions, as exact rationals. Returns the best cut (lowest on ties).
fn otsu_oracle(hist: &[u64]) -> Option<u8> {
    let total: u64 = hist.iter().sum();
    let n = BigRational::from_integer(BigInt::from(total));
    let mut best: Option<(u8, BigRational)> = None;
    for t in 0..hist.len() {
        let (lo, hi) = hist.split_at(t + 1);
        let c0: u64 = lo.iter().sum();
        let c1: u64 = hi.iter().sum();
        if c0 == 0 || c1 == 0 {
            continue;
        }
        let moment = |bins: &[u64], offset: usize| -> BigInt {
            bins.iter()
                .enumerate()
                .map(|(k, &c)| BigInt::from(k + offset) * BigInt::from(c))
                .sum()
        };
        let rat = |x: u64| BigRational::from_integer(BigInt::from(x));
        let mu0 = BigRational::new(moment(lo, 0), BigInt::from(c0));
        let mu1 = BigRational::new(moment(hi, t + 1), BigInt::from(c1));
        let w0 = rat(c0) / &n;
        let w1 = rat(c1) / &n;
        let gap = mu0 - mu1;
        let score = w0 * w1 * &gap * &gap;
        if best.as_ref().is_none_or(|(_, b)| score > *b) {
            best = Some((t as u8, score));
        }
    }
    best.filter(|(_, s)| !s.is_zero()).map(|(t, _)| t)
}

fn histogram() -> impl Strategy<Value = Vec<u64>> {
    prop_oneof![
        prop::collection::vec(0u64..6, 256),
        prop::collection::vec(prop_oneof![3 => Just(0u64), 1 => 0u64..2000], 256),
        (0usize..256, 0usize..256, 1u64..100_000, 1u64..100_000).prop_map(|(a, b, ca, cb)| {
            let mut h = vec![0; 256];
            h[a] += ca;
            h[b] += cb;
            h
        }),
    ]
}

fn gray(max_side: usize) -> impl Strategy<Value = GrayImage> {
    (1..=max_side, 1..=max_side).prop_flat_map(|(w, h)| {
        prop::collection::vec(any::<u8>(), w * h).prop_map(move |px| GrayImage::new(w, h, px).unwrap())
    })
}

fn gray_pair(max_side: usize) -> impl Strategy<Value = (GrayImage, GrayImage)> {
    (1..=max_side, 1..=max_side).prop_flat_map(|(w, h)| {
        (prop::collection::vec(any::<u8>(), w * h), prop::collection::vec(any::<u8>(), w * h))
            .prop_map(move |(a, b)| (GrayImage::new(w, h, a).unwrap(), GrayImage::new(w, h, b).unwrap()))
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn otsu_matches_exhaustive_search(hist in histogram()) {
        match otsu_oracle(&hist) {
            Some(t) => prop_assert_eq!(otsu_threshold(&hist).unwrap(), t),
            None => prop_assert!(matches!(otsu_threshold(&hist), Err(Error::Degenerate(_)))),
        }
    }

    #[test]
    fn difference_is_symmetric_and_zero_on_equal((a, b) in gray_pair(12)) {
        let ab = difference(&a, &b).unwrap();
        let ba = difference(&b, &a).unwrap();
        prop_assert_eq!(ab.magnitudes(), ba.magnitudes());
        prop_assert!(difference(&a, &a).unwrap().magnitudes().iter().all(|&m| m == 0));
        for ((&m, &x), &y) in ab.magnitudes().iter().zip(a.pixels()).zip(b.pixels()) {
            prop_assert_eq!(m == 0, x == y);
        }
    }

    #[test]
    fn binarize_commutes_with_shift(img in gray(10), t in any::<u8>(), k in any::<u8>()) {
        let top = *img.pixels().iter().max().unwrap();
        let k = (u16::from(k) % (256 - u16::from(top.max(t)))) as u8;
        let shifted = GrayImage::new(img.width(), img.height(), img.pixels().iter().map(|v| v + k).collect()).unwrap();
        prop_assert_eq!(binarize(&img, t), binarize(&shifted, t + k));
    }

    #[test]
    fn init_states_count_is_nonincreasing(mags in prop::collection::vec(any::<u8>(), 1..200)) {
        let diff = DifferenceImage::from_magnitudes(mags.len(), 1, mags).unwrap();
        let counts: Vec<usize> = (0..=255u8).map(|t| init_states(&diff, t).count_ones()).collect();
        prop_assert!(counts.windows(2).all(|w| w[1] <= w[0]));
    }

    #[test]
    fn background_removal_never_brightens((s, t) in gray_pair(12)) {
        let out = subtract_background(&s, &t).unwrap();
        prop_assert!(out.pixels().iter().zip(s.pixels()).all(|(o, v)| o <= v));
    }

    #[test]
    fn pgm_round_trips(img in gray(16)) {
        prop_assert_eq!(decode_gray(&img.to_pgm_bytes()).unwrap(), img);
    }

    #[test]
    fn normalize_hits_the_canvas(img in gray(20), w in 1usize..40, h in 1usize..40) {
        let out = normalize_canvas(&img, w, h).unwrap();
        prop_assert_eq!((out.width(), out.height()), (w, h));
    }

    #[test]
    fn binary_difference_is_xor(bits in prop::collection::vec(0u8..=1, 1..=64), other in prop::collection::vec(0u8..=1, 64)) {
        let n = bits.len();
        let a = BinaryImage::new(n, 1, bits.clone()).unwrap();
        let b = BinaryImage::new(n, 1, other[..n].to_vec()).unwrap();
        let d = difference(&a, &b).unwrap();
        let xor: Vec<u8> = bits.iter().zip(&other).map(|(x, y)| x ^ y).collect();
        prop_assert_eq!(d.magnitudes(), &xor[..]);
    }
}

#[test]
fn otsu_handles_huge_counts() {
    let mut hist = vec![0u64; 256];
    hist[10] = u64::MAX / 512;
    hist[200] = u64::MAX / 1024;
    hist[90] = 7;
    assert_eq!(otsu_threshold(&hist).unwrap(), otsu_oracle(&hist).unwrap());
}

#[test]
fn translated_signature_normalizes_identically() {
    let draw = |dx: usize, dy: usize| {
        GrayImage::from_fn(40, 30, |x, y| {
            let (x, y) = (x as isize - dx as isize, y as isize - dy as isize);
            if (5..20).contains(&x) && (8..11).contains(&y) || (12..15).contains(&x) && (4..18).contains(&y) {
                30
            } else {
                230
            }
        })
    };
    let a = normalize_canvas(&draw(0, 0), 16, 16).unwrap();
    let b = normalize_canvas(&draw(9, 6), 16, 16).unwrap();
    assert_eq!(a, b);
}
