use hopsig::change::{
    build, confusion, isolated_pixels, perc, relax, relax_observed, ChangeParams, CouplingForm, InitStrategy,
    Neighborhood, PixelNetwork, RelaxConfig,
};
use hopsig::imageops::{
    difference, histogram_threshold, load_gray, BinaryImage, Raster, ThresholdMethod,
};
use hopsig::verifier::{preprocess, synth_dataset, Canvas, SynthParams};
use proptest::prelude::*;

fn grid(max_side: usize) -> impl Strategy<Value = BinaryImage> {
    (1..=max_side, 1..=max_side).prop_flat_map(|(w, h)| {
        prop::collection::vec(0u8..=1, w * h).prop_map(move |b| BinaryImage::new(w, h, b).unwrap())
    })
}

fn params() -> impl Strategy<Value = ChangeParams> {
    (
        0.0f64..3.0,
        prop_oneof![Just(Neighborhood::Four), Just(Neighborhood::Eight)],
        prop_oneof![Just(CouplingForm::Bipolar), Just(CouplingForm::Unipolar)],
    )
        .prop_map(|(beta, neighborhood, coupling)| ChangeParams {
            beta,
            bias_gain: 1.0,
            neighborhood,
            coupling,
        })
}

/// Random labels, truth and bias field on one grid.
fn instance(max_side: usize) -> impl Strategy<Value = (PixelNetwork, BinaryImage)> {
    (1..=max_side, 1..=max_side, params()).prop_flat_map(|(w, h, p)| {
        (
            prop::collection::vec(0u8..=1, w * h),
            prop::collection::vec(0u8..=1, w * h),
            prop::collection::vec(-2.0f64..2.0, w * h),
        )
            .prop_map(move |(labels, truth, bias)| {
                let labels = BinaryImage::new(w, h, labels).unwrap();
                let net = PixelNetwork::with_bias(labels, bias, &p).unwrap();
                (net, BinaryImage::new(w, h, truth).unwrap())
            })
    })
}

fn brute_perc(labels: &BinaryImage, truth: &BinaryImage) -> f64 {
    let mut agree = 0usize;
    for y in 0..truth.height() {
        for x in 0..truth.width() {
            if labels.get(x, y) == truth.get(x, y) {
                agree += 1;
            }
        }
    }
    (agree as f64 / truth.len() as f64) * 100.0
}

proptest! {
    #[test]
    fn energy_never_increases((net, truth) in instance(12), seed in any::<u64>()) {
        let cfg = RelaxConfig { goal_perc: 100.0, max_iterations: 50 };
        let mut before = net.energy();
        let mut ok = true;
        let out = relax_observed(&net, &truth, &cfg, seed, |flip| {
            let after = net.energy_for(flip.labels).unwrap();
            ok &= after <= before + 1e-9;
            before = after;
        })
        .unwrap();
        prop_assert!(ok);
        let energies: Vec<f64> = out.trace.rows.iter().map(|r| r.energy).collect();
        prop_assert!(energies.windows(2).all(|e| e[1] <= e[0] + 1e-9));
        prop_assert!(energies[0] <= net.energy() + 1e-9);
    }

    #[test]
    fn relax_terminates((net, truth) in instance(10), seed in any::<u64>()) {
        let cfg = RelaxConfig { goal_perc: 100.0, max_iterations: 4 * net.width() * net.height() };
        let out = relax(&net, &truth, &cfg, seed).unwrap();
        prop_assert!(out.converged || out.reached_goal);
    }

    #[test]
    fn perc_of_self_and_complement(x in grid(16)) {
        prop_assert_eq!(perc(&confusion(&x, &x).unwrap()).unwrap(), 100.0);
        prop_assert_eq!(perc(&confusion(&x.complement(), &x).unwrap()).unwrap(), 0.0);
    }

    #[test]
    fn trace_matches_pixel_scan((net, truth) in instance(10), seed in any::<u64>()) {
        let cfg = RelaxConfig { goal_perc: 100.0, max_iterations: 30 };
        let mut per_iteration: Vec<BinaryImage> = vec![net.labels().clone()];
        let out = relax_observed(&net, &truth, &cfg, seed, |flip| {
            while per_iteration.len() <= flip.iteration {
                per_iteration.push(per_iteration.last().unwrap().clone());
            }
            per_iteration[flip.iteration] = flip.labels.clone();
        })
        .unwrap();
        for row in &out.trace.rows {
            let labels = per_iteration.get(row.iteration).unwrap_or_else(|| per_iteration.last().unwrap());
            prop_assert_eq!(row.perc, brute_perc(labels, &truth));
            prop_assert_eq!(row.changed_count, labels.bits().iter().filter(|&&b| b == 1).count());
        }
        prop_assert_eq!(&out.labels, per_iteration.last().unwrap());
    }

    #[test]
    fn decoupled_network_thresholds_its_bias((net, truth) in instance(12), seed in any::<u64>()) {
        let p = ChangeParams { beta: 0.0, ..*net.params() };
        let net = PixelNetwork::with_bias(net.labels().clone(), net.bias().to_vec(), &p).unwrap();
        let out = relax(&net, &truth, &RelaxConfig { goal_perc: 100.0, max_iterations: 5 }, seed).unwrap();
        let expected: Vec<u8> = net.bias().iter().map(|&b| u8::from(b >= 0.0)).collect();
        prop_assert_eq!(out.labels.bits(), &expected[..]);
    }
}

#[test]
fn aligned_bias_without_coupling_is_perfect_after_one_sweep() {
    let truth = BinaryImage::from_fn(9, 7, |x, y| (x * y) % 3 == 0);
    let bias = truth.bits().iter().map(|&b| if b == 1 { 0.5 } else { -0.5 }).collect();
    let p = ChangeParams { beta: 0.0, ..ChangeParams::default() };
    let net = PixelNetwork::with_bias(BinaryImage::zeros(9, 7), bias, &p).unwrap();
    let out = relax(&net, &truth, &RelaxConfig::default(), 3).unwrap();
    assert_eq!(out.trace.rows[0].perc, 100.0);
    assert!(out.reached_goal);
}

/// Larger beta never leaves more isolated label pixels on the synthetic suite.
#[test]
fn stronger_coupling_smooths_more() {
    let dir = tempfile::tempdir().unwrap();
    let params = SynthParams { customers: 3, ..SynthParams::default() };
    let manifest = synth_dataset(11, &params, dir.path()).unwrap();
    let canvas = Canvas::default();
    let betas = [0.0, 0.25, 0.5, 1.0, 2.0, 4.0];
    for customer in &manifest.customers {
        let reference = preprocess(&load_gray(manifest.resolve(&customer.references[0])).unwrap(), canvas).unwrap();
        for trial in &customer.trials {
            let test = preprocess(&load_gray(manifest.resolve(&trial.path)).unwrap(), canvas).unwrap();
            let diff = difference(&test, &reference).unwrap();
            let t = histogram_threshold(&diff, ThresholdMethod::Otsu).unwrap_or(0);
            let mut last = usize::MAX;
            for &beta in &betas {
                let p = ChangeParams { beta, ..ChangeParams::default() };
                let net = build(&diff, t, &p, InitStrategy::Thresholded, 0).unwrap();
                let truth = net.labels().clone();
                let cfg = RelaxConfig { goal_perc: 100.0, max_iterations: 1000 };
                let out = relax(&net, &truth, &cfg, 5).unwrap();
                assert!(out.converged);
                let isolated = isolated_pixels(&out.labels, Neighborhood::Eight);
                assert!(isolated <= last, "{:?} beta {beta}: {isolated} > {last}", trial.path);
                last = isolated;
            }
        }
    }
}
