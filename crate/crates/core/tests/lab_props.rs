use approx::assert_relative_eq;
use proptest::prelude::*;

use thinns::lab::{
    dyadic_decompose, estimate_constant, interpolation_ratio, planar_torus, thin_torus, trial_field, EstimateConfig, Evaluator,
    LabInequality, Support,
};
use thinns::spectral::Torus;

#[test]
fn hausdorff_young_is_plancherel_at_two() {
    let t = Torus::new([1.5, 1.0, 0.2], [4, 3, 2]).unwrap();
    let ev = Evaluator::new(LabInequality::HausdorffYoung { p: 2.0 }, t).unwrap();
    for i in 0..40 {
        let (_, f) = trial_field(t, Support::All, 11, i);
        assert_relative_eq!(ev.ratio(&f).unwrap(), 1.0, max_relative = 1e-12);
    }
}

#[test]
fn hausdorff_young_holds_for_p_below_two() {
    let t = Torus::new([1.0, 1.0, 0.5], [3, 3, 1]).unwrap();
    for p in [1.0, 1.25, 1.5, 1.75] {
        let e = estimate_constant(LabInequality::HausdorffYoung { p }, t, &EstimateConfig { trials: 40, ascent_evals: 40, seed: 3 }).unwrap();
        assert!(e.max_ratio <= 1.0 + 1e-12, "p = {p}: {}", e.max_ratio);
    }
}

#[test]
fn interpolation_over_trial_ensemble() {
    let t = Torus::new([1.0, 2.0, 0.25], [5, 5, 2]).unwrap();
    let mut worst: f64 = 0.0;
    for i in 0..1000 {
        let (_, f) = trial_field(t, Support::All, 5, i);
        for theta in [0.25, 0.5, 0.75] {
            worst = worst.max(interpolation_ratio(&f, 0.5, 2.0, theta));
        }
    }
    assert!(worst <= 1.0 + 1e-12, "{worst}");
}

#[test]
fn estimates_are_seed_deterministic() {
    let t = thin_torus(1.0, 1.0, 0.25, 1.0, 1).unwrap();
    let cfg = EstimateConfig { trials: 24, ascent_evals: 24, seed: 42 };
    let a = estimate_constant(LabInequality::Lemma4Inf, t, &cfg).unwrap();
    let b = estimate_constant(LabInequality::Lemma4Inf, t, &cfg).unwrap();
    assert_eq!(a, b);
    let c = estimate_constant(LabInequality::Lemma4Inf, t, &EstimateConfig { seed: 43, ..cfg }).unwrap();
    assert_ne!(a.trial_ratios, c.trial_ratios);
}

#[test]
fn maximizer_reproduces_ratio() {
    let t = thin_torus(1.0, 1.0, 0.125, 1.0, 1).unwrap();
    let cfg = EstimateConfig { trials: 16, ascent_evals: 32, seed: 1 };
    for ineq in [LabInequality::Lemma4Inf, LabInequality::Lemma4Four] {
        let e = estimate_constant(ineq, t, &cfg).unwrap();
        let r = Evaluator::new(ineq, t).unwrap().ratio(&e.maximizer).unwrap();
        assert_relative_eq!(r, e.max_ratio, max_relative = 1e-12);
        assert!(e.trial_ratios.iter().all(|x| *x <= e.max_ratio));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn dyadic_blocks_partition_and_bound(l1 in 0.5f64..3.0, l2 in 0.5f64..3.0, seed in any::<u64>(), i in 0usize..200) {
        let t = Torus::planar(l1, l2, 6, 6).unwrap();
        let (_, f) = trial_field(t, Support::All, seed, i);
        let d = dyadic_decompose(&f).unwrap();
        prop_assert!(d.bound_holds());
        prop_assert!((d.blocks_sq_sum() - d.total_sq).abs() <= 1e-12 * d.total_sq);
    }

    #[test]
    fn lemma6_ratios_stay_below_estimate(seed in 0u64..1000) {
        let t = planar_torus(1.0, 1.0, 16).unwrap();
        let ev = Evaluator::new(LabInequality::Lemma6, t).unwrap();
        let (_, f) = trial_field(t, Support::All, seed, 0);
        // estimated constant is about 0.7
        prop_assert!(ev.ratio(&f).unwrap() < 1.0);
    }
}
