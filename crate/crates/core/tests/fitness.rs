use std::f64::consts::TAU;

use adaptive_qpe::fitness::{
    binomial_weight, fit_power_law, sharpness, sharpness_with_loss, LossModel, SharpnessEvaluator, SharpnessOptions,
};
use adaptive_qpe::fock::{min_uncertainty_state_with, IndexOrder};
use adaptive_qpe::golden::{golden_policies, golden_policy};
use adaptive_qpe::policy::{EstimationContext, FeedbackRule, MeasurementRecord, Policy, SignConvention};
use adaptive_qpe::Error;
use approx::assert_abs_diff_eq;
use num_complex::Complex64;
use proptest::prelude::*;

fn records(len: usize) -> impl Iterator<Item = MeasurementRecord> {
    (0..1u32 << len).map(move |mask| {
        let bits: Vec<u8> = (0..len).map(|i| ((mask >> i) & 1) as u8).collect();
        MeasurementRecord::from_bits(&bits).unwrap()
    })
}

/// Sharpness by direct enumeration: every record is evaluated on its own, on
/// a uniform grid of `samples` phases.
fn brute_force_sharpness(policy: &Policy, eta: f64, rule: FeedbackRule, samples: usize) -> f64 {
    let n = policy.photons();
    let input = min_uncertainty_state_with(n, IndexOrder::OutputRow).unwrap();
    let mut total = Complex64::new(0.0, 0.0);
    for k in 0..=n {
        let weight = binomial_weight(k, n, eta).unwrap();
        if weight == 0.0 {
            continue;
        }
        let mut term = Complex64::new(0.0, 0.0);
        for q in 0..samples {
            let phi = TAU * q as f64 / samples as f64;
            let ctx = EstimationContext::new(phi).unwrap().with_rule(rule);
            for record in records(k) {
                let p = adaptive_qpe::policy::record_probability(&input, policy, &ctx, &record).unwrap();
                let est = if k == 0 { 0.0 } else { rule.estimate(policy, &record, 0.0).unwrap() };
                term += p * Complex64::from_polar(1.0, est - phi);
            }
        }
        total += weight * term / samples as f64;
    }
    total.norm()
}

fn policy_strategy(lo: usize, hi: usize) -> impl Strategy<Value = Policy> {
    (lo..=hi).prop_flat_map(|n| prop::collection::vec(0.0..TAU, n)).prop_map(|v| Policy::new(v).unwrap())
}

#[test]
fn evaluator_matches_brute_force() {
    for n in [4, 5, 6] {
        let golden = golden_policy(n).unwrap();
        for eta in [0.0, 0.3] {
            let want = brute_force_sharpness(&golden.policy, eta, FeedbackRule::default(), 50);
            let got = sharpness_with_loss(&golden.policy, n, LossModel::new(eta).unwrap()).unwrap();
            assert_abs_diff_eq!(got.sharpness, want, epsilon = 1e-12);
        }
    }
}

#[test]
fn golden_variances_reproduce() {
    for g in golden_policies().unwrap() {
        let v = sharpness(&g.policy, g.n).unwrap().holevo_variance;
        assert_abs_diff_eq!(v, g.variance, epsilon = 5e-3);
        assert_abs_diff_eq!(v, g.variance, epsilon = 1e-5);
    }
}

#[test]
fn published_variances_scale_near_minus_one_point_four_two() {
    let points: Vec<(f64, f64)> = golden_policies()
        .unwrap()
        .iter()
        .map(|g| (g.n as f64, sharpness(&g.policy, g.n).unwrap().holevo_variance))
        .collect();
    let fit = fit_power_law(&points).unwrap();
    assert!((fit.exponent + 1.42).abs() <= 0.1, "exponent {}", fit.exponent);
    assert_eq!(fit.points, 11);
}

#[test]
fn only_the_locked_sign_convention_reproduces_the_table() {
    let rule = |feedback, estimate| FeedbackRule { feedback, estimate, ..Default::default() };
    let variance = |n: usize, rule: FeedbackRule, order: IndexOrder| {
        let options = SharpnessOptions { rule, index_order: order, ..Default::default() };
        let policy = golden_policy(n).unwrap().policy;
        SharpnessEvaluator::with_options(n, options).unwrap().sharpness(&policy).unwrap().holevo_variance
    };
    use SignConvention::{Flipped, Standard};
    for n in [4, 10] {
        let published = golden_policy(n).unwrap().variance;
        for order in [IndexOrder::OutputRow, IndexOrder::OutputColumn] {
            assert_abs_diff_eq!(variance(n, rule(Standard, Standard), order), published, epsilon = 1e-5);
            assert_abs_diff_eq!(variance(n, rule(Flipped, Flipped), order), published, epsilon = 1e-5);
        }
        assert!(variance(n, rule(Flipped, Standard), IndexOrder::OutputRow) > published + 0.05);
        assert!(variance(n, rule(Standard, Flipped), IndexOrder::OutputRow) > published + 0.05);
    }
}

#[test]
fn loss_limits() {
    for n in [4, 9, 14] {
        let policy = golden_policy(n).unwrap().policy;
        let ev = SharpnessEvaluator::new(n).unwrap();
        let lossless = ev.sharpness(&policy).unwrap();
        let zero = ev.sharpness_with_loss(&policy, LossModel::lossless()).unwrap();
        assert_eq!(lossless, zero);
        let full = ev.sharpness_with_loss(&policy, LossModel::new(1.0).unwrap()).unwrap();
        assert_eq!(full.sharpness, 0.0);
        assert!(full.holevo_variance.is_infinite());
    }
    assert!(LossModel::new(1.5).is_err());
    assert!(LossModel::new(-0.1).is_err());
}

#[test]
fn loss_weights_detection_terms() {
    let n = 6;
    let policy = golden_policy(n).unwrap().policy;
    let ev = SharpnessEvaluator::new(n).unwrap();
    let terms = ev.detection_terms(&policy).unwrap();
    assert_eq!(terms.len(), n + 1);
    assert_abs_diff_eq!(terms[0].norm(), 0.0, epsilon = 1e-15);
    assert_abs_diff_eq!(terms[n].norm(), ev.sharpness(&policy).unwrap().sharpness, epsilon = 1e-15);
    for eta in [0.1, 0.4, 0.8] {
        let mixed: Complex64 =
            terms.iter().enumerate().map(|(k, t)| binomial_weight(k, n, eta).unwrap() * t).sum();
        let got = ev.sharpness_with_loss(&policy, LossModel::new(eta).unwrap()).unwrap();
        assert_abs_diff_eq!(got.sharpness, mixed.norm(), epsilon = 1e-14);
    }
}

#[test]
fn evaluator_limits() {
    assert!(SharpnessEvaluator::new(0).is_err());
    assert!(matches!(SharpnessEvaluator::new(17), Err(Error::Resource { .. })));
    let short = SharpnessOptions { quadrature: Some(9), ..Default::default() };
    assert!(SharpnessEvaluator::with_options(4, short).is_err());
    let err = sharpness(&Policy::zeros(3).unwrap(), 4).unwrap_err().to_string();
    assert!(err.contains("policy length 3 ≠ 4"), "{err}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn sharpness_is_bounded(policy in policy_strategy(1, 8), eta in 0.0..=1.0f64) {
        let s = sharpness_with_loss(&policy, policy.photons(), LossModel::new(eta).unwrap()).unwrap().sharpness;
        prop_assert!((0.0..=1.0).contains(&s));
    }

    #[test]
    fn quadrature_is_exact(policy in policy_strategy(1, 8), eta in 0.0..=1.0f64) {
        let n = policy.photons();
        let s = |q: usize| {
            let options = SharpnessOptions { quadrature: Some(q), ..Default::default() };
            SharpnessEvaluator::with_options(n, options)
                .unwrap()
                .sharpness_with_loss(&policy, LossModel::new(eta).unwrap())
                .unwrap()
                .sharpness
        };
        prop_assert!((s(4 * n) - s(8 * n)).abs() <= 1e-12);
        prop_assert!((s(4 * n) - s(2 * n + 2)).abs() <= 1e-12);
    }

    #[test]
    fn initial_feedback_does_not_matter(policy in policy_strategy(1, 8), start in 0.0..TAU, eta in 0.0..=1.0f64) {
        let n = policy.photons();
        let loss = LossModel::new(eta).unwrap();
        let shifted = SharpnessOptions { initial_feedback: start, ..Default::default() };
        let a = SharpnessEvaluator::new(n).unwrap().sharpness_with_loss(&policy, loss).unwrap().sharpness;
        let b = SharpnessEvaluator::with_options(n, shifted).unwrap().sharpness_with_loss(&policy, loss).unwrap().sharpness;
        prop_assert!((a - b).abs() <= 1e-12);
    }

    #[test]
    fn evaluator_matches_brute_force_on_random_policies(policy in policy_strategy(1, 5), eta in 0.0..=1.0f64) {
        let n = policy.photons();
        let want = brute_force_sharpness(&policy, eta, FeedbackRule::default(), 4 * n + 3);
        let got = sharpness_with_loss(&policy, n, LossModel::new(eta).unwrap()).unwrap().sharpness;
        prop_assert!((got - want).abs() <= 1e-12);
    }

    #[test]
    fn power_law_recovers_exponent(exponent in -3.0..-0.5f64, scale in 0.1..10.0f64) {
        let points: Vec<(f64, f64)> = (4..=14).map(|n| (n as f64, scale * (n as f64).powf(exponent))).collect();
        let fit = fit_power_law(&points).unwrap();
        prop_assert!((fit.exponent - exponent).abs() <= 1e-10);
        prop_assert!(fit.stderr.unwrap() <= 1e-8);
    }
}
