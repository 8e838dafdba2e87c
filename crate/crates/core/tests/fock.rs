use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2, FRAC_PI_4, PI, TAU};

use adaptive_qpe::fock::{
    kraus_apply, min_uncertainty_state, min_uncertainty_state_with, wigner_small_d, FockVector, HalfInteger,
    IndexOrder, Outcome, MAX_PHOTONS,
};
use approx::assert_abs_diff_eq;
use num_complex::Complex64;
use proptest::prelude::*;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn projections(j2: i32) -> Vec<HalfInteger> {
    (-j2..=j2).step_by(2).map(HalfInteger::from_twice).collect()
}

fn d_matrix(j2: i32, beta: f64) -> Vec<Vec<f64>> {
    let j = HalfInteger::from_twice(j2);
    let ms = projections(j2);
    ms.iter().map(|&a| ms.iter().map(|&b| wigner_small_d(j, a, b, beta).unwrap()).collect()).collect()
}

fn normalized(raw: Vec<(f64, f64)>) -> FockVector {
    let mut amps: Vec<Complex64> = raw.into_iter().map(|(re, im)| c(re, im)).collect();
    let norm = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
    amps.iter_mut().for_each(|a| *a /= norm);
    FockVector::new(amps).unwrap()
}

fn state_strategy() -> impl Strategy<Value = FockVector> {
    (1usize..=14)
        .prop_flat_map(|m| prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), m + 1))
        .prop_filter("nonzero", |v| v.iter().any(|(a, b)| a.abs() + b.abs() > 1e-3))
        .prop_map(normalized)
}

#[test]
fn d_matrix_orthogonal() {
    for j2 in 0..=14 {
        for &beta in &[0.0, FRAC_PI_4, FRAC_PI_2, PI] {
            let d = d_matrix(j2, beta);
            let dim = d.len();
            for a in 0..dim {
                for b in 0..dim {
                    let dot: f64 = (0..dim).map(|m| d[a][m] * d[b][m]).sum();
                    assert_abs_diff_eq!(dot, if a == b { 1.0 } else { 0.0 }, epsilon = 1e-10);
                }
            }
        }
    }
}

#[test]
fn spin_one_at_right_angle() {
    let h = FRAC_1_SQRT_2;
    let want = [[0.5, -h, 0.5], [h, 0.0, -h], [0.5, h, 0.5]];
    let d = d_matrix(2, FRAC_PI_2);
    // rows and columns ordered m = 1, 0, -1
    for a in 0..3 {
        for b in 0..3 {
            assert_abs_diff_eq!(d[2 - a][2 - b], want[a][b], epsilon = 1e-14);
        }
    }
}

#[test]
fn d_matrix_at_pi_is_antidiagonal() {
    for j2 in 0..=10 {
        let d = d_matrix(j2, PI);
        let dim = d.len();
        for (a, row) in d.iter().enumerate() {
            for (b, &x) in row.iter().enumerate() {
                let want = if a + b == dim - 1 { 1.0 } else { 0.0 };
                assert_abs_diff_eq!(x.abs(), want, epsilon = 1e-12);
            }
        }
    }
}

#[test]
fn input_state_is_normalized() {
    for n in 1..=14 {
        let state = min_uncertainty_state(n).unwrap();
        assert_eq!(state.photons(), n);
        assert_abs_diff_eq!(state.norm_sqr(), 1.0, epsilon = 1e-12);
    }
    assert!(min_uncertainty_state(0).is_err());
    assert!(min_uncertainty_state(MAX_PHOTONS + 1).is_err());
}

#[test]
fn input_state_small_cases() {
    let one = min_uncertainty_state(1).unwrap();
    for a in one.amps() {
        assert_abs_diff_eq!(a.re, 0.5, epsilon = 1e-14);
        assert_abs_diff_eq!(a.im, 0.5, epsilon = 1e-14);
    }
    let two = min_uncertainty_state(2).unwrap();
    let want = [c(0.0, 0.5), c(0.0, FRAC_1_SQRT_2), c(0.0, 0.5)];
    for (a, w) in two.amps().iter().zip(want) {
        assert_abs_diff_eq!(a.re, w.re, epsilon = 1e-14);
        assert_abs_diff_eq!(a.im, w.im, epsilon = 1e-14);
    }
}

#[test]
fn index_orders_agree_in_magnitude() {
    for n in 1..=14 {
        let row = min_uncertainty_state_with(n, IndexOrder::OutputRow).unwrap();
        let col = min_uncertainty_state_with(n, IndexOrder::OutputColumn).unwrap();
        assert_abs_diff_eq!(col.norm_sqr(), 1.0, epsilon = 1e-12);
        for (a, b) in row.amps().iter().zip(col.amps()) {
            assert_abs_diff_eq!(a.norm(), b.norm(), epsilon = 1e-12);
        }
    }
}

#[test]
fn single_photon_fringe() {
    let state = min_uncertainty_state(1).unwrap();
    for i in 0..32 {
        let phi = TAU * i as f64 / 32.0;
        for &feedback in &[0.0, 0.4, 2.5] {
            let theta = (phi - feedback) / 2.0;
            let p0 = kraus_apply(&state, Outcome::Zero, theta).unwrap().norm_sqr();
            assert_abs_diff_eq!(p0, (1.0 - (phi - feedback).sin()) / 2.0, epsilon = 1e-14);
        }
    }
}

#[test]
fn kraus_on_basis_states() {
    // |1,0> and |0,1> behave like a beam splitter at angle theta
    let theta = 0.3;
    let upper = kraus_apply(&FockVector::basis(1, 0), Outcome::Zero, theta).unwrap();
    let lower = kraus_apply(&FockVector::basis(0, 1), Outcome::Zero, theta).unwrap();
    assert_abs_diff_eq!(upper.norm_sqr() + lower.norm_sqr(), 1.0, epsilon = 1e-14);
    assert!(kraus_apply(&FockVector::basis(0, 0), Outcome::Zero, theta).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn kraus_completeness(state in state_strategy(), theta in 0.0..TAU) {
        let p0 = kraus_apply(&state, Outcome::Zero, theta).unwrap().norm_sqr();
        let p1 = kraus_apply(&state, Outcome::One, theta).unwrap().norm_sqr();
        prop_assert!((p0 + p1 - 1.0).abs() <= 1e-12, "p0 + p1 = {}", p0 + p1);
    }
}

proptest! {
    #[test]
    fn outcome_one_is_shifted_outcome_zero(state in state_strategy(), theta in -TAU..TAU) {
        let one = kraus_apply(&state, Outcome::One, theta).unwrap();
        let zero = kraus_apply(&state, Outcome::Zero, theta - FRAC_PI_2).unwrap();
        for (a, b) in one.amps().iter().zip(zero.amps()) {
            prop_assert!((a - b).norm() <= 1e-12);
        }
    }

    #[test]
    fn d_matrix_composes(j2 in 0i32..=14, alpha in -PI..PI, beta in -PI..PI) {
        let da = d_matrix(j2, alpha);
        let db = d_matrix(j2, beta);
        let dab = d_matrix(j2, alpha + beta);
        let dim = da.len();
        for a in 0..dim {
            for b in 0..dim {
                let product: f64 = (0..dim).map(|m| da[a][m] * db[m][b]).sum();
                prop_assert!((product - dab[a][b]).abs() <= 1e-10);
            }
        }
    }

    #[test]
    fn fock_vector_json_round_trip(state in state_strategy()) {
        let text = serde_json::to_string(&state).unwrap();
        let back: FockVector = serde_json::from_str(&text).unwrap();
        prop_assert_eq!(back, state);
    }
}
