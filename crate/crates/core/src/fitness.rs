//! Exact sharpness and Holevo variance of a policy.
//!
//! Under a flat prior the sharpness of a policy is
//!
//! ```text
//! S = | Σ_records e^{i φ̃(record)} · (1/2π) ∫ P(record | φ) e^{-iφ} dφ |
//! ```
//!
//! Every record probability is a trigonometric polynomial of degree at most
//! `N` in `φ`, so the integral is its frequency-one Fourier coefficient. A
//! uniform grid of `Q ≥ N + 2` samples recovers that coefficient exactly; the
//! default grid uses `Q = 4N`.
//!
//! With photon loss rate `η`, a run detects `k` photons with binomial
//! probability and the complex per-`k` terms `𝒮(k)` are mixed before taking
//! the modulus.

use std::f64::consts::TAU;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::function::factorial::binomial;

use crate::fock::{min_uncertainty_state_with, FockVector, IndexOrder};
use crate::policy::{walk_unchecked, EstimationContext, FeedbackRule, Policy, ENUMERATION_CAP};
use crate::{Error, Result};

/// Sharpness values below this are rounding noise of the Fourier sum and are
/// reported as exactly zero.
pub const SHARPNESS_FLOOR: f64 = 1e-13;

/// Sharpness `S` and Holevo variance `V = S^-2 - 1` (infinite when `S = 0`).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SharpnessReport {
    pub sharpness: f64,
    pub holevo_variance: f64,
}

impl SharpnessReport {
    pub fn from_sharpness(sharpness: f64) -> Self {
        let sharpness = if sharpness < SHARPNESS_FLOOR { 0.0 } else { sharpness.min(1.0) };
        SharpnessReport { sharpness, holevo_variance: holevo_variance(sharpness) }
    }
}

pub fn holevo_variance(sharpness: f64) -> f64 {
    if sharpness > 0.0 {
        sharpness.powi(-2) - 1.0
    } else {
        f64::INFINITY
    }
}

/// Per-photon loss rate `η ∈ [0, 1]`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct LossModel {
    eta: f64,
}

impl LossModel {
    pub fn new(eta: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&eta) {
            return Err(Error::domain(format!("loss rate must be in [0, 1], got {eta}")));
        }
        Ok(LossModel { eta })
    }

    pub fn lossless() -> Self {
        LossModel { eta: 0.0 }
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }
}

/// Probability `C(N,k) η^(N-k) (1-η)^k` of detecting `k` of `N` photons.
pub fn binomial_weight(k: usize, photons: usize, eta: f64) -> Result<f64> {
    if k > photons {
        return Err(Error::domain(format!("cannot detect {k} of {photons} photons")));
    }
    let eta = LossModel::new(eta)?.eta;
    Ok(binomial(photons as u64, k as u64) * eta.powi((photons - k) as i32) * (1.0 - eta).powi(k as i32))
}

/// Knobs of the sharpness calculation; the defaults are the conventions that
/// reproduce the published variances.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct SharpnessOptions {
    pub rule: FeedbackRule,
    /// `Φ_0`; shifts every estimate and every probability by the same phase.
    pub initial_feedback: f64,
    /// Number of `φ` samples; `None` means `4N`.
    pub quadrature: Option<usize>,
    pub index_order: IndexOrder,
}

/// Sharpness evaluator for a fixed photon number, holding the input state.
#[derive(Clone, Debug)]
pub struct SharpnessEvaluator {
    input: FockVector,
    options: SharpnessOptions,
    quadrature: usize,
}

impl SharpnessEvaluator {
    pub fn new(photons: usize) -> Result<Self> {
        Self::with_options(photons, SharpnessOptions::default())
    }

    pub fn with_options(photons: usize, options: SharpnessOptions) -> Result<Self> {
        if photons > ENUMERATION_CAP {
            return Err(Error::Resource { depth: photons, branches: 1u128 << photons, cap: ENUMERATION_CAP });
        }
        let input = min_uncertainty_state_with(photons, options.index_order)?;
        let quadrature = options.quadrature.unwrap_or(4 * photons);
        if quadrature < 2 * photons + 2 {
            return Err(Error::domain(format!(
                "{quadrature} phase samples cannot resolve a degree-{photons} polynomial; need at least {}",
                2 * photons + 2
            )));
        }
        if !options.initial_feedback.is_finite() {
            return Err(Error::domain("initial feedback must be finite"));
        }
        Ok(SharpnessEvaluator { input, options, quadrature })
    }

    pub fn photons(&self) -> usize {
        self.input.photons()
    }

    pub fn quadrature(&self) -> usize {
        self.quadrature
    }

    pub fn input(&self) -> &FockVector {
        &self.input
    }

    /// The complex terms `𝒮(k)` for `k = 0..=N`; entry `k` averages over
    /// records of exactly `k` detections. `𝒮(0)` is zero.
    pub fn detection_terms(&self, policy: &Policy) -> Result<Vec<Complex64>> {
        self.terms(policy, false)
    }

    fn terms(&self, policy: &Policy, full_only: bool) -> Result<Vec<Complex64>> {
        let n = self.photons();
        policy.expect_photons(n)?;
        let rule = self.options.rule;
        let q_count = self.quadrature;

        let per_sample: Vec<Vec<Complex64>> = (0..q_count)
            .into_par_iter()
            .map(|q| {
                let phi = TAU * q as f64 / q_count as f64;
                let ctx = EstimationContext::new(phi)
                    .and_then(|c| c.with_initial_feedback(self.options.initial_feedback))
                    .expect("finite angles")
                    .with_rule(rule);
                let mut sums = vec![Complex64::new(0.0, 0.0); n + 1];
                walk_unchecked(&self.input, policy, &ctx, n, |branch| {
                    let k = branch.record.len();
                    if k == 0 || (full_only && k < n) {
                        return;
                    }
                    let last = branch.record[k - 1];
                    let est = rule.raw_estimate(policy, branch.detection_feedback, last, k);
                    sums[k] += Complex64::from_polar(branch.probability, est);
                });
                let rotation = Complex64::from_polar(1.0 / q_count as f64, -phi);
                sums.iter_mut().for_each(|s| *s *= rotation);
                sums
            })
            .collect();

        // fixed-order reduction keeps results independent of the thread count
        let mut total = vec![Complex64::new(0.0, 0.0); n + 1];
        for sums in &per_sample {
            for (t, s) in total.iter_mut().zip(sums) {
                *t += s;
            }
        }
        Ok(total)
    }

    /// Lossless sharpness: only complete records of `N` detections.
    pub fn sharpness(&self, policy: &Policy) -> Result<SharpnessReport> {
        let terms = self.terms(policy, true)?;
        Ok(SharpnessReport::from_sharpness(terms[self.photons()].norm()))
    }

    pub fn sharpness_with_loss(&self, policy: &Policy, loss: LossModel) -> Result<SharpnessReport> {
        let n = self.photons();
        let terms = if loss.eta == 0.0 { self.terms(policy, true)? } else { self.terms(policy, false)? };
        let mut mixed = Complex64::new(0.0, 0.0);
        for (k, term) in terms.iter().enumerate() {
            mixed += term * binomial_weight(k, n, loss.eta)?;
        }
        Ok(SharpnessReport::from_sharpness(mixed.norm()))
    }
}

/// Lossless sharpness of an `N`-photon policy with the default conventions.
pub fn sharpness(policy: &Policy, photons: usize) -> Result<SharpnessReport> {
    policy.expect_photons(photons)?;
    SharpnessEvaluator::new(photons)?.sharpness(policy)
}

pub fn sharpness_with_loss(policy: &Policy, photons: usize, loss: LossModel) -> Result<SharpnessReport> {
    policy.expect_photons(photons)?;
    SharpnessEvaluator::new(photons)?.sharpness_with_loss(policy, loss)
}

/// Least-squares fit of `ln V = intercept + exponent · ln N`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PowerLawFit {
    pub exponent: f64,
    /// Standard error of the exponent; undefined for exactly two points.
    pub stderr: Option<f64>,
    pub intercept: f64,
    pub points: usize,
}

pub fn fit_power_law(points: &[(f64, f64)]) -> Result<PowerLawFit> {
    if points.len() < 2 {
        return Err(Error::domain(format!("a power-law fit needs at least 2 points, got {}", points.len())));
    }
    for (i, &(n, v)) in points.iter().enumerate() {
        if !(n > 0.0 && n.is_finite()) {
            return Err(Error::domain(format!("photon number must be positive, got {n}")));
        }
        if !(v > 0.0 && v.is_finite()) {
            return Err(Error::domain(format!("variance must be positive and finite, got {v} at N = {n}")));
        }
        if points[..i].iter().any(|&(m, _)| m == n) {
            return Err(Error::domain(format!("duplicate photon number {n}")));
        }
    }
    let xs: Vec<f64> = points.iter().map(|p| p.0.ln()).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.1.ln()).collect();
    let count = points.len() as f64;
    let mean_x = xs.iter().sum::<f64>() / count;
    let mean_y = ys.iter().sum::<f64>() / count;
    let sxx: f64 = xs.iter().map(|x| (x - mean_x).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mean_x) * (y - mean_y)).sum();
    let exponent = sxy / sxx;
    let intercept = mean_y - exponent * mean_x;
    let stderr = (points.len() > 2).then(|| {
        let rss: f64 = xs.iter().zip(&ys).map(|(x, y)| (y - intercept - exponent * x).powi(2)).sum();
        (rss / (count - 2.0) / sxx).sqrt()
    });
    Ok(PowerLawFit { exponent, stderr, intercept, points: points.len() })
}
