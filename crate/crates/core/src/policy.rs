//! Feedback policies and the simulated measurement record.
//!
//! A policy for `N` photons is the vector `(ΔΦ_1, …, ΔΦ_{N-1}, Δφ)`. After the
//! `k`-th detection with outcome `u_k` the interferometer feedback moves by
//! `Φ_k = Φ_{k-1} - (-1)^{u_k} ΔΦ_k`, and the final estimate resolves the last
//! bit with `Δφ` in the same way. The photon detected `k`-th sees the
//! interferometer at `θ_k = (φ - Φ_{k-1}) / 2`.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::angle::{check_finite, wrap_angle};
use crate::fock::{kraus_into, norm_sqr, FockVector, Outcome};
use crate::{Error, Result};

/// Deepest outcome tree that may be enumerated (2^16 leaves).
pub const ENUMERATION_CAP: usize = 16;

/// Tolerance on the input-state norm for probability calculations.
pub const INPUT_NORM_TOLERANCE: f64 = 1e-9;

/// Feedback increments `ΔΦ_1..ΔΦ_{N-1}` followed by the estimate increment `Δφ`,
/// each stored reduced into `[0, 2π)`.
#[derive(Clone, Debug, PartialEq)]
pub struct Policy {
    increments: Vec<f64>,
}

impl Policy {
    pub fn new(increments: Vec<f64>) -> Result<Self> {
        if increments.is_empty() {
            return Err(Error::domain("a policy needs at least one increment"));
        }
        let increments = increments
            .into_iter()
            .map(|x| check_finite(x, "policy increment").map(wrap_angle))
            .collect::<Result<Vec<_>>>()?;
        Ok(Policy { increments })
    }

    /// The degenerate policy that never moves the feedback phase.
    pub fn zeros(photons: usize) -> Result<Self> {
        Policy::new(vec![0.0; photons])
    }

    /// Number of photons `N` this policy is built for.
    pub fn photons(&self) -> usize {
        self.increments.len()
    }

    pub fn increments(&self) -> &[f64] {
        &self.increments
    }

    /// `ΔΦ_1..ΔΦ_{N-1}`.
    pub fn feedback_increments(&self) -> &[f64] {
        &self.increments[..self.increments.len() - 1]
    }

    /// `Δφ`.
    pub fn estimate_increment(&self) -> f64 {
        self.increments[self.increments.len() - 1]
    }

    pub fn expect_photons(&self, photons: usize) -> Result<()> {
        if self.photons() != photons {
            return Err(Error::domain(format!(
                "policy length {} ≠ {}",
                self.photons(),
                photons
            )));
        }
        Ok(())
    }
}

impl FromStr for Policy {
    type Err = Error;

    /// Parses a comma-separated list of radians, e.g. `1.5701,0.7862,0.5043,0.3507`.
    fn from_str(s: &str) -> Result<Self> {
        let values = s
            .split(',')
            .map(|part| {
                let part = part.trim();
                part.parse::<f64>()
                    .map_err(|_| Error::Parse(format!("malformed policy component {part:?}")))
            })
            .collect::<Result<Vec<_>>>()?;
        Policy::new(values)
    }
}

impl fmt::Display for Policy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, x) in self.increments.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{x}")?;
        }
        Ok(())
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PolicyRepr {
    n: usize,
    increments: Vec<f64>,
}

impl Serialize for Policy {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        PolicyRepr { n: self.photons(), increments: self.increments.clone() }.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for Policy {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let repr = PolicyRepr::deserialize(deserializer)?;
        if repr.n != repr.increments.len() {
            return Err(D::Error::custom(format!(
                "policy declares n = {} but has {} increments",
                repr.n,
                repr.increments.len()
            )));
        }
        Policy::new(repr.increments).map_err(D::Error::custom)
    }
}

/// Ordered detector outcomes `u_1..u_m`.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct MeasurementRecord {
    outcomes: Vec<Outcome>,
}

impl MeasurementRecord {
    pub fn new(outcomes: Vec<Outcome>) -> Self {
        MeasurementRecord { outcomes }
    }

    pub fn empty() -> Self {
        MeasurementRecord::default()
    }

    pub fn from_bits(bits: &[u8]) -> Result<Self> {
        let outcomes = bits.iter().map(|&b| Outcome::from_bit(b)).collect::<Result<_>>()?;
        Ok(MeasurementRecord { outcomes })
    }

    pub fn outcomes(&self) -> &[Outcome] {
        &self.outcomes
    }

    pub fn bits(&self) -> Vec<u8> {
        self.outcomes.iter().map(|u| u.bit()).collect()
    }

    pub fn len(&self) -> usize {
        self.outcomes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.outcomes.is_empty()
    }

    pub fn push(&mut self, outcome: Outcome) {
        self.outcomes.push(outcome);
    }

    /// The first `len` outcomes.
    pub fn prefix(&self, len: usize) -> MeasurementRecord {
        MeasurementRecord { outcomes: self.outcomes[..len.min(self.len())].to_vec() }
    }
}

impl FromStr for MeasurementRecord {
    type Err = Error;

    /// Parses a bit string such as `0110`.
    fn from_str(s: &str) -> Result<Self> {
        let outcomes = s
            .chars()
            .map(|c| match c {
                '0' => Ok(Outcome::Zero),
                '1' => Ok(Outcome::One),
                other => Err(Error::Parse(format!("record bit must be 0 or 1, got {other:?}"))),
            })
            .collect::<Result<_>>()?;
        Ok(MeasurementRecord { outcomes })
    }
}

impl fmt::Display for MeasurementRecord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for u in &self.outcomes {
            write!(f, "{}", u.bit())?;
        }
        Ok(())
    }
}

/// Sign with which an increment is applied for a detector outcome.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum SignConvention {
    /// `x - (-1)^u Δ`: outcome 0 decreases the phase.
    #[default]
    Standard,
    /// `x + (-1)^u Δ`.
    Flipped,
}

impl SignConvention {
    fn apply(self, base: f64, outcome: Outcome, increment: f64) -> f64 {
        match self {
            SignConvention::Standard => base - outcome.parity() * increment,
            SignConvention::Flipped => base + outcome.parity() * increment,
        }
    }
}

/// How a record that stops before all `N` photons were detected is turned
/// into an estimate.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum TruncatedEstimate {
    /// The estimate is the last feedback phase `Φ_k`, so `ΔΦ_k` resolves the
    /// last bit. Full records still end with `Δφ`.
    #[default]
    LastFeedback,
    /// The last detected bit is always resolved with `Δφ`.
    EstimateIncrement,
}

/// Sign conventions of the feedback and estimate updates.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct FeedbackRule {
    pub feedback: SignConvention,
    pub estimate: SignConvention,
    pub truncated: TruncatedEstimate,
}

impl FeedbackRule {
    /// `Φ_k` from `Φ_{k-1}` without reduction.
    pub fn next_feedback(&self, previous: f64, outcome: Outcome, increment: f64) -> f64 {
        self.feedback.apply(previous, outcome, increment)
    }

    /// Unreduced estimate after `detected` photons, given the feedback
    /// `Φ_{detected-1}` that was in force for the last one.
    pub fn raw_estimate(&self, policy: &Policy, detection_feedback: f64, last: Outcome, detected: usize) -> f64 {
        let n = policy.photons();
        if detected < n && self.truncated == TruncatedEstimate::LastFeedback {
            self.next_feedback(detection_feedback, last, policy.increments()[detected - 1])
        } else {
            self.estimate.apply(detection_feedback, last, policy.estimate_increment())
        }
    }

    fn raw_feedback(&self, policy: &Policy, record: &[Outcome], initial: f64) -> f64 {
        record
            .iter()
            .zip(policy.feedback_increments())
            .fold(initial, |phi, (&u, &delta)| self.next_feedback(phi, u, delta))
    }

    /// `Φ_m` after consuming `record` (length at most `N - 1`), reduced into `[0, 2π)`.
    pub fn feedback_phase(&self, policy: &Policy, record: &MeasurementRecord, initial: f64) -> Result<f64> {
        let limit = policy.photons() - 1;
        if record.len() > limit {
            return Err(Error::domain(format!(
                "feedback is defined for at most {limit} detections, record has {}",
                record.len()
            )));
        }
        Ok(wrap_angle(self.raw_feedback(policy, record.outcomes(), initial)))
    }

    /// Phase estimate for a record of `1..=N` detections, reduced into `[0, 2π)`.
    pub fn estimate(&self, policy: &Policy, record: &MeasurementRecord, initial: f64) -> Result<f64> {
        let k = record.len();
        if k == 0 {
            return Err(Error::domain("an estimate needs at least one detection"));
        }
        if k > policy.photons() {
            return Err(Error::domain(format!(
                "record of {k} detections is longer than the {}-photon policy",
                policy.photons()
            )));
        }
        let outcomes = record.outcomes();
        let before_last = self.raw_feedback(policy, &outcomes[..k - 1], initial);
        Ok(wrap_angle(self.raw_estimate(policy, before_last, outcomes[k - 1], k)))
    }
}

/// `Φ_m` for a record of at most `N - 1` detections, starting from `Φ_0 = 0`.
pub fn feedback_phase(policy: &Policy, record: &MeasurementRecord) -> Result<f64> {
    FeedbackRule::default().feedback_phase(policy, record, 0.0)
}

/// Phase estimate `φ̃` for a record of `1..=N` detections, starting from `Φ_0 = 0`.
pub fn estimate(policy: &Policy, record: &MeasurementRecord) -> Result<f64> {
    FeedbackRule::default().estimate(policy, record, 0.0)
}

/// The unknown phase and the controller's starting point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EstimationContext {
    true_phase: f64,
    initial_feedback: f64,
    rule: FeedbackRule,
}

impl EstimationContext {
    pub fn new(true_phase: f64) -> Result<Self> {
        Ok(EstimationContext {
            true_phase: wrap_angle(check_finite(true_phase, "true phase")?),
            initial_feedback: 0.0,
            rule: FeedbackRule::default(),
        })
    }

    pub fn with_initial_feedback(mut self, initial_feedback: f64) -> Result<Self> {
        self.initial_feedback = wrap_angle(check_finite(initial_feedback, "initial feedback")?);
        Ok(self)
    }

    pub fn with_rule(mut self, rule: FeedbackRule) -> Self {
        self.rule = rule;
        self
    }

    pub fn true_phase(&self) -> f64 {
        self.true_phase
    }

    pub fn initial_feedback(&self) -> f64 {
        self.initial_feedback
    }

    pub fn rule(&self) -> FeedbackRule {
        self.rule
    }
}

fn check_input(input: &FockVector, policy: &Policy) -> Result<()> {
    let norm = input.norm_sqr();
    if (norm - 1.0).abs() > INPUT_NORM_TOLERANCE {
        return Err(Error::domain(format!("input state must be normalized, squared norm is {norm}")));
    }
    policy.expect_photons(input.photons())
}

/// Probability `‖ĉ_{u_m}(θ_m)⋯ĉ_{u_1}(θ_1)|input⟩‖²` of observing `record`.
pub fn record_probability(
    input: &FockVector,
    policy: &Policy,
    ctx: &EstimationContext,
    record: &MeasurementRecord,
) -> Result<f64> {
    check_input(input, policy)?;
    if record.len() > input.photons() {
        return Err(Error::domain(format!(
            "record of {} detections is longer than the {}-photon input",
            record.len(),
            input.photons()
        )));
    }
    let rule = ctx.rule;
    let mut amps = input.amps().to_vec();
    let mut feedback = ctx.initial_feedback;
    for (k, &u) in record.outcomes().iter().enumerate() {
        let theta = (ctx.true_phase - feedback) / 2.0;
        let mut next = vec![Complex64::new(0.0, 0.0); amps.len() - 1];
        kraus_into(&amps, u, theta, &mut next);
        amps = next;
        if let Some(&delta) = policy.feedback_increments().get(k) {
            feedback = rule.next_feedback(feedback, u, delta);
        }
    }
    Ok(norm_sqr(&amps))
}

/// A node of the outcome tree as seen by [`walk_outcomes`].
#[derive(Debug)]
pub struct Branch<'a> {
    /// Outcomes leading to this node; empty for the root.
    pub record: &'a [Outcome],
    /// Joint probability of `record`.
    pub probability: f64,
    /// Unnormalized post-measurement amplitudes.
    pub amps: &'a [Complex64],
    /// Unreduced feedback `Φ_{k-1}` that was applied while the last photon of
    /// `record` was detected (`Φ_0` at the root).
    pub detection_feedback: f64,
}

fn check_depth(input: &FockVector, depth: usize) -> Result<()> {
    if depth > input.photons() {
        return Err(Error::domain(format!(
            "depth {depth} exceeds the {} photons of the input",
            input.photons()
        )));
    }
    if depth > ENUMERATION_CAP {
        return Err(Error::Resource { depth, branches: 1u128 << depth, cap: ENUMERATION_CAP });
    }
    Ok(())
}

/// Visits every node of the outcome tree down to `depth` in depth-first
/// pre-order (outcome 0 before 1), reusing each parent's state for its children.
pub fn walk_outcomes<F>(input: &FockVector, policy: &Policy, ctx: &EstimationContext, depth: usize, visit: F) -> Result<()>
where
    F: FnMut(&Branch<'_>),
{
    check_input(input, policy)?;
    check_depth(input, depth)?;
    walk_unchecked(input, policy, ctx, depth, visit);
    Ok(())
}

/// [`walk_outcomes`] without the input validation, for callers that already
/// validated the input once.
pub(crate) fn walk_unchecked<F>(input: &FockVector, policy: &Policy, ctx: &EstimationContext, depth: usize, mut visit: F)
where
    F: FnMut(&Branch<'_>),
{
    let photons = input.photons();
    let mut buffers: Vec<Vec<Complex64>> =
        (0..=depth).map(|k| vec![Complex64::new(0.0, 0.0); photons + 1 - k]).collect();
    buffers[0].copy_from_slice(input.amps());
    let mut record = Vec::with_capacity(depth);

    visit(&Branch {
        record: &record,
        probability: norm_sqr(&buffers[0]),
        amps: &buffers[0],
        detection_feedback: ctx.initial_feedback,
    });

    let mut walker = Walker { policy, ctx, depth, buffers, record: &mut record, visit: &mut visit };
    walker.descend(ctx.initial_feedback);
}

struct Walker<'w, F> {
    policy: &'w Policy,
    ctx: &'w EstimationContext,
    depth: usize,
    buffers: Vec<Vec<Complex64>>,
    record: &'w mut Vec<Outcome>,
    visit: &'w mut F,
}

impl<F: FnMut(&Branch<'_>)> Walker<'_, F> {
    fn descend(&mut self, feedback: f64) {
        let k = self.record.len();
        if k == self.depth {
            return;
        }
        let theta = (self.ctx.true_phase - feedback) / 2.0;
        for u in Outcome::BOTH {
            {
                let (parents, children) = self.buffers.split_at_mut(k + 1);
                kraus_into(&parents[k], u, theta, &mut children[0]);
            }
            self.record.push(u);
            let child = &self.buffers[k + 1];
            (self.visit)(&Branch {
                record: self.record,
                probability: norm_sqr(child),
                amps: child,
                detection_feedback: feedback,
            });
            let next = match self.policy.feedback_increments().get(k) {
                Some(&delta) => self.ctx.rule.next_feedback(feedback, u, delta),
                None => feedback,
            };
            self.descend(next);
            self.record.pop();
        }
    }
}

/// One leaf of [`outcome_tree`].
#[derive(Clone, Debug, PartialEq)]
pub struct OutcomeBranch {
    pub record: MeasurementRecord,
    pub probability: f64,
    pub state: FockVector,
}

/// All `2^depth` records of length `depth`, with their probabilities and
/// post-measurement states, in lexicographic order of the records.
pub fn outcome_tree(
    input: &FockVector,
    policy: &Policy,
    ctx: &EstimationContext,
    depth: usize,
) -> Result<Vec<OutcomeBranch>> {
    let mut leaves = Vec::with_capacity(1 << depth.min(ENUMERATION_CAP));
    walk_outcomes(input, policy, ctx, depth, |branch| {
        if branch.record.len() == depth {
            leaves.push(OutcomeBranch {
                record: MeasurementRecord::new(branch.record.to_vec()),
                probability: branch.probability,
                state: FockVector::from_amps_unchecked(branch.amps.to_vec()),
            });
        }
    })?;
    Ok(leaves)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::min_uncertainty_state;
    use std::f64::consts::TAU;

    fn rec(s: &str) -> MeasurementRecord {
        s.parse().unwrap()
    }

    #[test]
    fn policy_is_reduced_and_validated() {
        let p = Policy::new(vec![-0.5, TAU + 1.0]).unwrap();
        assert!((p.increments()[0] - (TAU - 0.5)).abs() < 1e-15);
        assert!((p.increments()[1] - 1.0).abs() < 1e-12);
        assert!(Policy::new(vec![]).is_err());
        assert!(Policy::new(vec![f64::NAN]).is_err());
        assert!("1.0,abc".parse::<Policy>().is_err());
        let parsed: Policy = "1.5701, 0.7862,0.5043,0.3507".parse().unwrap();
        assert_eq!(parsed.photons(), 4);
        assert_eq!(parsed.estimate_increment(), 0.3507);
    }

    #[test]
    fn policy_json_checks_length() {
        let p: Policy = serde_json::from_str(r#"{"n":2,"increments":[0.1,0.2]}"#).unwrap();
        assert_eq!(serde_json::to_string(&p).unwrap(), r#"{"n":2,"increments":[0.1,0.2]}"#);
        assert!(serde_json::from_str::<Policy>(r#"{"n":3,"increments":[0.1,0.2]}"#).is_err());
    }

    #[test]
    fn feedback_phase_rule() {
        let p = Policy::new(vec![0.3, 0.2, 0.1]).unwrap();
        assert_eq!(feedback_phase(&p, &MeasurementRecord::empty()).unwrap(), 0.0);
        assert!((feedback_phase(&p, &rec("0")).unwrap() - (TAU - 0.3)).abs() < 1e-15);
        assert!((feedback_phase(&p, &rec("1")).unwrap() - 0.3).abs() < 1e-15);
        assert!((feedback_phase(&p, &rec("11")).unwrap() - 0.5).abs() < 1e-15);
        assert!(feedback_phase(&p, &rec("110")).is_err());
    }

    #[test]
    fn estimate_rule() {
        let p = Policy::new(vec![0.7, 0.25]).unwrap();
        assert!((estimate(&p, &rec("11")).unwrap() - 0.95).abs() < 1e-15);
        let single = Policy::new(vec![0.4]).unwrap();
        assert!((estimate(&single, &rec("0")).unwrap() - (TAU - 0.4)).abs() < 1e-15);
        let zero = Policy::zeros(3).unwrap();
        for r in ["0", "1", "01", "110", "000"] {
            assert_eq!(estimate(&zero, &rec(r)).unwrap(), 0.0);
        }
        assert!(estimate(&p, &MeasurementRecord::empty()).is_err());
        assert!(estimate(&p, &rec("010")).is_err());
    }

    #[test]
    fn truncated_estimate_conventions() {
        let p = Policy::new(vec![0.7, 0.5, 0.25]).unwrap();
        // one detection of three
        let last_feedback = estimate(&p, &rec("1")).unwrap();
        assert!((last_feedback - 0.7).abs() < 1e-15);
        let rule = FeedbackRule { truncated: TruncatedEstimate::EstimateIncrement, ..Default::default() };
        let with_increment = rule.estimate(&p, &rec("1"), 0.0).unwrap();
        assert!((with_increment - 0.25).abs() < 1e-15);
        // full records agree
        assert_eq!(rule.estimate(&p, &rec("101"), 0.0).unwrap(), estimate(&p, &rec("101")).unwrap());
    }

    #[test]
    fn single_photon_probability() {
        let psi = min_uncertainty_state(1).unwrap();
        let p = Policy::new(vec![0.9]).unwrap();
        for &phi in &[0.0, 0.4, 1.7, 3.9, 6.0] {
            let ctx = EstimationContext::new(phi).unwrap();
            let prob = record_probability(&psi, &p, &ctx, &rec("0")).unwrap();
            assert!((prob - (1.0 - phi.sin()) / 2.0).abs() < 1e-12);
        }
    }

    #[test]
    fn probability_validation() {
        let p = Policy::new(vec![0.1, 0.2]).unwrap();
        let ctx = EstimationContext::new(0.3).unwrap();
        let half = FockVector::new(vec![Complex64::new(0.5, 0.0); 3]).unwrap();
        assert!(record_probability(&half, &p, &ctx, &rec("0")).is_err());
        let psi = min_uncertainty_state(2).unwrap();
        assert!(record_probability(&psi, &p, &ctx, &rec("010")).is_err());
        let wrong = Policy::new(vec![0.1]).unwrap();
        assert!(record_probability(&psi, &wrong, &ctx, &rec("0")).is_err());
    }

    #[test]
    fn depth_zero_tree() {
        let psi = min_uncertainty_state(3).unwrap();
        let p = Policy::new(vec![0.1, 0.2, 0.3]).unwrap();
        let ctx = EstimationContext::new(1.0).unwrap();
        let tree = outcome_tree(&psi, &p, &ctx, 0).unwrap();
        assert_eq!(tree.len(), 1);
        assert!(tree[0].record.is_empty());
        assert!((tree[0].probability - 1.0).abs() < 1e-12);
        assert_eq!(tree[0].state, psi);
    }

    #[test]
    fn tree_depth_limits() {
        let psi = min_uncertainty_state(18).unwrap();
        let p = Policy::zeros(18).unwrap();
        let ctx = EstimationContext::new(0.0).unwrap();
        match outcome_tree(&psi, &p, &ctx, 17) {
            Err(Error::Resource { branches, .. }) => assert_eq!(branches, 1 << 17),
            other => panic!("expected resource error, got {other:?}"),
        }
        let small = min_uncertainty_state(2).unwrap();
        assert!(outcome_tree(&small, &Policy::zeros(2).unwrap(), &ctx, 3).is_err());
    }

    #[test]
    fn record_display_round_trip() {
        let r = MeasurementRecord::from_bits(&[0, 1, 1]).unwrap();
        assert_eq!(r.to_string(), "011");
        assert_eq!(rec("011"), r);
        assert!("012".parse::<MeasurementRecord>().is_err());
        assert!(MeasurementRecord::from_bits(&[3]).is_err());
    }
}
