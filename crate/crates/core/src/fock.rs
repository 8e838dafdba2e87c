//! Two-mode Fock space numerics.
//!
//! A state with `M` photons shared between modes `a` and `b` is stored densely
//! as `M + 1` complex amplitudes, where `amps[n]` multiplies `|n, M - n⟩`
//! (`n` photons in mode `a`). States produced by a measurement chain are left
//! unnormalized on purpose: the squared norm of the post-measurement state is
//! the probability of the record that produced it.

use std::f64::consts::{FRAC_PI_2, PI};
use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use statrs::function::factorial::ln_factorial;

use crate::{Error, Result};

/// Largest photon number accepted by [`min_uncertainty_state`].
pub const MAX_PHOTONS: usize = 20;

/// Slack allowed above unit norm before a state is rejected.
pub const NORM_SLACK: f64 = 1e-12;

/// A half-integer stored as twice its value, e.g. `j = 3/2` is `HalfInteger(3)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct HalfInteger(i32);

impl HalfInteger {
    pub const fn from_twice(twice: i32) -> Self {
        HalfInteger(twice)
    }

    pub const fn from_int(value: i32) -> Self {
        HalfInteger(2 * value)
    }

    pub const fn twice(self) -> i32 {
        self.0
    }

    pub fn value(self) -> f64 {
        f64::from(self.0) / 2.0
    }

    pub const fn is_integer(self) -> bool {
        self.0 % 2 == 0
    }
}

impl fmt::Display for HalfInteger {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_integer() {
            write!(f, "{}", self.0 / 2)
        } else {
            write!(f, "{}/2", self.0)
        }
    }
}

fn ln_fact(n: i32) -> f64 {
    ln_factorial(n as u64)
}

/// Wigner's small d-matrix element `d^j_{m_row, m_col}(beta)`.
///
/// Evaluated with the standard alternating factorial sum; the factorial ratio
/// of every term is accumulated in log space so that `j = 7` and beyond stay
/// well clear of overflow.
pub fn wigner_small_d(j: HalfInteger, m_row: HalfInteger, m_col: HalfInteger, beta: f64) -> Result<f64> {
    let (j2, r2, c2) = (j.twice(), m_row.twice(), m_col.twice());
    if j2 < 0 {
        return Err(Error::domain(format!("angular momentum j = {j} must be nonnegative")));
    }
    if r2.abs() > j2 || c2.abs() > j2 {
        return Err(Error::domain(format!(
            "d-matrix index out of range: j = {j}, m_row = {m_row}, m_col = {m_col}"
        )));
    }
    if (j2 - r2) % 2 != 0 || (j2 - c2) % 2 != 0 {
        return Err(Error::domain(format!(
            "d-matrix indices m_row = {m_row}, m_col = {m_col} do not match the parity of j = {j}"
        )));
    }
    if !beta.is_finite() {
        return Err(Error::domain(format!("rotation angle must be finite, got {beta}")));
    }

    let j_plus_row = (j2 + r2) / 2;
    let j_minus_row = (j2 - r2) / 2;
    let j_plus_col = (j2 + c2) / 2;
    let j_minus_col = (j2 - c2) / 2;
    let row_minus_col = (r2 - c2) / 2;

    let ln_prefactor =
        0.5 * (ln_fact(j_plus_row) + ln_fact(j_minus_row) + ln_fact(j_plus_col) + ln_fact(j_minus_col));
    let (cos_half, sin_half) = ((beta / 2.0).cos(), (beta / 2.0).sin());

    let s_min = 0.max(-row_minus_col);
    let s_max = j_plus_col.min(j_minus_row);
    let mut sum = 0.0;
    for s in s_min..=s_max {
        let ln_ratio = ln_prefactor
            - ln_fact(j_plus_col - s)
            - ln_fact(s)
            - ln_fact(row_minus_col + s)
            - ln_fact(j_minus_row - s);
        let sign = if (row_minus_col + s) % 2 == 0 { 1.0 } else { -1.0 };
        // cos^(2j + m_col - m_row - 2s) sin^(m_row - m_col + 2s)
        let cos_exp = j2 - row_minus_col - 2 * s;
        let sin_exp = row_minus_col + 2 * s;
        sum += sign * ln_ratio.exp() * cos_half.powi(cos_exp) * sin_half.powi(sin_exp);
    }
    Ok(sum)
}

/// Amplitudes of a two-mode state with a fixed total photon number.
#[derive(Clone, Debug, PartialEq)]
pub struct FockVector {
    amps: Vec<Complex64>,
}

impl FockVector {
    /// Wraps `amps` as a state with `amps.len() - 1` photons.
    pub fn new(amps: Vec<Complex64>) -> Result<Self> {
        if amps.is_empty() {
            return Err(Error::domain("a Fock vector needs at least one amplitude"));
        }
        if amps.iter().any(|a| !a.re.is_finite() || !a.im.is_finite()) {
            return Err(Error::domain("Fock amplitudes must be finite"));
        }
        let state = FockVector { amps };
        let norm = state.norm_sqr();
        if norm > 1.0 + NORM_SLACK {
            return Err(Error::domain(format!("squared norm {norm} exceeds 1")));
        }
        Ok(state)
    }

    /// The basis state `|n_a, n_b⟩`.
    pub fn basis(n_a: usize, n_b: usize) -> Self {
        let mut amps = vec![Complex64::new(0.0, 0.0); n_a + n_b + 1];
        amps[n_a] = Complex64::new(1.0, 0.0);
        FockVector { amps }
    }

    pub(crate) fn from_amps_unchecked(amps: Vec<Complex64>) -> Self {
        FockVector { amps }
    }

    pub fn photons(&self) -> usize {
        self.amps.len() - 1
    }

    pub fn amps(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn norm_sqr(&self) -> f64 {
        norm_sqr(&self.amps)
    }
}

pub(crate) fn norm_sqr(amps: &[Complex64]) -> f64 {
    amps.iter().map(|a| a.norm_sqr()).sum()
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct FockVectorRepr {
    photons: usize,
    amps: Vec<[f64; 2]>,
}

impl Serialize for FockVector {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        FockVectorRepr {
            photons: self.photons(),
            amps: self.amps.iter().map(|a| [a.re, a.im]).collect(),
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for FockVector {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let repr = FockVectorRepr::deserialize(deserializer)?;
        if repr.amps.len() != repr.photons + 1 {
            return Err(D::Error::custom(format!(
                "{} photons need {} amplitudes, got {}",
                repr.photons,
                repr.photons + 1,
                repr.amps.len()
            )));
        }
        let amps = repr.amps.into_iter().map(|[re, im]| Complex64::new(re, im)).collect();
        FockVector::new(amps).map_err(D::Error::custom)
    }
}

/// Which physical index of `d^{N/2}` the basis label `n` of the output state
/// is mapped onto in [`min_uncertainty_state_with`].
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum IndexOrder {
    /// `amps[n] ∝ Σ_k … d_{n - N/2, k - N/2}`.
    #[default]
    OutputRow,
    /// `amps[n] ∝ Σ_k … d_{k - N/2, n - N/2}`.
    OutputColumn,
}

/// The minimum-uncertainty `N`-photon input state.
pub fn min_uncertainty_state(photons: usize) -> Result<FockVector> {
    min_uncertainty_state_with(photons, IndexOrder::OutputRow)
}

pub fn min_uncertainty_state_with(photons: usize, order: IndexOrder) -> Result<FockVector> {
    if photons == 0 || photons > MAX_PHOTONS {
        return Err(Error::domain(format!(
            "input state photon number must be in 1..={MAX_PHOTONS}, got {photons}"
        )));
    }
    let n_total = photons as i32;
    let j = HalfInteger::from_twice(n_total);
    // μ(x) = x - N/2, stored doubled
    let mu = |x: i32| HalfInteger::from_twice(2 * x - n_total);
    let prefactor = (f64::from(n_total) / 2.0 + 1.0).powf(-0.5);

    let mut amps = Vec::with_capacity(photons + 1);
    for n in 0..=n_total {
        let mut acc = Complex64::new(0.0, 0.0);
        for k in 0..=n_total {
            let weight = (f64::from(k + 1) * PI / f64::from(n_total + 2)).sin();
            let phase = Complex64::from_polar(1.0, FRAC_PI_2 * f64::from(k - n));
            let d = match order {
                IndexOrder::OutputRow => wigner_small_d(j, mu(n), mu(k), FRAC_PI_2)?,
                IndexOrder::OutputColumn => wigner_small_d(j, mu(k), mu(n), FRAC_PI_2)?,
            };
            acc += phase * (weight * d);
        }
        amps.push(acc * prefactor);
    }
    Ok(FockVector { amps })
}

/// Detector outcome of a single photon.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Outcome {
    Zero,
    One,
}

impl Outcome {
    pub const BOTH: [Outcome; 2] = [Outcome::Zero, Outcome::One];

    pub fn from_bit(bit: u8) -> Result<Self> {
        match bit {
            0 => Ok(Outcome::Zero),
            1 => Ok(Outcome::One),
            other => Err(Error::domain(format!("detector outcome must be 0 or 1, got {other}"))),
        }
    }

    pub fn bit(self) -> u8 {
        match self {
            Outcome::Zero => 0,
            Outcome::One => 1,
        }
    }

    /// `(-1)^u`.
    pub fn parity(self) -> f64 {
        match self {
            Outcome::Zero => 1.0,
            Outcome::One => -1.0,
        }
    }
}

/// Applies the single-detection Kraus operator `ĉ_u(θ)` to an `M`-photon
/// state, returning the unnormalized `(M - 1)`-photon remainder.
pub fn kraus_apply(state: &FockVector, outcome: Outcome, theta: f64) -> Result<FockVector> {
    if state.photons() == 0 {
        return Err(Error::domain("cannot detect a photon in the vacuum"));
    }
    let mut out = vec![Complex64::new(0.0, 0.0); state.photons()];
    kraus_into(&state.amps, outcome, theta, &mut out);
    Ok(FockVector { amps: out })
}

/// Buffer form of [`kraus_apply`]; `out.len()` must be `input.len() - 1`.
pub(crate) fn kraus_into(input: &[Complex64], outcome: Outcome, theta: f64, out: &mut [Complex64]) {
    let m = input.len() - 1;
    debug_assert_eq!(out.len(), m);
    let shifted = match outcome {
        Outcome::Zero => theta,
        Outcome::One => theta - FRAC_PI_2,
    };
    let inv_sqrt_m = 1.0 / (m as f64).sqrt();
    let c = shifted.cos() * inv_sqrt_m;
    let s = shifted.sin() * inv_sqrt_m;
    for (n, slot) in out.iter_mut().enumerate() {
        let lower = ((n + 1) as f64).sqrt();
        let upper = ((m - n) as f64).sqrt();
        *slot = input[n + 1] * (c * lower) - input[n] * (s * upper);
    }
}
