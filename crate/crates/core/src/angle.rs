//! Angle helpers. All public angle-carrying types store values in `[0, 2π)`.

use std::f64::consts::TAU;

/// Reduces `x` modulo 2π into `[0, 2π)`.
pub fn wrap_angle(x: f64) -> f64 {
    let r = x.rem_euclid(TAU);
    // rem_euclid can round up to exactly TAU for tiny negative inputs
    if r >= TAU {
        0.0
    } else {
        r
    }
}

pub(crate) fn check_finite(x: f64, what: &str) -> crate::Result<f64> {
    if x.is_finite() {
        Ok(x)
    } else {
        Err(crate::Error::domain(format!("{what} must be finite, got {x}")))
    }
}
