//! Prints the minimum-uncertainty input state for a photon number.
//!
//! ```text
//! cargo run --example input_state -- 6
//! ```

use adaptive_qpe::fock::{min_uncertainty_state, wigner_small_d, HalfInteger};
use std::f64::consts::FRAC_PI_2;

fn main() -> adaptive_qpe::Result<()> {
    let n: usize = std::env::args().nth(1).map_or(Ok(6), |a| a.parse()).expect("photon number");
    let state = min_uncertainty_state(n)?;

    println!("N = {n}, squared norm = {:.15}", state.norm_sqr());
    println!("{:>3}  {:>12}  {:>12}  {:>10}", "n", "re", "im", "|a|^2");
    for (k, a) in state.amps().iter().enumerate() {
        println!("{k:>3}  {:>12.8}  {:>12.8}  {:>10.6}", a.re, a.im, a.norm_sqr());
    }

    // one row of the rotation that builds the state
    let j = HalfInteger::from_twice(n as i32);
    let top = j;
    print!("\nd^{j}_{{{j},m}}(pi/2):");
    for m2 in (-j.twice()..=j.twice()).rev().step_by(2) {
        print!(" {:.4}", wigner_small_d(j, top, HalfInteger::from_twice(m2), FRAC_PI_2)?);
    }
    println!();
    Ok(())
}
