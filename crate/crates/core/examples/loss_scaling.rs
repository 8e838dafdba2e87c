//! Evaluates the golden policies under photon loss and fits `V ∝ N^k` for
//! each loss rate.
//!
//! ```text
//! cargo run --release --example loss_scaling -- 0,0.2,0.4
//! ```

use adaptive_qpe::cli::{loss_sweep, scaling_fit};
use adaptive_qpe::golden::golden_policies;

fn main() -> adaptive_qpe::Result<()> {
    let etas: Vec<f64> = std::env::args()
        .nth(1)
        .unwrap_or_else(|| "0,0.2,0.4".into())
        .split(',')
        .map(|s| s.parse().expect("loss rate"))
        .collect();
    let photons: Vec<usize> = (4..=14).collect();
    let rows = loss_sweep(&golden_policies()?, &photons, &etas)?;

    print!("{:>3}", "N");
    for eta in &etas {
        print!("  {:>12}", format!("V(eta={eta})"));
    }
    println!();
    for chunk in rows.chunks(etas.len()) {
        print!("{:>3}", chunk[0].n);
        for row in chunk {
            print!("  {:>12.6}", row.holevo_variance);
        }
        println!();
    }

    println!();
    for &eta in &etas {
        match scaling_fit(&rows, eta) {
            Ok(report) => println!(
                "eta = {eta}: exponent {:.4} ± {:.4}",
                report.fit.exponent,
                report.fit.stderr.unwrap_or(f64::NAN)
            ),
            Err(e) => println!("eta = {eta}: no fit ({e})"),
        }
    }
    Ok(())
}
