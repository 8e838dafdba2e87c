//! Recomputes the Holevo variance of every shipped golden policy.
//!
//! ```text
//! cargo run --release --example golden_policies
//! ```

use adaptive_qpe::fitness::SharpnessEvaluator;
use adaptive_qpe::golden::golden_policies;

fn main() -> adaptive_qpe::Result<()> {
    println!("{:>3}  {:>10}  {:>10}  {:>10}  {:>9}", "N", "sharpness", "V", "published", "|diff|");
    for g in golden_policies()? {
        let report = SharpnessEvaluator::new(g.n)?.sharpness(&g.policy)?;
        println!(
            "{:>3}  {:>10.6}  {:>10.6}  {:>10.5}  {:>9.2e}",
            g.n,
            report.sharpness,
            report.holevo_variance,
            g.variance,
            (report.holevo_variance - g.variance).abs()
        );
    }
    Ok(())
}
