//! Walks the measurement tree of a golden policy at a fixed true phase and
//! lists every record with its probability and phase estimate.
//!
//! ```text
//! cargo run --example outcome_tree -- 4 1.0
//! ```

use adaptive_qpe::fock::min_uncertainty_state;
use adaptive_qpe::golden::golden_policy;
use adaptive_qpe::policy::{estimate, feedback_phase, outcome_tree, EstimationContext};

fn main() -> adaptive_qpe::Result<()> {
    let mut args = std::env::args().skip(1);
    let n: usize = args.next().map_or(4, |a| a.parse().expect("photon number"));
    let phi: f64 = args.next().map_or(1.0, |a| a.parse().expect("phase"));

    let golden = golden_policy(n)?;
    let input = min_uncertainty_state(n)?;
    let ctx = EstimationContext::new(phi)?;
    println!("policy {}  true phase {phi}", golden.policy);

    for depth in 1..n {
        let leaves = outcome_tree(&input, &golden.policy, &ctx, depth)?;
        let likely = leaves.iter().max_by(|a, b| a.probability.total_cmp(&b.probability)).unwrap();
        println!(
            "depth {depth}: most likely record {} (p = {:.4}), next feedback {:.4}",
            likely.record,
            likely.probability,
            feedback_phase(&golden.policy, &likely.record)?
        );
    }

    println!("\n{:<width$}  {:>8}  {:>8}", "record", "p", "estimate", width = n.max(6));
    let mut total = 0.0;
    for leaf in outcome_tree(&input, &golden.policy, &ctx, n)? {
        total += leaf.probability;
        if leaf.probability > 1e-3 {
            println!(
                "{:<width$}  {:>8.5}  {:>8.4}",
                leaf.record.to_string(),
                leaf.probability,
                estimate(&golden.policy, &leaf.record)?,
                width = n.max(6)
            );
        }
    }
    println!("records below 1e-3 omitted; total probability {total:.12}");
    Ok(())
}
