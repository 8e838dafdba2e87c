//! Learns a 4-photon policy from scratch with the published swarm settings
//! and compares it with the golden one.
//!
//! ```text
//! cargo run --release --example optimize -- 4 7
//! ```

use adaptive_qpe::golden::golden_policy;
use adaptive_qpe::swarm::{optimize, published_config, FitnessKind};

fn main() -> adaptive_qpe::Result<()> {
    let mut args = std::env::args().skip(1);
    let n: usize = args.next().map_or(4, |a| a.parse().expect("photon number"));
    let seed: u64 = args.next().map_or(7, |a| a.parse().expect("seed"));

    let config = published_config(n)?;
    println!(
        "N = {n}: {} particles, {} rounds, omega {}, nu_max {}, r {}",
        config.xi, config.steps, config.omega, config.nu_max, config.r
    );
    let run = optimize(n, &config, seed, FitnessKind::Lossless)?;

    for (step, s) in run.history.iter().enumerate().step_by((config.steps / 10).max(1)) {
        println!("round {step:>4}: best sharpness {s:.6}");
    }
    let golden = golden_policy(n)?;
    println!("\nlearned  V = {:.5}  {}", run.best_variance, run.best_policy);
    println!("golden   V = {:.5}  {}", golden.variance, golden.policy);
    Ok(())
}
