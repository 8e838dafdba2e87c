//! Compares ring neighborhood radii on a multimodal test function, using a
//! plain closure as the objective.
//!
//! ```text
//! cargo run --release --example ring_topology
//! ```

use adaptive_qpe::policy::Policy;
use adaptive_qpe::swarm::{init_swarm, optimize_with, RandomGranularity, SwarmConfig};

/// Highest at the origin, with weaker peaks at ±2π/3 in every coordinate.
fn objective(p: &Policy) -> f64 {
    p.increments().iter().map(|x| x.cos() + 0.6 * (3.0 * x).cos()).sum()
}

fn main() -> adaptive_qpe::Result<()> {
    let base = SwarmConfig {
        omega: 0.8,
        phi1: 0.5,
        phi2: 1.0,
        xi: 20,
        nu_max: 0.2,
        r: 1,
        steps: 400,
        dim: 2,
        granularity: RandomGranularity::PerComponent,
    };
    let optimum = 1.6 * base.dim as f64;
    const SEEDS: u64 = 40;

    let swarm = init_swarm(&base, 0, &objective)?;
    println!(
        "after initialization: global best is particle {}, particle 0 follows particle {} at r = 1",
        swarm.global_best_index(),
        swarm.neighborhood_best_index(0, 1)
    );
    println!("optimum {optimum:.1}, {SEEDS} seeds per radius\n");

    println!("{:>3}  {:>9}  {:>9}  {:>10}", "r", "mean best", "worst", "at optimum");
    for r in [1, 2, 4, 9] {
        let config = SwarmConfig { r, ..base };
        let bests = (0..SEEDS)
            .map(|seed| optimize_with(&config, seed, &objective).map(|run| run.best_fitness))
            .collect::<adaptive_qpe::Result<Vec<f64>>>()?;
        let mean = bests.iter().sum::<f64>() / bests.len() as f64;
        let worst = bests.iter().cloned().fold(f64::INFINITY, f64::min);
        let hits = bests.iter().filter(|&&f| f > optimum - 1e-2).count();
        println!("{r:>3}  {mean:>9.4}  {worst:>9.4}  {hits:>10}");
    }
    Ok(())
}
