//! Particle swarm optimization over policy space.
//!
//! Particles sit on a ring; particle `i` sees every particle within ring
//! distance `r`, itself included. A round has four phases: evaluate all current
//! positions and update personal bests, share bests, pick the neighborhood best
//! `g`, then move every particle with
//!
//! ```text
//! Δρ ← ω (Δρ + φ1·rand()·(ρ̂ - ρ) + φ2·rand()·(g - ρ)),  clamped to ±ν_max
//! ρ  ← ρ + Δρ  (mod 2π)
//! ```
//!
//! Each particle draws from its own ChaCha stream keyed by `(seed, index)`,
//! and fitness evaluations are the only parallel phase, so a run is a pure
//! function of its seed and configuration.

use std::f64::consts::TAU;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::angle::wrap_angle;
use crate::fitness::{holevo_variance, LossModel, SharpnessEvaluator};
use crate::golden::pso_settings_row;
use crate::policy::Policy;
use crate::{Error, Result};

/// How many `rand()` draws feed one velocity update.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RandomGranularity {
    /// Fresh draws for every component and every attraction term.
    #[default]
    PerComponent,
    /// One draw per attraction term, shared by all components.
    PerTerm,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SwarmConfig {
    /// Velocity damping ω.
    pub omega: f64,
    /// Attraction to the personal best.
    pub phi1: f64,
    /// Attraction to the neighborhood best.
    pub phi2: f64,
    /// Population size.
    pub xi: usize,
    /// Per-component velocity bound.
    pub nu_max: f64,
    /// Ring interaction range.
    pub r: usize,
    /// Number of rounds.
    pub steps: usize,
    /// Policy length `N`.
    pub dim: usize,
    #[serde(default)]
    pub granularity: RandomGranularity,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct SwarmConfigFile {
    omega: f64,
    phi1: f64,
    phi2: f64,
    xi: usize,
    nu_max: f64,
    r: usize,
    steps: usize,
    #[serde(default)]
    granularity: RandomGranularity,
}

impl SwarmConfig {
    pub fn validate(&self) -> Result<()> {
        for (name, value) in [("omega", self.omega), ("phi1", self.phi1), ("phi2", self.phi2)] {
            if !(0.0..=1.0).contains(&value) {
                return Err(Error::domain(format!("{name} must be in [0, 1], got {value}")));
            }
        }
        if self.xi == 0 {
            return Err(Error::domain("population size xi must be positive"));
        }
        if !(self.nu_max > 0.0 && self.nu_max.is_finite()) {
            return Err(Error::domain(format!("nu_max must be positive, got {}", self.nu_max)));
        }
        if 2 * self.r + 1 > self.xi {
            return Err(Error::domain(format!(
                "ring range r = {} needs 2r + 1 <= xi = {}",
                self.r, self.xi
            )));
        }
        if self.dim == 0 {
            return Err(Error::domain("policy dimension must be positive"));
        }
        Ok(())
    }

    /// Reads the JSON form `{omega, phi1, phi2, xi, nu_max, r, steps}`; the
    /// dimension comes from the photon number.
    pub fn from_json(text: &str, dim: usize) -> Result<Self> {
        let file: SwarmConfigFile = serde_json::from_str(text)?;
        let config = SwarmConfig {
            omega: file.omega,
            phi1: file.phi1,
            phi2: file.phi2,
            xi: file.xi,
            nu_max: file.nu_max,
            r: file.r,
            steps: file.steps,
            dim,
            granularity: file.granularity,
        };
        config.validate()?;
        Ok(config)
    }
}

/// Published swarm settings for `N = 4..=14`.
pub fn published_config(photons: usize) -> Result<SwarmConfig> {
    let row = pso_settings_row(photons)?;
    let config = SwarmConfig {
        omega: row.omega,
        phi1: row.phi1,
        phi2: row.phi2,
        xi: row.xi,
        nu_max: row.nu_max,
        r: row.r,
        steps: row.steps,
        dim: photons,
        granularity: RandomGranularity::PerComponent,
    };
    config.validate()?;
    Ok(config)
}

/// Objective maximized by the swarm.
pub trait Fitness: Sync {
    fn evaluate(&self, position: &Policy) -> Result<f64>;
}

impl<F> Fitness for F
where
    F: Fn(&Policy) -> f64 + Sync,
{
    fn evaluate(&self, position: &Policy) -> Result<f64> {
        Ok(self(position))
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FitnessKind {
    #[default]
    Lossless,
    Loss(LossModel),
}

/// Policy sharpness as a swarm objective.
#[derive(Clone, Debug)]
pub struct SharpnessFitness {
    evaluator: SharpnessEvaluator,
    kind: FitnessKind,
}

impl SharpnessFitness {
    pub fn new(photons: usize, kind: FitnessKind) -> Result<Self> {
        Ok(SharpnessFitness { evaluator: SharpnessEvaluator::new(photons)?, kind })
    }
}

impl Fitness for SharpnessFitness {
    fn evaluate(&self, position: &Policy) -> Result<f64> {
        let report = match self.kind {
            FitnessKind::Lossless => self.evaluator.sharpness(position)?,
            FitnessKind::Loss(loss) => self.evaluator.sharpness_with_loss(position, loss)?,
        };
        Ok(report.sharpness)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Particle {
    pub position: Policy,
    pub velocity: Vec<f64>,
    pub best_position: Policy,
    pub best_fitness: f64,
    /// Fitness of `position`, if it has been evaluated since the last move.
    position_fitness: Option<f64>,
}

impl Particle {
    pub fn position_fitness(&self) -> Option<f64> {
        self.position_fitness
    }
}

#[derive(Clone, Debug)]
pub struct Swarm {
    particles: Vec<Particle>,
    streams: Vec<ChaCha8Rng>,
}

impl Swarm {
    pub fn particles(&self) -> &[Particle] {
        &self.particles
    }

    pub fn len(&self) -> usize {
        self.particles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.particles.is_empty()
    }

    /// Index of the particle with the best personal fitness (lowest index on ties).
    pub fn global_best_index(&self) -> usize {
        best_index(self.particles.iter().enumerate().map(|(i, p)| (i, p.best_fitness)))
    }

    pub fn global_best(&self) -> &Particle {
        &self.particles[self.global_best_index()]
    }

    /// Index of `g^(i)`: the best personal best within ring distance `r` of `i`.
    pub fn neighborhood_best_index(&self, i: usize, r: usize) -> usize {
        let xi = self.particles.len();
        best_index(
            (0..xi)
                .filter(|&j| ring_distance(i, j, xi) <= r)
                .map(|j| (j, self.particles[j].best_fitness)),
        )
    }

    pub fn neighborhood_best(&self, i: usize, r: usize) -> &Policy {
        &self.particles[self.neighborhood_best_index(i, r)].best_position
    }
}

pub fn ring_distance(i: usize, j: usize, xi: usize) -> usize {
    let d = i.abs_diff(j);
    d.min(xi - d)
}

fn best_index(candidates: impl Iterator<Item = (usize, f64)>) -> usize {
    let mut best: Option<(usize, f64)> = None;
    for (j, f) in candidates {
        if best.is_none_or(|(_, bf)| f > bf) {
            best = Some((j, f));
        }
    }
    best.expect("neighborhood contains the particle itself").0
}

fn particle_stream(seed: u64, index: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64);
    rng
}

fn evaluate_all<F: Fitness>(positions: &[&Policy], fitness: &F) -> Vec<Result<f64>> {
    positions.par_iter().map(|p| fitness.evaluate(p)).collect()
}

fn checked(particle: usize, position: &Policy, value: Result<f64>) -> Result<f64> {
    let value = value?;
    if value.is_nan() {
        return Err(Error::NanFitness { particle, position: position.increments().to_vec() });
    }
    Ok(value)
}

/// Uniform random positions in `[0, 2π)^dim`, zero velocities, each position
/// evaluated once and taken as the personal best.
pub fn init_swarm<F: Fitness>(config: &SwarmConfig, seed: u64, fitness: &F) -> Result<Swarm> {
    config.validate()?;
    let mut streams: Vec<ChaCha8Rng> = (0..config.xi).map(|i| particle_stream(seed, i)).collect();
    let positions = streams
        .iter_mut()
        .map(|rng| Policy::new((0..config.dim).map(|_| rng.gen::<f64>() * TAU).collect()))
        .collect::<Result<Vec<_>>>()?;
    let values = evaluate_all(&positions.iter().collect::<Vec<_>>(), fitness);

    let mut particles = Vec::with_capacity(config.xi);
    for (i, (position, value)) in positions.into_iter().zip(values).enumerate() {
        let value = checked(i, &position, value)?;
        particles.push(Particle {
            velocity: vec![0.0; config.dim],
            best_position: position.clone(),
            best_fitness: value,
            position_fitness: Some(value),
            position,
        });
    }
    Ok(Swarm { particles, streams })
}

/// One full round: evaluate, update personal bests, gather neighborhood
/// bests, then move every particle.
pub fn pso_step<F: Fitness>(swarm: &mut Swarm, fitness: &F, config: &SwarmConfig) -> Result<()> {
    if swarm.len() != config.xi {
        return Err(Error::domain(format!(
            "swarm has {} particles but the configuration expects {}",
            swarm.len(),
            config.xi
        )));
    }

    // evaluation
    let pending: Vec<(usize, &Policy)> = swarm
        .particles
        .iter()
        .enumerate()
        .filter(|(_, p)| p.position_fitness.is_none())
        .map(|(i, p)| (i, &p.position))
        .collect();
    let values = evaluate_all(&pending.iter().map(|(_, p)| *p).collect::<Vec<_>>(), fitness);
    let indices: Vec<usize> = pending.iter().map(|(i, _)| *i).collect();
    for (i, value) in indices.into_iter().zip(values) {
        let particle = &mut swarm.particles[i];
        let value = checked(i, &particle.position, value)?;
        particle.position_fitness = Some(value);
        if value > particle.best_fitness {
            particle.best_fitness = value;
            particle.best_position = particle.position.clone();
        }
    }

    // communication
    let guides: Vec<Policy> =
        (0..swarm.len()).map(|i| swarm.neighborhood_best(i, config.r).clone()).collect();

    // movement
    for ((particle, rng), guide) in swarm.particles.iter_mut().zip(&mut swarm.streams).zip(&guides) {
        let shared = match config.granularity {
            RandomGranularity::PerTerm => Some((rng.gen::<f64>(), rng.gen::<f64>())),
            RandomGranularity::PerComponent => None,
        };
        let x = particle.position.increments();
        let best = particle.best_position.increments();
        let g = guide.increments();
        let mut next = Vec::with_capacity(config.dim);
        for d in 0..config.dim {
            let (r1, r2) = shared.unwrap_or_else(|| (rng.gen::<f64>(), rng.gen::<f64>()));
            let v = config.omega
                * (particle.velocity[d] + config.phi1 * r1 * (best[d] - x[d]) + config.phi2 * r2 * (g[d] - x[d]));
            let v = v.clamp(-config.nu_max, config.nu_max);
            particle.velocity[d] = v;
            next.push(wrap_angle(x[d] + v));
        }
        particle.position = Policy::new(next)?;
        particle.position_fitness = None;
    }
    Ok(())
}

/// Outcome of a swarm run against an arbitrary objective.
#[derive(Clone, Debug)]
pub struct SwarmRun {
    pub best_position: Policy,
    pub best_fitness: f64,
    /// Global best after initialization, then after each round.
    pub history: Vec<f64>,
    pub swarm: Swarm,
}

/// Runs `init_swarm` followed by exactly `config.steps` rounds.
pub fn optimize_with<F: Fitness>(config: &SwarmConfig, seed: u64, fitness: &F) -> Result<SwarmRun> {
    let mut swarm = init_swarm(config, seed, fitness)?;
    let mut history = Vec::with_capacity(config.steps + 1);
    history.push(swarm.global_best().best_fitness);
    for _ in 0..config.steps {
        pso_step(&mut swarm, fitness, config)?;
        history.push(swarm.global_best().best_fitness);
    }
    let best = swarm.global_best();
    Ok(SwarmRun {
        best_position: best.best_position.clone(),
        best_fitness: best.best_fitness,
        history,
        swarm,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunResult {
    pub best_policy: Policy,
    pub best_sharpness: f64,
    /// `None` stands for an infinite variance.
    #[serde(serialize_with = "crate::report::serialize_variance")]
    pub best_variance: f64,
    pub history: Vec<f64>,
    pub seed: u64,
    pub config: SwarmConfig,
}

/// Searches for the sharpest `N`-photon policy.
pub fn optimize(photons: usize, config: &SwarmConfig, seed: u64, kind: FitnessKind) -> Result<RunResult> {
    if config.dim != photons {
        return Err(Error::domain(format!(
            "configuration dimension {} ≠ photon number {photons}",
            config.dim
        )));
    }
    let fitness = SharpnessFitness::new(photons, kind)?;
    let run = optimize_with(config, seed, &fitness)?;
    Ok(RunResult {
        best_variance: holevo_variance(run.best_fitness),
        best_policy: run.best_position,
        best_sharpness: run.best_fitness,
        history: run.history,
        seed,
        config: *config,
    })
}
