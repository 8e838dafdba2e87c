//! Adaptive single-shot interferometric phase estimation.
//!
//! An `N`-photon minimum-uncertainty state is sent photon by photon through a
//! Mach-Zehnder interferometer whose controllable phase is updated after every
//! detection by a feedback policy. This crate computes the exact sharpness and
//! Holevo variance of such policies, with and without photon loss, and learns
//! policies with a ring-topology particle swarm.
//!
//! - [`fock`]: Wigner d-matrix, input state, single-detection Kraus operator.
//! - [`policy`]: policies, records, feedback and estimate rules, outcome trees.
//! - [`fitness`]: sharpness, loss mixing, power-law fits.
//! - [`swarm`]: the optimizer.
//! - [`golden`]: the published settings and policies shipped as CSV.
//! - [`cli`]: the `adaptive-qpe` command line.
//!
//! ```
//! use adaptive_qpe::{fitness::sharpness, policy::Policy};
//!
//! let policy: Policy = "1.5701,0.7862,0.5043,0.3507".parse().unwrap();
//! let report = sharpness(&policy, 4).unwrap();
//! assert!((report.holevo_variance - 0.37621).abs() < 1e-4);
//! ```

pub mod angle;
pub mod cli;
mod error;
pub mod fitness;
pub mod fock;
pub mod golden;
pub mod policy;
pub mod report;
pub mod swarm;

pub use error::{Error, Result};
