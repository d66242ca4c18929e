//! Differential privacy for synchrophasor data under false-data-injection
//! attack.
//!
//! - [`dp`]: Laplace mechanism, noisy queries, indistinguishability check.
//! - [`adversary`]: the KL-constrained optimal attacker.
//! - [`calibrate`]: choose ε so the optimal attack impact stays bounded.
//! - [`grid`]: layered PMU → PDC → master simulator with detector.
//! - [`qos`]: forecast-based privacy/security cost and utility.
//! - [`bench`]: DP vs AES-256 manipulation latency.
//! - [`series`]: measurement series, CSV ingest/export, synthetic PMU data.
//! - [`cli`]: the `dpgrid` command line.

pub mod adversary;
pub mod bench;
pub mod calibrate;
pub mod cli;
pub mod dp;
pub mod error;
pub mod grid;
pub mod qos;
pub mod seed;
pub mod series;
mod solver;

pub use adversary::{attack_pdf, kl_from_k1, optimal_impact, sample_attack_noise, solve_k1, AttackProfile};
pub use calibrate::{boundary_report, calibrate_epsilon, solve_design_k1, BoundaryCase, DesignResult, DesignSpec};
pub use dp::{dp_query, indistinguishability_check, laplace_pdf, sample_laplace, Dataset, NoisyResult, PrivacyParams, QueryKind};
pub use error::{Error, Result};
pub use series::MeasurementSeries;
