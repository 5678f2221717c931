//! Serving-order optimization for a UAV base station collecting data from
//! prioritized ground nodes.
//!
//! A tabular Double Q-Learning agent learns which node to fly to next,
//! trading a priority reward against waiting-delay and propulsion-energy
//! penalties. A nearest-neighbor policy serves as the baseline and two exact
//! solvers (enumeration and subset DP) give the optimum on small instances.

pub mod baselines;
pub mod config;
pub mod energy;
pub mod env;
pub mod error;
pub mod learner;
pub mod metrics;
pub mod oracle;
pub mod revenue;
pub mod seeding;

pub use config::RunConfig;
pub use energy::PowerParams;
pub use env::{EpisodeTrace, Scenario};
pub use error::{Error, Result};
pub use learner::{Hyperparams, QTablePair};
pub use revenue::{Preset, RevenueWeights};
