//! Expected completion time of MDS-coded distributed jobs under straggling
//! workers.
//!
//! A job of `n` computing units runs on `n` workers. With an `[n, k]` code
//! each worker gets a task of `s = n/k` units and the job finishes when the
//! fastest `k` tasks finish, so the completion time is the order statistic
//! `Y_{k:n}` of the task times.

pub mod analysis;
pub mod birthday;
pub mod distributions;
pub mod error;
pub mod montecarlo;
pub mod order_stats;
pub mod quadrature;
pub mod scaling;
pub mod special;

pub use analysis::{EvalMethod, JobConfig, Scenario, StrategyLabel, SweepResult};
pub use distributions::{BiModal, Pareto, ServiceDistribution, ShiftedExp};
pub use error::{Error, Result};
pub use montecarlo::McEstimate;
pub use scaling::{ScalingModel, TaskModel};
