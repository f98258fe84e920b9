//! Randomized experiment harness: schedulability sweeps, delay distributions
//! of simulated layouts, and the separate-versus-shared queue comparison.
//!
//! Every output is a pure function of its configuration, including the base
//! seed; the worker count only changes wall time.

mod cdf;
mod queues;
mod sweep;
mod workload;

pub use cdf::{
    delay_cdf_run, empirical_cdf, CdfPoint, DelayCdfConfig, DelayCdfResult, InstanceSummary, Metric,
};
pub use queues::{
    queue_fixture, queue_strategy_compare, QueueCompareConfig, QueueCompareResult, QueuePoint,
    QueueSeedRow,
};
pub use sweep::{acceptance_sweep, AcceptanceSurface, Cell, DeadlineBasis, SweepConfig};
pub use workload::{deadline_schedule, random_flows, DeadlineBase, FlowDraw};

use thiserror::Error;

use crate::layout::LayoutError;
use crate::model::ModelError;
use crate::sim::SimError;

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Layout(#[from] LayoutError),
    #[error(transparent)]
    Sim(#[from] SimError),
}

/// Seed streams, one per kind of random draw.
pub(crate) mod stream {
    pub const TOPOLOGY: u64 = 1;
    pub const FLOWS: u64 = 2;
    pub const CDF_TOPOLOGY: u64 = 3;
    pub const CDF_FLOWS: u64 = 4;
    pub const CDF_SIM: u64 = 5;
    pub const QUEUES: u64 = 6;
}

/// Runs `f` on a pool with `jobs` workers, or on the global pool when `None`.
pub(crate) fn with_jobs<T: Send>(jobs: Option<usize>, f: impl FnOnce() -> T + Send) -> T {
    match jobs {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n.max(1))
            .build()
            .expect("thread pool")
            .install(f),
        None => f(),
    }
}
