//! Demo workloads for the taskscope runtime: a twin-tree task graph, seeded
//! random DAGs and a task-granularity benchmark, plus offline checkers for
//! recorded frame streams.

pub mod check;
pub mod granularity;
pub mod random_dag;
pub mod twin_trees;

use std::time::{Duration, Instant};

use taskscope_runtime::{LinkError, SubmitError};
use thiserror::Error;

pub use granularity::{granularity_benchmark, GranularityRow, DEFAULT_TASKS_PER_WORKER};
pub use random_dag::{run_random_dag, RandomDagRun, RandomDagSpec};
pub use twin_trees::{generate_twin_trees, TwinTrees};

#[derive(Debug, Error)]
pub enum DemoError {
    #[error(transparent)]
    Submit(#[from] SubmitError),
    #[error(transparent)]
    Link(#[from] LinkError),
    #[error("{context}: {source}")]
    Io {
        context: String,
        #[source]
        source: std::io::Error,
    },
    #[error("writing CSV: {0}")]
    Csv(#[from] csv::Error),
    #[error("{0}")]
    Usage(String),
}

/// Spins for `d` of wall-clock time. Unlike sleeping, this keeps the
/// worker busy, so scheduler overhead shows up in the measurements.
pub fn busy_wait(d: Duration) {
    let start = Instant::now();
    while start.elapsed() < d {
        std::hint::spin_loop();
    }
}
