//! A small dataflow task runtime with instrumentation hooks.
//!
//! Tasks declare how they touch opaque data handles (`input`, `inout`,
//! `output`). The runtime derives a dependency graph from those
//! declarations, runs ready tasks on a worker pool and reports every
//! state change as a [`taskscope_wire::Event`]. A connected debugger can
//! block tasks, stop and step execution, prioritize tasks that are not yet
//! queued and break when a given function starts.
//!
//! ```no_run
//! use taskscope_runtime::{Access, Runtime};
//!
//! let rt = Runtime::builder().workers(2).build();
//! let produce = rt.register_function("produce").unwrap();
//! let consume = rt.register_function("consume").unwrap();
//! rt.submit(produce, vec![Access::output(1)], || {}).unwrap();
//! rt.submit(consume, vec![Access::input(1)], || {}).unwrap();
//! assert!(!rt.wait_all().is_stalled());
//! ```

pub mod config;
mod ledger;
pub mod link;
mod runtime;
mod scheduler;
mod sink;
mod types;

pub use config::{RuntimeConfig, DEFAULT_STALL_INTERVAL};
pub use ledger::HandleLedger;
pub use link::LinkError;
pub use runtime::{Controller, Runtime, RuntimeBuilder, WaitOutcome, WaitSummary};
pub use scheduler::{Dispatch, Scheduler, SchedulerError, SinkRole, SubmitError};
pub use sink::{FrameSink, MemorySink, WriterSink};
pub use types::{
    Access, AccessMode, DepKind, DependencyEdge, FunctionId, Handle, TaskId, TaskRecord,
    TaskState, Timestamps, WorkerId,
};
