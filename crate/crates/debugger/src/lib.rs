//! Debugger engine for taskscope runtimes.
//!
//! A [`Session`] receives the runtime's frame stream and keeps a
//! [`GraphModel`] of tasks and dependencies up to date. The model feeds
//! the analyses ([`weakly_connected_components`], [`critical_path`],
//! [`duration_bucket`]) and the visual mapping sent to UI clients through
//! the WebSocket [`Gateway`]. Commands go back to the runtime through
//! [`Session::send_command`]; sessions can be recorded to `.ayu` traces
//! and replayed with [`load_trace`].

pub mod analysis;
pub mod app;
pub mod assets;
pub mod duration;
pub mod error;
pub mod external;
pub mod gateway;
pub mod messages;
pub mod model;
pub mod session;
pub mod trace;
pub mod visual;

pub use analysis::{critical_path, weakly_connected_components, CriticalPath, Weight};
pub use duration::{duration_bucket, DurationBucket};
pub use error::DebuggerError;
pub use external::{attach_external_debugger, Attached, DebuggerTemplate};
pub use gateway::{Gateway, DEFAULT_UI_ADDR};
pub use model::{Delta, Diagnostic, DiagnosticKind, Edge, GraphModel, NodeInfo, NodeState};
pub use session::{Batch, Session, DEFAULT_ACK_TIMEOUT};
pub use trace::{load_trace, LoadedTrace, TraceRecorder};
pub use visual::{assign_visual, EdgeSource, NodeSource, VisualMapping, Visuals};
