use std::io;

use taskscope_wire::{Command, WireError};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum DebuggerError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("protocol error: {0}")]
    Protocol(#[from] WireError),
    #[error("connection to the runtime was lost")]
    Disconnected,
    #[error("no acknowledgment for `{0}`")]
    AckTimeout(Command),
    #[error("{context}: {source}")]
    Io {
        context: String,
        #[source]
        source: io::Error,
    },
}

impl DebuggerError {
    pub fn io(context: impl Into<String>, source: io::Error) -> Self {
        DebuggerError::Io {
            context: context.into(),
            source,
        }
    }

    /// Process exit status for the command-line tool.
    pub fn exit_code(&self) -> i32 {
        match self {
            DebuggerError::Config(_) => 3,
            DebuggerError::Protocol(_) | DebuggerError::Disconnected | DebuggerError::AckTimeout(_) => 2,
            DebuggerError::Io { .. } => 1,
        }
    }
}

pub type Result<T, E = DebuggerError> = std::result::Result<T, E>;
