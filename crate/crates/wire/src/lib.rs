//! Wire formats for the taskscope instrumentation channel.
//!
//! The runtime streams fixed 64-byte [`Event`] frames (eight little-endian
//! `u64`s) to the debugger, interleaved with variable-length marker frames
//! carrying function names and command acknowledgments. The debugger sends
//! 32-byte [`Command`] frames back over the same connection.
//!
//! All integers are little-endian, so a recorded stream is byte-identical
//! across platforms.

mod command;
mod error;
mod event;
mod handshake;
mod marker;
mod stream;

pub use command::{Command, CommandId, COMMAND_FRAME_LEN};
pub use error::WireError;
pub use event::{DepKind, Event, EventId, EVENT_FRAME_LEN};
pub use handshake::{
    debugger_handshake, runtime_handshake, Handshake, DEFAULT_HANDSHAKE_TIMEOUT, MAGIC,
    PROTOCOL_VERSION,
};
pub use marker::{Ack, AckStatus, MarkerKind, NameFrame, MARKER};
pub use stream::{raw_command_arg, raw_command_id, read_command, write_command, Frame, FrameReader};

/// Default TCP port of the instrumentation channel.
pub const DEFAULT_PORT: u16 = 7523;

/// File suffix used for recorded traces.
pub const TRACE_SUFFIX: &str = "ayu";

pub(crate) fn read_u64(bytes: &[u8], slot: usize) -> u64 {
    let start = slot * 8;
    let mut word = [0u8; 8];
    word.copy_from_slice(&bytes[start..start + 8]);
    u64::from_le_bytes(word)
}
