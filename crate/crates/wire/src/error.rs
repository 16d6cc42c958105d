use std::io;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum WireError {
    #[error("unknown event id {0}")]
    UnknownEvent(u64),
    #[error("unknown command id {0}")]
    UnknownCommand(u64),
    #[error("unknown marker frame kind {0}")]
    UnknownMarker(u64),
    #[error("reserved field {slot} is {value:#x}, expected 0")]
    Reserved { slot: usize, value: u64 },
    #[error("command {command} carries argument {arg} but takes none")]
    UnexpectedArgument { command: u64, arg: u64 },
    #[error("frame is {actual} bytes, expected {expected}")]
    Framing { expected: usize, actual: usize },
    #[error("marker payload is not valid UTF-8")]
    Utf8,
    #[error("marker payload of {0} bytes exceeds the frame limit")]
    PayloadTooLarge(u64),
    #[error("malformed acknowledgment payload {0:?}")]
    BadAck(String),
    #[error("bad handshake magic {0:?}")]
    BadMagic([u8; 4]),
    #[error("protocol version mismatch: local {local}, peer {peer}")]
    VersionMismatch { local: u64, peer: u64 },
    #[error("handshake timed out")]
    Timeout,
    #[error("stream ended inside a frame after {whole_frames} whole frames")]
    Truncated { whole_frames: u64 },
    #[error(transparent)]
    Io(#[from] io::Error),
}

impl WireError {
    /// Maps read timeouts onto [`WireError::Timeout`].
    pub(crate) fn from_read(err: io::Error) -> Self {
        match err.kind() {
            io::ErrorKind::WouldBlock | io::ErrorKind::TimedOut => WireError::Timeout,
            _ => WireError::Io(err),
        }
    }
}
