//! Connection handshake.
//!
//! ```text
//! runtime  -> debugger   "AYU1" version:u64
//! debugger -> runtime    accepted_version:u64
//! runtime  -> debugger   pid:u64            (only when versions match)
//! ```
//!
//! Either side drops the connection on a mismatch. Timeouts are enforced by
//! the caller through the socket read timeout; a timed-out read surfaces as
//! [`WireError::Timeout`].

use std::io::{Read, Write};
use std::time::Duration;

use crate::WireError;

pub const MAGIC: [u8; 4] = *b"AYU1";
pub const PROTOCOL_VERSION: u64 = 1;
pub const DEFAULT_HANDSHAKE_TIMEOUT: Duration = Duration::from_secs(5);

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Handshake {
    pub version: u64,
    /// Process id of the instrumented program.
    pub pid: u64,
}

fn read_word<S: Read>(stream: &mut S) -> Result<u64, WireError> {
    let mut buf = [0u8; 8];
    stream.read_exact(&mut buf).map_err(WireError::from_read)?;
    Ok(u64::from_le_bytes(buf))
}

/// Runtime side: announce, check the debugger's reply, send our pid.
pub fn runtime_handshake<S: Read + Write>(
    stream: &mut S,
    version: u64,
    pid: u64,
) -> Result<Handshake, WireError> {
    let mut hello = [0u8; 12];
    hello[..4].copy_from_slice(&MAGIC);
    hello[4..].copy_from_slice(&version.to_le_bytes());
    stream.write_all(&hello)?;
    stream.flush()?;
    let accepted = read_word(stream)?;
    if accepted != version {
        return Err(WireError::VersionMismatch {
            local: version,
            peer: accepted,
        });
    }
    stream.write_all(&pid.to_le_bytes())?;
    stream.flush()?;
    Ok(Handshake { version, pid })
}

/// Debugger side: validate magic and version, reply, receive the pid.
pub fn debugger_handshake<S: Read + Write>(
    stream: &mut S,
    version: u64,
) -> Result<Handshake, WireError> {
    let mut magic = [0u8; 4];
    stream.read_exact(&mut magic).map_err(WireError::from_read)?;
    if magic != MAGIC {
        return Err(WireError::BadMagic(magic));
    }
    let offered = read_word(stream)?;
    stream.write_all(&version.to_le_bytes())?;
    stream.flush()?;
    if offered != version {
        return Err(WireError::VersionMismatch {
            local: version,
            peer: offered,
        });
    }
    let pid = read_word(stream)?;
    Ok(Handshake { version, pid })
}
