//! Variable-length frames on the runtime to debugger stream.
//!
//! Layout: `MARKER, kind, id, byte_length` as little-endian `u64`s followed
//! by `byte_length` bytes of UTF-8. The leading all-ones word can never be a
//! valid event id, so a reader tells the two frame families apart from the
//! first word alone.

use std::fmt;

use crate::{read_u64, Command, CommandId, WireError};

pub const MARKER: u64 = u64::MAX;

pub(crate) const HEADER_LEN: usize = 32;
pub(crate) const MAX_PAYLOAD: u64 = 1 << 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
pub enum MarkerKind {
    FunctionName = 1,
    Ack = 2,
}

impl MarkerKind {
    pub fn from_u64(raw: u64) -> Result<Self, WireError> {
        match raw {
            1 => Ok(MarkerKind::FunctionName),
            2 => Ok(MarkerKind::Ack),
            other => Err(WireError::UnknownMarker(other)),
        }
    }
}

/// Label for a registered task function.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NameFrame {
    pub function: u64,
    pub name: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum AckStatus {
    Ok,
    /// Accepted but had no effect on scheduling (e.g. prioritizing a task
    /// that is already queued).
    Ineffective(String),
    Error(String),
}

impl AckStatus {
    pub fn is_ok(&self) -> bool {
        matches!(self, AckStatus::Ok)
    }

    fn to_payload(&self) -> String {
        match self {
            AckStatus::Ok => "ok".to_owned(),
            AckStatus::Ineffective(why) => format!("ineffective: {why}"),
            AckStatus::Error(why) => format!("error: {why}"),
        }
    }

    fn from_payload(text: &str) -> Result<Self, WireError> {
        if text == "ok" {
            Ok(AckStatus::Ok)
        } else if let Some(why) = text.strip_prefix("ineffective: ") {
            Ok(AckStatus::Ineffective(why.to_owned()))
        } else if let Some(why) = text.strip_prefix("error: ") {
            Ok(AckStatus::Error(why.to_owned()))
        } else {
            Err(WireError::BadAck(text.to_owned()))
        }
    }
}

impl fmt::Display for AckStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_payload())
    }
}

/// Runtime reply to one command. Acks arrive in command order.
///
/// `command` and `arg` are the raw words of the command frame, so a reply
/// to an undecodable command can still be reported. The payload is `arg`
/// as a little-endian `u64` followed by the UTF-8 status text.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Ack {
    pub command: u64,
    pub arg: u64,
    pub status: AckStatus,
}

impl Ack {
    pub fn new(command: Command, status: AckStatus) -> Self {
        Ack {
            command: command.id() as u64,
            arg: command.arg(),
            status,
        }
    }

    /// The acknowledged command, when it was a valid one.
    pub fn decoded_command(&self) -> Option<Command> {
        let id = CommandId::from_u64(self.command).ok()?;
        Command::from_parts(id, self.arg).ok()
    }
}

pub(crate) fn encode_marker(kind: MarkerKind, id: u64, payload: &[u8]) -> Vec<u8> {
    let mut out = Vec::with_capacity(HEADER_LEN + payload.len());
    for word in [MARKER, kind as u64, id, payload.len() as u64] {
        out.extend_from_slice(&word.to_le_bytes());
    }
    out.extend_from_slice(payload);
    out
}

/// Parsed marker header: kind, id, payload length.
pub(crate) fn decode_header(header: &[u8]) -> Result<(MarkerKind, u64, u64), WireError> {
    debug_assert_eq!(read_u64(header, 0), MARKER);
    let kind = MarkerKind::from_u64(read_u64(header, 1))?;
    let len = read_u64(header, 3);
    if len > MAX_PAYLOAD {
        return Err(WireError::PayloadTooLarge(len));
    }
    Ok((kind, read_u64(header, 2), len))
}

impl NameFrame {
    pub fn encode(&self) -> Vec<u8> {
        encode_marker(MarkerKind::FunctionName, self.function, self.name.as_bytes())
    }
}

impl Ack {
    pub fn encode(&self) -> Vec<u8> {
        let mut payload = self.arg.to_le_bytes().to_vec();
        payload.extend_from_slice(self.status.to_payload().as_bytes());
        encode_marker(MarkerKind::Ack, self.command, &payload)
    }
}

pub(crate) fn decode_payload(
    kind: MarkerKind,
    id: u64,
    payload: Vec<u8>,
) -> Result<crate::Frame, WireError> {
    let utf8 = |bytes: Vec<u8>| String::from_utf8(bytes).map_err(|_| WireError::Utf8);
    Ok(match kind {
        MarkerKind::FunctionName => crate::Frame::Name(NameFrame {
            function: id,
            name: utf8(payload)?,
        }),
        MarkerKind::Ack => {
            if payload.len() < 8 {
                return Err(WireError::BadAck(format!("{} byte payload", payload.len())));
            }
            let arg = read_u64(&payload, 0);
            let text = utf8(payload[8..].to_vec())?;
            crate::Frame::Ack(Ack {
                command: id,
                arg,
                status: AckStatus::from_payload(&text)?,
            })
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn name_frame_layout() {
        let bytes = NameFrame {
            function: 2,
            name: "reduce".into(),
        }
        .encode();
        assert_eq!(bytes.len(), 32 + 6);
        assert_eq!(read_u64(&bytes, 0), u64::MAX);
        assert_eq!(read_u64(&bytes, 1), 1);
        assert_eq!(read_u64(&bytes, 2), 2);
        assert_eq!(read_u64(&bytes, 3), 6);
        assert_eq!(&bytes[32..], b"reduce");
    }

    #[test]
    fn ack_payloads() {
        for status in [
            AckStatus::Ok,
            AckStatus::Ineffective("task 3 already queued".into()),
            AckStatus::Error("unknown task 9".into()),
        ] {
            let text = status.to_payload();
            assert_eq!(AckStatus::from_payload(&text).unwrap(), status);
        }
        assert!(AckStatus::from_payload("maybe").is_err());
    }

    #[test]
    fn ack_layout_carries_argument() {
        let ack = Ack::new(Command::Block(7), AckStatus::Ok);
        let bytes = ack.encode();
        assert_eq!(read_u64(&bytes, 1), 2);
        assert_eq!(read_u64(&bytes, 2), 1);
        assert_eq!(read_u64(&bytes, 3), 10);
        assert_eq!(read_u64(&bytes, 4), 7);
        assert_eq!(&bytes[40..], b"ok");
        assert_eq!(ack.decoded_command(), Some(Command::Block(7)));
    }
}
