use std::io::{self, Read, Write};

use crate::marker::{decode_header, decode_payload, HEADER_LEN};
use crate::{read_u64, Ack, Command, Event, NameFrame, WireError, COMMAND_FRAME_LEN, MARKER};
use crate::EVENT_FRAME_LEN;

/// Any frame on the runtime to debugger stream.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Frame {
    Event(Event),
    Name(NameFrame),
    Ack(Ack),
}

impl Frame {
    pub fn encode(&self) -> Vec<u8> {
        match self {
            Frame::Event(ev) => ev.encode().to_vec(),
            Frame::Name(name) => name.encode(),
            Frame::Ack(ack) => ack.encode(),
        }
    }

    pub fn write_to<W: Write + ?Sized>(&self, out: &mut W) -> io::Result<()> {
        out.write_all(&self.encode())
    }
}

impl From<Event> for Frame {
    fn from(ev: Event) -> Self {
        Frame::Event(ev)
    }
}

impl From<NameFrame> for Frame {
    fn from(name: NameFrame) -> Self {
        Frame::Name(name)
    }
}

impl From<Ack> for Frame {
    fn from(ack: Ack) -> Self {
        Frame::Ack(ack)
    }
}

/// Outcome of filling a buffer from a reader.
enum ReadOutcome {
    Full,
    /// Clean end of stream before the first byte.
    Eof,
    /// End of stream part-way through the buffer.
    Partial,
}

fn fill<R: Read + ?Sized>(reader: &mut R, buf: &mut [u8]) -> io::Result<ReadOutcome> {
    let mut filled = 0;
    while filled < buf.len() {
        match reader.read(&mut buf[filled..]) {
            Ok(0) if filled == 0 => return Ok(ReadOutcome::Eof),
            Ok(0) => return Ok(ReadOutcome::Partial),
            Ok(n) => filled += n,
            Err(e) if e.kind() == io::ErrorKind::Interrupted => {}
            Err(e) => return Err(e),
        }
    }
    Ok(ReadOutcome::Full)
}

/// Decodes a concatenated frame stream (a live connection or a `.ayu` trace).
pub struct FrameReader<R> {
    inner: R,
    frames: u64,
}

impl<R: Read> FrameReader<R> {
    pub fn new(inner: R) -> Self {
        FrameReader { inner, frames: 0 }
    }

    /// Number of whole frames read so far.
    pub fn frames_read(&self) -> u64 {
        self.frames
    }

    pub fn into_inner(self) -> R {
        self.inner
    }

    /// Next frame, or `None` on a clean end of stream at a frame boundary.
    pub fn next_frame(&mut self) -> Result<Option<Frame>, WireError> {
        let truncated = WireError::Truncated {
            whole_frames: self.frames,
        };
        let mut head = [0u8; 8];
        match fill(&mut self.inner, &mut head)? {
            ReadOutcome::Full => {}
            ReadOutcome::Eof => return Ok(None),
            ReadOutcome::Partial => return Err(truncated),
        }
        let frame = if u64::from_le_bytes(head) == MARKER {
            let mut header = [0u8; HEADER_LEN];
            header[..8].copy_from_slice(&head);
            if !matches!(fill(&mut self.inner, &mut header[8..])?, ReadOutcome::Full) {
                return Err(truncated);
            }
            let (kind, id, len) = decode_header(&header)?;
            let mut payload = vec![0u8; len as usize];
            if !matches!(fill(&mut self.inner, &mut payload)?, ReadOutcome::Full) {
                return Err(truncated);
            }
            decode_payload(kind, id, payload)?
        } else {
            let mut bytes = [0u8; EVENT_FRAME_LEN];
            bytes[..8].copy_from_slice(&head);
            if !matches!(fill(&mut self.inner, &mut bytes[8..])?, ReadOutcome::Full) {
                return Err(truncated);
            }
            Frame::Event(Event::decode(&bytes)?)
        };
        self.frames += 1;
        Ok(Some(frame))
    }
}

impl<R: Read> Iterator for FrameReader<R> {
    type Item = Result<Frame, WireError>;

    fn next(&mut self) -> Option<Self::Item> {
        self.next_frame().transpose()
    }
}

/// Reads one raw command frame. The caller decodes it, so that a frame with
/// an unknown command id can still be answered with an error ack.
pub fn read_command<R: Read + ?Sized>(
    reader: &mut R,
) -> Result<Option<[u8; COMMAND_FRAME_LEN]>, WireError> {
    let mut buf = [0u8; COMMAND_FRAME_LEN];
    match fill(reader, &mut buf)? {
        ReadOutcome::Full => Ok(Some(buf)),
        ReadOutcome::Eof => Ok(None),
        ReadOutcome::Partial => Err(WireError::Truncated { whole_frames: 0 }),
    }
}

pub fn write_command<W: Write + ?Sized>(writer: &mut W, command: &Command) -> io::Result<()> {
    writer.write_all(&command.encode())?;
    writer.flush()
}

/// Raw command id of an undecodable command frame.
pub fn raw_command_id(frame: &[u8; COMMAND_FRAME_LEN]) -> u64 {
    read_u64(frame, 0)
}

/// Raw argument word of an undecodable command frame.
pub fn raw_command_arg(frame: &[u8; COMMAND_FRAME_LEN]) -> u64 {
    read_u64(frame, 1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::AckStatus;

    #[test]
    fn mixed_stream_decodes_in_order() {
        let frames = vec![
            Frame::Event(Event::runtime_init(0)),
            Frame::Name(NameFrame {
                function: 1,
                name: "produce".into(),
            }),
            Frame::Event(Event::task_created(1, 1, 3)),
            Frame::Ack(Ack {
                command: 3,
                arg: 0,
                status: AckStatus::Ok,
            }),
            Frame::Name(NameFrame {
                function: 2,
                name: String::new(),
            }),
        ];
        let bytes: Vec<u8> = frames.iter().flat_map(Frame::encode).collect();
        let decoded: Result<Vec<_>, _> = FrameReader::new(&bytes[..]).collect();
        assert_eq!(decoded.unwrap(), frames);
    }

    #[test]
    fn truncation_reports_whole_frame_count() {
        let mut bytes = Vec::new();
        for t in 1..=3 {
            bytes.extend(Event::task_queued(t, t).encode());
        }
        bytes.truncate(64 * 2 + 10);
        let mut reader = FrameReader::new(&bytes[..]);
        assert!(reader.next_frame().unwrap().is_some());
        assert!(reader.next_frame().unwrap().is_some());
        assert!(matches!(
            reader.next_frame(),
            Err(WireError::Truncated { whole_frames: 2 })
        ));
    }

    #[test]
    fn truncated_marker_payload() {
        let mut bytes = NameFrame {
            function: 1,
            name: "abcdef".into(),
        }
        .encode();
        bytes.pop();
        assert!(matches!(
            FrameReader::new(&bytes[..]).next_frame(),
            Err(WireError::Truncated { whole_frames: 0 })
        ));
    }

    #[test]
    fn empty_stream_is_clean_end() {
        assert!(FrameReader::new(&[][..]).next_frame().unwrap().is_none());
    }

    #[test]
    fn command_frames_read_back() {
        let mut buf = Vec::new();
        write_command(&mut buf, &Command::Block(7)).unwrap();
        write_command(&mut buf, &Command::Stop).unwrap();
        let mut r = &buf[..];
        let first = read_command(&mut r).unwrap().unwrap();
        assert_eq!(Command::decode(&first).unwrap(), Command::Block(7));
        let second = read_command(&mut r).unwrap().unwrap();
        assert_eq!(raw_command_id(&second), 3);
        assert!(read_command(&mut r).unwrap().is_none());
    }
}
