//! Consumers of the instrumentation stream.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;
use std::sync::{Arc, Mutex};

use taskscope_wire::Frame;

/// Receives every frame the runtime emits, in stream order.
///
/// Frames are delivered while the scheduler lock is held, so a sink sees
/// a total order consistent with every task's state machine.
pub trait FrameSink: Send {
    fn send(&mut self, frame: &Frame) -> io::Result<()>;

    /// Called once at the end of every scheduler operation.
    fn flush(&mut self) -> io::Result<()> {
        Ok(())
    }
}

/// Encodes frames onto any writer: a socket, a `.ayu` trace file, a buffer.
pub struct WriterSink<W: Write + Send> {
    out: W,
}

impl<W: Write + Send> WriterSink<W> {
    pub fn new(out: W) -> Self {
        WriterSink { out }
    }

    pub fn into_inner(self) -> W {
        self.out
    }
}

impl WriterSink<BufWriter<File>> {
    pub fn create(path: impl AsRef<Path>) -> io::Result<Self> {
        Ok(WriterSink::new(BufWriter::new(File::create(path)?)))
    }
}

impl<W: Write + Send> FrameSink for WriterSink<W> {
    fn send(&mut self, frame: &Frame) -> io::Result<()> {
        frame.write_to(&mut self.out)
    }

    fn flush(&mut self) -> io::Result<()> {
        self.out.flush()
    }
}

/// Keeps decoded frames in memory; clones share the same buffer.
#[derive(Clone, Default)]
pub struct MemorySink {
    frames: Arc<Mutex<Vec<Frame>>>,
}

impl MemorySink {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn frames(&self) -> Vec<Frame> {
        self.frames.lock().unwrap().clone()
    }

    pub fn len(&self) -> usize {
        self.frames.lock().unwrap().len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

impl FrameSink for MemorySink {
    fn send(&mut self, frame: &Frame) -> io::Result<()> {
        self.frames.lock().unwrap().push(frame.clone());
        Ok(())
    }
}
