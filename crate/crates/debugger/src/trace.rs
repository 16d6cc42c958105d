//! Recording and replaying `.ayu` trace files.
//!
//! A trace is the raw concatenated frame stream exactly as the runtime
//! sent it, so replaying it rebuilds the same model as the live session.

use std::fs::File;
use std::io::{self, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use taskscope_wire::{Frame, FrameReader, WireError};

use crate::error::{DebuggerError, Result};
use crate::model::GraphModel;

pub struct TraceRecorder {
    path: PathBuf,
    out: BufWriter<File>,
    frames: u64,
}

impl TraceRecorder {
    pub fn create(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref().to_path_buf();
        let file = File::create(&path)
            .map_err(|e| DebuggerError::io(format!("cannot create {}", path.display()), e))?;
        Ok(TraceRecorder {
            path,
            out: BufWriter::new(file),
            frames: 0,
        })
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    pub fn frames(&self) -> u64 {
        self.frames
    }

    pub fn record(&mut self, frame: &Frame) -> io::Result<()> {
        frame.write_to(&mut self.out)?;
        self.frames += 1;
        Ok(())
    }

    pub fn flush(&mut self) -> io::Result<()> {
        self.out.flush()
    }
}

impl Drop for TraceRecorder {
    fn drop(&mut self) {
        let _ = self.out.flush();
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LoadedTrace {
    pub model: GraphModel,
    /// Whole frames read and applied.
    pub frames: u64,
    /// Set when the file ends inside a frame.
    pub truncated: bool,
}

impl LoadedTrace {
    /// Index of the last whole frame, if any frame was read.
    pub fn last_whole_frame(&self) -> Option<u64> {
        self.frames.checked_sub(1)
    }

    /// Human-readable note about a partial load.
    pub fn diagnostic(&self) -> Option<String> {
        if !self.truncated {
            return None;
        }
        Some(match self.last_whole_frame() {
            Some(last) => format!(
                "trace truncated mid-frame: {} whole frames loaded, last whole frame index {last}",
                self.frames
            ),
            None => "trace truncated inside its first frame".to_owned(),
        })
    }
}

/// Rebuilds a model from a recorded trace. A file cut off mid-frame loads
/// every whole frame before the cut and reports the truncation.
pub fn load_trace(path: impl AsRef<Path>) -> Result<LoadedTrace> {
    let path = path.as_ref();
    let file = File::open(path)
        .map_err(|e| DebuggerError::io(format!("cannot open {}", path.display()), e))?;
    let mut reader = FrameReader::new(BufReader::new(file));
    let mut model = GraphModel::new();
    let mut truncated = false;
    loop {
        match reader.next_frame() {
            Ok(Some(frame)) => {
                // Quarantined events stay visible through the model.
                let _ = model.apply_frame(&frame);
            }
            Ok(None) => break,
            Err(WireError::Truncated { .. }) => {
                truncated = true;
                break;
            }
            Err(WireError::Io(e)) => {
                return Err(DebuggerError::io(format!("cannot read {}", path.display()), e))
            }
            Err(other) => return Err(other.into()),
        }
    }
    Ok(LoadedTrace {
        model,
        frames: reader.frames_read(),
        truncated,
    })
}
