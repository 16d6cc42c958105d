//! A live connection to an instrumented runtime.

use std::io::Write;
use std::net::{Shutdown, TcpListener, TcpStream, ToSocketAddrs};
use std::path::Path;
use std::sync::mpsc::{self, Receiver, RecvTimeoutError};
use std::thread::{self, JoinHandle};
use std::time::{Duration, Instant};

use log::{debug, info, warn};
use taskscope_wire::{
    debugger_handshake, write_command, Ack, Command, Frame, FrameReader, Handshake, WireError,
    DEFAULT_HANDSHAKE_TIMEOUT, PROTOCOL_VERSION,
};

use crate::error::{DebuggerError, Result};
use crate::model::{Delta, Diagnostic, GraphModel};
use crate::trace::TraceRecorder;

/// Default time to wait for a command acknowledgment.
pub const DEFAULT_ACK_TIMEOUT: Duration = Duration::from_secs(5);

enum Incoming {
    Frame(Frame),
    Closed(Option<WireError>),
}

/// Everything applied to the model since the last [`Session::take_batch`].
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Batch {
    pub delta: Delta,
    pub frames: u64,
    pub acks: Vec<Ack>,
    pub diagnostics: Vec<Diagnostic>,
}

impl Batch {
    pub fn is_empty(&self) -> bool {
        self.frames == 0
    }
}

pub struct Session {
    stream: TcpStream,
    incoming: Receiver<Incoming>,
    reader: Option<JoinHandle<()>>,
    handshake: Handshake,
    model: GraphModel,
    recorder: Option<TraceRecorder>,
    batch: Batch,
    unclaimed_acks: Vec<Ack>,
    closed: Option<Option<WireError>>,
    ack_timeout: Duration,
}

impl Session {
    /// Connects to a runtime listening at `addr`.
    pub fn connect(addr: impl ToSocketAddrs + std::fmt::Debug) -> Result<Session> {
        let stream = TcpStream::connect(&addr)
            .map_err(|e| DebuggerError::io(format!("cannot connect to {addr:?}"), e))?;
        Session::from_stream(stream)
    }

    /// Waits on `listener` for a runtime that connects out.
    pub fn accept(listener: &TcpListener) -> Result<Session> {
        let (stream, peer) = listener
            .accept()
            .map_err(|e| DebuggerError::io("accepting runtime connection", e))?;
        info!("runtime connected from {peer}");
        Session::from_stream(stream)
    }

    /// Performs the handshake on a fresh connection and starts reading.
    pub fn from_stream(mut stream: TcpStream) -> Result<Session> {
        let io_err = |e| DebuggerError::io("configuring runtime connection", e);
        stream.set_nodelay(true).map_err(io_err)?;
        stream
            .set_read_timeout(Some(DEFAULT_HANDSHAKE_TIMEOUT))
            .map_err(io_err)?;
        let handshake = match debugger_handshake(&mut stream, PROTOCOL_VERSION) {
            Ok(h) => h,
            Err(e) => {
                let _ = stream.shutdown(Shutdown::Both);
                return Err(e.into());
            }
        };
        stream.set_read_timeout(None).map_err(io_err)?;
        info!(
            "attached to runtime pid {} (protocol {})",
            handshake.pid, handshake.version
        );

        let read_half = stream.try_clone().map_err(io_err)?;
        let (tx, incoming) = mpsc::channel();
        let reader = thread::Builder::new()
            .name("taskscope-session-reader".into())
            .spawn(move || {
                let mut frames = FrameReader::new(read_half);
                loop {
                    match frames.next_frame() {
                        Ok(Some(frame)) => {
                            if tx.send(Incoming::Frame(frame)).is_err() {
                                return;
                            }
                        }
                        Ok(None) => {
                            let _ = tx.send(Incoming::Closed(None));
                            return;
                        }
                        Err(e) => {
                            let _ = tx.send(Incoming::Closed(Some(e)));
                            return;
                        }
                    }
                }
            })
            .map_err(|e| DebuggerError::io("spawning reader thread", e))?;

        Ok(Session {
            stream,
            incoming,
            reader: Some(reader),
            handshake,
            model: GraphModel::new(),
            recorder: None,
            batch: Batch::default(),
            unclaimed_acks: Vec::new(),
            closed: None,
            ack_timeout: DEFAULT_ACK_TIMEOUT,
        })
    }

    pub fn pid(&self) -> u64 {
        self.handshake.pid
    }

    pub fn handshake(&self) -> Handshake {
        self.handshake
    }

    pub fn model(&self) -> &GraphModel {
        &self.model
    }

    pub fn set_ack_timeout(&mut self, timeout: Duration) {
        self.ack_timeout = timeout;
    }

    /// Records every frame received from now on. Call before the first
    /// [`pump`](Self::pump) to capture the whole session.
    pub fn record_to(&mut self, path: impl AsRef<Path>) -> Result<()> {
        self.recorder = Some(TraceRecorder::create(path)?);
        Ok(())
    }

    /// Stops recording and flushes the trace file.
    pub fn finish_recording(&mut self) -> Result<Option<u64>> {
        let Some(mut recorder) = self.recorder.take() else {
            return Ok(None);
        };
        recorder
            .flush()
            .map_err(|e| DebuggerError::io(format!("writing {}", recorder.path().display()), e))?;
        Ok(Some(recorder.frames()))
    }

    /// True once the runtime has closed the connection.
    pub fn is_closed(&self) -> bool {
        self.closed.is_some()
    }

    /// The protocol error that ended the session, if it did not end cleanly.
    pub fn close_error(&self) -> Option<&WireError> {
        self.closed.as_ref().and_then(|c| c.as_ref())
    }

    /// Takes the error returned by [`close_error`](Self::close_error).
    pub fn take_close_error(&mut self) -> Option<WireError> {
        self.closed.as_mut().and_then(Option::take)
    }

    /// Waits up to `timeout` for the next frame, then applies it and every
    /// other frame already received. Returns the number of frames applied.
    pub fn pump(&mut self, timeout: Duration) -> Result<u64> {
        if self.closed.is_some() {
            return Ok(0);
        }
        let first = match self.incoming.recv_timeout(timeout) {
            Ok(incoming) => incoming,
            Err(RecvTimeoutError::Timeout) => return Ok(0),
            Err(RecvTimeoutError::Disconnected) => Incoming::Closed(None),
        };
        let mut applied = 0;
        let mut next = Some(first);
        while let Some(incoming) = next {
            match incoming {
                Incoming::Frame(frame) => {
                    self.apply(frame)?;
                    applied += 1;
                }
                Incoming::Closed(err) => {
                    match &err {
                        Some(e) => warn!("runtime stream ended with a protocol error: {e}"),
                        None => info!("runtime closed the connection"),
                    }
                    self.closed = Some(err);
                    break;
                }
            }
            next = self.incoming.try_recv().ok();
        }
        Ok(applied)
    }

    fn apply(&mut self, frame: Frame) -> Result<()> {
        if let Some(recorder) = &mut self.recorder {
            recorder
                .record(&frame)
                .map_err(|e| DebuggerError::io(format!("writing {}", recorder.path().display()), e))?;
        }
        match self.model.apply_frame(&frame) {
            Ok(delta) => self.batch.delta.merge(delta),
            Err(diag) => {
                warn!("quarantined event: {diag}");
                self.batch.diagnostics.push(diag);
            }
        }
        if let Frame::Ack(ack) = frame {
            self.batch.acks.push(ack.clone());
            self.unclaimed_acks.push(ack);
        }
        self.batch.frames += 1;
        Ok(())
    }

    /// Applies frames until the runtime closes the connection.
    pub fn run_to_end(&mut self) -> Result<()> {
        while !self.is_closed() {
            self.pump(Duration::from_millis(100))?;
        }
        Ok(())
    }

    pub fn take_batch(&mut self) -> Batch {
        std::mem::take(&mut self.batch)
    }

    /// Writes a command without waiting for its acknowledgment.
    pub fn send(&mut self, command: Command) -> Result<()> {
        if self.closed.is_some() {
            return Err(DebuggerError::Disconnected);
        }
        debug!("sending {command}");
        write_command(&mut self.stream, &command)
            .and_then(|()| self.stream.flush())
            .map_err(|_| DebuggerError::Disconnected)
    }

    /// Sends a command and waits for its acknowledgment. Flags confirmed by
    /// the runtime are mirrored in the model; "ineffective" and "error"
    /// replies are returned as they are.
    pub fn send_command(&mut self, command: Command) -> Result<Ack> {
        self.unclaimed_acks.clear();
        self.send(command)?;
        let deadline = Instant::now() + self.ack_timeout;
        loop {
            if let Some(pos) = self
                .unclaimed_acks
                .iter()
                .position(|a| a.command == command.id() as u64 && a.arg == command.arg())
            {
                let ack = self.unclaimed_acks.remove(pos);
                self.unclaimed_acks.clear();
                return Ok(ack);
            }
            if self.closed.is_some() {
                return Err(DebuggerError::Disconnected);
            }
            let left = deadline.saturating_duration_since(Instant::now());
            if left.is_zero() {
                return Err(DebuggerError::AckTimeout(command));
            }
            self.pump(left.min(Duration::from_millis(50)))?;
        }
    }
}

impl Drop for Session {
    fn drop(&mut self) {
        let _ = self.stream.shutdown(Shutdown::Both);
        if let Some(reader) = self.reader.take() {
            let _ = reader.join();
        }
    }
}
