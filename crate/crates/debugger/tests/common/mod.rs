#![allow(dead_code)]

use std::io::Write;
use std::net::{TcpListener, TcpStream};
use std::thread;
use std::time::Duration;

use taskscope_debugger::Session;
use taskscope_runtime::Runtime;
use taskscope_wire::{read_command, runtime_handshake, Command, Frame, PROTOCOL_VERSION};

/// A real runtime connected out to a fresh debugger session.
pub fn runtime_and_session(workers: usize) -> (Runtime, Session) {
    let listener = TcpListener::bind("127.0.0.1:0").unwrap();
    let addr = listener.local_addr().unwrap().to_string();
    let runtime = thread::spawn(move || {
        Runtime::builder()
            .workers(workers)
            .stall_interval(Duration::from_millis(300))
            .connect(&addr)
            .unwrap()
            .build()
    });
    let session = Session::accept(&listener).unwrap();
    (runtime.join().unwrap(), session)
}

/// Hand-driven runtime side of a connection, for wire-level checks.
pub struct FakeRuntime {
    pub stream: TcpStream,
}

impl FakeRuntime {
    pub const PID: u64 = 4242;

    /// Connects to `listener` and handshakes; returns with the debugger's
    /// session once both sides agree.
    pub fn pair() -> (FakeRuntime, Session) {
        let listener = TcpListener::bind("127.0.0.1:0").unwrap();
        let addr = listener.local_addr().unwrap();
        let fake = thread::spawn(move || {
            let mut stream = TcpStream::connect(addr).unwrap();
            runtime_handshake(&mut stream, PROTOCOL_VERSION, Self::PID).unwrap();
            stream
                .set_read_timeout(Some(Duration::from_secs(5)))
                .unwrap();
            FakeRuntime { stream }
        });
        let session = Session::accept(&listener).unwrap();
        (fake.join().unwrap(), session)
    }

    pub fn send(&mut self, frame: impl Into<Frame>) {
        frame.into().write_to(&mut self.stream).unwrap();
        self.stream.flush().unwrap();
    }

    pub fn read_command(&mut self) -> Command {
        let raw = read_command(&mut self.stream).unwrap().expect("command frame");
        Command::decode(&raw).unwrap()
    }
}
