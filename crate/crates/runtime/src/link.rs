//! Establishing the debugger connection.

use std::net::{TcpListener, TcpStream, ToSocketAddrs};
use std::process;

use log::info;
use taskscope_wire::{runtime_handshake, WireError, DEFAULT_HANDSHAKE_TIMEOUT, PROTOCOL_VERSION};
use thiserror::Error;

use crate::config::ConfigError;

#[derive(Debug, Error)]
pub enum LinkError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("debugger connection to {addr} failed: {source}")]
    Io {
        addr: String,
        source: std::io::Error,
    },
    #[error("debugger handshake failed: {0}")]
    Handshake(#[from] WireError),
}

fn io_err(addr: &str) -> impl FnOnce(std::io::Error) -> LinkError + '_ {
    move |source| LinkError::Io {
        addr: addr.to_owned(),
        source,
    }
}

/// Runs the runtime half of the handshake on a fresh connection.
pub fn handshake(mut stream: TcpStream) -> Result<TcpStream, LinkError> {
    stream.set_nodelay(true).ok();
    stream
        .set_read_timeout(Some(DEFAULT_HANDSHAKE_TIMEOUT))
        .map_err(WireError::Io)?;
    let agreed = runtime_handshake(&mut stream, PROTOCOL_VERSION, u64::from(process::id()))?;
    stream.set_read_timeout(None).map_err(WireError::Io)?;
    info!("debugger attached, protocol version {}", agreed.version);
    Ok(stream)
}

pub fn connect(addr: &str) -> Result<TcpStream, LinkError> {
    let target = addr
        .to_socket_addrs()
        .map_err(io_err(addr))?
        .next()
        .ok_or_else(|| io_err(addr)(std::io::ErrorKind::NotFound.into()))?;
    let stream =
        TcpStream::connect_timeout(&target, DEFAULT_HANDSHAKE_TIMEOUT).map_err(io_err(addr))?;
    handshake(stream)
}

pub fn accept(addr: &str) -> Result<TcpStream, LinkError> {
    let listener = TcpListener::bind(addr).map_err(io_err(addr))?;
    info!("waiting for a debugger on {}", listener.local_addr().map_err(io_err(addr))?);
    let (stream, peer) = listener.accept().map_err(io_err(addr))?;
    info!("debugger connected from {peer}");
    handshake(stream)
}
