//! WebSocket endpoint for UI clients.
//!
//! The gateway is polled from the debugger's event loop; it never blocks
//! for long and owns no threads.

use std::io::ErrorKind;
use std::net::{SocketAddr, TcpListener, TcpStream};
use std::time::Duration;

use log::{debug, info, warn};
use tungstenite::{Message, WebSocket};

use crate::error::{DebuggerError, Result};
use crate::messages::{Inbound, Outbound};

/// Default WebSocket address.
pub const DEFAULT_UI_ADDR: &str = "127.0.0.1:7524";

const POLL_TIMEOUT: Duration = Duration::from_millis(1);
const HANDSHAKE_TIMEOUT: Duration = Duration::from_secs(5);

/// Identifies one connected UI client.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ClientId(pub u64);

struct Client {
    id: ClientId,
    socket: WebSocket<TcpStream>,
}

pub struct Gateway {
    listener: TcpListener,
    clients: Vec<Client>,
    next_id: u64,
}

impl Gateway {
    pub fn bind(addr: &str) -> Result<Gateway> {
        let listener = TcpListener::bind(addr)
            .map_err(|e| DebuggerError::io(format!("cannot listen for UI clients on {addr}"), e))?;
        listener
            .set_nonblocking(true)
            .map_err(|e| DebuggerError::io("configuring UI listener", e))?;
        info!("UI gateway on ws://{}", listener.local_addr().map_or(addr.to_owned(), |a| a.to_string()));
        Ok(Gateway {
            listener,
            clients: Vec::new(),
            next_id: 1,
        })
    }

    pub fn local_addr(&self) -> Result<SocketAddr> {
        self.listener
            .local_addr()
            .map_err(|e| DebuggerError::io("UI listener address", e))
    }

    pub fn client_count(&self) -> usize {
        self.clients.len()
    }

    /// Completes the WebSocket handshake for every waiting connection and
    /// returns the new clients, which still need a snapshot.
    pub fn accept_pending(&mut self) -> Vec<ClientId> {
        let mut accepted = Vec::new();
        loop {
            let stream = match self.listener.accept() {
                Ok((stream, peer)) => {
                    debug!("UI connection from {peer}");
                    stream
                }
                Err(e) if e.kind() == ErrorKind::WouldBlock => break,
                Err(e) => {
                    warn!("UI accept failed: {e}");
                    break;
                }
            };
            match upgrade(stream) {
                Ok(socket) => {
                    let id = ClientId(self.next_id);
                    self.next_id += 1;
                    self.clients.push(Client { id, socket });
                    accepted.push(id);
                }
                Err(e) => warn!("UI handshake failed: {e}"),
            }
        }
        accepted
    }

    /// Reads every message already sent by any client. Malformed text is
    /// returned as an error string for the caller to answer; clients that
    /// closed or failed are dropped.
    pub fn poll(&mut self) -> Vec<(ClientId, Result<Inbound, String>)> {
        let mut received = Vec::new();
        self.clients.retain_mut(|client| loop {
            match client.socket.read() {
                Ok(Message::Text(text)) => received.push((client.id, Inbound::parse(&text))),
                Ok(Message::Binary(_)) => {
                    received.push((client.id, Err("binary messages are not supported".into())))
                }
                Ok(Message::Close(_)) => {
                    debug!("UI client {} closed", client.id.0);
                    let _ = client.socket.flush();
                    return false;
                }
                Ok(_) => {}
                Err(tungstenite::Error::Io(e))
                    if matches!(e.kind(), ErrorKind::WouldBlock | ErrorKind::TimedOut) =>
                {
                    return true
                }
                Err(e) => {
                    debug!("dropping UI client {}: {e}", client.id.0);
                    return false;
                }
            }
        });
        received
    }

    pub fn send_to(&mut self, id: ClientId, message: &Outbound) {
        let text = message.to_json();
        self.clients.retain_mut(|c| c.id != id || send(c, &text));
    }

    pub fn broadcast(&mut self, message: &Outbound) {
        if self.clients.is_empty() {
            return;
        }
        let text = message.to_json();
        self.clients.retain_mut(|c| send(c, &text));
    }
}

fn upgrade(stream: TcpStream) -> std::result::Result<WebSocket<TcpStream>, String> {
    stream.set_nonblocking(false).map_err(|e| e.to_string())?;
    stream
        .set_read_timeout(Some(HANDSHAKE_TIMEOUT))
        .map_err(|e| e.to_string())?;
    let socket = tungstenite::accept(stream).map_err(|e| e.to_string())?;
    socket
        .get_ref()
        .set_read_timeout(Some(POLL_TIMEOUT))
        .map_err(|e| e.to_string())?;
    Ok(socket)
}

fn send(client: &mut Client, text: &str) -> bool {
    match client.socket.send(Message::text(text)) {
        Ok(()) => true,
        Err(e) => {
            debug!("dropping UI client {}: {e}", client.id.0);
            false
        }
    }
}
