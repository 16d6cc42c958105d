//! Minimal static file server for the browser UI's assets.

use std::fs;
use std::io::{BufRead, BufReader, Write};
use std::net::{SocketAddr, TcpListener, TcpStream};
use std::path::{Component, Path, PathBuf};
use std::thread::{self, JoinHandle};

use log::{debug, info};

use crate::error::{DebuggerError, Result};

pub const DEFAULT_ASSETS_ADDR: &str = "127.0.0.1:7525";

pub struct AssetServer {
    addr: SocketAddr,
    _thread: JoinHandle<()>,
}

impl AssetServer {
    /// Serves files below `root` on `addr` from a background thread.
    pub fn start(root: impl AsRef<Path>, addr: &str) -> Result<AssetServer> {
        let root = root.as_ref().to_path_buf();
        if !root.is_dir() {
            return Err(DebuggerError::Config(format!(
                "UI asset directory {} does not exist",
                root.display()
            )));
        }
        let listener = TcpListener::bind(addr)
            .map_err(|e| DebuggerError::io(format!("cannot serve UI assets on {addr}"), e))?;
        let addr = listener
            .local_addr()
            .map_err(|e| DebuggerError::io("asset server address", e))?;
        info!("serving {} on http://{addr}/", root.display());
        let thread = thread::Builder::new()
            .name("taskscope-assets".into())
            .spawn(move || {
                for stream in listener.incoming().flatten() {
                    if let Err(e) = serve_one(&root, stream) {
                        debug!("asset request failed: {e}");
                    }
                }
            })
            .map_err(|e| DebuggerError::io("spawning asset server", e))?;
        Ok(AssetServer {
            addr,
            _thread: thread,
        })
    }

    pub fn addr(&self) -> SocketAddr {
        self.addr
    }
}

/// Maps a request path onto a file below `root`, refusing to leave it.
fn resolve(root: &Path, request_path: &str) -> Option<PathBuf> {
    let path = request_path.split(['?', '#']).next().unwrap_or("/");
    let mut resolved = root.to_path_buf();
    for component in Path::new(path.trim_start_matches('/')).components() {
        match component {
            Component::Normal(part) => resolved.push(part),
            Component::CurDir => {}
            _ => return None,
        }
    }
    if resolved.is_dir() {
        resolved.push("index.html");
    }
    Some(resolved)
}

fn content_type(path: &Path) -> &'static str {
    match path.extension().and_then(|e| e.to_str()) {
        Some("html") => "text/html; charset=utf-8",
        Some("js" | "mjs") => "text/javascript",
        Some("css") => "text/css",
        Some("json") => "application/json",
        Some("svg") => "image/svg+xml",
        Some("png") => "image/png",
        _ => "application/octet-stream",
    }
}

fn serve_one(root: &Path, stream: TcpStream) -> std::io::Result<()> {
    let mut reader = BufReader::new(stream.try_clone()?);
    let mut request_line = String::new();
    reader.read_line(&mut request_line)?;
    // Drain the headers.
    let mut header = String::new();
    while reader.read_line(&mut header)? > 2 {
        header.clear();
    }
    let mut parts = request_line.split_whitespace();
    let (method, target) = (parts.next().unwrap_or(""), parts.next().unwrap_or("/"));
    let mut out = stream;
    if method != "GET" {
        return respond(&mut out, "405 Method Not Allowed", "text/plain", b"method not allowed");
    }
    match resolve(root, target).and_then(|p| fs::read(&p).ok().map(|body| (p, body))) {
        Some((path, body)) => respond(&mut out, "200 OK", content_type(&path), &body),
        None => respond(&mut out, "404 Not Found", "text/plain", b"not found"),
    }
}

fn respond(out: &mut TcpStream, status: &str, content_type: &str, body: &[u8]) -> std::io::Result<()> {
    write!(
        out,
        "HTTP/1.1 {status}\r\nContent-Type: {content_type}\r\nContent-Length: {}\r\nConnection: close\r\n\r\n",
        body.len()
    )?;
    out.write_all(body)?;
    out.flush()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn resolve_stays_inside_root() {
        let root = Path::new("/srv/ui");
        assert_eq!(resolve(root, "/app.js"), Some(PathBuf::from("/srv/ui/app.js")));
        assert_eq!(resolve(root, "/../etc/passwd"), None);
        assert_eq!(resolve(root, "/a/b.css?v=1"), Some(PathBuf::from("/srv/ui/a/b.css")));
    }
}
