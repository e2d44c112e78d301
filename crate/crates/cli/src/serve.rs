use std::io::{BufRead, BufReader, Read, Write};
use std::net::{TcpListener, TcpStream};
use std::path::{Component, Path, PathBuf};
use std::sync::Arc;
use std::thread;
use std::time::{Duration, Instant};

use kondo::service::SessionServer;
use tungstenite::Message;

use crate::error::CliError;

const MAX_HEAD: usize = 16 * 1024;

/// Accept connections forever. Each connection is newline-delimited JSON, a
/// web socket upgrade, or a plain HTTP request for a static file.
pub fn run(server: Arc<SessionServer>, addr: &str, ui: Option<PathBuf>) -> Result<(), CliError> {
    let listener = TcpListener::bind(addr).map_err(|e| CliError::Usage(format!("cannot listen on {addr}: {e}")))?;
    let local = listener.local_addr().map_err(|e| CliError::Internal(e.to_string()))?;
    println!("listening on {local}");
    std::io::stdout().flush().ok();
    log::info!("maps: {:?}", server.map_names());

    let reaper = server.clone();
    thread::spawn(move || loop {
        thread::sleep(Duration::from_secs(60));
        reaper.expire_idle(Instant::now());
    });

    let ui = ui.map(Arc::new);
    for stream in listener.incoming() {
        let stream = match stream {
            Ok(s) => s,
            Err(e) => {
                log::warn!("accept failed: {e}");
                continue;
            }
        };
        let server = server.clone();
        let ui = ui.clone();
        thread::spawn(move || {
            let peer = stream.peer_addr().map(|a| a.to_string()).unwrap_or_default();
            if let Err(e) = handle(stream, &server, ui.as_deref().map(PathBuf::as_path)) {
                log::debug!("{peer}: {e}");
            }
        });
    }
    Ok(())
}

fn handle(stream: TcpStream, server: &SessionServer, ui: Option<&Path>) -> std::io::Result<()> {
    let head = peek_head(&stream)?;
    if !head.starts_with("GET ") {
        return ndjson(stream, server);
    }
    let lower = head.to_ascii_lowercase();
    if lower.contains("upgrade: websocket") {
        return websocket(stream, server);
    }
    static_file(stream, &head, ui)
}

/// Peek at the start of the stream without consuming it: the request head for
/// HTTP, or whatever arrived first otherwise.
fn peek_head(stream: &TcpStream) -> std::io::Result<String> {
    let mut buf = vec![0u8; MAX_HEAD];
    loop {
        let n = stream.peek(&mut buf)?;
        let text = String::from_utf8_lossy(&buf[..n]).into_owned();
        let http = text.starts_with("GET ") || "GET ".starts_with(text.as_str());
        if n == 0 || !http || text.contains("\r\n\r\n") || n == MAX_HEAD {
            return Ok(text);
        }
        thread::sleep(Duration::from_millis(5));
    }
}

fn ndjson(stream: TcpStream, server: &SessionServer) -> std::io::Result<()> {
    let mut writer = stream.try_clone()?;
    for line in BufReader::new(stream).lines() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let reply = server.handle_line(&line);
        writer.write_all(reply.as_bytes())?;
        writer.write_all(b"\n")?;
        writer.flush()?;
    }
    Ok(())
}

fn websocket(stream: TcpStream, server: &SessionServer) -> std::io::Result<()> {
    let io = |e: tungstenite::Error| std::io::Error::other(e.to_string());
    let mut ws = tungstenite::accept(stream).map_err(|e| std::io::Error::other(e.to_string()))?;
    loop {
        match ws.read().map_err(io)? {
            Message::Text(text) => {
                for line in text.lines().filter(|l| !l.trim().is_empty()) {
                    ws.send(Message::Text(server.handle_line(line))).map_err(io)?;
                }
            }
            Message::Close(_) => return Ok(()),
            _ => {}
        }
    }
}

fn static_file(mut stream: TcpStream, head: &str, ui: Option<&Path>) -> std::io::Result<()> {
    // consume the request head
    let mut discard = vec![0u8; head.len()];
    stream.read_exact(&mut discard)?;
    let target = head.split_whitespace().nth(1).unwrap_or("/");
    let target = target.split(['?', '#']).next().unwrap_or("/");
    let file = ui.and_then(|root| resolve(root, target));
    let (status, body, kind) = match file.and_then(|p| std::fs::read(&p).ok().map(|b| (b, p))) {
        Some((body, path)) => ("200 OK", body, content_type(&path)),
        None => ("404 Not Found", b"not found\n".to_vec(), "text/plain"),
    };
    write!(stream, "HTTP/1.1 {status}\r\nContent-Type: {kind}\r\nContent-Length: {}\r\nConnection: close\r\n\r\n", body.len())?;
    stream.write_all(&body)?;
    stream.flush()
}

fn resolve(root: &Path, target: &str) -> Option<PathBuf> {
    let relative = Path::new(target.trim_start_matches('/'));
    if relative.components().any(|c| !matches!(c, Component::Normal(_))) {
        return None;
    }
    let path = root.join(relative);
    let path = if path.is_dir() { path.join("index.html") } else { path };
    path.is_file().then_some(path)
}

fn content_type(path: &Path) -> &'static str {
    match path.extension().and_then(|e| e.to_str()) {
        Some("html") => "text/html; charset=utf-8",
        Some("js") => "text/javascript",
        Some("css") => "text/css",
        Some("json") => "application/json",
        Some("svg") => "image/svg+xml",
        Some("png") => "image/png",
        _ => "application/octet-stream",
    }
}
