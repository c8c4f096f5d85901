//! HTTP transport and request log.

use std::fs::{File, OpenOptions};
use std::io::{self, BufWriter, Cursor, Write};
use std::net::{SocketAddr, TcpListener, ToSocketAddrs};
use std::path::Path;
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::{Arc, Mutex};
use std::thread::{self, JoinHandle};
use std::time::Duration;

use serde::Serialize;
use socket2::{Domain, Protocol, Socket, Type};
use thiserror::Error;

use crate::service::{Body, Request, Service};

#[derive(Debug, Error)]
pub enum ServerError {
    #[error("cannot listen on {addr}: {reason}")]
    Bind { addr: String, reason: String },
    #[error("cannot open request log {path}: {source}")]
    Log { path: String, source: io::Error },
}

#[derive(Debug, Serialize)]
struct LogEntry<'a> {
    timestamp: String,
    method: &'a str,
    path: &'a str,
    status: u16,
    accept: Option<&'a str>,
    referer: Option<&'a str>,
    user_agent: Option<&'a str>,
    client: Option<String>,
}

/// Append-only JSON-lines request log.
pub struct RequestLog {
    out: Mutex<BufWriter<Box<dyn Write + Send>>>,
}

impl RequestLog {
    pub fn open(path: impl AsRef<Path>) -> Result<RequestLog, ServerError> {
        let path = path.as_ref();
        let file: File = OpenOptions::new()
            .create(true)
            .append(true)
            .open(path)
            .map_err(|source| ServerError::Log {
                path: path.display().to_string(),
                source,
            })?;
        Ok(RequestLog::to_writer(file))
    }

    pub fn to_writer(out: impl Write + Send + 'static) -> RequestLog {
        RequestLog {
            out: Mutex::new(BufWriter::new(Box::new(out))),
        }
    }

    fn record(&self, request: &Request, status: u16, client: Option<SocketAddr>) {
        let entry = LogEntry {
            timestamp: chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Millis, true),
            method: &request.method,
            path: &request.target,
            status,
            accept: request.header("Accept"),
            referer: request.header("Referer"),
            user_agent: request.header("User-Agent"),
            client: client.map(|c| c.to_string()),
        };
        let line = serde_json::to_string(&entry).expect("log entries serialize");
        let mut out = self.out.lock().unwrap_or_else(|p| p.into_inner());
        // Logging must never take the service down.
        let _ = writeln!(out, "{line}").and_then(|_| out.flush());
    }

    pub fn flush(&self) -> io::Result<()> {
        self.out.lock().unwrap_or_else(|p| p.into_inner()).flush()
    }
}

/// Stops a running [`Server`] from another thread or a signal handler.
#[derive(Debug, Clone)]
pub struct ShutdownHandle {
    stop: Arc<AtomicBool>,
}

impl ShutdownHandle {
    pub fn shutdown(&self) {
        self.stop.store(true, Ordering::SeqCst);
    }

    pub fn is_shutdown(&self) -> bool {
        self.stop.load(Ordering::SeqCst)
    }
}

pub struct Server {
    http: Arc<tiny_http::Server>,
    service: Arc<Service>,
    log: Option<Arc<RequestLog>>,
    stop: Arc<AtomicBool>,
    addr: SocketAddr,
    workers: usize,
}

const POLL: Duration = Duration::from_millis(50);

impl Server {
    pub fn bind(addr: &str, service: Service, log: Option<RequestLog>) -> Result<Server, ServerError> {
        let bind_error = |reason: String| ServerError::Bind {
            addr: addr.to_owned(),
            reason,
        };
        let listener = listen(addr).map_err(|e| bind_error(e.to_string()))?;
        let http = tiny_http::Server::from_listener(listener, None).map_err(|e| bind_error(e.to_string()))?;
        let local = http.server_addr().to_ip().ok_or_else(|| ServerError::Bind {
            addr: addr.to_owned(),
            reason: "not an IP listener".into(),
        })?;
        let workers = thread::available_parallelism().map_or(4, |n| n.get()).clamp(2, 16);
        Ok(Server {
            http: Arc::new(http),
            service: Arc::new(service),
            log: log.map(Arc::new),
            stop: Arc::new(AtomicBool::new(false)),
            addr: local,
            workers,
        })
    }

    pub fn local_addr(&self) -> SocketAddr {
        self.addr
    }

    pub fn shutdown_handle(&self) -> ShutdownHandle {
        ShutdownHandle {
            stop: Arc::clone(&self.stop),
        }
    }

    /// Serves until shut down, then flushes the log.
    pub fn run(self) -> io::Result<()> {
        let handles: Vec<_> = (0..self.workers)
            .map(|_| {
                let http = Arc::clone(&self.http);
                let service = Arc::clone(&self.service);
                let log = self.log.clone();
                let stop = Arc::clone(&self.stop);
                thread::spawn(move || worker(&http, &service, log.as_deref(), &stop))
            })
            .collect();
        for h in handles {
            h.join().map_err(|_| io::Error::other("worker thread panicked"))?;
        }
        match &self.log {
            Some(log) => log.flush(),
            None => Ok(()),
        }
    }

    /// Runs on a background thread.
    pub fn spawn(self) -> RunningServer {
        let addr = self.addr;
        let handle = self.shutdown_handle();
        let thread = thread::spawn(move || self.run());
        RunningServer {
            addr,
            handle,
            thread: Some(thread),
        }
    }
}

pub struct RunningServer {
    addr: SocketAddr,
    handle: ShutdownHandle,
    thread: Option<JoinHandle<io::Result<()>>>,
}

impl RunningServer {
    pub fn addr(&self) -> SocketAddr {
        self.addr
    }

    pub fn url(&self, path: &str) -> String {
        format!("http://{}{}", self.addr, path)
    }

    pub fn shutdown(mut self) -> io::Result<()> {
        self.stop()
    }

    fn stop(&mut self) -> io::Result<()> {
        self.handle.shutdown();
        match self.thread.take() {
            Some(t) => t.join().map_err(|_| io::Error::other("server thread panicked"))?,
            None => Ok(()),
        }
    }
}

impl Drop for RunningServer {
    fn drop(&mut self) {
        let _ = self.stop();
    }
}

/// A listener whose accepted sockets inherit `TCP_NODELAY` (Linux semantics). Without
/// it, responses larger than the transport's write buffer stall on delayed ACKs when
/// the client keeps the connection alive.
fn listen(addr: &str) -> io::Result<TcpListener> {
    let target = addr
        .to_socket_addrs()?
        .next()
        .ok_or_else(|| io::Error::new(io::ErrorKind::InvalidInput, "address resolves to nothing"))?;
    let socket = Socket::new(Domain::for_address(target), Type::STREAM, Some(Protocol::TCP))?;
    socket.set_reuse_address(true)?;
    socket.set_tcp_nodelay(true)?;
    socket.bind(&target.into())?;
    socket.listen(1024)?;
    Ok(socket.into())
}

fn worker(http: &tiny_http::Server, service: &Service, log: Option<&RequestLog>, stop: &AtomicBool) {
    while !stop.load(Ordering::SeqCst) {
        match http.recv_timeout(POLL) {
            Ok(Some(request)) => serve_one(request, service, log),
            Ok(None) => {}
            Err(_) => thread::sleep(POLL),
        }
    }
}

fn serve_one(raw: tiny_http::Request, service: &Service, log: Option<&RequestLog>) {
    let request = Request {
        method: raw.method().as_str().to_owned(),
        target: raw.url().to_owned(),
        headers: raw
            .headers()
            .iter()
            .map(|h| (h.field.as_str().as_str().to_owned(), h.value.as_str().to_owned()))
            .collect(),
    };
    let client = raw.remote_addr().copied();
    let response = service.handle(&request);
    let status = response.status;
    let headers: Vec<tiny_http::Header> = response
        .headers
        .iter()
        .filter_map(|(n, v)| tiny_http::Header::from_bytes(n.as_bytes(), v.as_bytes()).ok())
        .collect();
    let code = tiny_http::StatusCode(status);
    // Client disconnects surface here; there is nobody left to tell.
    let _ = match response.body {
        Body::Empty => raw.respond(tiny_http::Response::new(code, headers, io::empty(), Some(0), None)),
        Body::Bytes(bytes) => {
            let len = bytes.len();
            raw.respond(tiny_http::Response::new(code, headers, Cursor::new(bytes), Some(len), None))
        }
        Body::Stream(reader) => raw.respond(tiny_http::Response::new(code, headers, reader, None, None)),
    };
    if let Some(log) = log {
        log.record(&request, status, client);
    }
}
