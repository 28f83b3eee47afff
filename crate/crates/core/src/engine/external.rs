//! A prediction backend in another process, spoken to in line-delimited
//! JSON.
//!
//! Each request is one line:
//!
//! ```json
//! {"id":1,"role":"subgoal","domain":"deepcoder","beam":10,"step":0,
//!  "examples":[{"inputs":{"x0":{"list":[42,-48]}},"output":{"list":[42,42]}}]}
//! ```
//!
//! and each response one line, `{"candidates":[...]}`, where a subgoal
//! candidate is a list of values (one per example) and a subprogram
//! candidate is the canonical text of one step. A response may echo the
//! request `id`; responses carrying another id are stale and skipped. A
//! response `{"error":"..."}` fails the request. Anything unparsable fails
//! the request and leaves the connection usable.

use std::io::{BufRead, BufReader, Write};
use std::net::TcpStream;
use std::path::PathBuf;
use std::process::{Child, Command, Stdio};
use std::str::FromStr;
use std::sync::mpsc::{self, Receiver, RecvTimeoutError};
use std::thread;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use super::{BackendError, Capabilities, PredictionBackend, Request, Role};
use crate::program::{Domain, Subprogram};
use crate::spec::Example;
use crate::value::Value;

pub const DEFAULT_TIMEOUT: Duration = Duration::from_secs(60);

/// Where an external backend listens.
///
/// Written `tcp:HOST:PORT`, `unix:PATH`, or `cmd:PROGRAM ARGS...` (spawned,
/// spoken to over its standard streams; arguments split on whitespace).
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Endpoint {
    Tcp(String),
    Unix(PathBuf),
    Command(Vec<String>),
}

impl FromStr for Endpoint {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || format!("bad endpoint {s:?}: expected tcp:HOST:PORT, unix:PATH or cmd:PROGRAM ARGS...");
        let (scheme, rest) = s.split_once(':').ok_or_else(bad)?;
        let rest = rest.trim();
        if rest.is_empty() {
            return Err(bad());
        }
        match scheme {
            "tcp" => Ok(Endpoint::Tcp(rest.to_owned())),
            "unix" => Ok(Endpoint::Unix(PathBuf::from(rest))),
            "cmd" => Ok(Endpoint::Command(rest.split_whitespace().map(str::to_owned).collect())),
            _ => Err(bad()),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct WireRequest {
    pub id: u64,
    pub role: Role,
    pub domain: Domain,
    pub beam: usize,
    pub step: usize,
    pub examples: Vec<Example>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WireResponse {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub id: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub candidates: Option<Vec<serde_json::Value>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

pub struct ExternalBackend {
    writer: Box<dyn Write + Send>,
    lines: Receiver<std::io::Result<String>>,
    child: Option<Child>,
    /// Closes a socket connection; the reader thread holds a clone of it.
    shutdown: Option<Box<dyn FnOnce() + Send>>,
    next_id: u64,
    timeout: Duration,
}

fn transport(e: impl std::fmt::Display) -> BackendError {
    BackendError::Transport(e.to_string())
}

fn spawn_reader<R: std::io::Read + Send + 'static>(reader: R) -> Receiver<std::io::Result<String>> {
    let (tx, rx) = mpsc::channel();
    thread::spawn(move || {
        for line in BufReader::new(reader).lines() {
            let stop = line.is_err();
            if tx.send(line).is_err() || stop {
                break;
            }
        }
    });
    rx
}

impl ExternalBackend {
    pub fn connect(endpoint: &Endpoint, timeout: Duration) -> Result<Self, BackendError> {
        type Parts = (
            Box<dyn Write + Send>,
            Receiver<std::io::Result<String>>,
            Option<Child>,
            Option<Box<dyn FnOnce() + Send>>,
        );
        let (writer, lines, child, shutdown): Parts = match endpoint {
            Endpoint::Tcp(addr) => {
                let stream = TcpStream::connect(addr).map_err(transport)?;
                let read = stream.try_clone().map_err(transport)?;
                let close = stream.try_clone().map_err(transport)?;
                let shutdown: Box<dyn FnOnce() + Send> =
                    Box::new(move || drop(close.shutdown(std::net::Shutdown::Both)));
                (Box::new(stream), spawn_reader(read), None, Some(shutdown))
            }
            #[cfg(unix)]
            Endpoint::Unix(path) => {
                let stream = std::os::unix::net::UnixStream::connect(path).map_err(transport)?;
                let read = stream.try_clone().map_err(transport)?;
                let close = stream.try_clone().map_err(transport)?;
                let shutdown: Box<dyn FnOnce() + Send> =
                    Box::new(move || drop(close.shutdown(std::net::Shutdown::Both)));
                (Box::new(stream), spawn_reader(read), None, Some(shutdown))
            }
            #[cfg(not(unix))]
            Endpoint::Unix(_) => return Err(transport("unix sockets are not supported on this platform")),
            Endpoint::Command(argv) => {
                let (program, args) = argv.split_first().ok_or_else(|| transport("empty command"))?;
                let mut child = Command::new(program)
                    .args(args)
                    .stdin(Stdio::piped())
                    .stdout(Stdio::piped())
                    .spawn()
                    .map_err(|e| transport(format!("cannot start {program}: {e}")))?;
                let stdin = child.stdin.take().expect("stdin is piped");
                let stdout = child.stdout.take().expect("stdout is piped");
                (Box::new(stdin), spawn_reader(stdout), Some(child), None)
            }
        };
        Ok(ExternalBackend {
            writer,
            lines,
            child,
            shutdown,
            next_id: 0,
            timeout,
        })
    }

    /// Sends one request and returns the candidates of its response,
    /// truncated to the beam.
    pub fn call(&mut self, role: Role, req: &Request<'_>) -> Result<Vec<serde_json::Value>, BackendError> {
        self.next_id += 1;
        let id = self.next_id;
        let wire = WireRequest {
            id,
            role,
            domain: req.domain,
            beam: req.beam,
            step: req.step,
            examples: req.spec.examples().to_vec(),
        };
        let mut line = serde_json::to_string(&wire).expect("requests serialize");
        line.push('\n');
        self.writer.write_all(line.as_bytes()).map_err(transport)?;
        self.writer.flush().map_err(transport)?;

        let deadline = Instant::now() + self.timeout;
        let response = loop {
            let left = deadline.saturating_duration_since(Instant::now());
            let line = match self.lines.recv_timeout(left) {
                Ok(Ok(line)) => line,
                Ok(Err(e)) => return Err(transport(e)),
                Err(RecvTimeoutError::Timeout) => return Err(BackendError::Timeout(self.timeout)),
                Err(RecvTimeoutError::Disconnected) => return Err(transport("connection closed")),
            };
            if line.trim().is_empty() {
                continue;
            }
            let response: WireResponse =
                serde_json::from_str(&line).map_err(|e| BackendError::Malformed(format!("{e}: {line}")))?;
            match response.id {
                Some(other) if other != id => log::debug!("skipping stale response {other} while waiting for {id}"),
                _ => break response,
            }
        };
        if let Some(error) = response.error {
            return Err(BackendError::Remote(error));
        }
        let mut candidates = response
            .candidates
            .ok_or_else(|| BackendError::Malformed("no `candidates` field".to_owned()))?;
        if candidates.len() > req.beam {
            log::warn!(
                "{role} response has {} candidates for a beam of {}; keeping the first {}",
                candidates.len(),
                req.beam,
                req.beam
            );
            candidates.truncate(req.beam);
        }
        Ok(candidates)
    }
}

impl PredictionBackend for ExternalBackend {
    fn capabilities(&self) -> Capabilities {
        Capabilities {
            subgoal: true,
            subprogram: true,
        }
    }

    fn subgoals(&mut self, req: &Request<'_>) -> Result<Vec<Vec<Value>>, BackendError> {
        let expected = req.spec.len();
        self.call(Role::Subgoal, req)?
            .into_iter()
            .enumerate()
            .map(|(index, c)| {
                let values: Vec<Value> = serde_json::from_value(c)
                    .map_err(|e| BackendError::Malformed(format!("subgoal candidate {index}: {e}")))?;
                if values.len() != expected {
                    return Err(BackendError::SubgoalArity {
                        index,
                        expected,
                        found: values.len(),
                    });
                }
                Ok(values)
            })
            .collect()
    }

    fn subprograms(&mut self, req: &Request<'_>) -> Result<Vec<Subprogram>, BackendError> {
        self.call(Role::Subprogram, req)?
            .into_iter()
            .enumerate()
            .map(|(index, c)| {
                let text = c
                    .as_str()
                    .ok_or_else(|| BackendError::Malformed(format!("subprogram candidate {index} is not a string")))?;
                Subprogram::parse(text, req.domain)
                    .map_err(|e| BackendError::Malformed(format!("subprogram candidate {index} {text:?}: {e}")))
            })
            .collect()
    }
}

impl Drop for ExternalBackend {
    fn drop(&mut self) {
        if let Some(shutdown) = self.shutdown.take() {
            shutdown();
        }
        if let Some(child) = &mut self.child {
            let _ = child.kill();
            let _ = child.wait();
        }
    }
}
