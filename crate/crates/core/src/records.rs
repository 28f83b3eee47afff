//! Line-delimited JSON artifacts: a header line naming the schema and its
//! version, then one record per line.
//!
//! Files are only ever appended to. A reader tolerates a final line cut
//! short by an interrupted writer and reports where the intact prefix ends,
//! so a resumed writer can truncate there and carry on.

use std::fs::{File, OpenOptions};
use std::io::{self, BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::engine::RunResult;
use crate::program::{parse_program, Domain};
use crate::spec::{Example, TaskSpec};
use crate::taskgen::{Category, Split, Task};

pub const CORPUS_SCHEMA: &str = "exedec-lab/corpus";
pub const RESULTS_SCHEMA: &str = "exedec-lab/results";
pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum RecordError {
    #[error("{path}: {source}")]
    Io { path: String, source: io::Error },
    #[error("{path}:{line}: {message}")]
    Format { path: String, line: usize, message: String },
    #[error("{path}: expected schema {expected} version {version}, found {found}")]
    Schema {
        path: String,
        expected: &'static str,
        version: u32,
        found: String,
    },
}

/// The first line of every artifact. `meta` holds the settings that
/// produced the file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Header {
    pub schema: String,
    pub version: u32,
    #[serde(flatten)]
    pub meta: serde_json::Map<String, serde_json::Value>,
}

impl Header {
    pub fn new(schema: &str, meta: serde_json::Map<String, serde_json::Value>) -> Self {
        Header {
            schema: schema.to_owned(),
            version: SCHEMA_VERSION,
            meta,
        }
    }
}

/// One corpus line.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TaskRecord {
    pub id: String,
    pub domain: Domain,
    pub category: Category,
    pub split: Split,
    pub seed: u64,
    pub index: u64,
    pub program: String,
    pub examples: Vec<Example>,
}

impl From<&Task> for TaskRecord {
    fn from(t: &Task) -> Self {
        TaskRecord {
            id: t.id.clone(),
            domain: t.domain,
            category: t.category,
            split: t.split,
            seed: t.seed,
            index: t.index,
            program: t.ground_truth.to_string(),
            examples: t.spec.examples().to_vec(),
        }
    }
}

impl TaskRecord {
    pub fn into_task(self) -> Result<Task, String> {
        let ground_truth = parse_program(&self.program, self.domain).map_err(|e| e.to_string())?;
        let spec = TaskSpec::new(self.examples).map_err(|e| e.to_string())?;
        Ok(Task {
            id: self.id,
            domain: self.domain,
            category: self.category,
            split: self.split,
            seed: self.seed,
            index: self.index,
            spec,
            ground_truth,
        })
    }
}

/// One results line: a run of one task under one seed.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResultRecord {
    pub task_id: String,
    pub seed: u64,
    pub mode: String,
    pub backend: String,
    pub result: RunResult,
}

/// An artifact's parsed contents.
#[derive(Clone, Debug)]
pub struct Loaded<T> {
    pub header: Header,
    pub records: Vec<T>,
    /// Byte length of the intact prefix (header and complete records).
    pub intact_len: u64,
    /// A trailing partial line was ignored.
    pub truncated_tail: bool,
}

pub fn read_records<T: DeserializeOwned>(path: &Path, schema: &'static str) -> Result<Loaded<T>, RecordError> {
    let name = path.display().to_string();
    let io_err = |source| RecordError::Io {
        path: name.clone(),
        source,
    };
    let mut reader = BufReader::new(File::open(path).map_err(io_err)?);
    let mut header: Option<Header> = None;
    let mut records = Vec::new();
    let mut intact_len = 0u64;
    let mut truncated_tail = false;
    let mut buf = String::new();
    let mut line_no = 0;
    loop {
        buf.clear();
        let n = reader.read_line(&mut buf).map_err(io_err)?;
        if n == 0 {
            break;
        }
        line_no += 1;
        let complete = buf.ends_with('\n');
        let text = buf.trim_end();
        let format_err = |message: String| RecordError::Format {
            path: name.clone(),
            line: line_no,
            message,
        };
        if header.is_none() {
            let h: Header = serde_json::from_str(text).map_err(|e| format_err(format!("bad header: {e}")))?;
            if h.schema != schema || h.version != SCHEMA_VERSION {
                return Err(RecordError::Schema {
                    path: name.clone(),
                    expected: schema,
                    version: SCHEMA_VERSION,
                    found: format!("{} version {}", h.schema, h.version),
                });
            }
            if !complete {
                truncated_tail = true;
                break;
            }
            header = Some(h);
        } else if !text.is_empty() {
            match serde_json::from_str::<T>(text) {
                Ok(r) if complete => records.push(r),
                // A writer died mid-line.
                _ if !complete => {
                    truncated_tail = true;
                    break;
                }
                Ok(_) => unreachable!("complete handled above"),
                Err(e) => return Err(format_err(e.to_string())),
            }
        }
        intact_len += n as u64;
    }
    let header = header.ok_or_else(|| RecordError::Format {
        path: name.clone(),
        line: 1,
        message: "missing header line".to_owned(),
    })?;
    Ok(Loaded {
        header,
        records,
        intact_len,
        truncated_tail,
    })
}

/// Appends records, one flushed line each.
pub struct RecordWriter {
    out: BufWriter<File>,
    path: String,
}

impl RecordWriter {
    /// Creates (or replaces) the file and writes the header.
    pub fn create(path: &Path, header: &Header) -> Result<Self, RecordError> {
        let file = File::create(path).map_err(|source| RecordError::Io {
            path: path.display().to_string(),
            source,
        })?;
        let mut w = RecordWriter {
            out: BufWriter::new(file),
            path: path.display().to_string(),
        };
        w.write(header)?;
        Ok(w)
    }

    /// Opens an existing file for appending after cutting it to `len`
    /// bytes, dropping a partial last line.
    pub fn resume(path: &Path, len: u64) -> Result<Self, RecordError> {
        let name = path.display().to_string();
        let io_err = |source| RecordError::Io {
            path: name.clone(),
            source,
        };
        let file = OpenOptions::new().append(true).open(path).map_err(io_err)?;
        file.set_len(len).map_err(io_err)?;
        Ok(RecordWriter {
            out: BufWriter::new(file),
            path: name,
        })
    }

    pub fn write<T: Serialize>(&mut self, record: &T) -> Result<(), RecordError> {
        let line = serde_json::to_string(record).expect("records serialize");
        let io_err = |source| RecordError::Io {
            path: self.path.clone(),
            source,
        };
        self.out.write_all(line.as_bytes()).map_err(io_err)?;
        self.out.write_all(b"\n").map_err(io_err)?;
        self.out.flush().map_err(io_err)
    }
}
