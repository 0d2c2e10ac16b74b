//! Append-only persistent record store.
//!
//! Layout under the store directory:
//!
//! ```text
//! <type>.jsonl     one file per record type, one record per line
//! MANIFEST.json    committed batch sequence and byte length of every file
//! ```
//!
//! A batch is appended to the type files, flushed, and then committed by
//! atomically replacing the manifest. Bytes beyond the manifest lengths
//! belong to an uncommitted batch and are truncated when the store is
//! opened, so a crash mid-batch leaves no partial batch visible.

use std::collections::{BTreeMap, HashSet};
use std::fs::{self, File, OpenOptions};
use std::io::{self, BufRead, BufReader, Write};
use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::parse::{parse_json_line, RecordBatch};
use crate::dataset::Dataset;
use crate::domain::{validate_record, Record, RecordKey, RecordKind};

const MANIFEST: &str = "MANIFEST.json";

#[derive(Debug, thiserror::Error)]
pub enum StoreError {
    #[error("store I/O error at {path}: {source}")]
    Io { path: PathBuf, source: io::Error },
    #[error("store file {path} is corrupt at line {line}: {message}")]
    Corrupt {
        path: PathBuf,
        line: usize,
        message: String,
    },
}

fn io_err(path: &Path) -> impl FnOnce(io::Error) -> StoreError + '_ {
    move |source| StoreError::Io {
        path: path.to_path_buf(),
        source,
    }
}

/// Why one record of a batch was not stored.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Rejection {
    /// Position of the record in its batch.
    pub index: usize,
    pub kind: RecordKind,
    pub reason: String,
}

/// Outcome of one ingest call. `accepted + rejected_duplicates +
/// rejected_invalid` equals the batch size.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct IngestSummary {
    pub accepted: usize,
    pub rejected_duplicates: usize,
    pub rejected_invalid: usize,
    pub batch_seq: u64,
    pub rejections: Vec<Rejection>,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
struct Manifest {
    batch_seq: u64,
    lengths: BTreeMap<String, u64>,
}

/// Records grouped by type plus a primary-key index. Readers take cheap
/// [`Arc`] snapshots; ingestion copies on write, so a snapshot never
/// changes after it is taken.
#[derive(Debug, Default)]
pub struct EventStore {
    dir: Option<PathBuf>,
    data: Arc<Dataset>,
    keys: HashSet<RecordKey>,
    manifest: Manifest,
}

impl EventStore {
    /// A store that lives only in memory.
    pub fn in_memory() -> Self {
        Self::default()
    }

    /// Opens (or creates) the store in `dir`, discarding any uncommitted tail.
    pub fn open(dir: impl Into<PathBuf>) -> Result<Self, StoreError> {
        let dir = dir.into();
        fs::create_dir_all(&dir).map_err(io_err(&dir))?;
        let manifest_path = dir.join(MANIFEST);
        let manifest: Manifest = match fs::read_to_string(&manifest_path) {
            Ok(text) => serde_json::from_str(&text).map_err(|e| StoreError::Corrupt {
                path: manifest_path.clone(),
                line: e.line(),
                message: e.to_string(),
            })?,
            Err(e) if e.kind() == io::ErrorKind::NotFound => Manifest::default(),
            Err(e) => {
                return Err(StoreError::Io {
                    path: manifest_path,
                    source: e,
                })
            }
        };
        let mut data = Dataset::new();
        let mut keys = HashSet::new();
        for kind in RecordKind::ALL {
            let path = dir.join(format!("{kind}.jsonl"));
            let committed = manifest.lengths.get(kind.as_str()).copied().unwrap_or(0);
            match fs::metadata(&path) {
                Ok(meta) if meta.len() > committed => truncate(&path, committed)?,
                Ok(meta) if meta.len() < committed => {
                    return Err(StoreError::Corrupt {
                        path,
                        line: 0,
                        message: format!(
                            "file holds {} bytes, manifest commits {committed}",
                            meta.len()
                        ),
                    })
                }
                Ok(_) => {}
                Err(e) if e.kind() == io::ErrorKind::NotFound && committed == 0 => continue,
                Err(e) => return Err(StoreError::Io { path, source: e }),
            }
            let file = File::open(&path).map_err(io_err(&path))?;
            for (idx, line) in BufReader::new(file).lines().enumerate() {
                let line = line.map_err(io_err(&path))?;
                let corrupt = |message: String| StoreError::Corrupt {
                    path: path.clone(),
                    line: idx + 1,
                    message,
                };
                let record = parse_json_line(&line).map_err(corrupt)?;
                if record.kind() != *kind {
                    return Err(corrupt(format!("{} record in {kind} file", record.kind())));
                }
                if !keys.insert(record.key()) {
                    return Err(corrupt("duplicate key".into()));
                }
                data.push(record);
            }
        }
        Ok(EventStore {
            dir: Some(dir),
            data: Arc::new(data),
            keys,
            manifest,
        })
    }

    pub fn dir(&self) -> Option<&Path> {
        self.dir.as_deref()
    }

    /// The current committed records. Later ingests do not affect it.
    pub fn snapshot(&self) -> Arc<Dataset> {
        Arc::clone(&self.data)
    }

    pub fn batch_seq(&self) -> u64 {
        self.manifest.batch_seq
    }

    pub fn len(&self) -> usize {
        self.keys.len()
    }

    pub fn is_empty(&self) -> bool {
        self.keys.is_empty()
    }

    /// Validates and stores a batch. Invalid records and records whose key
    /// is already stored (or appears earlier in the batch) are rejected; the
    /// rest become durable together. On a storage failure nothing of the
    /// batch is visible, in memory or on disk.
    pub fn ingest(&mut self, batch: &RecordBatch) -> Result<IngestSummary, StoreError> {
        let mut summary = IngestSummary::default();
        let mut fresh: HashSet<RecordKey> = HashSet::new();
        let mut accepted: Vec<&Record> = Vec::new();
        for (index, record) in batch.records.iter().enumerate() {
            let report = validate_record(record);
            if !report.is_valid() {
                summary.rejected_invalid += 1;
                summary.rejections.push(Rejection {
                    index,
                    kind: record.kind(),
                    reason: report.to_string(),
                });
                continue;
            }
            let key = record.key();
            if self.keys.contains(&key) || !fresh.insert(key) {
                summary.rejected_duplicates += 1;
                summary.rejections.push(Rejection {
                    index,
                    kind: record.kind(),
                    reason: "duplicate key".into(),
                });
                continue;
            }
            accepted.push(record);
        }
        summary.accepted = accepted.len();
        if accepted.is_empty() {
            summary.batch_seq = self.manifest.batch_seq;
            return Ok(summary);
        }

        let mut manifest = self.manifest.clone();
        manifest.batch_seq += 1;
        if let Some(dir) = &self.dir {
            persist(dir, &accepted, &mut manifest)?;
        }
        let data = Arc::make_mut(&mut self.data);
        for record in accepted {
            data.push(record.clone());
        }
        self.keys.extend(fresh);
        self.manifest = manifest;
        summary.batch_seq = self.manifest.batch_seq;
        Ok(summary)
    }
}

fn truncate(path: &Path, len: u64) -> Result<(), StoreError> {
    let file = OpenOptions::new()
        .write(true)
        .open(path)
        .map_err(io_err(path))?;
    file.set_len(len).map_err(io_err(path))?;
    file.sync_all().map_err(io_err(path))
}

/// Appends the batch and commits the new manifest; on failure rolls every
/// file back to its committed length.
fn persist(dir: &Path, records: &[&Record], manifest: &mut Manifest) -> Result<(), StoreError> {
    let mut by_kind: BTreeMap<RecordKind, String> = BTreeMap::new();
    for r in records {
        let text = by_kind.entry(r.kind()).or_default();
        text.push_str(&r.to_json_line());
        text.push('\n');
    }
    let committed = manifest.lengths.clone();
    let result = (|| {
        for (kind, text) in &by_kind {
            let path = dir.join(format!("{kind}.jsonl"));
            let start = committed.get(kind.as_str()).copied().unwrap_or(0);
            let mut file = OpenOptions::new()
                .create(true)
                .append(true)
                .open(&path)
                .map_err(io_err(&path))?;
            file.set_len(start).map_err(io_err(&path))?;
            file.write_all(text.as_bytes()).map_err(io_err(&path))?;
            file.sync_all().map_err(io_err(&path))?;
            manifest
                .lengths
                .insert(kind.as_str().to_string(), start + text.len() as u64);
        }
        let tmp = dir.join(format!("{MANIFEST}.tmp"));
        let body = serde_json::to_vec_pretty(&*manifest).expect("manifest serializes");
        let mut file = File::create(&tmp).map_err(io_err(&tmp))?;
        file.write_all(&body).map_err(io_err(&tmp))?;
        file.sync_all().map_err(io_err(&tmp))?;
        let target = dir.join(MANIFEST);
        fs::rename(&tmp, &target).map_err(io_err(&target))
    })();
    if result.is_err() {
        for kind in by_kind.keys() {
            let path = dir.join(format!("{kind}.jsonl"));
            let _ = truncate(&path, committed.get(kind.as_str()).copied().unwrap_or(0));
        }
        manifest.lengths = committed;
    }
    result
}
