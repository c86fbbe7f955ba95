use std::fs::{self, File, OpenOptions};
use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use super::{ArchiveError, ArtifactRecord};

pub const LOG_FILE: &str = "artifacts.jsonl";

/// Durable, ordered record log behind an [`Archive`](super::Archive).
///
/// After a crash mid-append, `scan` must yield a prefix of the committed
/// records; a partially written record is never visible.
pub trait StorageBackend: Send {
    /// Appends one record and returns its seq.
    fn append(&mut self, record: &ArtifactRecord) -> Result<u64, ArchiveError>;
    /// All committed records in seq order.
    fn scan(&self) -> Result<Vec<ArtifactRecord>, ArchiveError>;
    /// Durability barrier.
    fn sync(&mut self) -> Result<(), ArchiveError>;
}

/// Result of reading a log image.
#[derive(Debug)]
pub struct LogContents {
    pub records: Vec<ArtifactRecord>,
    /// Byte length of the newline-terminated prefix.
    pub committed_len: u64,
    /// Bytes after the last newline, if any.
    pub torn_tail: usize,
}

/// Parses a JSON-Lines log. An unterminated final line is a torn write and is
/// reported, not parsed; any terminated line that fails to parse is
/// corruption.
pub fn parse_log(bytes: &[u8]) -> Result<LogContents, ArchiveError> {
    let committed_len = bytes.iter().rposition(|&b| b == b'\n').map_or(0, |i| i + 1);
    let mut records = Vec::new();
    for (i, line) in bytes[..committed_len].split(|&b| b == b'\n').enumerate() {
        // the split yields an empty slice after the final newline
        if line.is_empty() {
            continue;
        }
        let record: ArtifactRecord = serde_json::from_slice(line).map_err(|e| ArchiveError::CorruptStore {
            line: i + 1,
            reason: e.to_string(),
        })?;
        records.push(record);
    }
    Ok(LogContents { records, committed_len: committed_len as u64, torn_tail: bytes.len() - committed_len })
}

fn encode_line(record: &ArtifactRecord) -> Vec<u8> {
    let mut line = serde_json::to_vec(record).expect("record serializes");
    line.push(b'\n');
    line
}

/// Append-only JSON-Lines file `<dir>/artifacts.jsonl`.
pub struct JsonlBackend {
    path: PathBuf,
    file: File,
    len: u64,
}

impl JsonlBackend {
    /// Opens (creating if needed) the log in `dir`. A torn final line is cut
    /// off so later appends start on a fresh line.
    pub fn open(dir: impl AsRef<Path>) -> Result<JsonlBackend, ArchiveError> {
        let dir = dir.as_ref();
        fs::create_dir_all(dir)?;
        let path = dir.join(LOG_FILE);
        let mut file = OpenOptions::new().read(true).append(true).create(true).open(&path)?;
        let mut bytes = Vec::new();
        file.read_to_end(&mut bytes)?;
        let contents = parse_log(&bytes)?;
        if contents.torn_tail > 0 {
            log::warn!(
                "{}: discarding {} bytes of unterminated final line",
                path.display(),
                contents.torn_tail
            );
            file.set_len(contents.committed_len)?;
            file.sync_data()?;
        }
        Ok(JsonlBackend { path, file, len: contents.committed_len })
    }

    pub fn path(&self) -> &Path {
        &self.path
    }
}

impl StorageBackend for JsonlBackend {
    fn append(&mut self, record: &ArtifactRecord) -> Result<u64, ArchiveError> {
        let line = encode_line(record);
        if let Err(e) = self.file.write_all(&line) {
            // drop whatever part of the line made it out
            let _ = self.file.set_len(self.len);
            return Err(e.into());
        }
        self.len += line.len() as u64;
        Ok(record.seq)
    }

    fn scan(&self) -> Result<Vec<ArtifactRecord>, ArchiveError> {
        let bytes = fs::read(&self.path)?;
        Ok(parse_log(&bytes)?.records)
    }

    fn sync(&mut self) -> Result<(), ArchiveError> {
        self.file.sync_data()?;
        Ok(())
    }
}

/// Volatile backend for tests and throwaway archives.
#[derive(Debug, Default)]
pub struct MemoryBackend {
    records: Vec<ArtifactRecord>,
}

impl MemoryBackend {
    pub fn new() -> Self {
        MemoryBackend::default()
    }
}

impl StorageBackend for MemoryBackend {
    fn append(&mut self, record: &ArtifactRecord) -> Result<u64, ArchiveError> {
        self.records.push(record.clone());
        Ok(record.seq)
    }

    fn scan(&self) -> Result<Vec<ArtifactRecord>, ArchiveError> {
        Ok(self.records.clone())
    }

    fn sync(&mut self) -> Result<(), ArchiveError> {
        Ok(())
    }
}
