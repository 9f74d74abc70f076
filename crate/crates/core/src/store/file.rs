//! Single-file embedded store: an append-only log of JSONL write batches.
//!
//! Each acknowledged `put_records` appends exactly one line and syncs it to
//! disk before the in-memory view is updated. On open, every complete line is
//! replayed; a trailing partial line (an interrupted write) is discarded and
//! truncated away.

use std::fs::{File, OpenOptions};
use std::io::{Read, Seek, SeekFrom, Write};
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex, RwLock};

use super::{Dataset, RecordBatch, Snapshot, Store, StoreError};

#[derive(Debug)]
pub struct FileStore {
    path: PathBuf,
    current: RwLock<Arc<Dataset>>,
    log: Mutex<LogState>,
}

#[derive(Debug)]
struct LogState {
    file: File,
    /// Bytes of the file already replayed into `current`.
    offset: u64,
    lines: usize,
}

impl FileStore {
    /// Opens or creates the store file at `path`.
    pub fn open(path: impl AsRef<Path>) -> Result<Self, StoreError> {
        let path = path.as_ref().to_path_buf();
        if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
            std::fs::create_dir_all(parent)?;
        }
        let file = OpenOptions::new().read(true).append(true).create(true).open(&path)?;
        let mut state = LogState {
            file,
            offset: 0,
            lines: 0,
        };
        let mut data = Dataset::default();
        let torn = replay(&mut state, &mut data)?;
        if torn {
            state.file.set_len(state.offset)?;
            state.file.sync_all()?;
        }
        Ok(FileStore {
            path,
            current: RwLock::new(Arc::new(data)),
            log: Mutex::new(state),
        })
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    /// Picks up batches appended by another process since the last read.
    pub fn refresh(&self) -> Result<(), StoreError> {
        let mut log = self.log.lock().unwrap_or_else(|e| e.into_inner());
        let len = log.file.metadata()?.len();
        if len <= log.offset {
            return Ok(());
        }
        let mut next = Arc::clone(&self.current.read().unwrap_or_else(|e| e.into_inner()));
        replay(&mut log, Arc::make_mut(&mut next))?;
        *self.current.write().unwrap_or_else(|e| e.into_inner()) = next;
        Ok(())
    }
}

/// Replays complete lines from `state.offset` onward. Returns whether a
/// partial trailing line was found.
fn replay(state: &mut LogState, data: &mut Dataset) -> Result<bool, StoreError> {
    state.file.seek(SeekFrom::Start(state.offset))?;
    let mut buf = Vec::new();
    state.file.read_to_end(&mut buf)?;
    let mut consumed = 0usize;
    while let Some(pos) = buf[consumed..].iter().position(|&b| b == b'\n') {
        let line = &buf[consumed..consumed + pos];
        state.lines += 1;
        let batch: RecordBatch = serde_json::from_slice(line).map_err(|e| StoreError::Corrupt {
            line: state.lines,
            reason: e.to_string(),
        })?;
        data.validate(&batch).map_err(|e| StoreError::Corrupt {
            line: state.lines,
            reason: e.to_string(),
        })?;
        data.apply(batch);
        consumed += pos + 1;
    }
    state.offset += consumed as u64;
    Ok(consumed < buf.len())
}

impl Store for FileStore {
    fn put_records(&self, batch: RecordBatch) -> Result<usize, StoreError> {
        let mut log = self.log.lock().unwrap_or_else(|e| e.into_inner());
        let mut next = Arc::clone(&self.current.read().unwrap_or_else(|e| e.into_inner()));
        if log.file.metadata()?.len() > log.offset {
            replay(&mut log, Arc::make_mut(&mut next))?;
        }
        next.validate(&batch)?;
        let changed = next.changed_subset(batch);
        let n = changed.len();
        if n == 0 {
            return Ok(0);
        }
        let mut line = serde_json::to_vec(&changed)?;
        line.push(b'\n');
        log.file.write_all(&line)?;
        log.file.sync_data()?;
        log.offset += line.len() as u64;
        log.lines += 1;
        Arc::make_mut(&mut next).apply(changed);
        *self.current.write().unwrap_or_else(|e| e.into_inner()) = next;
        Ok(n)
    }

    fn snapshot(&self) -> Snapshot {
        // A failed refresh leaves the last good view in place.
        let _ = self.refresh();
        Snapshot::new(Arc::clone(&self.current.read().unwrap_or_else(|e| e.into_inner())))
    }
}
