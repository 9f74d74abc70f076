//! Canonical JSONL export and import, with a manifest of collection counts
//! and a content checksum.

use std::fs::{self, File};
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use super::{Counts, RecordBatch, Snapshot, Store, StoreError};

pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Manifest {
    pub counts: Counts,
    pub checksum: String,
}

impl Manifest {
    pub fn of(snapshot: &Snapshot) -> Self {
        Manifest {
            counts: snapshot.counts(),
            checksum: snapshot.checksum(),
        }
    }
}

/// Writes `claims.jsonl`, `tweets.jsonl`, `pairs.jsonl`, `documents.jsonl`,
/// `geocache.jsonl` and `manifest.json` into `dir`.
pub fn export_jsonl(snapshot: &Snapshot, dir: &Path) -> Result<Manifest, StoreError> {
    fs::create_dir_all(dir)?;
    let mut writers: Vec<(&'static str, BufWriter<File>)> = Vec::new();
    for name in ["claims", "tweets", "pairs", "documents", "geocache"] {
        writers.push((name, BufWriter::new(File::create(dir.join(format!("{name}.jsonl")))?)));
    }
    let mut result = Ok(());
    snapshot.for_each_canonical_line(|collection, line| {
        if result.is_err() {
            return;
        }
        let (_, w) = writers
            .iter_mut()
            .find(|(n, _)| *n == collection)
            .expect("known collection");
        result = writeln!(w, "{line}");
    });
    result?;
    for (_, mut w) in writers {
        w.flush()?;
    }
    let manifest = Manifest::of(snapshot);
    fs::write(dir.join(MANIFEST_FILE), serde_json::to_string_pretty(&manifest)? + "\n")?;
    Ok(manifest)
}

fn read_collection<T: DeserializeOwned>(path: &Path) -> Result<Vec<T>, StoreError> {
    if !path.exists() {
        return Ok(Vec::new());
    }
    let mut out = Vec::new();
    for (i, line) in BufReader::new(File::open(path)?).lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(serde_json::from_str(&line).map_err(|e| StoreError::Corrupt {
            line: i + 1,
            reason: format!("{}: {e}", path.display()),
        })?);
    }
    Ok(out)
}

/// Loads an export directory into `store`, in dependency order. Returns the
/// number of new or changed records.
pub fn import_jsonl(store: &dyn Store, dir: &Path) -> Result<usize, StoreError> {
    let mut stored = 0;
    stored += store.put_records(RecordBatch::Geocodes(read_collection(&dir.join("geocache.jsonl"))?))?;
    stored += store.put_records(RecordBatch::Claims(read_collection(&dir.join("claims.jsonl"))?))?;
    stored += store.put_records(RecordBatch::Tweets(read_collection(&dir.join("tweets.jsonl"))?))?;
    stored += store.put_records(RecordBatch::Pairs(read_collection(&dir.join("pairs.jsonl"))?))?;
    stored += store.put_records(RecordBatch::Documents(read_collection(&dir.join("documents.jsonl"))?))?;
    Ok(stored)
}
