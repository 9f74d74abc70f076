//! Persistence for claims, tweets, pairs, context documents and the geocode
//! cache.
//!
//! Writes go through [`Store::put_records`], one batch at a time, under a
//! single writer. Reads go through [`Snapshot`]s, which are immutable and
//! unaffected by later writes.

mod dataset;
mod export;
mod file;
mod filter;
mod memory;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use dataset::{Counts, Dataset, Snapshot};
pub use export::{export_jsonl, import_jsonl, Manifest};
pub use file::FileStore;
pub use filter::PairFilter;
pub use memory::MemoryStore;

use crate::ingestion::GeocodeResult;
use crate::model::{Claim, ClaimTweetPair, ModelError, Tweet};
use crate::pipeline::ContextDocument;

#[derive(Debug, Error)]
pub enum StoreError {
    #[error("{kind} {id:?} references missing {missing_kind} {missing_id:?}")]
    Integrity {
        kind: &'static str,
        id: String,
        missing_kind: &'static str,
        missing_id: String,
    },
    #[error(transparent)]
    InvalidRecord(#[from] ModelError),
    #[error("invalid filter: {0}")]
    InvalidFilter(String),
    #[error("store file is corrupt at line {line}: {reason}")]
    Corrupt { line: usize, reason: String },
    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),
    #[error("serialization error: {0}")]
    Json(#[from] serde_json::Error),
}

/// One write: a homogeneous list of records.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "records", rename_all = "snake_case")]
pub enum RecordBatch {
    Claims(Vec<Claim>),
    Tweets(Vec<Tweet>),
    Pairs(Vec<ClaimTweetPair>),
    Documents(Vec<ContextDocument>),
    Geocodes(Vec<GeocodeResult>),
}

impl RecordBatch {
    pub fn len(&self) -> usize {
        match self {
            RecordBatch::Claims(r) => r.len(),
            RecordBatch::Tweets(r) => r.len(),
            RecordBatch::Pairs(r) => r.len(),
            RecordBatch::Documents(r) => r.len(),
            RecordBatch::Geocodes(r) => r.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

pub trait Store: Send + Sync {
    /// Upserts by id. Returns how many records were new or changed; writing
    /// identical records again returns 0. The batch is applied entirely or
    /// not at all.
    fn put_records(&self, batch: RecordBatch) -> Result<usize, StoreError>;

    fn snapshot(&self) -> Snapshot;
}
