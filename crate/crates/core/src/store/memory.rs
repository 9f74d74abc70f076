use std::sync::{Arc, Mutex, RwLock};

use super::{Dataset, RecordBatch, Snapshot, Store, StoreError};

/// Volatile store. Snapshots share structure with the live dataset until the
/// next write, which copies it.
#[derive(Debug, Default)]
pub struct MemoryStore {
    current: RwLock<Arc<Dataset>>,
    writer: Mutex<()>,
}

impl MemoryStore {
    pub fn new() -> Self {
        Self::default()
    }
}

impl Store for MemoryStore {
    fn put_records(&self, batch: RecordBatch) -> Result<usize, StoreError> {
        let _writer = self.writer.lock().unwrap_or_else(|e| e.into_inner());
        let mut next = Arc::clone(&self.current.read().unwrap_or_else(|e| e.into_inner()));
        next.validate(&batch)?;
        let changed = next.changed_subset(batch);
        let n = changed.len();
        if n == 0 {
            return Ok(0);
        }
        Arc::make_mut(&mut next).apply(changed);
        *self.current.write().unwrap_or_else(|e| e.into_inner()) = next;
        Ok(n)
    }

    fn snapshot(&self) -> Snapshot {
        Snapshot::new(Arc::clone(&self.current.read().unwrap_or_else(|e| e.into_inner())))
    }
}
