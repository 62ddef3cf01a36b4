//! Line-delimited JSON persistence for translations and judgment logs.
//!
//! Both stores are append-oriented: records are written one serialized line
//! at a time with a single `write_all`, so concurrent appenders interleave
//! whole records and a crash loses at most the record in flight. Readers
//! tolerate exactly one torn trailing line for the same reason.

use std::fs::{File, OpenOptions};
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Mutex;

use serde::de::DeserializeOwned;
use serde::Serialize;

use crate::datamodel::{Judgment, Translation};
use crate::error::{Error, Result};

/// Read a JSONL file into records. Blank lines are skipped; a malformed
/// *final* line is treated as an interrupted append and dropped, while a
/// malformed line anywhere else is a hard parse error.
pub fn read_jsonl<T: DeserializeOwned>(path: &Path) -> Result<Vec<T>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path.display().to_string(), e))?;
    let lines: Vec<&str> = text.lines().filter(|l| !l.trim().is_empty()).collect();
    let mut out = Vec::with_capacity(lines.len());
    for (idx, line) in lines.iter().enumerate() {
        match serde_json::from_str(line) {
            Ok(record) => out.push(record),
            Err(e) if idx + 1 == lines.len() => {
                // Torn tail from a crashed writer: the record was never
                // durable, so resuming without it is the correct outcome.
                let _ = e;
                break;
            }
            Err(e) => {
                return Err(Error::parse(format!("{}:{}", path.display(), idx + 1), e));
            }
        }
    }
    Ok(out)
}

/// Write records to a JSONL file, replacing any existing content.
pub fn write_jsonl<T: Serialize>(path: &Path, records: &[T]) -> Result<()> {
    let mut text = String::new();
    for record in records {
        text.push_str(
            &serde_json::to_string(record).map_err(|e| Error::parse(path.display().to_string(), e))?,
        );
        text.push('\n');
    }
    std::fs::write(path, text).map_err(|e| Error::io(path.display().to_string(), e))
}

fn serialize_line<T: Serialize>(path: &Path, record: &T) -> Result<Vec<u8>> {
    let mut line = serde_json::to_vec(record).map_err(|e| Error::parse(path.display().to_string(), e))?;
    line.push(b'\n');
    Ok(line)
}

// ---------------------------------------------------------------------------
// TranslationStore
// ---------------------------------------------------------------------------

/// In-memory view of a translations file, keyed by (item_id, model_id).
/// Reloading applies last-wins dedup, so re-generating a translation is a
/// plain append rather than a rewrite. Optionally write-through backed.
#[derive(Clone, Debug, Default)]
pub struct TranslationStore {
    by_key: std::collections::BTreeMap<(String, String), Translation>,
    backing: Option<PathBuf>,
}

impl TranslationStore {
    /// An unbacked, empty store.
    pub fn in_memory() -> Self {
        TranslationStore::default()
    }

    /// Load a translations file without attaching it for writes.
    pub fn load(path: &Path) -> Result<Self> {
        let mut store = TranslationStore::default();
        for record in read_jsonl::<Translation>(path)? {
            store.insert(record);
        }
        Ok(store)
    }

    /// Open a write-through store: loads the file when present (creating it
    /// otherwise) and appends every future insert to it.
    pub fn open(path: &Path) -> Result<Self> {
        let mut store = if path.exists() {
            TranslationStore::load(path)?
        } else {
            if let Some(parent) = path.parent() {
                std::fs::create_dir_all(parent).map_err(|e| Error::io(parent.display().to_string(), e))?;
            }
            File::create(path).map_err(|e| Error::io(path.display().to_string(), e))?;
            TranslationStore::default()
        };
        store.backing = Some(path.to_path_buf());
        Ok(store)
    }

    /// Insert (or replace) a record in memory and append it to the backing
    /// file when one is attached.
    pub fn insert(&mut self, record: Translation) {
        self.by_key
            .insert((record.item_id.clone(), record.model_id.clone()), record);
    }

    pub fn insert_persist(&mut self, record: Translation) -> Result<()> {
        if let Some(path) = self.backing.clone() {
            let line = serialize_line(&path, &record)?;
            let mut file = OpenOptions::new()
                .append(true)
                .open(&path)
                .map_err(|e| Error::io(path.display().to_string(), e))?;
            file.write_all(&line).map_err(|e| Error::io(path.display().to_string(), e))?;
        }
        self.insert(record);
        Ok(())
    }

    pub fn get(&self, item_id: &str, model_id: &str) -> Option<&Translation> {
        self.by_key.get(&(item_id.to_string(), model_id.to_string()))
    }

    pub fn len(&self) -> usize {
        self.by_key.len()
    }

    pub fn is_empty(&self) -> bool {
        self.by_key.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &Translation> {
        self.by_key.values()
    }

    /// Copy every record of `other` into this store (in memory only).
    pub fn merge(&mut self, other: &TranslationStore) {
        for record in other.iter() {
            self.insert(record.clone());
        }
    }

    /// Write the deduplicated contents to a file (replacing it).
    pub fn save(&self, path: &Path) -> Result<()> {
        let records: Vec<&Translation> = self.by_key.values().collect();
        write_jsonl(path, &records)
    }
}

// ---------------------------------------------------------------------------
// JudgmentLog
// ---------------------------------------------------------------------------

/// Append-only judgment log. Each append serializes one record to one line
/// and hands it to the OS in a single `write_all` on an `O_APPEND` handle,
/// so records from concurrent writers never interleave mid-line and a
/// crashed run loses at most the in-flight record.
#[derive(Debug)]
pub struct JudgmentLog {
    path: PathBuf,
    file: Mutex<File>,
}

impl JudgmentLog {
    /// Open a log for appending, creating it (and parent directories) if needed.
    pub fn open_append(path: &Path) -> Result<Self> {
        if let Some(parent) = path.parent() {
            if !parent.as_os_str().is_empty() {
                std::fs::create_dir_all(parent).map_err(|e| Error::io(parent.display().to_string(), e))?;
            }
        }
        let file = OpenOptions::new()
            .create(true)
            .append(true)
            .open(path)
            .map_err(|e| Error::io(path.display().to_string(), e))?;
        Ok(JudgmentLog { path: path.to_path_buf(), file: Mutex::new(file) })
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    /// Append one judgment and flush it to the OS before returning.
    pub fn append(&self, judgment: &Judgment) -> Result<()> {
        let line = serialize_line(&self.path, judgment)?;
        let mut file = self.file.lock().expect("judgment log lock poisoned");
        file.write_all(&line).map_err(|e| Error::io(self.path.display().to_string(), e))?;
        file.flush().map_err(|e| Error::io(self.path.display().to_string(), e))
    }

    /// Read every committed record currently in the log.
    pub fn read_existing(&self) -> Result<Vec<Judgment>> {
        read_jsonl(&self.path)
    }
}

/// Read a judgment log by path.
pub fn read_judgments(path: &Path) -> Result<Vec<Judgment>> {
    read_jsonl(path)
}
