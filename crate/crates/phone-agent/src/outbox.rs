//! The durable local store: one append-only newline-delimited JSON file per
//! record type per day, named `<type>-<YYYYMMDD-HHMMSS>.log`, with a
//! sidecar `.acked` file listing the ids the server has acknowledged and a
//! `dead_letter-<type>.log` quarantine for records the server rejected
//! semantically. Reopening the directory restores the full state.

use std::collections::{BTreeMap, BTreeSet};
use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use chrono::DateTime;
use uuid::Uuid;

use crate::{AgentError, DataRecord, RecordType};

#[derive(Debug)]
struct OutboxFile {
    path: PathBuf,
    records: Vec<DataRecord>,
    acked: BTreeSet<Uuid>,
    /// Day index (timestamp / 86400) this file covers.
    day: i64,
    handle: File,
    ack_handle: File,
}

#[derive(Debug)]
pub struct Outbox {
    dir: PathBuf,
    /// Active file per type; rotated when the day index changes.
    active: BTreeMap<RecordType, String>,
    files: BTreeMap<String, OutboxFile>,
    quarantined: BTreeSet<Uuid>,
    dead_letter_count: u64,
}

fn timestamp_tag(t: f64) -> String {
    DateTime::from_timestamp(t.floor() as i64, 0)
        .map(|dt| dt.format("%Y%m%d-%H%M%S").to_string())
        .unwrap_or_else(|| "00000000-000000".to_string())
}

impl Outbox {
    /// Opens (or creates) an outbox directory, restoring previous state.
    pub fn open(dir: &Path) -> Result<Self, AgentError> {
        std::fs::create_dir_all(dir)?;
        let mut outbox = Self {
            dir: dir.to_path_buf(),
            active: BTreeMap::new(),
            files: BTreeMap::new(),
            quarantined: BTreeSet::new(),
            dead_letter_count: 0,
        };
        let mut names: Vec<String> = Vec::new();
        for entry in std::fs::read_dir(dir)? {
            let entry = entry?;
            let name = entry.file_name().to_string_lossy().into_owned();
            if name.ends_with(".log") && !name.starts_with("dead_letter-") {
                names.push(name);
            } else if name.starts_with("dead_letter-") {
                let file = BufReader::new(File::open(entry.path())?);
                for line in file.lines() {
                    let line = line?;
                    if let Ok(record) = serde_json::from_str::<DataRecord>(&line) {
                        outbox.quarantined.insert(record.record_id);
                        outbox.dead_letter_count += 1;
                    }
                }
            }
        }
        names.sort();
        for name in names {
            outbox.load_file(&name)?;
        }
        Ok(outbox)
    }

    fn load_file(&mut self, name: &str) -> Result<(), AgentError> {
        let path = self.dir.join(name);
        let mut records = Vec::new();
        let mut record_type = None;
        for line in BufReader::new(File::open(&path)?).lines() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let record: DataRecord = serde_json::from_str(&line)
                .map_err(|e| AgentError::Io(format!("corrupt outbox line in {name}: {e}")))?;
            record_type = Some(record.record_type);
            records.push(record);
        }
        let Some(record_type) = record_type else {
            return Ok(()); // empty file, nothing to restore
        };
        let ack_path = path.with_extension("log.acked");
        let mut acked = BTreeSet::new();
        if ack_path.exists() {
            for line in BufReader::new(File::open(&ack_path)?).lines() {
                let line = line?;
                if let Ok(id) = Uuid::parse_str(line.trim()) {
                    acked.insert(id);
                }
            }
        }
        let day = (records[0].timestamp / 86_400.0).floor() as i64;
        let handle = OpenOptions::new().append(true).open(&path)?;
        let ack_handle = OpenOptions::new()
            .create(true)
            .append(true)
            .open(&ack_path)?;
        self.active.insert(record_type, name.to_string());
        self.files.insert(
            name.to_string(),
            OutboxFile {
                path,
                records,
                acked,
                day,
                handle,
                ack_handle,
            },
        );
        Ok(())
    }

    /// Appends a record to the current file for its type, rotating to a new
    /// time-stamped file on the first record of each day.
    pub fn append(&mut self, record: &DataRecord) -> Result<(), AgentError> {
        let day = (record.timestamp / 86_400.0).floor() as i64;
        let needs_new = match self.active.get(&record.record_type) {
            Some(name) => self.files[name].day != day,
            None => true,
        };
        if needs_new {
            let name = format!(
                "{}-{}.log",
                record.record_type.as_str(),
                timestamp_tag(record.timestamp)
            );
            let path = self.dir.join(&name);
            let handle = OpenOptions::new().create(true).append(true).open(&path)?;
            let ack_handle = OpenOptions::new()
                .create(true)
                .append(true)
                .open(path.with_extension("log.acked"))?;
            self.files.insert(
                name.clone(),
                OutboxFile {
                    path,
                    records: Vec::new(),
                    acked: BTreeSet::new(),
                    day,
                    handle,
                    ack_handle,
                },
            );
            self.active.insert(record.record_type, name);
        }
        let name = self.active[&record.record_type].clone();
        let file = self.files.get_mut(&name).expect("active file exists");
        let line = serde_json::to_string(record)
            .map_err(|e| AgentError::Io(format!("record does not serialize: {e}")))?;
        file.handle.write_all(line.as_bytes())?;
        file.handle.write_all(b"\n")?;
        file.handle.flush()?;
        file.records.push(record.clone());
        Ok(())
    }

    /// Marks server-acknowledged ids as uploaded, durably.
    pub fn mark_acked(&mut self, ids: &[Uuid]) -> Result<(), AgentError> {
        for file in self.files.values_mut() {
            let mut wrote = false;
            for record in &file.records {
                if ids.contains(&record.record_id) && file.acked.insert(record.record_id) {
                    file.ack_handle
                        .write_all(record.record_id.to_string().as_bytes())?;
                    file.ack_handle.write_all(b"\n")?;
                    wrote = true;
                }
            }
            if wrote {
                file.ack_handle.flush()?;
            }
        }
        Ok(())
    }

    /// Quarantines a semantically rejected record so it is never retried.
    pub fn dead_letter(&mut self, record: &DataRecord, reason: &str) -> Result<(), AgentError> {
        let path = self
            .dir
            .join(format!("dead_letter-{}.log", record.record_type.as_str()));
        let mut handle = OpenOptions::new().create(true).append(true).open(path)?;
        let mut doc = serde_json::to_value(record)
            .map_err(|e| AgentError::Io(format!("record does not serialize: {e}")))?;
        doc.as_object_mut()
            .expect("records are objects")
            .insert("dead_letter_reason".into(), serde_json::json!(reason));
        handle.write_all(doc.to_string().as_bytes())?;
        handle.write_all(b"\n")?;
        handle.flush()?;
        self.quarantined.insert(record.record_id);
        self.dead_letter_count += 1;
        Ok(())
    }

    /// Pending records of one type in creation order (file order, oldest
    /// file first).
    pub fn pending(&self, record_type: RecordType) -> Vec<&DataRecord> {
        let mut out = Vec::new();
        for file in self.files.values() {
            for record in &file.records {
                if record.record_type == record_type
                    && !file.acked.contains(&record.record_id)
                    && !self.quarantined.contains(&record.record_id)
                {
                    out.push(record);
                }
            }
        }
        out
    }

    pub fn pending_total(&self) -> usize {
        RecordType::ALL
            .iter()
            .map(|t| self.pending(*t).len())
            .sum()
    }

    /// Every non-quarantined record ever written, for consistency checks.
    pub fn all_records(&self) -> impl Iterator<Item = &DataRecord> {
        self.files
            .values()
            .flat_map(|f| f.records.iter())
            .filter(|r| !self.quarantined.contains(&r.record_id))
    }

    pub fn total_records(&self) -> usize {
        self.all_records().count()
    }

    pub fn acked_total(&self) -> usize {
        self.files.values().map(|f| f.acked.len()).sum()
    }

    pub fn dead_letter_count(&self) -> u64 {
        self.dead_letter_count
    }

    pub fn file_paths(&self) -> Vec<PathBuf> {
        self.files.values().map(|f| f.path.clone()).collect()
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }
}
