//! Append-only JSON-lines journal.
//!
//! One [`JournalRecord`] per line. Sequence numbers start at 1 and have no
//! gaps; records are never rewritten, corrections append a superseding record.

use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, Seek, SeekFrom, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{Session, Shout, Timestamp, ValidationReview};

#[derive(Debug, Error)]
pub enum JournalError {
    #[error("journal i/o: {0}")]
    Io(#[from] std::io::Error),
    #[error("journal line {line}: {source}")]
    Decode {
        line: usize,
        #[source]
        source: serde_json::Error,
    },
    #[error("journal sequence broken at line {line}: expected {expected}, found {found}")]
    Sequence {
        line: usize,
        expected: u64,
        found: u64,
    },
    #[error("journal write rejected: {0}")]
    Rejected(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", content = "data", rename_all = "snake_case")]
pub enum Payload {
    Shout(Shout),
    Session(Session),
    Review(ValidationReview),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct JournalRecord {
    pub seq: u64,
    pub written: Timestamp,
    pub payload: Payload,
}

/// Storage behind the store. Appends are all-or-nothing per call.
pub trait Journal: Send {
    fn load(&mut self) -> Result<Vec<JournalRecord>, JournalError>;
    fn append(&mut self, records: &[JournalRecord]) -> Result<(), JournalError>;
}

fn encode(records: &[JournalRecord]) -> Result<Vec<u8>, JournalError> {
    let mut buf = Vec::new();
    for record in records {
        serde_json::to_writer(&mut buf, record)
            .map_err(|e| JournalError::Decode { line: 0, source: e })?;
        buf.push(b'\n');
    }
    Ok(buf)
}

/// Checks that sequence numbers run 1, 2, 3, ... without gaps.
pub fn check_sequence(records: &[JournalRecord]) -> Result<(), JournalError> {
    for (i, record) in records.iter().enumerate() {
        let expected = i as u64 + 1;
        if record.seq != expected {
            return Err(JournalError::Sequence {
                line: i + 1,
                expected,
                found: record.seq,
            });
        }
    }
    Ok(())
}

/// Reads every record of a JSON-lines file. Missing files read as empty.
///
/// A final line without a newline that fails to decode is a torn append and
/// is reported through the second tuple element instead of failing.
pub fn read_records(path: &Path) -> Result<(Vec<JournalRecord>, Option<u64>), JournalError> {
    let file = match File::open(path) {
        Ok(f) => f,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok((Vec::new(), None)),
        Err(e) => return Err(e.into()),
    };
    let mut reader = BufReader::new(file);
    let mut records = Vec::new();
    let mut offset = 0u64;
    let mut line = String::new();
    let mut number = 0;
    loop {
        line.clear();
        let n = reader.read_line(&mut line)?;
        if n == 0 {
            return Ok((records, None));
        }
        number += 1;
        let complete = line.ends_with('\n');
        if !line.trim().is_empty() {
            match serde_json::from_str(line.trim_end()) {
                Ok(record) => records.push(record),
                Err(_) if !complete => return Ok((records, Some(offset))),
                Err(source) => {
                    return Err(JournalError::Decode {
                        line: number,
                        source,
                    })
                }
            }
        }
        offset += n as u64;
    }
}

/// Writes records as JSON lines, replacing the file.
pub fn write_records(path: &Path, records: &[JournalRecord]) -> Result<(), JournalError> {
    let buf = encode(records)?;
    let mut file = File::create(path)?;
    file.write_all(&buf)?;
    file.sync_data()?;
    Ok(())
}

#[derive(Debug)]
pub struct FileJournal {
    path: PathBuf,
}

impl FileJournal {
    pub fn new(path: impl Into<PathBuf>) -> Self {
        FileJournal { path: path.into() }
    }

    pub fn path(&self) -> &Path {
        &self.path
    }
}

impl Journal for FileJournal {
    fn load(&mut self) -> Result<Vec<JournalRecord>, JournalError> {
        let (records, torn) = read_records(&self.path)?;
        if let Some(len) = torn {
            log::warn!(
                "truncating torn record at byte {len} of {}",
                self.path.display()
            );
            OpenOptions::new()
                .write(true)
                .open(&self.path)?
                .set_len(len)?;
        }
        check_sequence(&records)?;
        Ok(records)
    }

    fn append(&mut self, records: &[JournalRecord]) -> Result<(), JournalError> {
        if records.is_empty() {
            return Ok(());
        }
        let buf = encode(records)?;
        let mut file = OpenOptions::new()
            .create(true)
            .read(true)
            .append(true)
            .open(&self.path)?;
        let before = file.seek(SeekFrom::End(0))?;
        let written = file.write_all(&buf).and_then(|_| file.sync_data());
        if let Err(e) = written {
            // Roll back whatever part of the batch reached the file.
            let _ = file.set_len(before);
            return Err(e.into());
        }
        Ok(())
    }
}

/// In-memory journal with optional fault injection for tests.
#[derive(Debug, Default, Clone)]
pub struct MemoryJournal {
    pub records: Vec<JournalRecord>,
    /// Reject appends once this many records are stored.
    pub capacity: Option<usize>,
}

impl Journal for MemoryJournal {
    fn load(&mut self) -> Result<Vec<JournalRecord>, JournalError> {
        check_sequence(&self.records)?;
        Ok(self.records.clone())
    }

    fn append(&mut self, records: &[JournalRecord]) -> Result<(), JournalError> {
        if let Some(cap) = self.capacity {
            if self.records.len() + records.len() > cap {
                return Err(JournalError::Rejected("capacity reached".into()));
            }
        }
        self.records.extend_from_slice(records);
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{MessageKind, ShoutId, Source};

    fn record(seq: u64) -> JournalRecord {
        JournalRecord {
            seq,
            written: Timestamp::from_secs(1_700_000_000 + seq as i64),
            payload: Payload::Shout(Shout {
                id: ShoutId(seq),
                nick: "bob".into(),
                message: format!("line {seq}\twith tab"),
                created: Timestamp::from_secs(1_700_000_000 + seq as i64),
                client_created: None,
                source: Source::Http,
                kind: MessageKind::Shout,
                tags: Vec::new(),
                session_ref: None,
                deviation: None,
            }),
        }
    }

    #[test]
    fn file_journal_appends_and_loads() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("j.jsonl");
        let mut journal = FileJournal::new(&path);
        assert!(journal.load().unwrap().is_empty());
        journal.append(&[record(1), record(2)]).unwrap();
        journal.append(&[record(3)]).unwrap();
        let loaded = FileJournal::new(&path).load().unwrap();
        assert_eq!(loaded, vec![record(1), record(2), record(3)]);
        let text = std::fs::read_to_string(&path).unwrap();
        assert_eq!(text.lines().count(), 3);
    }

    #[test]
    fn torn_tail_is_truncated() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("j.jsonl");
        let mut journal = FileJournal::new(&path);
        journal.append(&[record(1)]).unwrap();
        let mut f = OpenOptions::new().append(true).open(&path).unwrap();
        f.write_all(b"{\"seq\":2,\"writ").unwrap();
        drop(f);
        assert_eq!(journal.load().unwrap(), vec![record(1)]);
        journal.append(&[record(2)]).unwrap();
        assert_eq!(journal.load().unwrap().len(), 2);
    }

    #[test]
    fn gaps_and_garbage_are_errors() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("j.jsonl");
        write_records(&path, &[record(1), record(3)]).unwrap();
        assert!(matches!(
            FileJournal::new(&path).load(),
            Err(JournalError::Sequence {
                expected: 2,
                found: 3,
                ..
            })
        ));
        std::fs::write(&path, "not json\n").unwrap();
        assert!(matches!(
            FileJournal::new(&path).load(),
            Err(JournalError::Decode { line: 1, .. })
        ));
    }

    #[test]
    fn memory_journal_rejects_past_capacity() {
        let mut j = MemoryJournal {
            capacity: Some(1),
            ..Default::default()
        };
        j.append(&[record(1)]).unwrap();
        assert!(j.append(&[record(2)]).is_err());
        assert_eq!(j.records.len(), 1);
    }
}
