//! Append-only JSONL event log. Session state is never stored, only the
//! events it is rebuilt from.

use std::fs::{File, OpenOptions};
use std::io::Write;
use std::path::Path;
use std::sync::Mutex;

use fairq_core::Value;
use fairq_protocols::{ProtocolId, ProtocolOptions};
use serde::{Deserialize, Serialize};

use crate::GatewayError;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "event", rename_all = "snake_case")]
pub enum Event {
    Created {
        session: String,
        n: usize,
        m: usize,
        labels: Vec<String>,
        protocol: ProtocolId,
        options: ProtocolOptions,
    },
    Answered {
        session: String,
        agent: usize,
        value: Value,
    },
}

impl Event {
    pub fn session(&self) -> &str {
        match self {
            Event::Created { session, .. } | Event::Answered { session, .. } => session,
        }
    }
}

/// Where events go. Without a file, events live only as long as the process.
pub struct EventStore {
    file: Option<Mutex<File>>,
}

impl EventStore {
    pub fn memory() -> Self {
        EventStore { file: None }
    }

    /// Opens (or creates) the log at `path` and returns the events already in it.
    /// A final line without a newline is a torn write and is dropped.
    pub fn open(path: &Path) -> Result<(Self, Vec<Event>), GatewayError> {
        let mut events = Vec::new();
        if path.exists() {
            let raw = std::fs::read(path).map_err(store_err)?;
            let complete = raw.iter().rposition(|&b| b == b'\n').map_or(0, |i| i + 1);
            for (i, line) in raw[..complete].split(|&b| b == b'\n').enumerate() {
                if line.iter().all(u8::is_ascii_whitespace) {
                    continue;
                }
                let e = serde_json::from_slice(line)
                    .map_err(|e| GatewayError::Store(format!("{}: line {}: {e}", path.display(), i + 1)))?;
                events.push(e);
            }
            if complete < raw.len() {
                truncate_to(path, complete)?;
            }
        }
        let file = OpenOptions::new().create(true).append(true).open(path).map_err(store_err)?;
        Ok((EventStore { file: Some(Mutex::new(file)) }, events))
    }

    pub fn append(&self, event: &Event) -> Result<(), GatewayError> {
        let Some(file) = &self.file else { return Ok(()) };
        let mut line = serde_json::to_vec(event).map_err(|e| GatewayError::Store(e.to_string()))?;
        line.push(b'\n');
        let mut f = file.lock().map_err(|_| GatewayError::Store("store lock poisoned".into()))?;
        f.write_all(&line).map_err(store_err)?;
        f.flush().map_err(store_err)
    }
}

fn truncate_to(path: &Path, len: usize) -> Result<(), GatewayError> {
    let f = OpenOptions::new().write(true).open(path).map_err(store_err)?;
    f.set_len(len as u64).map_err(store_err)
}

fn store_err(e: std::io::Error) -> GatewayError {
    GatewayError::Store(e.to_string())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn events_round_trip_through_a_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("events.jsonl");
        let created = Event::Created {
            session: "s".into(),
            n: 2,
            m: 2,
            labels: vec!["a".into(), "b".into()],
            protocol: ProtocolId::TwoAgentEf1,
            options: ProtocolOptions::default(),
        };
        let answered = Event::Answered { session: "s".into(), agent: 0, value: Value::new(1, 2).unwrap() };
        {
            let (store, old) = EventStore::open(&path).unwrap();
            assert!(old.is_empty());
            store.append(&created).unwrap();
            store.append(&answered).unwrap();
        }
        let (_, events) = EventStore::open(&path).unwrap();
        assert_eq!(events, vec![created, answered]);
    }

    #[test]
    fn torn_tail_is_dropped() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("events.jsonl");
        std::fs::write(&path, "{\"event\":\"answered\",\"session\":\"s\",\"agent\":0,\"value\":\"1\"}\n{\"event\":\"ans").unwrap();
        let (store, events) = EventStore::open(&path).unwrap();
        assert_eq!(events.len(), 1);
        store.append(&events[0]).unwrap();
        let (_, again) = EventStore::open(&path).unwrap();
        assert_eq!(again.len(), 2);
    }

    #[test]
    fn corrupt_middle_line_is_an_error() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("events.jsonl");
        std::fs::write(&path, "nonsense\n").unwrap();
        assert!(matches!(EventStore::open(&path), Err(GatewayError::Store(_))));
    }
}
