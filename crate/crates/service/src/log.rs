//! Timestamped interaction log: kept in memory and optionally appended to a
//! JSON-lines file.

use std::fs::{File, OpenOptions};
use std::io::Write;
use std::path::Path;
use std::sync::Mutex;
use std::time::{SystemTime, UNIX_EPOCH};

use scenesuggest_core::eval::LogEvent;

#[derive(Debug, Default)]
pub struct EventLog {
    inner: Mutex<Inner>,
}

#[derive(Debug, Default)]
struct Inner {
    events: Vec<LogEvent>,
    file: Option<File>,
}

impl EventLog {
    pub fn in_memory() -> Self {
        Self::default()
    }

    /// Appends to `path`, creating it if needed.
    pub fn with_file(path: &Path) -> std::io::Result<Self> {
        let file = OpenOptions::new().create(true).append(true).open(path)?;
        Ok(EventLog { inner: Mutex::new(Inner { events: Vec::new(), file: Some(file) }) })
    }

    pub fn record(&self, session_id: &str, op: &str, payload: serde_json::Value) {
        let ts = SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map(|d| d.as_millis() as u64)
            .unwrap_or(0);
        let event = LogEvent { ts, session_id: session_id.to_string(), op: op.to_string(), payload };
        let mut inner = self.inner.lock().expect("log lock");
        if let Some(file) = inner.file.as_mut() {
            let line = serde_json::to_string(&event).expect("log event serializes");
            if let Err(e) = writeln!(file, "{line}").and_then(|_| file.flush()) {
                log::error!("interaction log write failed: {e}");
            }
        }
        inner.events.push(event);
    }

    /// Snapshot of every event recorded so far.
    pub fn events(&self) -> Vec<LogEvent> {
        self.inner.lock().expect("log lock").events.clone()
    }
}
