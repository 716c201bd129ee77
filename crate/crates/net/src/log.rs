use std::fs::{File, OpenOptions};
use std::io::{self, Write};
use std::path::Path;
use std::sync::Mutex;

use serde::Serialize;

/// Append-only JSON-lines sink for completed games and rounds.
pub struct ResultsLog {
    out: Mutex<Box<dyn Write + Send>>,
}

impl ResultsLog {
    pub fn open(path: &Path) -> io::Result<ResultsLog> {
        let file: File = OpenOptions::new().create(true).append(true).open(path)?;
        Ok(ResultsLog::from_writer(Box::new(file)))
    }

    pub fn from_writer(out: Box<dyn Write + Send>) -> ResultsLog {
        ResultsLog { out: Mutex::new(out) }
    }

    pub fn append<T: Serialize>(&self, record: &T) -> io::Result<()> {
        let mut line = serde_json::to_vec(record).map_err(io::Error::other)?;
        line.push(b'\n');
        let mut out = self.out.lock().unwrap();
        out.write_all(&line)?;
        out.flush()
    }
}
