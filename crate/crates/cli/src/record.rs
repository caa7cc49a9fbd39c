//! Run records: one JSON object per line, appended to the run log under an
//! exclusive advisory lock.

use std::collections::BTreeMap;
use std::fs::OpenOptions;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::CliError;

pub const RUN_LOG_NAME: &str = "sparselab-runs.jsonl";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OutputDigest {
    pub path: PathBuf,
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunRecord {
    pub schema_version: u32,
    pub version: String,
    pub command: String,
    pub config: BTreeMap<String, String>,
    pub started_unix_ms: u128,
    pub finished_unix_ms: u128,
    pub outputs: Vec<OutputDigest>,
    /// `ok` or `assertion_failed`.
    pub status: String,
}

pub fn now_unix_ms() -> u128 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_millis())
        .unwrap_or(0)
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

impl RunRecord {
    /// Recompute every output digest; false if a file changed or vanished.
    pub fn verify(&self) -> bool {
        self.outputs.iter().all(|o| {
            std::fs::read(&o.path)
                .map(|bytes| sha256_hex(&bytes) == o.sha256)
                .unwrap_or(false)
        })
    }
}

pub fn append_record(log: &Path, record: &RunRecord) -> Result<(), CliError> {
    let line = serde_json::to_string(record).map_err(|e| CliError::Io(e.into()))?;
    let mut file = OpenOptions::new().create(true).append(true).open(log)?;
    file.lock()?;
    let res = writeln!(file, "{line}").and_then(|_| file.flush());
    file.unlock()?;
    Ok(res?)
}

pub fn read_log(log: &Path) -> Result<Vec<RunRecord>, CliError> {
    std::fs::read_to_string(log)?
        .lines()
        .filter(|l| !l.trim().is_empty())
        .map(|l| serde_json::from_str(l).map_err(|e| CliError::Io(e.into())))
        .collect()
}
