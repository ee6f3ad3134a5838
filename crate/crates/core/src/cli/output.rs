//! JSONL records and their manifests.
//!
//! Each line is one JSON object: the result's own fields, a `record_type`
//! tag, and the run manifest (`subcommand`, `config_hash`, `seed`,
//! `tool_version`, `started`, `finished`). Keys are sorted. The two
//! timestamps are the only fields that vary between identical runs, and
//! [`reproducibility_digest`] leaves them out.

use std::io::Write;
use std::path::Path;
use std::time::{SystemTime, UNIX_EPOCH};

use serde::Serialize;
use serde_json::{Map, Value};
use sha2::{Digest, Sha256};

use super::CliError;

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");
pub const TIMESTAMP_KEYS: [&str; 2] = ["started", "finished"];

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunManifest {
    pub subcommand: String,
    pub config_hash: String,
    pub seed: Option<u64>,
    pub tool_version: &'static str,
    /// Unix milliseconds.
    pub started: u128,
    pub finished: u128,
}

pub fn now_ms() -> u128 {
    SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_millis())
}

/// SHA-256 of the canonical JSON of the subcommand and its resolved inputs.
pub fn config_hash(subcommand: &str, inputs: &Map<String, Value>) -> String {
    let mut canonical = Map::new();
    canonical.insert("subcommand".into(), Value::from(subcommand));
    canonical.insert("inputs".into(), Value::Object(inputs.clone()));
    let bytes = serde_json::to_vec(&Value::Object(canonical)).expect("JSON values serialize");
    hex::encode(Sha256::digest(&bytes))
}

pub fn envelope<T: Serialize>(record_type: &str, record: &T, manifest: &RunManifest) -> Result<Value, CliError> {
    let mut obj = match serde_json::to_value(record).map_err(|e| CliError::Io(e.to_string()))? {
        Value::Object(map) => map,
        other => {
            let mut map = Map::new();
            map.insert("value".into(), other);
            map
        }
    };
    obj.insert("record_type".into(), Value::from(record_type));
    if let Value::Object(m) = serde_json::to_value(manifest).map_err(|e| CliError::Io(e.to_string()))? {
        for (k, v) in m {
            obj.entry(k).or_insert(v);
        }
    }
    Ok(Value::Object(obj))
}

pub fn write_jsonl(path: &Path, lines: &[Value]) -> Result<(), CliError> {
    let mut file = std::fs::File::create(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    for line in lines {
        writeln!(file, "{line}").map_err(|e| CliError::Io(e.to_string()))?;
    }
    Ok(())
}

/// SHA-256 over the JSONL text with the timestamp fields removed.
pub fn reproducibility_digest(jsonl: &str) -> Result<String, CliError> {
    let mut hasher = Sha256::new();
    for line in jsonl.lines().filter(|l| !l.trim().is_empty()) {
        let mut value: Value =
            serde_json::from_str(line).map_err(|e| CliError::Io(format!("bad JSONL line: {e}")))?;
        if let Value::Object(map) = &mut value {
            for key in TIMESTAMP_KEYS {
                map.remove(key);
            }
        }
        hasher.update(value.to_string().as_bytes());
        hasher.update(b"\n");
    }
    Ok(hex::encode(hasher.finalize()))
}
