//! JSON report envelopes and atomic file output.

use std::path::Path;

use serde_json::{json, Value};

use crate::error::Result;

pub const SCHEMA_VERSION: u32 = 1;

/// Writes `bytes` to a temporary sibling and renames it over `path`.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    std::fs::create_dir_all(dir)?;
    let name = path.file_name().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    let tmp = dir.join(format!(".{name}.{}.tmp", std::process::id()));
    std::fs::write(&tmp, bytes)?;
    std::fs::rename(&tmp, path)?;
    Ok(())
}

/// Wraps a payload with the schema version, command name, seed and timestamp.
pub fn envelope(command: &str, seed: u64, params: Value, results: Value, timestamp: Option<String>) -> Value {
    let mut v = json!({
        "schema_version": SCHEMA_VERSION,
        "command": command,
        "seed": seed,
        "parameters": params,
        "results": results,
    });
    if let Some(ts) = timestamp {
        v["timestamp"] = Value::String(ts);
    }
    v
}

/// Removes the `timestamp` key so two reports can be compared byte for byte.
pub fn strip_timestamp(mut v: Value) -> Value {
    if let Some(map) = v.as_object_mut() {
        map.remove("timestamp");
    }
    v
}

pub fn to_pretty(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("serializable");
    s.push('\n');
    s
}
