//! Run metadata and file output.

use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::{json, Value};

use crate::args::Format;
use crate::CliError;

pub struct Context {
    pub jobs: usize,
    pub config_file: Option<PathBuf>,
}

impl Context {
    /// Fully resolved configuration of a run, echoed into every output.
    pub fn meta<T: Serialize>(&self, command: &str, args: &T) -> Value {
        json!({
            "tool": "compass",
            "version": compass_core::VERSION,
            "command": command,
            "args": args,
            "jobs": self.jobs,
            "config_file": self.config_file,
        })
    }
}

/// JSON number, or a string for non-finite values.
pub fn num(x: f64) -> Value {
    if x.is_finite() {
        json!(x)
    } else {
        json!(x.to_string())
    }
}

pub fn sidecar(path: &Path) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".meta.json");
    PathBuf::from(s)
}

fn write(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    std::fs::write(path, bytes).map_err(|e| CliError::failed("io", format!("cannot write {}: {e}", path.display())))
}

/// Writes `bytes` to `path` and the metadata to `<path>.meta.json`.
pub fn write_with_meta(path: &Path, bytes: &[u8], meta: &Value) -> Result<(), CliError> {
    write(path, bytes)?;
    let mut m = serde_json::to_string_pretty(meta).expect("metadata serializes");
    m.push('\n');
    write(&sidecar(path), m.as_bytes())
}

pub fn read(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| CliError::failed("io", format!("cannot read {}: {e}", path.display())))
}

pub fn format_for(path: &Path, explicit: Option<Format>) -> Format {
    explicit.unwrap_or(match path.extension().and_then(|e| e.to_str()) {
        Some(e) if e.eq_ignore_ascii_case("json") => Format::Json,
        _ => Format::Csv,
    })
}

pub fn print_json(v: &Value) {
    println!("{}", serde_json::to_string_pretty(v).expect("output serializes"));
}
