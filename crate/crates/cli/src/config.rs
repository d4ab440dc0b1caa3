//! Merging a JSON config file into argv.

use std::ffi::OsString;

use serde_json::Value;

use crate::CliError;

/// Value of `--config` in `args`, if any.
fn config_path(args: &[OsString]) -> Option<OsString> {
    let mut it = args.iter();
    while let Some(a) = it.next() {
        let s = a.to_string_lossy();
        if s == "--config" {
            return it.next().cloned();
        }
        if let Some(p) = s.strip_prefix("--config=") {
            return Some(p.into());
        }
    }
    None
}

fn has_flag(args: &[OsString], flag: &str) -> bool {
    args.iter().any(|a| {
        let s = a.to_string_lossy();
        s == flag || s.starts_with(&format!("{flag}="))
    })
}

fn scalar(v: &Value) -> Option<String> {
    match v {
        Value::String(s) => Some(s.clone()),
        Value::Number(n) => Some(n.to_string()),
        _ => None,
    }
}

/// Appends every config entry whose flag is absent from `args`. Keys may use
/// `_` or `-`; `true` adds a bare switch, `false` and `null` add nothing, and
/// arrays become comma lists.
pub fn merge(args: Vec<OsString>) -> Result<Vec<OsString>, CliError> {
    let Some(path) = config_path(&args) else {
        return Ok(args);
    };
    let text = std::fs::read_to_string(&path)
        .map_err(|e| CliError::usage(format!("cannot read config {}: {e}", path.to_string_lossy())))?;
    let value: Value =
        serde_json::from_str(&text).map_err(|e| CliError::usage(format!("config is not valid JSON: {e}")))?;
    let Value::Object(map) = value else {
        return Err(CliError::usage("config must be a JSON object"));
    };
    let mut out = args;
    let mut extra = Vec::new();
    for (key, v) in map {
        let flag = format!("--{}", key.replace('_', "-"));
        if flag == "--config" || has_flag(&out, &flag) {
            continue;
        }
        let bad = || CliError::usage(format!("config value for {key:?} must be a string, number, bool or list"));
        match &v {
            Value::Bool(true) => extra.push(flag.into()),
            Value::Bool(false) | Value::Null => {}
            Value::Array(items) => {
                let parts = items.iter().map(scalar).collect::<Option<Vec<_>>>().ok_or_else(bad)?;
                extra.push(format!("{flag}={}", parts.join(",")).into());
            }
            other => extra.push(format!("{flag}={}", scalar(other).ok_or_else(bad)?).into()),
        }
    }
    out.extend(extra);
    Ok(out)
}
