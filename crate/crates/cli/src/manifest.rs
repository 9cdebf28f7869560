//! The `<artifact>.manifest.json` written beside every data file.

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::error::{CliError, CliResult};

pub const SCHEMA: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub schema: u32,
    pub tool: String,
    pub tool_version: String,
    pub solver_version: String,
    pub command: String,
    /// Every resolved flag, defaults included; enough to re-run.
    pub inputs: Map<String, Value>,
    pub artifacts: Vec<PathBuf>,
    /// Negative tilt, solved at `|gamma|` and mapped back by `phi -> -phi`.
    pub reflected: bool,
    pub derived: Map<String, Value>,
    /// Set on results that are measurements rather than proven properties.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub evidence_grade: Option<bool>,
    /// `ok`, or the failure that ended the run.
    pub status: String,
    pub elapsed_seconds: f64,
}

pub fn manifest_path(artifact: &Path) -> PathBuf {
    let mut s = artifact.as_os_str().to_owned();
    s.push(".manifest.json");
    PathBuf::from(s)
}

pub fn read(path: &Path) -> CliResult<Manifest> {
    let text = std::fs::read_to_string(path).map_err(CliError::io(path))?;
    let m: Manifest = serde_json::from_str(&text).map_err(|e| CliError::Parse {
        path: path.to_path_buf(),
        message: e.to_string(),
    })?;
    if m.schema != SCHEMA {
        return Err(CliError::Parse {
            path: path.to_path_buf(),
            message: format!("manifest schema {} is not {SCHEMA}", m.schema),
        });
    }
    Ok(m)
}

/// Flags as a JSON object. Unset options are dropped and `out` is the
/// path actually written.
pub fn inputs_of(args: &impl Serialize, out: &Path) -> Map<String, Value> {
    let Value::Object(mut map) = serde_json::to_value(args).expect("serializable") else {
        unreachable!("argument structs serialize to objects")
    };
    map.retain(|_, v| !v.is_null());
    map.insert(
        "out".to_string(),
        Value::from(out.to_string_lossy().into_owned()),
    );
    map
}

/// Command line that reproduces a manifest, with `out` optionally moved.
pub fn replay_args(m: &Manifest, out: Option<&Path>) -> CliResult<Vec<OsString>> {
    let mut args: Vec<OsString> = vec!["sgwave".into(), m.command.clone().into()];
    for (key, value) in &m.inputs {
        let flag = format!("--{}", key.replace('_', "-"));
        let text = match (key.as_str(), value) {
            ("out", _) if out.is_some() => out.expect("checked").to_string_lossy().into_owned(),
            (_, Value::Bool(true)) => {
                args.push(flag.into());
                continue;
            }
            (_, Value::Bool(false)) => continue,
            (_, Value::String(s)) => s.clone(),
            (_, Value::Number(n)) => n.to_string(),
            (_, Value::Array(items)) => items
                .iter()
                .map(|v| match v {
                    Value::String(s) => s.clone(),
                    other => other.to_string(),
                })
                .collect::<Vec<_>>()
                .join(","),
            (_, other) => {
                return Err(CliError::Usage(format!(
                    "manifest input `{key}` has unsupported value {other}"
                )))
            }
        };
        args.push(format!("{flag}={text}").into());
    }
    Ok(args)
}
