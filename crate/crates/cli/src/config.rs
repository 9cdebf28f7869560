//! Flat `section.key = value` config files, merged under the command line.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::path::{Path, PathBuf};

use crate::error::{CliError, CliResult};

/// Every key a config file may carry, as `(section, flag)`.
pub const KEYS: &[(&str, &str)] = &[
    ("model", "gamma"),
    ("model", "alpha"),
    ("equilibria", "k"),
    ("shoot", "tol"),
    ("shoot", "delta"),
    ("shoot", "horizon"),
    ("shoot", "spacing"),
    ("shoot", "half-width"),
    ("array", "gp0"),
    ("array", "period"),
    ("array", "periods"),
    ("array", "threshold"),
    ("pair", "samples"),
    ("periods", "energy"),
    ("pde", "wave"),
    ("pde", "dx"),
    ("pde", "dt"),
    ("pde", "t-end"),
    ("pde", "record-every"),
    ("pde", "domain"),
    ("pde", "left"),
    ("pde", "right"),
    ("pde", "periods"),
    ("pde", "center"),
    ("pde", "velocity"),
    ("pde", "discard"),
    ("sweep", "gammas"),
    ("output", "out"),
    ("output", "format"),
];

/// Parsed config: flag name to raw value, in file order of first sight.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Config {
    pub values: BTreeMap<String, String>,
}

impl Config {
    pub fn parse(text: &str, path: &Path) -> CliResult<Config> {
        let err = |line: usize, message: String| CliError::Config {
            path: path.to_path_buf(),
            line,
            message,
        };
        let mut values = BTreeMap::new();
        let mut seen = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let body = raw.split('#').next().unwrap_or("").trim();
            if body.is_empty() {
                continue;
            }
            let (key, value) = body.split_once('=').ok_or_else(|| {
                err(
                    line,
                    format!("expected `section.key = value`, got `{body}`"),
                )
            })?;
            let (key, value) = (key.trim(), value.trim());
            let (section, name) = key
                .split_once('.')
                .ok_or_else(|| err(line, format!("key `{key}` needs a section prefix")))?;
            let name = name.replace('_', "-");
            if !KEYS.contains(&(section, name.as_str())) {
                return Err(err(line, format!("unknown key `{key}`")));
            }
            if value.is_empty() {
                return Err(err(line, format!("key `{key}` has no value")));
            }
            if let Some(first) = seen.insert(name.clone(), line) {
                return Err(err(line, format!("`{name}` already set on line {first}")));
            }
            values.insert(name, value.to_string());
        }
        Ok(Config { values })
    }

    pub fn load(path: &Path) -> CliResult<Config> {
        let text = std::fs::read_to_string(path).map_err(CliError::io(path))?;
        Config::parse(&text, path)
    }
}

/// The `--config` path, if any, from raw arguments.
pub fn config_path(args: &[OsString]) -> CliResult<Option<PathBuf>> {
    let mut found = None;
    let mut it = args.iter().skip(1);
    while let Some(a) = it.next() {
        let s = a.to_string_lossy();
        if s == "--" {
            break;
        }
        if s == "--config" {
            let v = it
                .next()
                .ok_or_else(|| CliError::Usage("--config needs a file".to_string()))?;
            found = Some(PathBuf::from(v));
        } else if let Some(v) = s.strip_prefix("--config=") {
            found = Some(PathBuf::from(v));
        }
    }
    Ok(found)
}

/// Position of the subcommand: the first token that is neither a flag nor
/// the value of `--config`.
pub fn subcommand_index(args: &[OsString]) -> Option<usize> {
    let mut i = 1;
    while i < args.len() {
        let s = args[i].to_string_lossy();
        if s == "--config" {
            i += 2;
            continue;
        }
        if !s.starts_with('-') {
            return Some(i);
        }
        i += 1;
    }
    None
}

/// Insert config values as `--flag=value` right after the subcommand, so
/// that flags given later on the command line override them. Keys the
/// subcommand does not take are left out.
pub fn inject(args: &[OsString], config: &Config, accepts: impl Fn(&str) -> bool) -> Vec<OsString> {
    let Some(at) = subcommand_index(args) else {
        return args.to_vec();
    };
    let mut out = args[..=at].to_vec();
    for (flag, value) in &config.values {
        if accepts(flag) {
            out.push(format!("--{flag}={value}").into());
        }
    }
    out.extend_from_slice(&args[at + 1..]);
    out
}
