//! CSV and JSON artifacts. Floats are written with 17 significant digits,
//! so every value reads back bit for bit.

use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};
use sgwave::profile::{ProfilePoint, Tail};
use sgwave::{ProfileKind, WaveProfile};

use crate::error::{CliError, CliResult};

/// Header sentinel for a speed the equation leaves free.
pub const FREE_SPEED: &str = "free parameter";

pub fn num(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn json_num(x: f64) -> Value {
    serde_json::Number::from_f64(x).map_or(Value::Null, Value::Number)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

impl Format {
    pub fn ext(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
        }
    }
}

pub fn write(path: &Path, text: &str) -> CliResult<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(CliError::io(dir))?;
    }
    std::fs::write(path, text).map_err(CliError::io(path))
}

pub fn pretty(value: &impl Serialize) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("serializable");
    s.push('\n');
    s
}

/// A table cell; numbers keep full precision in both formats.
#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Int(i64),
    Text(String),
    Empty,
}

impl Cell {
    fn csv(&self) -> String {
        match self {
            Cell::Num(x) => num(*x),
            Cell::Int(k) => k.to_string(),
            // keep the row shape intact
            Cell::Text(s) => s.replace([',', '\n'], ";"),
            Cell::Empty => String::new(),
        }
    }

    fn json(&self) -> Value {
        match self {
            Cell::Num(x) => json_num(*x),
            Cell::Int(k) => Value::from(*k),
            Cell::Text(s) => Value::from(s.as_str()),
            Cell::Empty => Value::Null,
        }
    }
}

/// Comment header, column names and rows.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Table {
    pub meta: Vec<(String, Cell)>,
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Csv => {
                let mut s = String::new();
                for (k, v) in &self.meta {
                    s.push_str(&format!("# {k}: {}\n", v.csv()));
                }
                s.push_str(&self.columns.join(","));
                s.push('\n');
                for row in &self.rows {
                    let cells: Vec<String> = row.iter().map(Cell::csv).collect();
                    s.push_str(&cells.join(","));
                    s.push('\n');
                }
                s
            }
            Format::Json => {
                let mut doc = Map::new();
                for (k, v) in &self.meta {
                    doc.insert(k.clone(), v.json());
                }
                let rows: Vec<Value> = self
                    .rows
                    .iter()
                    .map(|r| {
                        let m: Map<String, Value> = self
                            .columns
                            .iter()
                            .zip(r)
                            .map(|(c, v)| (c.to_string(), v.json()))
                            .collect();
                        Value::Object(m)
                    })
                    .collect();
                doc.insert("rows".to_string(), Value::Array(rows));
                pretty(&Value::Object(doc))
            }
        }
    }
}

/// `v`, or the free-parameter sentinel.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Speed {
    Value(f64),
    Free(FreeTag),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum FreeTag {
    #[serde(rename = "free parameter")]
    Free,
}

impl Speed {
    fn of(v: Option<f64>) -> Self {
        v.map_or(Speed::Free(FreeTag::Free), Speed::Value)
    }

    fn get(self) -> Option<f64> {
        match self {
            Speed::Value(v) => Some(v),
            Speed::Free(_) => None,
        }
    }
}

/// `periods * Xi * sqrt(1 - v^2)`: the ring a periodic profile closes on.
pub fn circumference(profile: &WaveProfile, periods: u32) -> Option<f64> {
    let (xi, v) = (profile.period?, profile.velocity?);
    Some(periods as f64 * xi * (1.0 - v * v).sqrt())
}

/// JSON mirror of the profile CSV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProfileDocument {
    pub kind: ProfileKind,
    pub gamma: f64,
    pub alpha: f64,
    pub mu: f64,
    pub v: Speed,
    pub period: Option<f64>,
    pub n: usize,
    pub winding: i64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub circumference: Option<f64>,
    pub left_tail: Option<Tail>,
    pub right_tail: Option<Tail>,
    pub xi: Vec<f64>,
    pub g: Vec<f64>,
    pub gp: Vec<f64>,
}

impl ProfileDocument {
    pub fn new(profile: &WaveProfile, periods: u32) -> Self {
        Self {
            kind: profile.kind,
            gamma: profile.gamma,
            alpha: profile.alpha,
            mu: profile.mu,
            v: Speed::of(profile.velocity),
            period: profile.period,
            n: profile.points.len(),
            winding: profile.winding,
            circumference: circumference(profile, periods),
            left_tail: profile.left_tail,
            right_tail: profile.right_tail,
            xi: profile.points.iter().map(|p| p.xi).collect(),
            g: profile.points.iter().map(|p| p.g).collect(),
            gp: profile.points.iter().map(|p| p.gp).collect(),
        }
    }

    pub fn into_profile(self) -> Result<WaveProfile, String> {
        if self.xi.len() != self.n || self.g.len() != self.n || self.gp.len() != self.n {
            return Err(format!("expected {} samples in every column", self.n));
        }
        let points = (0..self.n)
            .map(|i| ProfilePoint {
                xi: self.xi[i],
                g: self.g[i],
                gp: self.gp[i],
            })
            .collect();
        Ok(WaveProfile {
            kind: self.kind,
            gamma: self.gamma,
            alpha: self.alpha,
            mu: self.mu,
            velocity: self.v.get(),
            winding: self.winding,
            period: self.period,
            left_tail: self.left_tail,
            right_tail: self.right_tail,
            points,
        })
    }
}

fn tail_text(t: Option<Tail>) -> String {
    t.map_or("none".to_string(), |t| {
        format!("{} {}", num(t.limit), num(t.rate))
    })
}

pub fn profile_csv(profile: &WaveProfile, periods: u32) -> String {
    let mut s = String::new();
    let mut line = |k: &str, v: String| s.push_str(&format!("# {k}: {v}\n"));
    line("kind", profile.kind.name().to_string());
    line("gamma", num(profile.gamma));
    line("alpha", num(profile.alpha));
    line("mu", num(profile.mu));
    line("v", profile.velocity.map_or(FREE_SPEED.to_string(), num));
    line("period", profile.period.map_or("none".to_string(), num));
    line("n", profile.points.len().to_string());
    line("winding", profile.winding.to_string());
    if let Some(c) = circumference(profile, periods) {
        line("circumference", num(c));
        line("periods", periods.to_string());
    }
    line("left_tail", tail_text(profile.left_tail));
    line("right_tail", tail_text(profile.right_tail));
    s.push_str("xi,g,gp\n");
    for p in &profile.points {
        s.push_str(&format!("{},{},{}\n", num(p.xi), num(p.g), num(p.gp)));
    }
    s
}

pub fn profile_json(profile: &WaveProfile, periods: u32) -> String {
    pretty(&ProfileDocument::new(profile, periods))
}

pub fn render_profile(profile: &WaveProfile, periods: u32, format: Format) -> String {
    match format {
        Format::Csv => profile_csv(profile, periods),
        Format::Json => profile_json(profile, periods),
    }
}

fn float(s: &str) -> Result<f64, String> {
    s.trim().parse().map_err(|_| format!("not a number: `{s}`"))
}

fn optional(s: &str) -> Result<Option<f64>, String> {
    if s == "none" {
        Ok(None)
    } else {
        float(s).map(Some)
    }
}

fn tail(s: &str) -> Result<Option<Tail>, String> {
    if s == "none" {
        return Ok(None);
    }
    let (limit, rate) = s.split_once(' ').ok_or_else(|| format!("bad tail `{s}`"))?;
    Ok(Some(Tail {
        limit: float(limit)?,
        rate: float(rate)?,
    }))
}

/// Inverse of [`profile_csv`].
pub fn parse_profile_csv(text: &str) -> Result<WaveProfile, String> {
    let mut meta = std::collections::BTreeMap::new();
    let mut lines = text.lines();
    let mut columns = None;
    for line in lines.by_ref() {
        if let Some(h) = line.strip_prefix("# ") {
            let (k, v) = h
                .split_once(": ")
                .ok_or_else(|| format!("bad header `{line}`"))?;
            meta.insert(k.to_string(), v.to_string());
        } else {
            columns = Some(line);
            break;
        }
    }
    if columns != Some("xi,g,gp") {
        return Err("expected columns xi,g,gp".to_string());
    }
    let get = |k: &str| {
        meta.get(k)
            .map(String::as_str)
            .ok_or_else(|| format!("missing header `{k}`"))
    };
    let kind = ProfileKind::parse(get("kind")?).ok_or("unknown kind")?;
    let velocity = match get("v")? {
        FREE_SPEED => None,
        v => Some(float(v)?),
    };
    let n: usize = get("n")?.parse().map_err(|_| "bad n")?;
    let points = lines
        .map(|l| {
            let f: Vec<&str> = l.split(',').collect();
            match f[..] {
                [xi, g, gp] => Ok(ProfilePoint {
                    xi: float(xi)?,
                    g: float(g)?,
                    gp: float(gp)?,
                }),
                _ => Err(format!("bad row `{l}`")),
            }
        })
        .collect::<Result<Vec<_>, _>>()?;
    if points.len() != n {
        return Err(format!("header says {n} samples, found {}", points.len()));
    }
    Ok(WaveProfile {
        kind,
        gamma: float(get("gamma")?)?,
        alpha: float(get("alpha")?)?,
        mu: float(get("mu")?)?,
        velocity,
        winding: get("winding")?.parse().map_err(|_| "bad winding")?,
        period: optional(get("period")?)?,
        left_tail: tail(get("left_tail")?)?,
        right_tail: tail(get("right_tail")?)?,
        points,
    })
}

pub fn parse_profile_json(text: &str) -> Result<WaveProfile, String> {
    let doc: ProfileDocument = serde_json::from_str(text).map_err(|e| e.to_string())?;
    doc.into_profile()
}

/// Read a profile artifact, choosing the format by extension.
pub fn read_profile(path: &Path) -> CliResult<WaveProfile> {
    let text = std::fs::read_to_string(path).map_err(CliError::io(path))?;
    let parsed = if path.extension().is_some_and(|e| e == "json") {
        parse_profile_json(&text)
    } else {
        parse_profile_csv(&text)
    };
    parsed.map_err(|message| CliError::Parse {
        path: path.to_path_buf(),
        message,
    })
}
