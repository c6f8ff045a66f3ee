//! Artifact writing: fixed-precision CSV, JSON details and the per-run
//! manifest.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use chrono::{DateTime, SecondsFormat, Utc};
use serde::Serialize;

use crate::error::CliResult;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// `%.12g`: 12 significant digits, trailing zeros trimmed.
pub fn fmt_sig(x: f64) -> String {
    if !x.is_finite() {
        return format!("{x}");
    }
    if x == 0.0 {
        return "0".into();
    }
    let sci = format!("{x:.11e}");
    let (mantissa, exp) = sci.split_once('e').expect("scientific format");
    let exp: i32 = exp.parse().expect("exponent");
    if (-5..12).contains(&exp) {
        let decimals = (11 - exp).max(0) as usize;
        trim_zeros(format!("{x:.decimals$}"))
    } else {
        format!("{}e{exp}", trim_zeros(mantissa.to_string()))
    }
}

fn trim_zeros(s: String) -> String {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    }
}

pub enum Cell {
    Int(i64),
    Float(f64),
    Text(String),
    Empty,
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Float(v)
    }
}

impl From<Option<f64>> for Cell {
    fn from(v: Option<f64>) -> Self {
        v.map_or(Cell::Empty, Cell::Float)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.to_string())
    }
}

impl From<String> for Cell {
    fn from(v: String) -> Self {
        Cell::Text(v)
    }
}

impl From<bool> for Cell {
    fn from(v: bool) -> Self {
        Cell::Text(v.to_string())
    }
}

impl Cell {
    fn render(&self) -> String {
        match self {
            Cell::Int(v) => v.to_string(),
            Cell::Float(v) => fmt_sig(*v),
            Cell::Text(v) => v.clone(),
            Cell::Empty => String::new(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Manifest {
    pub command: String,
    pub version: String,
    pub parameters: BTreeMap<String, String>,
    pub started: String,
    pub finished: String,
    pub status: String,
    pub artifacts: Vec<String>,
    pub eigensolves: usize,
    pub cache_hits: usize,
    pub cache_misses: usize,
}

/// Collects artifacts written by one command and emits its manifest.
pub struct Run {
    pub command: &'static str,
    pub output_dir: PathBuf,
    pub parameters: BTreeMap<String, String>,
    started: DateTime<Utc>,
    artifacts: Vec<String>,
    pub eigensolves: usize,
    pub cache_hits: usize,
    pub cache_misses: usize,
}

fn timestamp(t: DateTime<Utc>) -> String {
    t.to_rfc3339_opts(SecondsFormat::Millis, true)
}

impl Run {
    pub fn new(
        command: &'static str,
        output_dir: &Path,
        parameters: BTreeMap<String, String>,
    ) -> CliResult<Self> {
        fs::create_dir_all(output_dir)?;
        Ok(Self {
            command,
            output_dir: output_dir.to_path_buf(),
            parameters,
            started: Utc::now(),
            artifacts: Vec::new(),
            eigensolves: 0,
            cache_hits: 0,
            cache_misses: 0,
        })
    }

    fn path(&mut self, name: &str) -> PathBuf {
        if !self.artifacts.iter().any(|a| a == name) {
            self.artifacts.push(name.to_string());
        }
        self.output_dir.join(name)
    }

    pub fn write_csv(
        &mut self,
        name: &str,
        header: &[&str],
        rows: Vec<Vec<Cell>>,
    ) -> CliResult<PathBuf> {
        let path = self.path(name);
        let mut w = csv::Writer::from_path(&path)?;
        w.write_record(header)?;
        for row in rows {
            w.write_record(row.iter().map(Cell::render))?;
        }
        w.flush()?;
        Ok(path)
    }

    pub fn write_json<T: Serialize + ?Sized>(
        &mut self,
        name: &str,
        value: &T,
    ) -> CliResult<PathBuf> {
        let path = self.path(name);
        write_json_file(&path, value)?;
        Ok(path)
    }

    pub fn write_text(&mut self, name: &str, text: &str) -> CliResult<PathBuf> {
        let path = self.path(name);
        fs::write(&path, text)?;
        Ok(path)
    }

    pub fn manifest_name(&self) -> String {
        format!("{}.manifest.json", self.command)
    }

    pub fn finish(self, status: &str) -> CliResult<PathBuf> {
        let path = self.output_dir.join(self.manifest_name());
        let manifest = Manifest {
            command: self.command.to_string(),
            version: VERSION.to_string(),
            parameters: self.parameters,
            started: timestamp(self.started),
            finished: timestamp(Utc::now()),
            status: status.to_string(),
            artifacts: self.artifacts,
            eigensolves: self.eigensolves,
            cache_hits: self.cache_hits,
            cache_misses: self.cache_misses,
        };
        write_json_file(&path, &manifest)?;
        Ok(path)
    }
}

pub fn write_json_file<T: Serialize + ?Sized>(path: &Path, value: &T) -> CliResult<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    let mut f = fs::File::create(path)?;
    f.write_all(text.as_bytes())?;
    Ok(())
}
