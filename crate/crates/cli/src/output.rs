//! CSV tables and run manifests.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::Value;

use crate::dto::SpecDto;
use crate::CliError;

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Int(u64),
    Text(String),
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Num(x)
    }
}

impl From<usize> for Cell {
    fn from(x: usize) -> Self {
        Cell::Int(x as u64)
    }
}

impl From<&str> for Cell {
    fn from(s: &str) -> Self {
        Cell::Text(s.into())
    }
}

impl From<bool> for Cell {
    fn from(b: bool) -> Self {
        Cell::Text(if b { "true" } else { "false" }.into())
    }
}

/// 17 significant digits, enough to round-trip an f64.
pub fn fmt_num(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else if x.is_nan() {
        "nan".into()
    } else if x > 0.0 {
        "inf".into()
    } else {
        "-inf".into()
    }
}

#[derive(Debug, Clone, Default)]
pub struct Table {
    header: Vec<&'static str>,
    rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(header: &[&'static str]) -> Self {
        Table { header: header.to_vec(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn to_csv(&self) -> String {
        let mut s = self.header.join(",");
        s.push('\n');
        for row in &self.rows {
            for (i, c) in row.iter().enumerate() {
                if i > 0 {
                    s.push(',');
                }
                match c {
                    Cell::Num(x) => s.push_str(&fmt_num(*x)),
                    Cell::Int(k) => write!(s, "{k}").unwrap(),
                    Cell::Text(t) => s.push_str(t),
                }
            }
            s.push('\n');
        }
        s
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Manifest {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: &'static str,
    pub argv: Vec<String>,
    pub spec: Option<SpecDto>,
    pub seed: Option<u64>,
    pub tolerances: BTreeMap<&'static str, f64>,
    pub parameters: BTreeMap<&'static str, Value>,
    pub output: Option<String>,
    pub rows: usize,
    pub summary: BTreeMap<&'static str, Value>,
}

impl Manifest {
    pub fn new(command: &'static str, argv: &[String]) -> Self {
        Manifest {
            tool: "annulus",
            version: env!("CARGO_PKG_VERSION"),
            command,
            argv: argv.to_vec(),
            spec: None,
            seed: None,
            tolerances: BTreeMap::new(),
            parameters: BTreeMap::new(),
            output: None,
            rows: 0,
            summary: BTreeMap::new(),
        }
    }

    pub fn tol(&mut self, name: &'static str, v: f64) -> &mut Self {
        self.tolerances.insert(name, v);
        self
    }

    pub fn param(&mut self, name: &'static str, v: impl Serialize) -> &mut Self {
        self.parameters.insert(name, serde_json::to_value(v).unwrap_or(Value::Null));
        self
    }

    pub fn summary(&mut self, name: &'static str, v: impl Serialize) -> &mut Self {
        self.summary.insert(name, serde_json::to_value(v).unwrap_or(Value::Null));
        self
    }
}

pub fn manifest_path(out: &Path) -> PathBuf {
    let mut s = out.as_os_str().to_owned();
    s.push(".manifest.json");
    PathBuf::from(s)
}

fn write_file(path: &Path, text: &str) -> Result<(), CliError> {
    std::fs::write(path, text).map_err(|e| CliError::Io(format!("cannot write {}: {e}", path.display())))
}

/// Write `table` to `out` (or standard output) and the manifest next to it.
pub fn emit(table: &Table, out: Option<&Path>, mut manifest: Manifest) -> Result<(), CliError> {
    manifest.rows = table.len();
    let csv = table.to_csv();
    match out {
        Some(path) => {
            manifest.output = Some(path.display().to_string());
            write_file(path, &csv)?;
            let json = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
            write_file(&manifest_path(path), &(json + "\n"))
        }
        None => std::io::stdout()
            .write_all(csv.as_bytes())
            .map_err(|e| CliError::Io(format!("cannot write to stdout: {e}"))),
    }
}

/// Write a JSON document to `out` or standard output.
pub fn emit_json(value: &Value, out: Option<&Path>) -> Result<(), CliError> {
    let text = serde_json::to_string_pretty(value).expect("json serializes") + "\n";
    match out {
        Some(path) => write_file(path, &text),
        None => std::io::stdout()
            .write_all(text.as_bytes())
            .map_err(|e| CliError::Io(format!("cannot write to stdout: {e}"))),
    }
}
