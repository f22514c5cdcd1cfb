//! Result tables and their CSV/JSON renderings.

use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

pub const CURVE_COLUMNS: [&str; 8] = ["T_us", "SX", "SX_err", "SY", "SY_err", "protocol", "Np", "seed"];
pub const ANALYTIC_COLUMNS: [&str; 5] = ["T_us", "S_analytic", "method", "protocol", "Np"];
pub const SCAN_COLUMNS: [&str; 5] = ["protocol", "Np", "T1e_us", "T1e_err_us", "method"];
pub const P1_COLUMNS: [&str; 4] = ["type", "freq_mhz", "weight", "iz_label"];
pub const CHECK_COLUMNS: [&str; 5] = ["suite", "protocol", "detail", "value", "pass"];

/// Rounds to nine significant digits, the precision of every emitted float.
pub fn round_sig9(v: f64) -> f64 {
    if v == 0.0 || !v.is_finite() {
        return if v == 0.0 { 0.0 } else { v };
    }
    format!("{v:.8e}").parse().unwrap_or(v)
}

/// Nine significant digits; plain notation for `1e-4 ≤ |v| < 1e9`.
pub fn format_sig9(v: f64) -> String {
    if !v.is_finite() {
        return format!("{v}");
    }
    let r = round_sig9(v);
    let a = r.abs();
    if r == 0.0 || (1e-4..1e9).contains(&a) {
        format!("{r}")
    } else {
        format!("{r:e}")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Cell {
    Int(i64),
    Num(f64),
    Text(String),
}

impl Cell {
    pub fn num(v: f64) -> Self {
        Cell::Num(round_sig9(v))
    }

    pub fn text(s: impl Into<String>) -> Self {
        Cell::Text(s.into())
    }

    pub fn as_f64(&self) -> Option<f64> {
        match *self {
            Cell::Num(v) => Some(v),
            Cell::Int(i) => Some(i as f64),
            Cell::Text(_) => None,
        }
    }

    pub fn as_str(&self) -> Option<&str> {
        match self {
            Cell::Text(s) => Some(s),
            _ => None,
        }
    }

    fn render_csv(&self, out: &mut String) {
        match self {
            Cell::Int(i) => {
                let _ = write!(out, "{i}");
            }
            Cell::Num(v) => out.push_str(&format_sig9(*v)),
            Cell::Text(s) if s.contains([',', '"', '\n']) => {
                out.push('"');
                out.push_str(&s.replace('"', "\"\""));
                out.push('"');
            }
            Cell::Text(s) => out.push_str(s),
        }
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as i64)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

impl std::str::FromStr for Format {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            other => Err(Error::Unknown {
                what: "output format",
                name: other.into(),
            }),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultTable {
    pub toolkit: String,
    pub experiment: String,
    /// SHA-256 of the canonical resolved configuration.
    pub config_hash: String,
    pub seed: u64,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl ResultTable {
    pub fn new(experiment: &str, config_hash: String, seed: u64, columns: &[&str]) -> Self {
        Self {
            toolkit: format!("ddkit {}", env!("CARGO_PKG_VERSION")),
            experiment: experiment.to_string(),
            config_hash,
            seed,
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }

    /// Rows whose `protocol` column equals `protocol`.
    pub fn rows_for<'a>(&'a self, protocol: &'a str) -> impl Iterator<Item = &'a Vec<Cell>> + 'a {
        let k = self.column("protocol");
        self.rows
            .iter()
            .filter(move |r| k.is_some_and(|k| r[k].as_str() == Some(protocol)))
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "# {}", self.toolkit);
        let _ = writeln!(out, "# experiment={}", self.experiment);
        let _ = writeln!(out, "# config_sha256={}", self.config_hash);
        let _ = writeln!(out, "# seed={}", self.seed);
        out.push_str(&self.columns.join(","));
        out.push('\n');
        for row in &self.rows {
            for (i, c) in row.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                c.render_csv(&mut out);
            }
            out.push('\n');
        }
        out
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("table serializes");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Config(format!("bad table JSON: {e}")))
    }

    pub fn emit(&self, format: Format) -> Vec<u8> {
        match format {
            Format::Csv => self.to_csv().into_bytes(),
            Format::Json => self.to_json().into_bytes(),
        }
    }

    pub fn write(&self, path: &Path, format: Format) -> Result<()> {
        std::fs::write(path, self.emit(format)).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    let digest = Sha256::digest(bytes);
    digest.iter().fold(String::with_capacity(64), |mut s, b| {
        let _ = write!(s, "{b:02x}");
        s
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> ResultTable {
        let mut t = ResultTable::new("demo", sha256_hex(b"x"), 3, &CURVE_COLUMNS);
        t.push(vec![
            Cell::num(1.0 / 3.0),
            Cell::num(0.987654321987),
            Cell::num(1.5e-12),
            Cell::num(-0.25),
            Cell::num(0.0),
            Cell::text("cdd(3,2)"),
            Cell::from(20usize),
            Cell::Int(3),
        ]);
        t
    }

    #[test]
    fn csv_layout() {
        let csv = sample().to_csv();
        let lines: Vec<&str> = csv.lines().filter(|l| !l.starts_with('#')).collect();
        assert_eq!(lines[0], "T_us,SX,SX_err,SY,SY_err,protocol,Np,seed");
        assert_eq!(
            lines[1],
            "0.333333333,0.987654322,1.5e-12,-0.25,0,\"cdd(3,2)\",20,3"
        );
        assert!(!csv.contains('\r'));
        assert_eq!(sample().emit(Format::Csv), sample().emit(Format::Csv));
    }

    #[test]
    fn json_round_trip() {
        let t = sample();
        assert_eq!(ResultTable::from_json(&t.to_json()).unwrap(), t);
    }

    #[test]
    fn significant_digits() {
        assert_eq!(format_sig9(123456789012.0), "1.23456789e11");
        assert_eq!(format_sig9(2.0), "2");
        assert_eq!(format_sig9(-1.0e-7 / 3.0), "-3.33333333e-8");
        assert_eq!(round_sig9(0.1 + 0.2), 0.3);
    }
}
