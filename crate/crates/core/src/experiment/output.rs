use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::error::{Error, Result};

/// One checked quantity. `pass` is decided by the experiment; `threshold`
/// records the bound it was compared against.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Assertion {
    pub name: String,
    pub value: f64,
    pub threshold: f64,
    pub pass: bool,
}

impl Assertion {
    pub fn at_most(name: &str, value: f64, threshold: f64) -> Self {
        Self { name: name.into(), value, threshold, pass: value <= threshold }
    }

    pub fn below(name: &str, value: f64, threshold: f64) -> Self {
        Self { name: name.into(), value, threshold, pass: value < threshold }
    }

    pub fn at_least(name: &str, value: f64, threshold: f64) -> Self {
        Self { name: name.into(), value, threshold, pass: value >= threshold }
    }

    pub fn above(name: &str, value: f64, threshold: f64) -> Self {
        Self { name: name.into(), value, threshold, pass: value > threshold }
    }

    pub fn flag(name: &str, ok: bool) -> Self {
        Self { name: name.into(), value: if ok { 1.0 } else { 0.0 }, threshold: 1.0, pass: ok }
    }
}

/// Machine-readable result of one experiment. `timings` holds step counts,
/// which are reproducible, rather than wall-clock times.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Summary {
    pub experiment: String,
    pub config_echo: serde_json::Value,
    pub assertions: Vec<Assertion>,
    pub timings: BTreeMap<String, u64>,
}

impl Summary {
    pub fn all_pass(&self) -> bool {
        self.assertions.iter().all(|a| a.pass)
    }

    pub fn assertion(&self, name: &str) -> Option<&Assertion> {
        self.assertions.iter().find(|a| a.name == name)
    }

    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }
}

/// Named table of columns sharing the row index; the first column is `t`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Series {
    pub name: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Series {
    pub fn new(name: impl Into<String>, columns: &[&str]) -> Self {
        let mut cols = vec!["t".to_string()];
        cols.extend(columns.iter().map(|c| c.to_string()));
        Self { name: name.into(), columns: cols, rows: Vec::new() }
    }

    pub fn push(&mut self, t: f64, values: &[f64]) {
        debug_assert_eq!(values.len() + 1, self.columns.len());
        let mut row = Vec::with_capacity(values.len() + 1);
        row.push(t);
        row.extend_from_slice(values);
        self.rows.push(row);
    }

    /// CSV with a header line, LF endings and shortest round-trip numbers.
    pub fn to_csv(&self) -> String {
        let mut s = self.columns.join(",");
        s.push('\n');
        for row in &self.rows {
            for (i, v) in row.iter().enumerate() {
                if i > 0 {
                    s.push(',');
                }
                write!(s, "{v}").expect("writing to a String");
            }
            s.push('\n');
        }
        s
    }
}

pub fn emit_series(dir: &Path, series: &Series) -> Result<PathBuf> {
    if series.columns.first().map(String::as_str) != Some("t") {
        return Err(Error::config("series", format!("`{}` must start with a t column", series.name)));
    }
    if let Some(bad) = series.rows.iter().find(|r| r.len() != series.columns.len()) {
        return Err(Error::config(
            "series",
            format!("`{}` row has {} values for {} columns", series.name, bad.len(), series.columns.len()),
        ));
    }
    fs::create_dir_all(dir)?;
    let path = dir.join(format!("{}.csv", series.name));
    fs::write(&path, series.to_csv())?;
    Ok(path)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_layout() {
        let mut s = Series::new("demo", &["a", "b"]);
        assert_eq!(s.to_csv(), "t,a,b\n");
        s.push(0.0, &[1.5, -2.0]);
        s.push(0.1, &[1e-20, f64::NAN]);
        assert_eq!(s.to_csv(), "t,a,b\n0,1.5,-2\n0.1,0.00000000000000000001,NaN\n");
    }

    #[test]
    fn csv_values_round_trip() {
        let mut s = Series::new("rt", &["v"]);
        let vals = [std::f64::consts::PI, 1.0 / 3.0, 6.02e23, -4.9e-324];
        for v in vals {
            s.push(0.0, &[v]);
        }
        let csv = s.to_csv();
        for (line, v) in csv.lines().skip(1).zip(vals) {
            let parsed: f64 = line.split(',').nth(1).unwrap().parse().unwrap();
            assert_eq!(parsed.to_bits(), v.to_bits());
        }
    }

    #[test]
    fn emit_writes_file() {
        let dir = tempfile::tempdir().unwrap();
        let mut s = Series::new("x", &["y"]);
        s.push(1.0, &[2.0]);
        let p = emit_series(dir.path(), &s).unwrap();
        assert_eq!(fs::read_to_string(p).unwrap(), "t,y\n1,2\n");
        s.rows.push(vec![1.0]);
        assert!(emit_series(dir.path(), &s).is_err());
    }

    #[test]
    fn assertion_helpers() {
        assert!(Assertion::at_most("a", 1.0, 1.0).pass);
        assert!(!Assertion::below("a", 1.0, 1.0).pass);
        assert!(Assertion::at_least("a", 10.0, 10.0).pass);
        assert!(!Assertion::flag("f", false).pass);
        let s = Summary {
            experiment: "x".into(),
            config_echo: serde_json::Value::Null,
            assertions: vec![Assertion::flag("ok", true), Assertion::above("v", 0.0, 0.0)],
            timings: BTreeMap::new(),
        };
        assert!(!s.all_pass());
        assert_eq!(s.assertion("ok").unwrap().value, 1.0);
    }
}
