//! Output files: CSV with a fixed column order and JSON, floats at 12
//! significant digits, each file stamped with the config hash and the ids of
//! the inequalities it bears on.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::{json, Value};

use crate::CliError;

/// `x` at 12 significant digits; plain decimal for moderate magnitudes.
pub fn fmt_f64(x: f64) -> String {
    if !x.is_finite() {
        return if x.is_nan() { "nan".into() } else if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return "0".into();
    }
    let sci = format!("{:.11e}", x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if !(-5..15).contains(&exp) {
        return format!("{mantissa}e{exp}");
    }
    let decimals = (11 - exp).max(0) as usize;
    let rounded: f64 = sci.parse().expect("round trip");
    let s = format!("{:.*}", decimals, rounded);
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    }
}

/// Rounds every float in a JSON tree to 12 significant digits.
pub fn round_json(v: &mut Value) {
    match v {
        Value::Number(n) if n.is_f64() => {
            let x = n.as_f64().expect("f64");
            let r: f64 = format!("{:.11e}", x).parse().expect("round trip");
            *v = serde_json::Number::from_f64(r).map(Value::Number).unwrap_or(Value::Null);
        }
        Value::Array(a) => a.iter_mut().for_each(round_json),
        Value::Object(o) => o.values_mut().for_each(round_json),
        _ => {}
    }
}

/// One CSV field.
pub enum Cell {
    F(f64),
    I(i64),
    U(u64),
    S(String),
    B(bool),
}

impl Cell {
    fn render(&self) -> String {
        match self {
            Cell::F(x) => fmt_f64(*x),
            Cell::I(x) => x.to_string(),
            Cell::U(x) => x.to_string(),
            Cell::B(x) => x.to_string(),
            Cell::S(s) if s.contains([',', '"', '\n']) => format!("\"{}\"", s.replace('"', "\"\"")),
            Cell::S(s) => s.clone(),
        }
    }
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::F(x)
    }
}

impl From<usize> for Cell {
    fn from(x: usize) -> Self {
        Cell::U(x as u64)
    }
}

impl From<u64> for Cell {
    fn from(x: u64) -> Self {
        Cell::U(x)
    }
}

impl From<i64> for Cell {
    fn from(x: i64) -> Self {
        Cell::I(x)
    }
}

impl From<bool> for Cell {
    fn from(x: bool) -> Self {
        Cell::B(x)
    }
}

impl From<String> for Cell {
    fn from(x: String) -> Self {
        Cell::S(x)
    }
}

impl From<&str> for Cell {
    fn from(x: &str) -> Self {
        Cell::S(x.to_string())
    }
}

/// Writes the files of one run into the output directory.
pub struct Output {
    pub dir: PathBuf,
    pub config_hash: String,
    pub written: Vec<PathBuf>,
    /// Caveat stamped on every file, for results computed on a stand-in model.
    pub model: Option<&'static str>,
}

impl Output {
    pub fn new(dir: &Path, config_hash: String) -> Result<Self, CliError> {
        fs::create_dir_all(dir).map_err(|e| CliError::Io(format!("{}: {e}", dir.display())))?;
        Ok(Output { dir: dir.to_path_buf(), config_hash, written: Vec::new(), model: None })
    }

    fn write(&mut self, name: &str, text: String) -> Result<(), CliError> {
        let path = self.dir.join(name);
        fs::write(&path, text).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        self.written.push(path);
        Ok(())
    }

    /// Comment lines carry the hash, the ids and any model caveat, then the
    /// header and rows.
    pub fn csv(&mut self, name: &str, ids: &[&str], header: &[&str], rows: Vec<Vec<Cell>>) -> Result<(), CliError> {
        let mut text = format!("# config_hash={}\n# inequalities={}\n", self.config_hash, ids.join(";"));
        if let Some(m) = self.model {
            text.push_str(&format!("# model={m}\n"));
        }
        text.push_str(&header.join(","));
        text.push('\n');
        for row in rows {
            debug_assert_eq!(row.len(), header.len());
            text.push_str(&row.iter().map(Cell::render).collect::<Vec<_>>().join(","));
            text.push('\n');
        }
        self.write(name, text)
    }

    /// The payload under `"data"`, next to the hash and ids.
    pub fn json<T: Serialize>(&mut self, name: &str, ids: &[&str], data: &T) -> Result<(), CliError> {
        let mut v = json!({
            "config_hash": self.config_hash,
            "inequalities": ids,
            "data": serde_json::to_value(data).map_err(|e| CliError::Io(e.to_string()))?,
        });
        if let Some(m) = self.model {
            v["model"] = m.into();
        }
        round_json(&mut v);
        let mut text = serde_json::to_string_pretty(&v).map_err(|e| CliError::Io(e.to_string()))?;
        text.push('\n');
        self.write(name, text)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn twelve_significant_digits() {
        assert_eq!(fmt_f64(3f64.ln()), "1.09861228867");
        assert_eq!(fmt_f64(1.5), "1.5");
        assert_eq!(fmt_f64(-250.0), "-250");
        assert_eq!(fmt_f64(1.0 / 3.0 * 1e-7), "3.33333333333e-8");
        assert_eq!(fmt_f64(0.0), "0");
        assert_eq!(fmt_f64(f64::INFINITY), "inf");
    }

    #[test]
    fn json_floats_rounded() {
        let mut v = json!({"x": [0.1 + 0.2, 7], "y": {"z": 2f64.sqrt()}});
        round_json(&mut v);
        assert_eq!(v["x"][0].as_f64().unwrap(), 0.3);
        assert_eq!(v["x"][1].as_i64().unwrap(), 7);
        assert_eq!(v["y"]["z"].as_f64().unwrap(), 1.41421356237);
    }
}
