use std::fs;
use std::io::Write;
use std::path::Path;
use std::time::{SystemTime, UNIX_EPOCH};

use detlab_core::HPReal;
use rug::Float;
use serde_json::{json, Map, Value};

/// Rows for the CSV rendering of a report.
#[derive(Debug, Default)]
pub struct Table {
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: &[&'static str]) -> Self {
        Table {
            header: header.to_vec(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        self.rows.push(row);
    }
}

/// Outcome of one command.
#[derive(Debug)]
pub struct Report {
    pub command: &'static str,
    pub params: Map<String, Value>,
    pub precision_used: u32,
    pub results: Value,
    /// `Some(false)` when a claimed inequality failed.
    pub verified: Option<bool>,
    pub table: Table,
    max_err: Option<Float>,
    sig: usize,
}

impl Report {
    pub fn new(command: &'static str, digits: u32) -> Self {
        Report {
            command,
            params: Map::new(),
            precision_used: digits,
            results: Value::Null,
            verified: None,
            table: Table::default(),
            max_err: None,
            sig: digits as usize,
        }
    }

    pub fn param(&mut self, key: &str, v: impl Into<Value>) {
        self.params.insert(key.to_string(), v.into());
    }

    /// Decimal value and error bound, tracking the largest bound seen.
    pub fn num(&mut self, v: &HPReal) -> Value {
        if self.max_err.as_ref().is_none_or(|m| v.err() > m) {
            self.max_err = Some(v.err().clone());
        }
        json!({ "value": v.to_decimal(self.sig), "err": v.err_decimal() })
    }

    pub fn value_str(&self, v: &HPReal) -> String {
        v.to_decimal(self.sig)
    }

    pub fn note_precision(&mut self, digits: u32) {
        self.precision_used = self.precision_used.max(digits);
    }

    pub fn to_json(&self, timestamp: u64) -> Value {
        let bounds = match &self.max_err {
            Some(e) => json!({ "kind": "absolute", "max": HPReal::exact(e.clone()).to_decimal(6) }),
            None => json!({ "kind": "exact" }),
        };
        json!({
            "command": self.command,
            "tool_version": env!("CARGO_PKG_VERSION"),
            "timestamp": timestamp,
            "params": self.params,
            "precision_used": self.precision_used,
            "verified": self.verified,
            "results": self.results,
            "error_bounds": bounds,
        })
    }

    pub fn to_csv(&self) -> Result<String, csv::Error> {
        let mut w = csv::Writer::from_writer(Vec::new());
        if self.table.header.is_empty() {
            w.write_record(["key", "value"])?;
            flatten("", &self.results, &mut w)?;
        } else {
            w.write_record(&self.table.header)?;
            for row in &self.table.rows {
                w.write_record(row)?;
            }
        }
        let bytes = w.into_inner().map_err(|e| e.into_error())?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }
}

fn flatten(prefix: &str, v: &Value, w: &mut csv::Writer<Vec<u8>>) -> Result<(), csv::Error> {
    let key = |k: &str| {
        if prefix.is_empty() {
            k.to_string()
        } else {
            format!("{prefix}.{k}")
        }
    };
    match v {
        Value::Object(m) => {
            for (k, x) in m {
                flatten(&key(k), x, w)?;
            }
        }
        Value::Array(a) => {
            for (i, x) in a.iter().enumerate() {
                flatten(&key(&i.to_string()), x, w)?;
            }
        }
        Value::String(s) => w.write_record([prefix, s])?,
        other => w.write_record([prefix, &other.to_string()])?,
    }
    Ok(())
}

pub fn unix_now() -> u64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0)
}

/// Write to `out` atomically, or to stdout.
pub fn emit(text: &str, out: Option<&Path>) -> std::io::Result<()> {
    match out {
        Some(p) => {
            if let Some(dir) = p.parent().filter(|d| !d.as_os_str().is_empty()) {
                fs::create_dir_all(dir)?;
            }
            let tmp = p.with_extension(format!("tmp{}", std::process::id()));
            fs::write(&tmp, text)?;
            fs::rename(&tmp, p)
        }
        None => {
            let mut s = std::io::stdout().lock();
            s.write_all(text.as_bytes())?;
            s.flush()
        }
    }
}
