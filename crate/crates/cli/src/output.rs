//! Report rendering and atomic writes.

use std::io::Write;
use std::path::Path;

use serde::Serialize;
use serde_json::{Map, Number, Value};

use crate::config::Format;

/// A float rendered with 17 significant digits; non-finite values become
/// strings.
pub fn float(x: f64) -> Value {
    if x.is_finite() {
        let s = format!("{x:.16e}");
        Value::Number(serde_json::from_str::<Number>(&s).expect("formatted float parses"))
    } else {
        Value::String(format!("{x}"))
    }
}

/// Re-render every non-integer number with 17 significant digits.
pub fn normalize(v: Value) -> Value {
    match v {
        Value::Number(n) if !(n.is_i64() || n.is_u64()) => n.as_f64().map_or(Value::Number(n), float),
        Value::Array(a) => Value::Array(a.into_iter().map(normalize).collect()),
        Value::Object(m) => Value::Object(m.into_iter().map(|(k, v)| (k, normalize(v))).collect()),
        other => other,
    }
}

pub fn to_value<T: Serialize>(x: &T) -> Value {
    normalize(serde_json::to_value(x).expect("report serializes"))
}

/// One command's result: a JSON record and, for tabular commands, CSV rows.
#[derive(Debug, Default)]
pub struct Report {
    pub fields: Map<String, Value>,
    pub table: Option<Table>,
    /// Set when the result is divergent by design.
    pub divergent: bool,
    /// Set when a verification did not hold.
    pub failed: bool,
}

#[derive(Debug, Default)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        Self { header: header.iter().map(|s| s.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }
}

/// CSV cell for a float.
pub fn cell(x: f64) -> String {
    format!("{x:.16e}")
}

impl Report {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn set(&mut self, key: &str, v: Value) -> &mut Self {
        self.fields.insert(key.to_string(), normalize(v));
        self
    }

    pub fn set_f(&mut self, key: &str, x: f64) -> &mut Self {
        self.set(key, float(x))
    }

    /// Render with the provenance fields; the layout is deterministic.
    pub fn render(&self, format: Format, command: &str, fingerprint: &str, seed: u64) -> Result<String, String> {
        match format {
            Format::Json => {
                let mut m = Map::new();
                m.insert("command".into(), Value::String(command.into()));
                m.insert("config_fingerprint".into(), Value::String(fingerprint.into()));
                m.insert("seed".into(), Value::from(seed));
                for (k, v) in &self.fields {
                    m.insert(k.clone(), v.clone());
                }
                let mut s = serde_json::to_string_pretty(&Value::Object(m)).map_err(|e| e.to_string())?;
                s.push('\n');
                Ok(s)
            }
            Format::Csv => {
                let table = match &self.table {
                    Some(t) => Table { header: t.header.clone(), rows: t.rows.clone() },
                    None => self.scalar_table(),
                };
                let mut w = csv::Writer::from_writer(Vec::new());
                let mut header = vec!["config_fingerprint".to_string(), "seed".to_string()];
                header.extend(table.header);
                w.write_record(&header).map_err(|e| e.to_string())?;
                for row in table.rows {
                    let mut r = vec![fingerprint.to_string(), seed.to_string()];
                    r.extend(row);
                    w.write_record(&r).map_err(|e| e.to_string())?;
                }
                String::from_utf8(w.into_inner().map_err(|e| e.to_string())?).map_err(|e| e.to_string())
            }
        }
    }

    /// One row holding the scalar fields, nested values flattened with dots.
    fn scalar_table(&self) -> Table {
        fn flatten(prefix: &str, v: &Value, out: &mut Vec<(String, String)>) {
            match v {
                Value::Object(m) => {
                    for (k, v) in m {
                        flatten(&format!("{prefix}{k}."), v, out);
                    }
                }
                Value::Array(_) => {}
                Value::String(s) => out.push((prefix.trim_end_matches('.').into(), s.clone())),
                other => out.push((prefix.trim_end_matches('.').into(), other.to_string())),
            }
        }
        let mut cols = Vec::new();
        for (k, v) in &self.fields {
            flatten(&format!("{k}."), v, &mut cols);
        }
        let (header, row): (Vec<_>, Vec<_>) = cols.into_iter().unzip();
        Table { header, rows: vec![row] }
    }
}

/// Write `text` to `path` through a temporary file in the same directory,
/// so a failed run leaves no partial output.
pub fn write_atomic(path: &Path, text: &str) -> std::io::Result<()> {
    let dir = path.parent().filter(|d| !d.as_os_str().is_empty()).unwrap_or(Path::new("."));
    let name = path.file_name().ok_or_else(|| std::io::Error::other("output path has no file name"))?;
    let tmp = dir.join(format!(".{}.tmp{}", name.to_string_lossy(), std::process::id()));
    let res = (|| {
        let mut f = std::fs::File::create(&tmp)?;
        f.write_all(text.as_bytes())?;
        f.sync_all()?;
        std::fs::rename(&tmp, path)
    })();
    if res.is_err() {
        let _ = std::fs::remove_file(&tmp);
    }
    res
}
