//! Files written by the runner.
//!
//! CSV files start with a `#schema,<name>,<version>` line followed by the
//! column header. Floats use 17 significant digits so they round-trip
//! bit for bit; missing values are empty cells.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::LabError;

pub const CSV_SCHEMA_VERSION: u32 = 1;

pub fn fmt_f64(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        x.to_string()
    }
}

/// Table with a fixed header, written in one go.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CsvTable {
    pub schema: String,
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl CsvTable {
    pub fn new(schema: &str, header: Vec<String>) -> Self {
        CsvTable { schema: schema.into(), header, rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = format!("#schema,{},{}\n", self.schema, CSV_SCHEMA_VERSION).into_bytes();
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(&mut out);
        w.write_record(&self.header).expect("write to memory");
        for r in &self.rows {
            w.write_record(r).expect("write to memory");
        }
        w.flush().expect("write to memory");
        drop(w);
        out
    }

    /// Parse a file written by [`CsvTable::to_bytes`].
    pub fn parse(bytes: &[u8]) -> Result<Self, String> {
        let text = std::str::from_utf8(bytes).map_err(|e| e.to_string())?;
        let (first, rest) = text.split_once('\n').ok_or("empty file")?;
        let parts: Vec<&str> = first.split(',').collect();
        if parts.len() != 3 || parts[0] != "#schema" || parts[2] != CSV_SCHEMA_VERSION.to_string() {
            return Err(format!("bad schema line {first:?}"));
        }
        let mut r = csv::ReaderBuilder::new().from_reader(rest.as_bytes());
        let header = r.headers().map_err(|e| e.to_string())?.iter().map(String::from).collect();
        let mut t = CsvTable::new(parts[1], header);
        for rec in r.records() {
            t.rows.push(rec.map_err(|e| e.to_string())?.iter().map(String::from).collect());
        }
        Ok(t)
    }
}

pub struct OutDir {
    pub path: PathBuf,
}

impl OutDir {
    pub fn create(path: &Path) -> Result<Self, LabError> {
        fs::create_dir_all(path).map_err(|e| LabError::io(path, e))?;
        Ok(OutDir { path: path.to_path_buf() })
    }

    pub fn write_bytes(&self, name: &str, bytes: &[u8]) -> Result<PathBuf, LabError> {
        let p = self.path.join(name);
        fs::write(&p, bytes).map_err(|e| LabError::io(&p, e))?;
        Ok(p)
    }

    pub fn write_csv(&self, name: &str, t: &CsvTable) -> Result<PathBuf, LabError> {
        self.write_bytes(name, &t.to_bytes())
    }

    pub fn write_json<T: Serialize>(&self, name: &str, v: &T) -> Result<PathBuf, LabError> {
        let mut s = serde_json::to_string_pretty(v).expect("serializable");
        s.push('\n');
        self.write_bytes(name, s.as_bytes())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_round_trip() {
        for x in [0.1, 1.0 / 3.0, 8.159_132_4, 1e-300, 123456789.123, -2.5] {
            assert_eq!(fmt_f64(x).parse::<f64>().unwrap().to_bits(), x.to_bits());
        }
    }

    #[test]
    fn table_round_trip() {
        let mut t = CsvTable::new("demo", vec!["a".into(), "b".into()]);
        t.push(vec!["1".into(), String::new()]);
        t.push(vec!["x,y".into(), fmt_f64(0.5)]);
        let bytes = t.to_bytes();
        assert!(bytes.starts_with(b"#schema,demo,1\na,b\n1,\n"));
        assert_eq!(CsvTable::parse(&bytes).unwrap(), t);
        assert!(CsvTable::parse(b"a,b\n").is_err());
    }
}
