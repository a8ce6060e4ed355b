//! Output directory handling, CSV formatting and content hashes.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::{CliError, CliResult};

/// A value that can appear in a CSV cell. Floats use the shortest
/// representation that parses back to the same value.
pub trait CsvField {
    fn write_field(&self, out: &mut String);
}

impl CsvField for f64 {
    fn write_field(&self, out: &mut String) {
        let _ = write!(out, "{self:?}");
    }
}

impl CsvField for usize {
    fn write_field(&self, out: &mut String) {
        let _ = write!(out, "{self}");
    }
}

impl CsvField for i64 {
    fn write_field(&self, out: &mut String) {
        let _ = write!(out, "{self}");
    }
}

impl CsvField for bool {
    fn write_field(&self, out: &mut String) {
        out.push_str(if *self { "true" } else { "false" });
    }
}

impl CsvField for &str {
    fn write_field(&self, out: &mut String) {
        if self.contains([',', '"', '\n', '\r']) {
            out.push('"');
            out.push_str(&self.replace('"', "\"\""));
            out.push('"');
        } else {
            out.push_str(self);
        }
    }
}

impl CsvField for String {
    fn write_field(&self, out: &mut String) {
        self.as_str().write_field(out);
    }
}

impl<T: CsvField> CsvField for Option<T> {
    fn write_field(&self, out: &mut String) {
        if let Some(v) = self {
            v.write_field(out);
        }
    }
}

/// In-memory CSV with a fixed header and LF line endings.
#[derive(Debug, Clone)]
pub struct Csv {
    columns: usize,
    buf: String,
    rows: usize,
}

impl Csv {
    pub fn new(header: &[&str]) -> Self {
        let mut csv = Csv {
            columns: header.len(),
            buf: String::new(),
            rows: 0,
        };
        let cells: Vec<&dyn CsvField> = header.iter().map(|h| h as &dyn CsvField).collect();
        csv.write_row(&cells);
        csv.rows = 0;
        csv
    }

    fn write_row(&mut self, cells: &[&dyn CsvField]) {
        for (i, c) in cells.iter().enumerate() {
            if i > 0 {
                self.buf.push(',');
            }
            c.write_field(&mut self.buf);
        }
        self.buf.push('\n');
        self.rows += 1;
    }

    pub fn row(&mut self, cells: &[&dyn CsvField]) {
        assert_eq!(cells.len(), self.columns, "CSV row width");
        self.write_row(cells);
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn as_str(&self) -> &str {
        &self.buf
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FileRecord {
    pub name: String,
    pub sha256: String,
    pub bytes: usize,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Directory receiving a command's output files.
#[derive(Debug)]
pub struct OutputDir {
    root: PathBuf,
    files: Vec<FileRecord>,
}

impl OutputDir {
    pub fn create(root: &Path) -> CliResult<Self> {
        std::fs::create_dir_all(root).map_err(|source| CliError::Io {
            path: root.display().to_string(),
            source,
        })?;
        Ok(OutputDir {
            root: root.to_path_buf(),
            files: Vec::new(),
        })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn write(&mut self, name: &str, contents: &str) -> CliResult<FileRecord> {
        let path = self.root.join(name);
        std::fs::write(&path, contents).map_err(|source| CliError::Io {
            path: path.display().to_string(),
            source,
        })?;
        let rec = FileRecord {
            name: name.to_string(),
            sha256: sha256_hex(contents.as_bytes()),
            bytes: contents.len(),
        };
        self.files.push(rec.clone());
        Ok(rec)
    }

    pub fn write_json<T: Serialize>(&mut self, name: &str, value: &T) -> CliResult<FileRecord> {
        let mut text = serde_json::to_string_pretty(value)
            .map_err(|e| CliError::Failed(format!("cannot serialize {name}: {e}")))?;
        text.push('\n');
        self.write(name, &text)
    }

    pub fn files(&self) -> &[FileRecord] {
        &self.files
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_formatting() {
        let mut c = Csv::new(&["a", "b", "c"]);
        c.row(&[&0.1f64, &"x,y", &None::<f64>]);
        c.row(&[&1e-20f64, &"q\"", &Some(3usize)]);
        assert_eq!(c.as_str(), "a,b,c\n0.1,\"x,y\",\n1e-20,\"q\"\"\",3\n");
        assert_eq!(c.rows(), 2);
    }

    #[test]
    fn floats_round_trip() {
        for v in [0.1f64, 1.0 / 3.0, -2.5e-300, 6.02214076e23] {
            let mut s = String::new();
            v.write_field(&mut s);
            assert_eq!(s.parse::<f64>().unwrap(), v);
        }
    }

    #[test]
    fn writes_and_hashes() {
        let dir = tempfile::tempdir().unwrap();
        let mut out = OutputDir::create(&dir.path().join("nested")).unwrap();
        let rec = out.write("x.txt", "abc").unwrap();
        assert_eq!(
            rec.sha256,
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"
        );
        assert_eq!(out.files().len(), 1);
    }
}
