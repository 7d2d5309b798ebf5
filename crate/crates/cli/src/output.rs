//! Output files: provenance-stamped CSV and JSON, written atomically.

use std::fmt::Write as _;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::error::{CliError, CliResult};

/// Where files go and what every file is stamped with.
#[derive(Debug, Clone)]
pub struct Sink {
    dir: PathBuf,
    provenance: String,
}

impl Sink {
    pub fn new(dir: impl Into<PathBuf>, provenance: String) -> CliResult<Self> {
        let dir = dir.into();
        std::fs::create_dir_all(&dir).map_err(|e| CliError::io(&dir, e))?;
        Ok(Self { dir, provenance })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn provenance(&self) -> &str {
        &self.provenance
    }

    /// Writes `columns` under `header`; every value formatted with 9 significant digits.
    pub fn csv(&self, name: &str, header: &[&str], columns: &[&[f64]]) -> CliResult<PathBuf> {
        let rows = columns.first().map_or(0, |c| c.len());
        debug_assert!(columns.iter().all(|c| c.len() == rows));
        let mut text = String::with_capacity(rows * columns.len() * 16 + 256);
        writeln!(text, "# {}", self.provenance).unwrap();
        writeln!(text, "{}", header.join(",")).unwrap();
        for r in 0..rows {
            for (k, col) in columns.iter().enumerate() {
                if k > 0 {
                    text.push(',');
                }
                write!(text, "{:.8e}", col[r]).unwrap();
            }
            text.push('\n');
        }
        self.write(name, text.as_bytes())
    }

    /// Free-form CSV body (header and rows) after the provenance line.
    pub fn csv_text(&self, name: &str, body: &str) -> CliResult<PathBuf> {
        let text = format!("# {}\n{body}", self.provenance);
        self.write(name, text.as_bytes())
    }

    pub fn json(&self, name: &str, value: &impl Serialize) -> CliResult<PathBuf> {
        let mut bytes = serde_json::to_vec_pretty(value).map_err(|e| CliError::BadInput(e.to_string()))?;
        bytes.push(b'\n');
        self.write(name, &bytes)
    }

    /// Writes to a temporary file in the target directory and renames it into place.
    pub fn write(&self, name: &str, bytes: &[u8]) -> CliResult<PathBuf> {
        let path = self.dir.join(name);
        let mut tmp = tempfile::NamedTempFile::new_in(&self.dir).map_err(|e| CliError::io(&self.dir, e))?;
        tmp.write_all(bytes).map_err(|e| CliError::io(&path, e))?;
        tmp.persist(&path).map_err(|e| CliError::io(&path, e.error))?;
        log::info!("wrote {}", path.display());
        Ok(path)
    }
}

/// Short file-name-safe rendering of a parameter value, e.g. `1.949` -> `1p949`.
/// Rounded to four decimals.
pub fn tag(value: f64) -> String {
    let s = format!("{value:.4}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    s.replace('.', "p").replace('-', "m")
}
