//! CSV and JSON emission with run metadata.
//!
//! CSV files start with `#` comment lines carrying the tool version, the
//! command, the master seed and the resolved configuration as one-line JSON.
//! JSON files wrap the rows as `{"meta": ..., "rows": ...}`. Both are
//! byte-identical for identical inputs.

use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::config::{ExperimentConfig, OutputFormat};
use crate::error::{Error, Result};

pub const TOOL: &str = "grcim";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, Serialize)]
pub struct Meta {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: String,
    pub seed: u64,
    pub config: serde_json::Value,
}

impl Meta {
    pub fn new(command: &str, cfg: &ExperimentConfig) -> Self {
        Self {
            tool: TOOL,
            version: VERSION,
            command: command.to_string(),
            seed: cfg.seed,
            config: serde_json::to_value(cfg).expect("config serializes"),
        }
    }
}

fn io_err(path: &Path, e: impl std::fmt::Display) -> Error {
    Error::Config(format!("{}: {e}", path.display()))
}

pub fn csv_bytes<T: Serialize>(meta: &Meta, rows: &[T]) -> Result<Vec<u8>> {
    let mut buf = Vec::new();
    writeln!(buf, "# {} {}", meta.tool, meta.version).expect("vec write");
    writeln!(buf, "# command: {}", meta.command).expect("vec write");
    writeln!(buf, "# seed: {}", meta.seed).expect("vec write");
    writeln!(buf, "# config: {}", meta.config).expect("vec write");
    {
        let mut w = csv::Writer::from_writer(&mut buf);
        for r in rows {
            w.serialize(r).map_err(|e| Error::Config(format!("csv: {e}")))?;
        }
        w.flush().map_err(|e| Error::Config(format!("csv: {e}")))?;
    }
    Ok(buf)
}

pub fn json_bytes<T: Serialize + ?Sized>(meta: &Meta, rows: &T) -> Result<Vec<u8>> {
    #[derive(Serialize)]
    struct Doc<'a, T: ?Sized> {
        meta: &'a Meta,
        rows: &'a T,
    }
    let mut buf = serde_json::to_vec_pretty(&Doc { meta, rows }).map_err(|e| Error::Config(format!("json: {e}")))?;
    buf.push(b'\n');
    Ok(buf)
}

pub fn table_bytes<T: Serialize>(format: OutputFormat, meta: &Meta, rows: &[T]) -> Result<Vec<u8>> {
    match format {
        OutputFormat::Csv => csv_bytes(meta, rows),
        OutputFormat::Json => json_bytes(meta, rows),
    }
}

pub fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| io_err(dir, e))?;
    }
    std::fs::write(path, bytes).map_err(|e| io_err(path, e))
}

/// Writes to `out` (a file, or a directory when it exists as one or ends in
/// a separator) or to stdout when `out` is `None`. Returns the file written.
pub fn emit(out: Option<&Path>, default_name: &str, bytes: &[u8]) -> Result<Option<PathBuf>> {
    match out {
        None => {
            std::io::stdout()
                .write_all(bytes)
                .map_err(|e| Error::Config(format!("stdout: {e}")))?;
            Ok(None)
        }
        Some(p) => {
            let is_dir = p.is_dir() || p.to_string_lossy().ends_with(std::path::MAIN_SEPARATOR);
            let path = if is_dir { p.join(default_name) } else { p.to_path_buf() };
            write_file(&path, bytes)?;
            Ok(Some(path))
        }
    }
}
