//! Provenance headers and small writers shared by every output file.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::error::HarnessError;

pub const TOOL_VERSION: &str = concat!("graphon ", env!("CARGO_PKG_VERSION"));

/// `#`-prefixed lines written at the top of every CSV file.
#[derive(Debug, Clone, PartialEq)]
pub struct Provenance {
    pub config_hash: String,
    pub alpha_override: Option<f64>,
}

impl Provenance {
    /// Lines without the leading `# `.
    pub fn lines(&self) -> Vec<String> {
        let mut out = vec![format!("{TOOL_VERSION} config_hash={}", self.config_hash)];
        if let Some(a) = self.alpha_override {
            out.push(format!(
                "WARNING: alpha overridden to {a}; the scaling alpha_n = 1/(n eps_n) is not in force and the bound does not apply"
            ));
        }
        out
    }

    pub fn write_csv_preamble<W: Write>(&self, w: &mut W) -> std::io::Result<()> {
        for line in self.lines() {
            writeln!(w, "# {line}")?;
        }
        Ok(())
    }

    pub fn warning(&self) -> Option<String> {
        self.lines().get(1).cloned()
    }
}

pub fn create(dir: &Path, name: &str) -> Result<BufWriter<File>, HarnessError> {
    std::fs::create_dir_all(dir)?;
    let path: PathBuf = dir.join(name);
    let f = File::create(&path)
        .map_err(|e| HarnessError::Io(std::io::Error::new(e.kind(), format!("{}: {e}", path.display()))))?;
    Ok(BufWriter::new(f))
}

pub fn write_json<T: Serialize>(dir: &Path, name: &str, value: &T) -> Result<(), HarnessError> {
    let mut w = create(dir, name)?;
    serde_json::to_writer_pretty(&mut w, value).map_err(std::io::Error::from)?;
    writeln!(w)?;
    w.flush()?;
    Ok(())
}

/// Formats an optional float, empty when absent or not finite.
pub fn opt(v: Option<f64>) -> String {
    match v {
        Some(x) if x.is_finite() => x.to_string(),
        _ => String::new(),
    }
}
