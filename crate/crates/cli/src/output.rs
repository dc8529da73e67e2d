use std::fmt::Write as _;
use std::io::Write as _;
use std::path::Path;

use anyhow::{Context, Result};
use serde::Serialize;
use serde_json::json;
use sha2::{Digest, Sha256};

use crate::config::RunConfig;

/// SHA-256 over the dataset's `NAME_*.txt` files, in file-name order.
pub fn input_hash(root: &Path, name: &str) -> Result<String> {
    let prefix = format!("{name}_");
    let mut files: Vec<_> = std::fs::read_dir(root)
        .with_context(|| format!("cannot list {}", root.display()))?
        .filter_map(|e| e.ok())
        .map(|e| e.path())
        .filter(|p| {
            p.is_file()
                && p.file_name()
                    .and_then(|s| s.to_str())
                    .is_some_and(|s| s.starts_with(&prefix) && s.ends_with(".txt"))
        })
        .collect();
    files.sort();
    let mut h = Sha256::new();
    for f in files {
        let bytes = std::fs::read(&f).with_context(|| format!("cannot read {}", f.display()))?;
        h.update(f.file_name().unwrap().to_string_lossy().as_bytes());
        h.update([0]);
        h.update((bytes.len() as u64).to_le_bytes());
        h.update(&bytes);
    }
    Ok(hex::encode(h.finalize()))
}

/// 17 significant digits, enough to round-trip any f64.
pub fn real(v: f64) -> String {
    format!("{v:.16e}")
}

/// Text output assembled in memory and written in one atomic step.
pub struct Report {
    buf: String,
}

impl Report {
    /// JSON-lines output whose first record echoes the configuration.
    pub fn jsonl(cfg: &RunConfig, hash: &str) -> Result<Self> {
        let mut r = Report { buf: String::new() };
        r.record(&json!({ "config": cfg, "input_sha256": hash }))?;
        Ok(r)
    }

    /// CSV output preceded by `#` comment lines echoing the configuration.
    pub fn csv(cfg: &RunConfig, hash: &str, header: &str) -> Result<Self> {
        let mut buf = String::new();
        writeln!(buf, "# config: {}", serde_json::to_string(cfg)?)?;
        writeln!(buf, "# input_sha256: {hash}")?;
        writeln!(buf, "{header}")?;
        Ok(Report { buf })
    }

    pub fn record(&mut self, value: &impl Serialize) -> Result<()> {
        self.buf.push_str(&serde_json::to_string(value)?);
        self.buf.push('\n');
        Ok(())
    }

    pub fn row(&mut self, fields: &[String]) {
        self.buf.push_str(&fields.join(","));
        self.buf.push('\n');
    }

    pub fn finish(self, path: &Path) -> Result<()> {
        write_atomic(path, self.buf.as_bytes())
    }
}

/// Writes through a temporary file in the target directory and renames it
/// into place. `-` means standard output.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    if path.as_os_str() == "-" {
        let mut out = std::io::stdout().lock();
        out.write_all(bytes)?;
        return Ok(out.flush()?);
    }
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    std::fs::create_dir_all(dir).with_context(|| format!("cannot create {}", dir.display()))?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir)
        .with_context(|| format!("cannot create a temporary file in {}", dir.display()))?;
    tmp.write_all(bytes)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path)
        .with_context(|| format!("cannot write {}", path.display()))?;
    Ok(())
}
