//! Result writers: CSV tables, histograms, and the per-run manifest.
//!
//! Floats are written with Rust's shortest round-trip formatting, so every
//! numeric field parses back to the exact bit pattern that produced it.
//! The manifest is a small TOML sidecar written before any result file, so
//! an interrupted run is detectable; it is the only output containing
//! wall-clock information.

use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Shortest decimal form of a 64-bit float that parses back bit-exactly.
pub fn float_field(v: f64) -> String {
    format!("{v}")
}

/// In-memory CSV builder with a fixed column count.
#[derive(Debug, Clone)]
pub struct Csv {
    columns: usize,
    text: String,
}

impl Csv {
    pub fn new(header: &[&str]) -> Self {
        let mut text = header.join(",");
        text.push('\n');
        Self { columns: header.len(), text }
    }

    /// Append one row; the field count must match the header.
    pub fn push_row(&mut self, fields: &[String]) -> Result<()> {
        if fields.len() != self.columns {
            return Err(Error::internal(format!(
                "csv row has {} fields, header has {}",
                fields.len(),
                self.columns
            )));
        }
        self.text.push_str(&fields.join(","));
        self.text.push('\n');
        Ok(())
    }

    pub fn into_string(self) -> String {
        self.text
    }
}

/// Create the parent directory if needed and write the file.
pub fn write_file(path: &Path, contents: &str) -> Result<()> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent)
                .map_err(|e| Error::io(parent.display().to_string(), e))?;
        }
    }
    std::fs::write(path, contents).map_err(|e| Error::io(path.display().to_string(), e))
}

/// One run's provenance sidecar.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool_version: String,
    /// Canonical configuration hash, 16 hex digits.
    pub config_hash: String,
    /// Master seed, decimal (kept textual so the full 64-bit range fits).
    pub master_seed: String,
    /// Seconds since the Unix epoch when the run started.
    pub timestamp_unix_s: i64,
    pub subcommand: String,
    /// Files this run will write, relative to the output directory.
    pub outputs: Vec<String>,
}

impl RunManifest {
    pub fn new(config_hash: u64, master_seed: u64, subcommand: &str, outputs: &[&str]) -> Self {
        let timestamp_unix_s = SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map(|d| d.as_secs() as i64)
            .unwrap_or(0);
        Self {
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            config_hash: format!("{config_hash:016x}"),
            master_seed: master_seed.to_string(),
            timestamp_unix_s,
            subcommand: subcommand.to_string(),
            outputs: outputs.iter().map(|s| s.to_string()).collect(),
        }
    }

    /// Write `manifest.toml` into the output directory, returning its path.
    /// Call this before writing any result file.
    pub fn write(&self, out_dir: &Path) -> Result<PathBuf> {
        let path = out_dir.join("manifest.toml");
        let text = toml::to_string_pretty(self)
            .map_err(|e| Error::internal(format!("manifest serialization: {e}")))?;
        write_file(&path, &text)?;
        Ok(path)
    }
}

/// Equal-width histogram over [lo, hi); values outside are counted in the
/// nearest edge bin so totals always match the input length.
pub fn histogram(values: &[f64], lo: f64, hi: f64, bins: usize) -> Result<Vec<(f64, f64, usize)>> {
    if bins == 0 {
        return Err(Error::domain("histogram needs at least one bin"));
    }
    if !(hi > lo) || !lo.is_finite() || !hi.is_finite() {
        return Err(Error::domain(format!("histogram bounds must be finite with hi > lo, got [{lo}, {hi})")));
    }
    let width = (hi - lo) / bins as f64;
    let mut counts = vec![0usize; bins];
    for &v in values {
        let idx = ((v - lo) / width).floor();
        let idx = (idx.max(0.0) as usize).min(bins - 1);
        counts[idx] += 1;
    }
    Ok(counts
        .into_iter()
        .enumerate()
        .map(|(i, c)| (lo + i as f64 * width, lo + (i + 1) as f64 * width, c))
        .collect())
}
