//! Output files and their manifests. Every file written at `PATH` gets a
//! sidecar `PATH.manifest.json` describing the run that produced it.

use std::fs::{File, OpenOptions};
use std::io::Write;
use std::path::Path;
use std::time::{SystemTime, UNIX_EPOCH};

use serde::Serialize;
use serde_json::Value;

#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub parameters: Value,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    pub version: &'static str,
    /// Only with `--timing`, so that identical runs give identical files.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub timestamp: Option<String>,
    pub outputs: Vec<String>,
}

impl RunManifest {
    pub fn new(command: &str, parameters: &impl Serialize, seed: Option<u64>, timing: bool) -> Self {
        let timestamp = timing.then(|| {
            let secs = SystemTime::now()
                .duration_since(UNIX_EPOCH)
                .map(|d| d.as_secs())
                .unwrap_or(0);
            format!("unix:{secs}")
        });
        RunManifest {
            command: command.to_string(),
            parameters: serde_json::to_value(parameters).unwrap_or(Value::Null),
            seed,
            version: env!("CARGO_PKG_VERSION"),
            timestamp,
            outputs: Vec::new(),
        }
    }
}

fn io_err(path: &str, e: impl std::fmt::Display) -> String {
    format!("cannot write {path}: {e}")
}

/// Write `manifest` next to each of its outputs.
pub fn write_manifests(manifest: &RunManifest) -> Result<(), String> {
    let text = serde_json::to_string_pretty(manifest).map_err(|e| e.to_string())? + "\n";
    for out in &manifest.outputs {
        let path = format!("{out}.manifest.json");
        std::fs::write(&path, &text).map_err(|e| io_err(&path, e))?;
    }
    Ok(())
}

pub fn write_text(path: &str, text: &str) -> Result<(), String> {
    std::fs::write(path, text).map_err(|e| io_err(path, e))
}

/// CSV rows sharing one header. Rows must list the header's columns in order.
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn from_pairs(rows: Vec<Vec<(String, String)>>) -> Result<Self, String> {
        let header: Vec<String> = rows
            .first()
            .map(|r| r.iter().map(|(k, _)| k.clone()).collect())
            .unwrap_or_default();
        let mut out = Vec::with_capacity(rows.len());
        for row in rows {
            if row.len() != header.len() || row.iter().zip(&header).any(|((k, _), h)| k != h) {
                return Err("grid points produced different columns; split the sweep".into());
            }
            out.push(row.into_iter().map(|(_, v)| v).collect());
        }
        Ok(Table { header, rows: out })
    }

    fn write_to(&self, w: impl Write, with_header: bool) -> Result<(), String> {
        let mut csv = csv::Writer::from_writer(w);
        if with_header {
            csv.write_record(&self.header).map_err(|e| e.to_string())?;
        }
        for row in &self.rows {
            csv.write_record(row).map_err(|e| e.to_string())?;
        }
        csv.flush().map_err(|e| e.to_string())
    }

    pub fn render(&self) -> Result<String, String> {
        let mut buf = Vec::new();
        self.write_to(&mut buf, true)?;
        String::from_utf8(buf).map_err(|e| e.to_string())
    }

    /// Replace `path` with this table.
    pub fn write(&self, path: &str) -> Result<(), String> {
        let file = File::create(path).map_err(|e| io_err(path, e))?;
        self.write_to(file, true)
    }

    /// Append rows to `path`, writing the header only when the file is new or empty.
    pub fn append(&self, path: &str) -> Result<(), String> {
        let fresh = Path::new(path).metadata().map(|m| m.len() == 0).unwrap_or(true);
        let file = OpenOptions::new()
            .create(true)
            .append(true)
            .open(path)
            .map_err(|e| io_err(path, e))?;
        self.write_to(file, fresh)
    }
}
