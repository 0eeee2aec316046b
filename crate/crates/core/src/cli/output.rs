use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::cli::config::RunConfig;
use crate::error::Result;

pub const SCHEMA_VERSION: &str = "1.0.0";

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    F(f64),
    I(i64),
    S(String),
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::F(x)
    }
}

impl From<usize> for Cell {
    fn from(x: usize) -> Self {
        Cell::I(x as i64)
    }
}

impl From<&str> for Cell {
    fn from(x: &str) -> Self {
        Cell::S(x.to_string())
    }
}

/// 17 significant digits.
pub fn fmt_f64(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        x.to_string()
    }
}

fn fmt_cell(c: &Cell) -> String {
    match c {
        Cell::F(x) => fmt_f64(*x),
        Cell::I(i) => i.to_string(),
        Cell::S(s) => s.clone(),
    }
}

/// `# schema=<name>@1.0.0`, a header row and comma-separated rows.
pub fn render_csv(schema: &str, header: &[&str], rows: &[Vec<Cell>]) -> String {
    let mut out = format!("# schema={schema}@{SCHEMA_VERSION}\n{}\n", header.join(","));
    for row in rows {
        debug_assert_eq!(row.len(), header.len());
        let line: Vec<String> = row.iter().map(fmt_cell).collect();
        let _ = writeln!(out, "{}", line.join(","));
    }
    out
}

/// Collects the files one command writes and produces its manifest.
pub struct RunRecorder {
    dir: PathBuf,
    command: String,
    id: String,
    started: Instant,
    started_unix: u64,
    outputs: Vec<String>,
    warnings: Vec<String>,
}

#[derive(Serialize)]
struct Manifest<'a> {
    schema: String,
    command: &'a str,
    id: &'a str,
    version: &'static str,
    config_sha256: String,
    config: &'a RunConfig,
    started_unix: u64,
    wall_time_s: f64,
    tolerances: serde_json::Value,
    outputs: &'a [String],
    warnings: &'a [String],
    summary: serde_json::Value,
}

impl RunRecorder {
    pub fn new(cfg: &RunConfig, command: &str, id: &str) -> Result<Self> {
        std::fs::create_dir_all(&cfg.output_dir)?;
        Ok(RunRecorder {
            dir: cfg.output_dir.clone(),
            command: command.to_string(),
            id: id.to_string(),
            started: Instant::now(),
            started_unix: SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0),
            outputs: Vec::new(),
            warnings: Vec::new(),
        })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn csv(&mut self, file: &str, schema: &str, header: &[&str], rows: &[Vec<Cell>]) -> Result<PathBuf> {
        let path = self.dir.join(file);
        std::fs::write(&path, render_csv(schema, header, rows))?;
        self.outputs.push(file.to_string());
        Ok(path)
    }

    pub fn warn(&mut self, msg: impl Into<String>) {
        let msg = msg.into();
        eprintln!("warning: {msg}");
        self.warnings.push(msg);
    }

    pub fn finish(self, cfg: &RunConfig, summary: serde_json::Value) -> Result<PathBuf> {
        let canonical = cfg.canonical();
        let digest = Sha256::digest(canonical.as_bytes());
        let hex: String = digest.iter().map(|b| format!("{b:02x}")).collect();
        let manifest = Manifest {
            schema: format!("manifest@{SCHEMA_VERSION}"),
            command: &self.command,
            id: &self.id,
            version: env!("CARGO_PKG_VERSION"),
            config_sha256: hex,
            config: cfg,
            started_unix: self.started_unix,
            wall_time_s: self.started.elapsed().as_secs_f64(),
            tolerances: tolerances(cfg),
            outputs: &self.outputs,
            warnings: &self.warnings,
            summary,
        };
        let path = self.dir.join(format!("manifest_{}.json", self.id));
        std::fs::write(&path, serde_json::to_string_pretty(&manifest)?)?;
        Ok(path)
    }
}

fn tolerances(cfg: &RunConfig) -> serde_json::Value {
    use crate::stability::{KERNEL_GAP, NEGATIVE_THRESHOLD, SPURIOUS_LIMIT, SYMMETRY_TOLERANCE, UNSTABLE_THRESHOLD};
    serde_json::json!({
        "newton": cfg.newton_tolerance,
        "continuum_floor": crate::linear::CONTINUUM_FLOOR,
        "negative_threshold": NEGATIVE_THRESHOLD,
        "unstable_threshold": UNSTABLE_THRESHOLD,
        "symmetry_tolerance": SYMMETRY_TOLERANCE,
        "spurious_limit": SPURIOUS_LIMIT,
        "kernel_gap": KERNEL_GAP,
        "transition_tolerance": cfg.transition_tolerance,
    })
}
