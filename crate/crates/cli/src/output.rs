use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::config::{ExperimentConfig, Format};
use crate::CliError;

/// 17 significant digits, enough to read every `f64` back exactly.
pub fn fmt_float(v: f64) -> String {
    format!("{v:.16e}")
}

/// A CSV cell.
pub enum Cell {
    Num(f64),
    Text(String),
    Empty,
}

impl Cell {
    fn render(&self) -> String {
        match self {
            Cell::Num(v) => fmt_float(*v),
            Cell::Text(s) => s.clone(),
            Cell::Empty => String::new(),
        }
    }
}

pub fn csv(header: &[&str], rows: impl IntoIterator<Item = Vec<Cell>>) -> String {
    let mut out = header.join(",");
    out.push('\n');
    for row in rows {
        let line: Vec<String> = row.iter().map(Cell::render).collect();
        let _ = writeln!(out, "{}", line.join(","));
    }
    out
}

pub fn json<T: Serialize>(value: &T) -> Result<String, CliError> {
    let mut s = serde_json::to_string_pretty(value).map_err(|e| CliError::Io(e.to_string()))?;
    s.push('\n');
    Ok(s)
}

/// `dir/stem{suffix}.ext` next to `path`.
pub fn sibling(path: &Path, suffix: &str, format: Format) -> PathBuf {
    let stem = path.file_stem().map_or_else(|| "out".into(), |s| s.to_string_lossy().into_owned());
    path.with_file_name(format!("{stem}{suffix}.{}", format.extension()))
}

pub fn manifest_path(path: &Path) -> PathBuf {
    let name = path.file_name().map_or_else(|| "out".into(), |s| s.to_string_lossy().into_owned());
    path.with_file_name(format!("{name}.manifest.json"))
}

#[derive(Debug, Clone, Serialize)]
pub struct RowStatusEntry {
    pub r: f64,
    pub status: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunManifest<'a> {
    pub tool: &'static str,
    pub version: &'static str,
    pub subcommand: &'static str,
    pub output: String,
    pub config: &'a crate::config::RawConfig,
    pub wall_time_seconds: f64,
    pub rows: Vec<RowStatusEntry>,
}

pub fn write_file(path: &Path, contents: &str) -> Result<(), CliError> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| CliError::Io(format!("{}: {e}", dir.display())))?;
    }
    std::fs::write(path, contents).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

/// Writes `contents` to `path` and its manifest beside it.
pub fn emit(
    cfg: &ExperimentConfig,
    path: &Path,
    contents: &str,
    wall_time_seconds: f64,
    rows: Vec<RowStatusEntry>,
) -> Result<(), CliError> {
    emit_with(cfg, cfg.resolved(), path, contents, wall_time_seconds, rows)
}

/// Like [`emit`], but records `config` in the manifest instead of the full
/// resolved configuration of `cfg`.
pub fn emit_with(
    cfg: &ExperimentConfig,
    config: &crate::config::RawConfig,
    path: &Path,
    contents: &str,
    wall_time_seconds: f64,
    rows: Vec<RowStatusEntry>,
) -> Result<(), CliError> {
    write_file(path, contents)?;
    let manifest = RunManifest {
        tool: env!("CARGO_PKG_NAME"),
        version: env!("CARGO_PKG_VERSION"),
        subcommand: cfg.command.name(),
        output: path.display().to_string(),
        config,
        wall_time_seconds,
        rows,
    };
    write_file(&manifest_path(path), &json(&manifest)?)
}
