//! Shared plumbing: the exit-code error type, file loading, artifact
//! writing, and the flag parsers that clap leaves to us (anything that
//! can also arrive through the config file).

use std::fmt;
use std::path::Path;

use tilemv::exec::{Backend, HardwareProfile, Precision};
use tilemv::matrix::{parse_matrix_market, CsrMatrix};
use tilemv::perfmodel::{PerfTable, TableMode};

use crate::config::Config;

/// Errors split by exit code: `Usage` exits 2 (bad flags or config
/// values), library errors exit 3 when the input is at fault and 4
/// when a model table is stale or malformed.
#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Lib(tilemv::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Lib(e) if e.is_input_error() => 3,
            CliError::Lib(_) => 4,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(msg) => write!(f, "{msg}"),
            CliError::Lib(e) => write!(f, "{e}"),
        }
    }
}

impl From<tilemv::Error> for CliError {
    fn from(e: tilemv::Error) -> Self {
        CliError::Lib(e)
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Lib(tilemv::Error::Io(e))
    }
}

pub fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

/// Range checks for numeric flags; violations are usage errors, not
/// input errors, because the value came from the command line.
pub fn check_range(ok: bool, msg: &str) -> Result<(), CliError> {
    if ok {
        Ok(())
    } else {
        Err(usage(msg))
    }
}

pub fn load_hw(flag: Option<&Path>, cfg: &Config) -> Result<HardwareProfile, CliError> {
    let path = match flag {
        Some(p) => Some(p.to_path_buf()),
        None => cfg.path("hw")?,
    };
    let Some(path) = path else {
        return Ok(HardwareProfile::default());
    };
    let text = std::fs::read_to_string(&path)?;
    let hw: HardwareProfile =
        serde_json::from_str(&text).map_err(tilemv::Error::Json)?;
    hw.validate()?;
    Ok(hw)
}

pub fn load_matrix(path: &Path) -> Result<CsrMatrix, CliError> {
    let text = std::fs::read_to_string(path)?;
    Ok(parse_matrix_market(&text)?.to_csr())
}

/// Loads a performance table and holds it against the current
/// hardware. A fingerprint mismatch is fatal unless `--force`, which
/// downgrades it to a warning; a warp-size difference stays fatal
/// downstream regardless, since the packing law depends on it.
pub fn load_table(
    path: &Path,
    hw: &HardwareProfile,
    force: bool,
) -> Result<PerfTable, CliError> {
    let text = std::fs::read_to_string(path)?;
    let table = PerfTable::from_json(&text)?;
    match table.check_fingerprint(hw) {
        Ok(()) => {}
        Err(e) if force => eprintln!("tilemv: warning: {e} (continuing under --force)"),
        Err(e) => return Err(e.into()),
    }
    Ok(table)
}

pub fn parse_backend(name: &str) -> Result<Backend, CliError> {
    name.parse::<Backend>().map_err(|e| usage(e.to_string()))
}

pub fn parse_precision(name: &str) -> Result<Precision, CliError> {
    match name {
        "double" => Ok(Precision::Double),
        "single" => Ok(Precision::Single),
        other => Err(usage(format!(
            "unknown precision {other:?}, expected double or single"
        ))),
    }
}

pub fn parse_table_mode(name: &str) -> Result<TableMode, CliError> {
    match name {
        "cached" => Ok(TableMode::Cached),
        "uncached" => Ok(TableMode::Uncached),
        other => Err(usage(format!(
            "unknown table mode {other:?}, expected cached or uncached"
        ))),
    }
}

/// Shortest round-trip decimal for a score or residual; keeps CSV
/// files byte-stable across runs.
pub fn fmt_f64(v: f64) -> String {
    format!("{v}")
}

pub fn write_text(path: &Path, contents: &str) -> Result<(), CliError> {
    if let Some(dir) = path.parent() {
        if !dir.as_os_str().is_empty() {
            std::fs::create_dir_all(dir)?;
        }
    }
    std::fs::write(path, contents)?;
    Ok(())
}

/// Renders `header` plus one line per row into a trailing-newline CSV.
pub fn csv(header: &str, rows: impl IntoIterator<Item = String>) -> String {
    let mut out = String::from(header);
    out.push('\n');
    for row in rows {
        out.push_str(&row);
        out.push('\n');
    }
    out
}

/// Indices of the `k` largest values, score descending and index
/// ascending on ties.
pub fn top_k(values: &[f64], k: usize) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..values.len()).collect();
    idx.sort_by(|&a, &b| values[b].total_cmp(&values[a]).then(a.cmp(&b)));
    idx.truncate(k);
    idx
}

/// `[1, 2, 3]` for short vectors, a head-plus-count preview for long
/// ones; used when echoing results to stdout.
pub fn preview(values: &[f64]) -> String {
    let body = |vals: &[f64]| {
        vals.iter()
            .map(|v| fmt_f64(*v))
            .collect::<Vec<_>>()
            .join(", ")
    };
    if values.len() <= 16 {
        format!("[{}]", body(values))
    } else {
        format!("[{}, ...] ({} entries)", body(&values[..8]), values.len())
    }
}
