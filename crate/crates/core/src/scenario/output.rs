//! Trajectory CSV files and run summaries.

use std::fmt::Write as _;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{AlgVec, StateVec, ALG_NAMES, N_ALG, N_STATES, STATE_NAMES};
use crate::solver::{SimResult, SimStats};

/// `t` followed by the state and algebraic names, in storage order.
pub fn csv_header() -> String {
    std::iter::once("t")
        .chain(STATE_NAMES.iter().copied())
        .chain(ALG_NAMES.iter().copied())
        .collect::<Vec<_>>()
        .join(",")
}

/// Formats with 17 significant digits, enough to recover every `f64`
/// exactly.
pub fn format_value(v: f64) -> String {
    format!("{v:.16e}")
}

/// Writes one row per sample.
pub fn write_csv(path: &Path, result: &SimResult) -> Result<()> {
    let mut w = BufWriter::new(std::fs::File::create(path)?);
    writeln!(w, "{}", csv_header())?;
    let mut line = String::new();
    for ((t, x), a) in result.times.iter().zip(&result.states).zip(&result.algs) {
        line.clear();
        line.push_str(&format_value(*t));
        for v in x.as_slice().iter().chain(a.as_slice()) {
            line.push(',');
            let _ = write!(line, "{}", format_value(*v));
        }
        writeln!(w, "{line}")?;
    }
    w.flush()?;
    Ok(())
}

/// Reads a trajectory written by [`write_csv`]. Statistics are not stored
/// in the file and come back zeroed.
pub fn read_csv(path: &Path) -> Result<SimResult> {
    let file = BufReader::new(std::fs::File::open(path)?);
    let mut lines = file.lines();
    let header = lines
        .next()
        .ok_or_else(|| Error::Config(format!("{}: empty file", path.display())))??;
    if header.trim() != csv_header() {
        return Err(Error::Config(format!("{}: unexpected header", path.display())));
    }
    let mut result = SimResult {
        times: Vec::new(),
        states: Vec::new(),
        algs: Vec::new(),
        stats: SimStats::default(),
    };
    for (n, line) in lines.enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let values = line
            .split(',')
            .map(|s| s.trim().parse::<f64>())
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|e| Error::Config(format!("{}: line {}: {e}", path.display(), n + 2)))?;
        if values.len() != 1 + N_STATES + N_ALG {
            return Err(Error::Config(format!(
                "{}: line {}: expected {} columns, found {}",
                path.display(),
                n + 2,
                1 + N_STATES + N_ALG,
                values.len()
            )));
        }
        result.times.push(values[0]);
        result.states.push(StateVec::from_slice(&values[1..1 + N_STATES])?);
        result.algs.push(AlgVec::from_slice(&values[1 + N_STATES..])?);
    }
    Ok(result)
}

/// Serializes any summary record as TOML.
pub fn write_summary<T: Serialize>(path: &Path, summary: &T) -> Result<()> {
    let text = toml::to_string(summary).map_err(|e| Error::Io(e.to_string()))?;
    std::fs::write(path, text)?;
    Ok(())
}
