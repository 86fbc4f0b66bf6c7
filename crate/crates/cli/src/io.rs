//! Matrix-file and trial-CSV formats.
//!
//! Matrix files: a `rows cols` header line, then `rows * cols`
//! whitespace-separated reals in row-major order. Values are printed at 17
//! significant digits, so write-then-read round-trips bit-exactly.
//!
//! Trial CSVs: `method,m,trial,seed,iterations,nmse,wall_time_s`, rows
//! sorted by (method, m, trial). Failed trials leave the nmse field empty.
//! Wall times are never written to the file (they are reported on stdout
//! instead) so identical configs produce byte-identical CSVs.

use std::fs;
use std::path::Path;

use orka_core::experiments::TrialRecord;
use orka_core::matrix::{DenseMatrix, Vector};

use crate::CliError;

/// Format a real at 17 significant digits (round-trip exact for f64).
pub fn format_g17(v: f64) -> String {
    format!("{v:.16e}")
}

/// Parse a matrix file. Reports parse failures with their line number and
/// count mismatches against the header as dimension errors.
pub fn load_matrix_file(path: &Path) -> Result<DenseMatrix, CliError> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
    let mut lines = text.lines().enumerate();

    let (_, header) = lines
        .next()
        .ok_or_else(|| CliError::Parse(format!("{}: empty file", path.display())))?;
    let mut parts = header.split_whitespace();
    let rows: usize = parts
        .next()
        .and_then(|t| t.parse().ok())
        .ok_or_else(|| CliError::Parse(format!("{}:1: malformed header", path.display())))?;
    let cols: usize = parts
        .next()
        .and_then(|t| t.parse().ok())
        .ok_or_else(|| CliError::Parse(format!("{}:1: malformed header", path.display())))?;
    if parts.next().is_some() {
        return Err(CliError::Parse(format!(
            "{}:1: header must be exactly \"rows cols\"",
            path.display()
        )));
    }
    if rows == 0 || cols == 0 {
        return Err(CliError::Parse(format!(
            "{}:1: dimensions must be positive",
            path.display()
        )));
    }

    let expected = rows * cols;
    let mut data = Vec::with_capacity(expected);
    let mut last_line = 1;
    for (idx, line) in lines {
        let line_no = idx + 1;
        for token in line.split_whitespace() {
            if data.len() == expected {
                return Err(CliError::Parse(format!(
                    "{}:{line_no}: dimension mismatch: more than {expected} values",
                    path.display()
                )));
            }
            let v: f64 = token.parse().map_err(|_| {
                CliError::Parse(format!(
                    "{}:{line_no}: invalid real '{token}'",
                    path.display()
                ))
            })?;
            if !v.is_finite() {
                return Err(CliError::Parse(format!(
                    "{}:{line_no}: non-finite value '{token}'",
                    path.display()
                )));
            }
            data.push(v);
        }
        if line.split_whitespace().next().is_some() {
            last_line = line_no;
        }
    }
    if data.len() != expected {
        return Err(CliError::Parse(format!(
            "{}:{last_line}: dimension mismatch: header promises {expected} values, found {}",
            path.display(),
            data.len()
        )));
    }
    DenseMatrix::from_vec(rows, cols, data)
        .map_err(|e| CliError::Parse(format!("{}: {e}", path.display())))
}

/// Load an `n x 1` matrix file as a vector.
pub fn load_vector_file(path: &Path) -> Result<Vector, CliError> {
    let m = load_matrix_file(path)?;
    if m.cols() != 1 {
        return Err(CliError::Parse(format!(
            "{}: expected a single-column matrix, got {} columns",
            path.display(),
            m.cols()
        )));
    }
    Vector::from_vec(m.as_slice().to_vec())
        .map_err(|e| CliError::Parse(format!("{}: {e}", path.display())))
}

pub fn write_matrix_file(path: &Path, m: &DenseMatrix) -> Result<(), CliError> {
    let mut out = String::new();
    out.push_str(&format!("{} {}\n", m.rows(), m.cols()));
    for i in 0..m.rows() {
        let line: Vec<String> = m.row(i).iter().map(|&v| format_g17(v)).collect();
        out.push_str(&line.join(" "));
        out.push('\n');
    }
    fs::write(path, out)
        .map_err(|e| CliError::Runtime(format!("cannot write {}: {e}", path.display())))
}

pub fn write_vector_file(path: &Path, v: &Vector) -> Result<(), CliError> {
    let m = DenseMatrix::from_vec(v.len(), 1, v.as_slice().to_vec())
        .expect("vectors are valid single-column matrices");
    write_matrix_file(path, &m)
}

/// Render trial records as CSV, optionally preceded by a `#` manifest line.
pub fn render_trial_csv(records: &[TrialRecord], manifest: Option<&str>) -> String {
    let mut sorted: Vec<&TrialRecord> = records.iter().collect();
    sorted.sort_by(|a, b| {
        a.method
            .name()
            .cmp(b.method.name())
            .then(a.m.cmp(&b.m))
            .then(a.trial.cmp(&b.trial))
    });

    let mut out = String::new();
    if let Some(line) = manifest {
        out.push_str("# ");
        out.push_str(line);
        out.push('\n');
    }
    out.push_str("method,m,trial,seed,iterations,nmse,wall_time_s\n");
    for r in sorted {
        let nmse = if r.nmse.is_finite() {
            format_g17(r.nmse)
        } else {
            String::new()
        };
        out.push_str(&format!(
            "{},{},{},{},{},{},\n",
            r.method.name(),
            r.m,
            r.trial,
            r.seed,
            r.iterations,
            nmse
        ));
    }
    out
}

/// Write trial records to `path` (header plus one row per record).
pub fn write_trial_csv(records: &[TrialRecord], path: &Path) -> Result<(), CliError> {
    fs::write(path, render_trial_csv(records, None))
        .map_err(|e| CliError::Runtime(format!("cannot write {}: {e}", path.display())))
}

/// FNV-1a hash of the raw config text, for the run manifest.
pub fn config_hash(text: &str) -> u64 {
    let mut hash: u64 = 0xcbf2_9ce4_8422_2325;
    for byte in text.bytes() {
        hash ^= byte as u64;
        hash = hash.wrapping_mul(0x0000_0100_0000_01b3);
    }
    hash
}
