//! Result and matrix file I/O.
//!
//! CSV is the plotting contract; a JSON sidecar next to each CSV records
//! the full configuration (seed included) so any file can be regenerated.
//! All writers are deterministic: identical inputs produce identical
//! bytes. Floats are printed in shortest round-trip form, so nothing is
//! lost between a result struct and its file.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use num_complex::Complex;
use serde::Serialize;

use sampdec_core::complex::CMatrix;
use sampdec_core::Matrix;

use crate::config::ExperimentConfig;
use crate::error::{CliError, Result};
use crate::experiment::{ExperimentResult, LlrRow, PairedRow, SnrRow};

pub const BER_CSV_HEADER: &str =
    "snr_db,trials,bit_errors,sym_errors,frame_errors,ml_agree,mean_list_size,wall_ms";

pub const LLR_CSV_HEADER: &str = "k,snr_db,trials,compared_bits,mean_abs_dllr,max_abs_dllr,\
sign_agreement,clamp_rate,mean_near,mean_far,wall_ms";

fn io_ctx(path: &Path) -> impl FnOnce(std::io::Error) -> CliError + '_ {
    move |e| CliError::runtime(format!("{}: {}", path.display(), e))
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(io_ctx(path))
}

fn opt_u64(v: Option<u64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn opt_f64(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// Renders the error-rate CSV; an empty result is just the header line.
pub fn ber_csv(result: &ExperimentResult) -> String {
    let mut out = String::from(BER_CSV_HEADER);
    out.push('\n');
    for r in &result.rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            r.snr_db,
            r.trials,
            r.bit_errors,
            r.sym_errors,
            r.frame_errors,
            opt_u64(r.ml_agree),
            r.mean_list_size,
            r.wall_ms
        );
    }
    out
}

/// Parses a CSV produced by [`ber_csv`] back into a result.
pub fn parse_ber_csv(text: &str) -> Result<ExperimentResult> {
    let mut lines = text.lines();
    let header = lines.next().unwrap_or_default();
    if header != BER_CSV_HEADER {
        return Err(CliError::runtime(format!(
            "unexpected CSV header '{}'",
            header
        )));
    }
    let mut rows = Vec::new();
    for (i, line) in lines.enumerate() {
        if line.is_empty() {
            continue;
        }
        let f: Vec<&str> = line.split(',').collect();
        if f.len() != 8 {
            return Err(CliError::runtime(format!(
                "CSV line {} has {} fields, expected 8",
                i + 2,
                f.len()
            )));
        }
        let bad = |what: &str| CliError::runtime(format!("CSV line {}: bad {}", i + 2, what));
        rows.push(SnrRow {
            snr_db: f[0].parse().map_err(|_| bad("snr_db"))?,
            trials: f[1].parse().map_err(|_| bad("trials"))?,
            bit_errors: f[2].parse().map_err(|_| bad("bit_errors"))?,
            sym_errors: f[3].parse().map_err(|_| bad("sym_errors"))?,
            frame_errors: f[4].parse().map_err(|_| bad("frame_errors"))?,
            ml_agree: if f[5].is_empty() {
                None
            } else {
                Some(f[5].parse().map_err(|_| bad("ml_agree"))?)
            },
            mean_list_size: f[6].parse().map_err(|_| bad("mean_list_size"))?,
            wall_ms: f[7].parse().map_err(|_| bad("wall_ms"))?,
        });
    }
    Ok(ExperimentResult { rows })
}

pub fn llr_csv(rows: &[LlrRow]) -> String {
    let mut out = String::from(LLR_CSV_HEADER);
    out.push('\n');
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{}",
            r.k,
            r.snr_db,
            r.trials,
            r.compared_bits,
            opt_f64(r.mean_abs_dllr),
            opt_f64(r.max_abs_dllr),
            r.sign_agreement,
            r.clamp_rate,
            r.mean_near,
            r.mean_far,
            r.wall_ms
        );
    }
    out
}

fn sidecar_path(path: &Path) -> std::path::PathBuf {
    path.with_extension("json")
}

#[derive(Serialize)]
struct Sidecar<'a, R: Serialize> {
    config: &'a ExperimentConfig,
    rows: &'a [R],
}

fn write_sidecar<R: Serialize>(path: &Path, cfg: &ExperimentConfig, rows: &[R]) -> Result<()> {
    let side = sidecar_path(path);
    let payload = Sidecar { config: cfg, rows };
    let mut text = serde_json::to_string_pretty(&payload)
        .map_err(|e| CliError::runtime(format!("{}: {}", side.display(), e)))?;
    text.push('\n');
    write_text(&side, &text)
}

/// Writes the error-rate CSV plus its JSON sidecar.
pub fn persist_results(cfg: &ExperimentConfig, result: &ExperimentResult, path: &Path) -> Result<()> {
    write_text(path, &ber_csv(result))?;
    write_sidecar(path, cfg, &result.rows)
}

/// Writes the soft-output fidelity CSV plus its JSON sidecar.
pub fn persist_llr(cfg: &ExperimentConfig, rows: &[LlrRow], path: &Path) -> Result<()> {
    write_text(path, &llr_csv(rows))?;
    write_sidecar(path, cfg, rows)
}

/// Writes a paired-comparison record as JSON (no CSV contract for it).
pub fn persist_paired(cfg: &ExperimentConfig, rows: &[PairedRow], path: &Path) -> Result<()> {
    let payload = Sidecar { config: cfg, rows };
    let mut text = serde_json::to_string_pretty(&payload)
        .map_err(|e| CliError::runtime(format!("{}: {}", path.display(), e)))?;
    text.push('\n');
    write_text(path, &text)
}

fn tokenize(path: &Path) -> Result<Vec<f64>> {
    let text = fs::read_to_string(path).map_err(io_ctx(path))?;
    text.split_whitespace()
        .map(|t| {
            t.parse::<f64>()
                .map_err(|_| CliError::runtime(format!("{}: bad number '{}'", path.display(), t)))
        })
        .collect()
}

fn check_header(path: &Path, tokens: &[f64], per_entry: usize) -> Result<(usize, usize)> {
    if tokens.len() < 2 {
        return Err(CliError::runtime(format!(
            "{}: expected a 'rows cols' header",
            path.display()
        )));
    }
    let rows = tokens[0] as usize;
    let cols = tokens[1] as usize;
    if tokens[0].fract() != 0.0 || tokens[1].fract() != 0.0 || rows == 0 || cols == 0 {
        return Err(CliError::runtime(format!(
            "{}: bad dimensions {} x {}",
            path.display(),
            tokens[0],
            tokens[1]
        )));
    }
    let need = rows * cols * per_entry;
    if tokens.len() - 2 != need {
        return Err(CliError::runtime(format!(
            "{}: {} x {} needs {} entries, found {}",
            path.display(),
            rows,
            cols,
            need,
            tokens.len() - 2
        )));
    }
    Ok((rows, cols))
}

/// Reads `rows cols` followed by row-major reals.
pub fn read_matrix(path: &Path) -> Result<Matrix<f64>> {
    let tokens = tokenize(path)?;
    let (rows, cols) = check_header(path, &tokens, 1)?;
    Ok(Matrix::new(rows, cols, tokens[2..].to_vec())?)
}

/// Reads `rows cols` followed by row-major re,im pairs.
pub fn read_cmatrix(path: &Path) -> Result<CMatrix<f64>> {
    let tokens = tokenize(path)?;
    let (rows, cols) = check_header(path, &tokens, 2)?;
    let data: Vec<Complex<f64>> = tokens[2..]
        .chunks(2)
        .map(|p| Complex::new(p[0], p[1]))
        .collect();
    Ok(CMatrix::new(rows, cols, data)?)
}

/// Reads a vector stored as an `n 1` or `1 n` matrix.
pub fn read_vector(path: &Path) -> Result<Vec<f64>> {
    let tokens = tokenize(path)?;
    let (rows, cols) = check_header(path, &tokens, 1)?;
    if rows != 1 && cols != 1 {
        return Err(CliError::runtime(format!(
            "{}: expected a vector, found {} x {}",
            path.display(),
            rows,
            cols
        )));
    }
    Ok(tokens[2..].to_vec())
}

/// Reads a complex vector stored as `n 1` (or `1 n`) with re,im pairs.
pub fn read_cvector(path: &Path) -> Result<Vec<Complex<f64>>> {
    let tokens = tokenize(path)?;
    let (rows, cols) = check_header(path, &tokens, 2)?;
    if rows != 1 && cols != 1 {
        return Err(CliError::runtime(format!(
            "{}: expected a vector, found {} x {}",
            path.display(),
            rows,
            cols
        )));
    }
    Ok(tokens[2..].chunks(2).map(|p| Complex::new(p[0], p[1])).collect())
}

pub fn write_matrix(path: &Path, m: &Matrix<f64>) -> Result<()> {
    let mut out = format!("{} {}\n", m.rows(), m.cols());
    for i in 0..m.rows() {
        let line: Vec<String> = m.row(i).iter().map(|v| v.to_string()).collect();
        out.push_str(&line.join(" "));
        out.push('\n');
    }
    write_text(path, &out)
}

pub fn write_vector(path: &Path, v: &[f64]) -> Result<()> {
    let mut out = format!("{} 1\n", v.len());
    for x in v {
        let _ = writeln!(out, "{}", x);
    }
    write_text(path, &out)
}
