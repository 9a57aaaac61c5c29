use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::config::Emit;
use crate::experiment::{Summary, TrialResult};

#[derive(Debug, Error)]
#[error("cannot write {path}: {source}")]
pub struct EmitError {
    pub path: PathBuf,
    #[source]
    pub source: std::io::Error,
}

/// `trial,theta_err_deg[,runtime_ns]` with a header and LF endings. Errors
/// are written with 17 significant digits; failed trials as `nan`.
pub fn csv_string(results: &[TrialResult], timing: bool) -> String {
    let mut out = String::with_capacity(32 * (results.len() + 1));
    out.push_str(if timing {
        "trial,theta_err_deg,runtime_ns\n"
    } else {
        "trial,theta_err_deg\n"
    });
    for r in results {
        let _ = write!(out, "{},", r.trial);
        if r.failed() {
            out.push_str("nan");
        } else {
            let _ = write!(out, "{:.16e}", r.theta_err_deg);
        }
        if timing {
            match r.runtime_ns {
                Some(t) => {
                    let _ = write!(out, ",{t}");
                }
                None => out.push(','),
            }
        }
        out.push('\n');
    }
    out
}

/// Pretty-printed summary; keys follow the struct field order.
pub fn json_string(summary: &Summary) -> String {
    let mut s = serde_json::to_string_pretty(summary).expect("summary serializes");
    s.push('\n');
    s
}

/// Writes `STEM.csv` and/or `STEM.json`; returns the written paths.
pub fn emit_results(
    summary: &Summary,
    results: &[TrialResult],
    stem: &Path,
    emit: Emit,
) -> Result<Vec<PathBuf>, EmitError> {
    let mut written = Vec::new();
    let mut put = |ext: &str, body: String| -> Result<(), EmitError> {
        let path = stem.with_extension(ext);
        fs::write(&path, body).map_err(|source| EmitError {
            path: path.clone(),
            source,
        })?;
        written.push(path);
        Ok(())
    };
    if emit.csv() {
        put("csv", csv_string(results, summary.config.timing))?;
    }
    if emit.json() {
        put("json", json_string(summary))?;
    }
    Ok(written)
}
