use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use super::run::EstimateSummary;
use crate::error::{Error, Result};

pub const RESULT_COLUMNS: [&str; 12] = [
    "estimator",
    "level",
    "truth",
    "mean_estimate",
    "bias",
    "bias_ci_lo",
    "bias_ci_hi",
    "sd",
    "sd_ci_lo",
    "sd_ci_hi",
    "n_trials",
    "n_failed",
];

/// Writes the results table. Floats use the shortest round-trip form, so
/// equal summaries give identical bytes.
pub fn write_summary_csv<W: Write>(s: &EstimateSummary, sink: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(sink);
    w.write_record(RESULT_COLUMNS)?;
    for r in &s.rows {
        w.write_record([
            r.estimator.name().to_string(),
            r.level.name().to_string(),
            r.truth.to_string(),
            r.mean_estimate.to_string(),
            r.bias.to_string(),
            r.bias_ci_lo.to_string(),
            r.bias_ci_hi.to_string(),
            r.sd.to_string(),
            r.sd_ci_lo.to_string(),
            r.sd_ci_hi.to_string(),
            r.n_trials.to_string(),
            r.n_failed.to_string(),
        ])?;
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}

/// Writes the CSV to `csv_path` and the full summary, config included, to
/// the same path with a `.json` extension. Returns the sidecar path.
pub fn emit_results(s: &EstimateSummary, csv_path: &Path) -> Result<PathBuf> {
    let sidecar = csv_path.with_extension("json");
    if sidecar == csv_path {
        return Err(Error::param(format!(
            "{}: results path must not end in .json",
            csv_path.display()
        )));
    }
    let file = File::create(csv_path).map_err(|e| Error::io(csv_path, e))?;
    write_summary_csv(s, BufWriter::new(file)).map_err(|e| with_path(e, csv_path))?;

    let file = File::create(&sidecar).map_err(|e| Error::io(&sidecar, e))?;
    let mut w = BufWriter::new(file);
    serde_json::to_writer_pretty(&mut w, s)?;
    w.write_all(b"\n")
        .and_then(|_| w.flush())
        .map_err(|e| Error::io(&sidecar, e))?;
    Ok(sidecar)
}

fn with_path(e: Error, path: &Path) -> Error {
    match e {
        Error::Csv(c) if c.is_io_error() => match c.into_kind() {
            csv::ErrorKind::Io(io) => Error::io(path, io),
            other => Error::Validation(format!("{}: {other:?}", path.display())),
        },
        other => other,
    }
}
