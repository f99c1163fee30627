//! CSV and JSON artifacts of an experiment, written under a lock file.

use std::fs::{self, File, OpenOptions};
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::harness::{RateReport, RungResult, StudyKind};

pub const CSV_HEADER: [&str; 8] = ["study", "rung_param", "error", "stderr", "residual_norm", "ratio", "n_paths", "seed"];

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Row {
    pub study: String,
    pub rung_param: f64,
    pub error: f64,
    pub stderr: f64,
    pub residual_norm: Option<f64>,
    pub ratio: Option<f64>,
    pub n_paths: usize,
    pub seed: u64,
}

pub fn rows(study: StudyKind, rungs: &[RungResult], n_paths: usize, seed: u64) -> Vec<Row> {
    rungs
        .iter()
        .map(|r| Row {
            study: study.label().to_string(),
            rung_param: r.param,
            error: r.error.value,
            stderr: r.error.stderr,
            residual_norm: r.residual.as_ref().map(|v| v.value),
            ratio: r.ratio(),
            n_paths,
            seed,
        })
        .collect()
}

#[derive(Serialize)]
struct JsonMirror<'a> {
    rows: &'a [Row],
    slope: f64,
    intercept: f64,
    r_squared: f64,
    dropped: &'a [f64],
}

/// Exclusive claim on an output directory, released on drop.
#[derive(Debug)]
pub struct DirLock {
    path: PathBuf,
}

impl DirLock {
    pub fn acquire(dir: &Path) -> Result<Self> {
        fs::create_dir_all(dir)?;
        let path = dir.join(".lock");
        match OpenOptions::new().write(true).create_new(true).open(&path) {
            Ok(mut f) => {
                writeln!(f, "{}", std::process::id())?;
                Ok(Self { path })
            }
            Err(e) if e.kind() == std::io::ErrorKind::AlreadyExists => Err(Error::Inconsistent(format!(
                "{} is locked by another experiment",
                dir.display()
            ))),
            Err(e) => Err(e.into()),
        }
    }
}

impl Drop for DirLock {
    fn drop(&mut self) {
        let _ = fs::remove_file(&self.path);
    }
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

pub fn write_csv(path: &Path, rows: &[Row]) -> Result<()> {
    let mut w = csv::Writer::from_writer(File::create(path)?);
    let io = |e: csv::Error| Error::Io(std::io::Error::other(e));
    w.write_record(CSV_HEADER).map_err(io)?;
    for r in rows {
        w.write_record([
            r.study.clone(),
            r.rung_param.to_string(),
            r.error.to_string(),
            r.stderr.to_string(),
            opt(r.residual_norm),
            opt(r.ratio),
            r.n_paths.to_string(),
            r.seed.to_string(),
        ])
        .map_err(io)?;
    }
    w.flush()?;
    Ok(())
}

/// Writes `<study>.csv` and `<study>.json` into `dir`.
pub fn write_artifacts(dir: &Path, study: StudyKind, rows: &[Row], rate: &RateReport) -> Result<(PathBuf, PathBuf)> {
    let _lock = DirLock::acquire(dir)?;
    let csv_path = dir.join(format!("{}.csv", study.label()));
    let json_path = dir.join(format!("{}.json", study.label()));
    write_csv(&csv_path, rows)?;
    let mirror = JsonMirror {
        rows,
        slope: rate.slope,
        intercept: rate.intercept,
        r_squared: rate.r_squared,
        dropped: &rate.dropped,
    };
    let text = serde_json::to_string_pretty(&mirror).map_err(|e| Error::Io(std::io::Error::other(e)))?;
    fs::write(&json_path, text + "\n")?;
    Ok((csv_path, json_path))
}
