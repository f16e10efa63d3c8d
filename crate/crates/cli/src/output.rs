//! JSON and CSV writers. Floats are written with `{:?}`, which round-trips
//! every `f64` exactly.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::Path;

use adia_core::criterion::{ExperimentReport, SearchReport};
use adia_core::ScanReport;
use serde::Serialize;

use crate::config::config_hash;
use crate::error::{CliError, Result};

fn create(path: &Path) -> Result<BufWriter<File>> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).map_err(|source| CliError::Write { path: parent.to_path_buf(), source })?;
    }
    let file = File::create(path).map_err(|source| CliError::Write { path: path.to_path_buf(), source })?;
    Ok(BufWriter::new(file))
}

pub fn num(x: f64) -> String {
    format!("{x:?}")
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    let mut w = create(path)?;
    w.write_all(text.as_bytes())
        .and_then(|_| w.flush())
        .map_err(|source| CliError::Write { path: path.to_path_buf(), source })
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut w = create(path)?;
    serde_json::to_writer_pretty(&mut w, value)?;
    w.write_all(b"\n").and_then(|_| w.flush()).map_err(|source| CliError::Write { path: path.to_path_buf(), source })
}

fn csv_writer(path: &Path, header: &[&str]) -> Result<csv::Writer<BufWriter<File>>> {
    let mut w = csv::Writer::from_writer(create(path)?);
    w.write_record(header)?;
    Ok(w)
}

fn finish(mut w: csv::Writer<BufWriter<File>>, path: &Path) -> Result<()> {
    w.flush().map_err(|source| CliError::Write { path: path.to_path_buf(), source })
}

/// One row per (T, label).
pub fn write_probabilities(path: &Path, report: &ExperimentReport) -> Result<()> {
    let mut w = csv_writer(path, &["T", "label", "probability"])?;
    for row in &report.sweep {
        for (i, p) in row.probabilities.iter().enumerate() {
            w.write_record([num(row.t), report.label_string(i), num(*p)])?;
        }
    }
    finish(w, path)
}

/// The smallest non-degenerate element at each grid point, or every row
/// when `all_pairs` is set.
pub fn write_scan(path: &Path, scan: &ScanReport, all_pairs: bool) -> Result<()> {
    let mut w = csv_writer(path, &["s", "pair_i", "pair_j", "abs_element"])?;
    let per_s = scan.pairs.len().max(1);
    for chunk in scan.rows.chunks(per_s) {
        if all_pairs {
            for r in chunk {
                w.write_record([num(r.s), r.pair_i.to_string(), r.pair_j.to_string(), num(r.abs_element)])?;
            }
        } else if let Some(r) = chunk
            .iter()
            .filter(|r| !r.degenerate)
            .min_by(|a, b| a.abs_element.total_cmp(&b.abs_element))
        {
            w.write_record([num(r.s), r.pair_i.to_string(), r.pair_j.to_string(), num(r.abs_element)])?;
        }
    }
    finish(w, path)
}

pub fn write_search_hits(path: &Path, report: &SearchReport) -> Result<()> {
    let mut w = csv_writer(path, &["trial", "seed", "config_hash", "violating_label", "probability", "T"])?;
    for hit in &report.hits {
        let label = hit.violating_label.iter().map(|n| n.to_string()).collect::<Vec<_>>().join(",");
        w.write_record([
            hit.trial.to_string(),
            hit.seed.to_string(),
            config_hash(&hit.config)?,
            label,
            num(hit.probability),
            num(hit.t),
        ])?;
    }
    finish(w, path)
}
