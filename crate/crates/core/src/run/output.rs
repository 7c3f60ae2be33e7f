//! CSV and JSON artifact writers.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::Serialize;

use crate::error::Result;
use crate::riskmeasure::GridApproximation;

fn header(dim: usize) -> Vec<String> {
    (1..=dim).map(|j| format!("k_{j}")).collect()
}

fn row(point: &[f64]) -> Vec<String> {
    point.iter().map(|v| v.to_string()).collect()
}

/// Writes points as `k_1,...,k_l` rows.
pub fn write_points(path: &Path, dim: usize, points: &[Vec<f64>]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(header(dim))?;
    for p in points {
        w.write_record(row(p))?;
    }
    w.flush()?;
    Ok(())
}

/// Writes every lattice point with its label as `k_1,...,k_l,label`.
pub fn write_labels(path: &Path, approx: &GridApproximation) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    let mut head = header(approx.dim());
    head.push("label".into());
    w.write_record(head)?;
    for (point, label) in approx.labeled_points() {
        let mut r = row(&point);
        r.push(label.as_str().into());
        w.write_record(r)?;
    }
    w.flush()?;
    Ok(())
}

/// Pretty JSON with a trailing newline.
pub fn write_json<T: Serialize + ?Sized>(path: &Path, value: &T) -> Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    serde_json::to_writer_pretty(&mut out, value)?;
    out.write_all(b"\n")?;
    out.flush()?;
    Ok(())
}
