use std::path::{Path, PathBuf};

use ndarray::{Array2, Axis};
use serde::{Deserialize, Serialize};

use super::features::extract_features;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    RealCsv,
    Synthetic,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Samples {
    /// One precomputed feature vector per row.
    Features(Array2<f64>),
    /// Raw `t x d` recordings, one matrix per sample.
    Raw(Vec<Array2<f64>>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub samples: Samples,
    pub labels: Vec<usize>,
    pub class_names: Option<Vec<String>>,
    pub provenance: Provenance,
}

impl Dataset {
    pub fn from_features(x: Array2<f64>, labels: Vec<usize>, provenance: Provenance) -> Result<Self> {
        let ds = Self {
            samples: Samples::Features(x),
            labels,
            class_names: None,
            provenance,
        };
        ds.validate()?;
        Ok(ds)
    }

    pub fn from_raw(raw: Vec<Array2<f64>>, labels: Vec<usize>, provenance: Provenance) -> Result<Self> {
        let ds = Self {
            samples: Samples::Raw(raw),
            labels,
            class_names: None,
            provenance,
        };
        ds.validate()?;
        Ok(ds)
    }

    pub fn validate(&self) -> Result<()> {
        let n = match &self.samples {
            Samples::Features(x) => x.nrows(),
            Samples::Raw(raw) => {
                if let Some(first) = raw.first() {
                    let d = first.ncols();
                    if let Some(i) = raw.iter().position(|m| m.ncols() != d) {
                        return Err(Error::Validation(format!(
                            "sample {i} has {} channels, expected {d}",
                            raw[i].ncols()
                        )));
                    }
                }
                raw.len()
            }
        };
        if n != self.labels.len() {
            return Err(Error::Validation(format!(
                "{n} samples but {} labels",
                self.labels.len()
            )));
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    /// `max(label) + 1`.
    pub fn n_classes(&self) -> usize {
        self.labels.iter().max().map_or(0, |m| m + 1)
    }

    pub fn class_counts(&self) -> Vec<usize> {
        let mut counts = vec![0; self.n_classes()];
        for &l in &self.labels {
            counts[l] += 1;
        }
        counts
    }

    /// Feature matrix, extracting per-channel standard deviations from raw
    /// samples when needed.
    pub fn features(&self) -> Result<Array2<f64>> {
        match &self.samples {
            Samples::Features(x) => Ok(x.clone()),
            Samples::Raw(raw) => {
                let d = raw.first().map_or(0, |m| m.ncols());
                let mut out = Array2::zeros((raw.len(), d));
                for (mut row, sample) in out.axis_iter_mut(Axis(0)).zip(raw) {
                    row.assign(&extract_features(sample.view())?);
                }
                Ok(out)
            }
        }
    }

    pub fn subset(&self, indices: &[usize]) -> Self {
        let samples = match &self.samples {
            Samples::Features(x) => Samples::Features(x.select(Axis(0), indices)),
            Samples::Raw(raw) => Samples::Raw(indices.iter().map(|&i| raw[i].clone()).collect()),
        };
        Self {
            samples,
            labels: indices.iter().map(|&i| self.labels[i]).collect(),
            class_names: self.class_names.clone(),
            provenance: self.provenance,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct LoadOptions {
    /// Keep only these channels (column indices), in this order.
    pub channels: Option<Vec<usize>>,
}

/// Load a feature CSV (`ch0,...,ch{d-1},label`) or a raw-sample manifest
/// (`path,label`, one CSV per sample, paths relative to the manifest).
pub fn load_dataset(path: impl AsRef<Path>, options: &LoadOptions) -> Result<Dataset> {
    let path = path.as_ref();
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_path(path)
        .map_err(|e| match e.into_kind() {
            csv::ErrorKind::Io(io) => Error::io(path, io),
            other => Error::Validation(format!("{}: {other:?}", path.display())),
        })?;
    let headers: Vec<String> = reader.headers()?.iter().map(|h| h.trim().to_string()).collect();
    if headers.len() == 2 && headers[0] == "path" && headers[1] == "label" {
        load_manifest(path, reader, options)
    } else {
        load_feature_csv(headers, reader, options)
    }
}

fn load_feature_csv(
    headers: Vec<String>,
    mut reader: csv::Reader<std::fs::File>,
    options: &LoadOptions,
) -> Result<Dataset> {
    if headers.last().map(String::as_str) != Some("label") || headers.len() < 2 {
        return Err(Error::Validation(
            "feature CSV header must be ch0,...,ch{d-1},label".into(),
        ));
    }
    let d = headers.len() - 1;
    let mut values = Vec::new();
    let mut labels = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let line = i + 2;
        let record = record?;
        if record.len() != headers.len() {
            return Err(Error::Parse {
                row: line,
                column: record.len().min(headers.len()),
                message: format!("expected {} fields, found {}", headers.len(), record.len()),
            });
        }
        for (c, cell) in record.iter().take(d).enumerate() {
            values.push(parse_cell(cell, line, c + 1)?);
        }
        labels.push(parse_label(&record[d], line, d + 1)?);
    }
    let x = Array2::from_shape_vec((labels.len(), d), values)
        .map_err(|e| Error::Shape(e.to_string()))?;
    let x = select_channels(x, options)?;
    Dataset::from_features(x, labels, Provenance::RealCsv)
}

fn load_manifest(
    manifest: &Path,
    mut reader: csv::Reader<std::fs::File>,
    options: &LoadOptions,
) -> Result<Dataset> {
    let base = manifest.parent().map(Path::to_path_buf).unwrap_or_default();
    let mut raw = Vec::new();
    let mut labels = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let line = i + 2;
        let record = record?;
        if record.len() != 2 {
            return Err(Error::Parse {
                row: line,
                column: record.len().min(2),
                message: "expected path,label".into(),
            });
        }
        let sample_path: PathBuf = base.join(record[0].trim());
        let sample = load_raw_sample(&sample_path)?;
        raw.push(select_channels(sample, options)?);
        labels.push(parse_label(&record[1], line, 2)?);
    }
    Dataset::from_raw(raw, labels, Provenance::RealCsv)
}

/// A `t x d` recording; an optional non-numeric header row is skipped.
fn load_raw_sample(path: &Path) -> Result<Array2<f64>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .from_path(path)
        .map_err(|e| match e.into_kind() {
            csv::ErrorKind::Io(io) => Error::io(path, io),
            other => Error::Validation(format!("{}: {other:?}", path.display())),
        })?;
    let mut values = Vec::new();
    let mut width = None;
    let mut rows = 0;
    for (i, record) in reader.records().enumerate() {
        let record = record?;
        if i == 0 && record.iter().all(|c| c.trim().parse::<f64>().is_err()) {
            continue;
        }
        let w = *width.get_or_insert(record.len());
        if record.len() != w {
            return Err(Error::Parse {
                row: i + 1,
                column: record.len().min(w),
                message: format!("{}: expected {w} fields", path.display()),
            });
        }
        for (c, cell) in record.iter().enumerate() {
            values.push(parse_cell(cell, i + 1, c + 1).map_err(|e| match e {
                Error::Parse { row, column, message } => Error::Parse {
                    row,
                    column,
                    message: format!("{}: {message}", path.display()),
                },
                other => other,
            })?);
        }
        rows += 1;
    }
    Array2::from_shape_vec((rows, width.unwrap_or(0)), values).map_err(|e| Error::Shape(e.to_string()))
}

fn select_channels(x: Array2<f64>, options: &LoadOptions) -> Result<Array2<f64>> {
    match &options.channels {
        None => Ok(x),
        Some(channels) => {
            if let Some(&bad) = channels.iter().find(|&&c| c >= x.ncols()) {
                return Err(Error::Validation(format!(
                    "channel {bad} out of range for {} columns",
                    x.ncols()
                )));
            }
            Ok(x.select(Axis(1), channels))
        }
    }
}

fn parse_cell(cell: &str, row: usize, column: usize) -> Result<f64> {
    let v: f64 = cell.trim().parse().map_err(|_| Error::Parse {
        row,
        column,
        message: format!("not a number: {cell:?}"),
    })?;
    if !v.is_finite() {
        return Err(Error::Parse {
            row,
            column,
            message: format!("non-finite value {cell:?}"),
        });
    }
    Ok(v)
}

fn parse_label(cell: &str, row: usize, column: usize) -> Result<usize> {
    cell.trim().parse().map_err(|_| Error::Parse {
        row,
        column,
        message: format!("label must be a non-negative integer, got {cell:?}"),
    })
}

/// Write features in the `ch0,...,ch{d-1},label` layout.
pub fn write_feature_csv(path: impl AsRef<Path>, x: &Array2<f64>, labels: &[usize]) -> Result<()> {
    let path = path.as_ref();
    let mut w = csv::Writer::from_path(path).map_err(|e| match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::io(path, io),
        other => Error::Validation(format!("{}: {other:?}", path.display())),
    })?;
    let mut header: Vec<String> = (0..x.ncols()).map(|c| format!("ch{c}")).collect();
    header.push("label".into());
    w.write_record(&header)?;
    for (row, label) in x.rows().into_iter().zip(labels) {
        let mut rec: Vec<String> = row.iter().map(|v| format!("{v:?}")).collect();
        rec.push(label.to_string());
        w.write_record(&rec)?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}
