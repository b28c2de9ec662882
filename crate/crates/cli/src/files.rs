//! CSV ingestion and artifact serialization: datasets with a declared
//! feature/label column layout, plain numeric matrices, and the
//! 17-significant-digit float format that makes every written value
//! round-trip bit-exactly.

use std::fs;
use std::path::Path;

use dln_core::data::Dataset;
use dln_core::Matrix;

use crate::error::{CliError, Result};

/// Formats a float with 17 significant digits, enough for a bit-exact
/// `f64` round trip.
pub fn f17(v: f64) -> String {
    format!("{v:.16e}")
}

/// Which CSV columns hold features and which hold labels.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CsvLayout {
    /// Zero-based column indices of the features, in dataset order.
    pub features: Vec<usize>,
    /// Zero-based column indices of the labels, in dataset order.
    pub labels: Vec<usize>,
    /// Whether the first row is a header to skip.
    pub header: bool,
}

impl CsvLayout {
    /// The common split layout: the first `features` columns are
    /// features and the next `labels` columns are labels.
    pub fn split(features: usize, labels: usize, header: bool) -> Self {
        CsvLayout {
            features: (0..features).collect(),
            labels: (features..features + labels).collect(),
            header,
        }
    }
}

fn parse_cell(raw: &str, line: u64, column: usize) -> Result<f64> {
    let trimmed = raw.trim();
    trimmed.parse::<f64>().map_err(|_| {
        CliError::Ingest(format!(
            "line {line}, column {column}: expected a number, got {trimmed:?}"
        ))
    })
}

/// Loads a numeric CSV as a dataset, one sample per row, columns mapped
/// by `layout`. Instances end up in the columns of `Dataset::x`/`y`.
pub fn load_csv(path: &Path, layout: &CsvLayout) -> Result<Dataset> {
    if layout.features.is_empty() || layout.labels.is_empty() {
        return Err(CliError::Usage(
            "layout needs at least one feature column and one label column".into(),
        ));
    }
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(layout.header)
        .flexible(false)
        .from_path(path)
        .map_err(|e| CliError::Ingest(format!("{}: {e}", path.display())))?;

    let mut xs: Vec<Vec<f64>> = Vec::new();
    let mut ys: Vec<Vec<f64>> = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| CliError::Ingest(format!("{}: {e}", path.display())))?;
        let line = record.position().map_or(0, |p| p.line());
        let pick = |cols: &[usize]| -> Result<Vec<f64>> {
            cols.iter()
                .map(|&c| {
                    let cell = record.get(c).ok_or_else(|| {
                        CliError::Ingest(format!(
                            "line {line}: column {c} out of range (row has {} fields)",
                            record.len()
                        ))
                    })?;
                    parse_cell(cell, line, c)
                })
                .collect()
        };
        xs.push(pick(&layout.features)?);
        ys.push(pick(&layout.labels)?);
    }
    if xs.is_empty() {
        return Err(CliError::Ingest(format!("{}: no data rows", path.display())));
    }

    let m = xs.len();
    let x = Matrix::from_fn(layout.features.len(), m, |i, j| xs[j][i]);
    let y = Matrix::from_fn(layout.labels.len(), m, |i, j| ys[j][i]);
    Ok(Dataset::new(x, y)?)
}

/// Writes a dataset as CSV, one sample per row, features first
/// (`x0..`), then labels (`y0..`), with a header row.
pub fn save_dataset_csv(ds: &Dataset, path: &Path) -> Result<()> {
    let mut writer = csv::Writer::from_path(path)?;
    let header: Vec<String> = (0..ds.x.rows())
        .map(|i| format!("x{i}"))
        .chain((0..ds.y.rows()).map(|i| format!("y{i}")))
        .collect();
    writer.write_record(&header)?;
    for j in 0..ds.samples() {
        let row: Vec<String> = (0..ds.x.rows())
            .map(|i| f17(ds.x.get(i, j)))
            .chain((0..ds.y.rows()).map(|i| f17(ds.y.get(i, j))))
            .collect();
        writer.write_record(&row)?;
    }
    writer.flush()?;
    Ok(())
}

/// Loads a plain numeric CSV (no header) as a matrix.
pub fn load_matrix_csv(path: &Path) -> Result<Matrix> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(false)
        .from_path(path)
        .map_err(|e| CliError::Ingest(format!("{}: {e}", path.display())))?;
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| CliError::Ingest(format!("{}: {e}", path.display())))?;
        let line = record.position().map_or(0, |p| p.line());
        rows.push(
            record
                .iter()
                .enumerate()
                .map(|(c, cell)| parse_cell(cell, line, c))
                .collect::<Result<Vec<f64>>>()?,
        );
    }
    if rows.is_empty() {
        return Err(CliError::Ingest(format!("{}: no rows", path.display())));
    }
    let (r, c) = (rows.len(), rows[0].len());
    Ok(Matrix::from_fn(r, c, |i, j| rows[i][j]))
}

/// Writes a matrix as a plain numeric CSV (no header).
pub fn save_matrix_csv(m: &Matrix, path: &Path) -> Result<()> {
    let mut writer = csv::Writer::from_path(path)?;
    for i in 0..m.rows() {
        let row: Vec<String> = (0..m.cols()).map(|j| f17(m.get(i, j))).collect();
        writer.write_record(&row)?;
    }
    writer.flush()?;
    Ok(())
}

/// Writes a string artifact, creating parent directories as needed.
pub fn write_text(path: &Path, contents: &str) -> Result<()> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent)?;
    }
    fs::write(path, contents)?;
    Ok(())
}
