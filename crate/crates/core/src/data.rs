//! Numeric datasets: CSV ingestion and export, grand mean, optional rescaling.

use std::collections::HashMap;
use std::fs::File;
use std::io::Write;
use std::path::Path;

use ndarray::{Array1, Array2, ArrayView1, Axis};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// `n` points with `p` finite features each, and optional integer labels.
///
/// Immutable once built; every constructor checks the invariants.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    name: String,
    columns: Vec<String>,
    points: Array2<f64>,
    labels: Option<Vec<i64>>,
}

impl Dataset {
    pub fn new(
        name: impl Into<String>,
        points: Array2<f64>,
        labels: Option<Vec<i64>>,
    ) -> Result<Self> {
        let columns = (1..=points.ncols()).map(|j| format!("x{j}")).collect();
        Self::with_columns(name, columns, points, labels)
    }

    pub fn with_columns(
        name: impl Into<String>,
        columns: Vec<String>,
        points: Array2<f64>,
        labels: Option<Vec<i64>>,
    ) -> Result<Self> {
        let (n, p) = points.dim();
        if n == 0 {
            return Err(Error::EmptyDataset);
        }
        if p == 0 {
            return Err(Error::NoFeatures);
        }
        if columns.len() != p {
            return Err(Error::Shape(format!(
                "{} column names for {p} features",
                columns.len()
            )));
        }
        if let Some(((row, column), _)) = points.indexed_iter().find(|(_, v)| !v.is_finite()) {
            return Err(Error::NonFinite { row, column });
        }
        if let Some(l) = &labels {
            if l.len() != n {
                return Err(Error::LabelLength {
                    labels: l.len(),
                    rows: n,
                });
            }
        }
        Ok(Dataset {
            name: name.into(),
            columns,
            points: points.as_standard_layout().into_owned(),
            labels,
        })
    }

    /// Builds a dataset from row vectors; convenient for small fixtures.
    pub fn from_rows(name: impl Into<String>, rows: &[Vec<f64>]) -> Result<Self> {
        let p = rows.first().map_or(0, Vec::len);
        if let Some(bad) = rows.iter().position(|r| r.len() != p) {
            return Err(Error::Ragged {
                line: bad as u64 + 1,
                expected: p,
                found: rows[bad].len(),
            });
        }
        let flat: Vec<f64> = rows.iter().flatten().copied().collect();
        let points = Array2::from_shape_vec((rows.len(), p), flat)
            .map_err(|e| Error::Shape(e.to_string()))?;
        Self::new(name, points, None)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn columns(&self) -> &[String] {
        &self.columns
    }

    pub fn points(&self) -> &Array2<f64> {
        &self.points
    }

    pub fn point(&self, i: usize) -> ArrayView1<'_, f64> {
        self.points.row(i)
    }

    pub fn labels(&self) -> Option<&[i64]> {
        self.labels.as_deref()
    }

    pub fn n(&self) -> usize {
        self.points.nrows()
    }

    pub fn p(&self) -> usize {
        self.points.ncols()
    }

    pub fn renamed(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    pub fn with_labels(self, labels: Option<Vec<i64>>) -> Result<Self> {
        Self::with_columns(self.name, self.columns, self.points, labels)
    }

    /// Copy with rows reordered so that row `i` of the result is row `order[i]` here.
    pub fn permuted(&self, order: &[usize]) -> Result<Self> {
        if order.len() != self.n() {
            return Err(Error::Shape("permutation length differs from n".into()));
        }
        let points = self.points.select(Axis(0), order);
        let labels = self
            .labels
            .as_ref()
            .map(|l| order.iter().map(|&i| l[i]).collect());
        Self::with_columns(self.name.clone(), self.columns.clone(), points, labels)
    }
}

/// Squared Euclidean distance.
#[inline]
pub fn sq_dist(a: ArrayView1<'_, f64>, b: ArrayView1<'_, f64>) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Arithmetic mean of all points.
pub fn grand_mean(d: &Dataset) -> Array1<f64> {
    let n = d.n() as f64;
    d.points.sum_axis(Axis(0)) / n
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Standardize {
    #[default]
    None,
    ZScore,
    MinMax,
}

impl std::str::FromStr for Standardize {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "none" => Ok(Standardize::None),
            "z-score" | "zscore" => Ok(Standardize::ZScore),
            "min-max" | "minmax" => Ok(Standardize::MinMax),
            other => Err(Error::InvalidParameter(format!(
                "unknown standardization {other:?}"
            ))),
        }
    }
}

/// Rescales every feature. z-score uses the population standard deviation.
pub fn standardize(d: &Dataset, mode: Standardize) -> Result<Dataset> {
    let mut points = d.points.clone();
    match mode {
        Standardize::None => return Ok(d.clone()),
        Standardize::ZScore => {
            let n = d.n() as f64;
            for (j, mut col) in points.axis_iter_mut(Axis(1)).enumerate() {
                let mean = col.sum() / n;
                let var = col.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
                let sd = var.sqrt();
                if !(sd > 0.0) {
                    return Err(Error::ZeroVariance { feature: j });
                }
                col.mapv_inplace(|v| (v - mean) / sd);
            }
        }
        Standardize::MinMax => {
            for (j, mut col) in points.axis_iter_mut(Axis(1)).enumerate() {
                let lo = col.iter().copied().fold(f64::INFINITY, f64::min);
                let hi = col.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                if !(hi > lo) {
                    return Err(Error::ConstantFeature { feature: j });
                }
                col.mapv_inplace(|v| (v - lo) / (hi - lo));
            }
        }
    }
    Dataset::with_columns(d.name.clone(), d.columns.clone(), points, d.labels.clone())
}

#[derive(Debug, Clone)]
pub struct CsvOptions {
    pub label_column: Option<String>,
    pub delimiter: u8,
}

impl Default for CsvOptions {
    fn default() -> Self {
        CsvOptions {
            label_column: None,
            delimiter: b',',
        }
    }
}

impl CsvOptions {
    pub fn with_label(column: impl Into<String>) -> Self {
        CsvOptions {
            label_column: Some(column.into()),
            ..Default::default()
        }
    }
}

fn parse_cell(cell: &str, line: u64, column: usize) -> Result<f64> {
    match cell.trim().parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(v),
        _ => Err(Error::Parse {
            line,
            column: column + 1,
            value: cell.to_string(),
        }),
    }
}

/// Loads a numeric CSV file.
///
/// The first row is taken as a header when any of its cells is not a number.
/// Columns are 1-based and lines count from the top of the file in errors.
pub fn load_csv(path: impl AsRef<Path>, opts: &CsvOptions) -> Result<Dataset> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let name = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "dataset".into());
    read_csv(file, &name, opts)
}

pub fn read_csv<R: std::io::Read>(reader: R, name: &str, opts: &CsvOptions) -> Result<Dataset> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .delimiter(opts.delimiter)
        .trim(csv::Trim::All)
        .from_reader(reader);

    let mut records = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| Error::Csv {
            line: e.position().map_or(0, |p| p.line()),
            message: e.to_string(),
        })?;
        if rec.iter().all(|c| c.is_empty()) {
            continue;
        }
        let line = rec.position().map_or(0, |p| p.line());
        records.push((line, rec));
    }
    if records.is_empty() {
        return Err(Error::EmptyDataset);
    }

    let has_header = records[0].1.iter().any(|c| c.parse::<f64>().is_err());
    let width = records[0].1.len();
    let header: Vec<String> = if has_header {
        records.remove(0).1.iter().map(str::to_string).collect()
    } else {
        (1..=width).map(|j| format!("x{j}")).collect()
    };

    let label_idx = match &opts.label_column {
        None => None,
        Some(col) => {
            let idx = if has_header {
                header.iter().position(|h| h == col)
            } else {
                None
            };
            Some(idx.ok_or_else(|| Error::MissingLabelColumn(col.clone()))?)
        }
    };

    let p = width - usize::from(label_idx.is_some());
    let mut flat = Vec::with_capacity(records.len() * p);
    let mut raw_labels = Vec::new();
    for (line, rec) in &records {
        if rec.len() != width {
            return Err(Error::Ragged {
                line: *line,
                expected: width,
                found: rec.len(),
            });
        }
        for (j, cell) in rec.iter().enumerate() {
            if Some(j) == label_idx {
                if cell.is_empty() {
                    return Err(Error::Parse {
                        line: *line,
                        column: j + 1,
                        value: String::new(),
                    });
                }
                raw_labels.push(cell.to_string());
            } else {
                flat.push(parse_cell(cell, *line, j)?);
            }
        }
    }

    let columns = header
        .iter()
        .enumerate()
        .filter(|(j, _)| Some(*j) != label_idx)
        .map(|(_, h)| h.clone())
        .collect();
    let points = Array2::from_shape_vec((records.len(), p), flat)
        .map_err(|e| Error::Shape(e.to_string()))?;
    let labels = label_idx.map(|_| encode_labels(&raw_labels));
    Dataset::with_columns(name, columns, points, labels)
}

/// Integer labels are kept as is; anything else is numbered by first appearance.
fn encode_labels(raw: &[String]) -> Vec<i64> {
    if let Ok(ints) = raw
        .iter()
        .map(|s| s.parse::<i64>())
        .collect::<Result<Vec<_>, _>>()
    {
        return ints;
    }
    let mut ids: HashMap<&str, i64> = HashMap::new();
    raw.iter()
        .map(|s| {
            let next = ids.len() as i64;
            *ids.entry(s.as_str()).or_insert(next)
        })
        .collect()
}

/// Writes a header row, the points, and a trailing `label` column when labels exist.
///
/// Values use the shortest decimal form that parses back to the same `f64`.
pub fn write_csv(d: &Dataset, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut out = std::io::BufWriter::new(File::create(path).map_err(|e| Error::io(path, e))?);
    write_csv_to(d, &mut out).map_err(|e| Error::io(path, e))?;
    out.flush().map_err(|e| Error::io(path, e))
}

pub fn write_csv_to<W: Write>(d: &Dataset, out: &mut W) -> std::io::Result<()> {
    let mut header = d.columns.join(",");
    if d.labels.is_some() {
        header.push_str(",label");
    }
    writeln!(out, "{header}")?;
    for (i, row) in d.points.outer_iter().enumerate() {
        let mut line = row
            .iter()
            .map(|v| v.to_string())
            .collect::<Vec<_>>()
            .join(",");
        if let Some(l) = &d.labels {
            line.push(',');
            line.push_str(&l[i].to_string());
        }
        writeln!(out, "{line}")?;
    }
    Ok(())
}
