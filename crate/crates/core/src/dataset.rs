//! Dense observation storage and the center container shared by every
//! algorithm, plus the CSV dataset format.
//!
//! The CSV layout is one observation per row with a header line. Every
//! column is a coordinate except the optional `label` (integer) and
//! `outlier` (0/1) columns, which are recognised by header name.

use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

pub const LABEL_COLUMN: &str = "label";
pub const OUTLIER_COLUMN: &str = "outlier";

/// An n x d matrix of observations, stored row-major, with optional ground
/// truth labels and outlier flags.
///
/// Label `0` is reserved for rows that belong to no component (the
/// generators use it for outliers); component labels start at 1.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    d: usize,
    values: Vec<f64>,
    labels: Option<Vec<u32>>,
    outliers: Option<Vec<bool>>,
}

impl Dataset {
    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self> {
        let d = rows.first().map(Vec::len).ok_or_else(|| invalid("dataset has no rows"))?;
        let mut values = Vec::with_capacity(rows.len() * d);
        for row in &rows {
            if row.len() != d {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    found: row.len(),
                });
            }
            values.extend_from_slice(row);
        }
        Self::from_flat(values, d)
    }

    /// Builds a dataset from row-major values.
    pub fn from_flat(values: Vec<f64>, d: usize) -> Result<Self> {
        if d == 0 {
            return Err(invalid("observations need at least one coordinate"));
        }
        if values.is_empty() {
            return Err(invalid("dataset has no rows"));
        }
        if !values.len().is_multiple_of(d) {
            return Err(invalid(format!(
                "{} values cannot be split into rows of dimension {d}",
                values.len()
            )));
        }
        if let Some(pos) = values.iter().position(|v| !v.is_finite()) {
            return Err(invalid(format!(
                "non-finite coordinate in row {} column {}",
                pos / d,
                pos % d
            )));
        }
        if d == 1 {
            log::warn!("dimension d = 1: convergence guarantees of k-medians need d >= 2");
        }
        Ok(Self {
            d,
            values,
            labels: None,
            outliers: None,
        })
    }

    pub fn with_labels(mut self, labels: Vec<u32>) -> Result<Self> {
        if labels.len() != self.n() {
            return Err(invalid(format!(
                "{} labels for {} observations",
                labels.len(),
                self.n()
            )));
        }
        self.labels = Some(labels);
        Ok(self)
    }

    pub fn with_outlier_flags(mut self, flags: Vec<bool>) -> Result<Self> {
        if flags.len() != self.n() {
            return Err(invalid(format!(
                "{} outlier flags for {} observations",
                flags.len(),
                self.n()
            )));
        }
        self.outliers = Some(flags);
        Ok(self)
    }

    pub fn n(&self) -> usize {
        self.values.len() / self.d
    }

    pub fn d(&self) -> usize {
        self.d
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.d..(i + 1) * self.d]
    }

    pub fn rows(&self) -> std::slice::ChunksExact<'_, f64> {
        self.values.chunks_exact(self.d)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn labels(&self) -> Option<&[u32]> {
        self.labels.as_deref()
    }

    pub fn outlier_flags(&self) -> Option<&[bool]> {
        self.outliers.as_deref()
    }

    /// A copy with rows (and their labels/flags) reordered by `order`.
    pub fn reordered(&self, order: &[usize]) -> Result<Self> {
        if order.len() != self.n() {
            return Err(invalid("permutation length differs from n"));
        }
        let mut values = Vec::with_capacity(self.values.len());
        for &i in order {
            values.extend_from_slice(self.row(i));
        }
        Ok(Self {
            d: self.d,
            values,
            labels: self.labels.as_ref().map(|l| order.iter().map(|&i| l[i]).collect()),
            outliers: self.outliers.as_ref().map(|f| order.iter().map(|&i| f[i]).collect()),
        })
    }

    /// Largest normalized norm over all rows.
    pub fn max_norm(&self) -> f64 {
        self.rows().map(crate::geometry::norm_unchecked).fold(0.0, f64::max)
    }

    pub fn read_csv(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_csv_reader(std::fs::File::open(path)?)
    }

    pub fn from_csv_reader<R: Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
        let headers = rdr.headers()?.clone();
        let label_col = headers.iter().position(|h| h == LABEL_COLUMN);
        let outlier_col = headers.iter().position(|h| h == OUTLIER_COLUMN);
        let coord_cols: Vec<usize> = (0..headers.len())
            .filter(|&c| Some(c) != label_col && Some(c) != outlier_col)
            .collect();
        let d = coord_cols.len();
        if d == 0 {
            return Err(invalid("csv has no coordinate columns"));
        }

        let mut values = Vec::new();
        let mut labels = Vec::new();
        let mut flags = Vec::new();
        for (line, record) in rdr.records().enumerate() {
            let record = record?;
            for &c in &coord_cols {
                let field = &record[c];
                let v: f64 = field.parse().map_err(|_| {
                    invalid(format!("row {}: cannot parse '{field}' as a number", line + 1))
                })?;
                values.push(v);
            }
            if let Some(c) = label_col {
                let field = &record[c];
                labels.push(field.parse::<u32>().map_err(|_| {
                    invalid(format!("row {}: label '{field}' is not an integer", line + 1))
                })?);
            }
            if let Some(c) = outlier_col {
                flags.push(match &record[c] {
                    "1" | "true" => true,
                    "0" | "false" => false,
                    other => {
                        return Err(invalid(format!(
                            "row {}: outlier flag '{other}' is not 0/1",
                            line + 1
                        )))
                    }
                });
            }
        }

        let mut data = Self::from_flat(values, d)?;
        if label_col.is_some() {
            data = data.with_labels(labels)?;
        }
        if outlier_col.is_some() {
            data = data.with_outlier_flags(flags)?;
        }
        Ok(data)
    }

    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let file = std::io::BufWriter::new(std::fs::File::create(path)?);
        self.to_csv_writer(file)
    }

    pub fn to_csv_writer<W: Write>(&self, writer: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(writer);
        let mut header: Vec<String> = (1..=self.d).map(|j| format!("x{j}")).collect();
        if self.labels.is_some() {
            header.push(LABEL_COLUMN.to_string());
        }
        if self.outliers.is_some() {
            header.push(OUTLIER_COLUMN.to_string());
        }
        wtr.write_record(&header)?;

        let mut record = Vec::with_capacity(header.len());
        for i in 0..self.n() {
            record.clear();
            record.extend(self.row(i).iter().map(|v| v.to_string()));
            if let Some(labels) = &self.labels {
                record.push(labels[i].to_string());
            }
            if let Some(flags) = &self.outliers {
                record.push(if flags[i] { "1" } else { "0" }.to_string());
            }
            wtr.write_record(&record)?;
        }
        wtr.flush()?;
        Ok(())
    }
}

/// k centers in R^d, stored row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Vec<f64>>", into = "Vec<Vec<f64>>")]
pub struct CenterSet {
    d: usize,
    values: Vec<f64>,
}

impl CenterSet {
    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self> {
        let d = rows.first().map(Vec::len).ok_or_else(|| invalid("need at least one center"))?;
        if d == 0 {
            return Err(invalid("centers need at least one coordinate"));
        }
        let mut values = Vec::with_capacity(rows.len() * d);
        for row in &rows {
            if row.len() != d {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    found: row.len(),
                });
            }
            values.extend_from_slice(row);
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(invalid("non-finite center coordinate"));
        }
        Ok(Self { d, values })
    }

    /// Copies the given dataset rows.
    pub fn from_dataset_rows(data: &Dataset, indices: &[usize]) -> Result<Self> {
        if indices.is_empty() {
            return Err(invalid("need at least one center"));
        }
        let mut values = Vec::with_capacity(indices.len() * data.d());
        for &i in indices {
            if i >= data.n() {
                return Err(invalid(format!("row index {i} out of range")));
            }
            values.extend_from_slice(data.row(i));
        }
        Ok(Self { d: data.d(), values })
    }

    pub fn k(&self) -> usize {
        self.values.len() / self.d
    }

    pub fn d(&self) -> usize {
        self.d
    }

    #[inline]
    pub fn center(&self, r: usize) -> &[f64] {
        &self.values[r * self.d..(r + 1) * self.d]
    }

    #[inline]
    pub fn center_mut(&mut self, r: usize) -> &mut [f64] {
        &mut self.values[r * self.d..(r + 1) * self.d]
    }

    pub fn iter(&self) -> std::slice::ChunksExact<'_, f64> {
        self.values.chunks_exact(self.d)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        self.iter().map(<[f64]>::to_vec).collect()
    }

    /// Errors unless all centers are pairwise distinct.
    pub fn ensure_distinct(&self) -> Result<()> {
        for a in 0..self.k() {
            for b in a + 1..self.k() {
                if self.center(a) == self.center(b) {
                    return Err(invalid(format!("centers {a} and {b} coincide")));
                }
            }
        }
        Ok(())
    }

    pub(crate) fn ensure_dim(&self, d: usize) -> Result<()> {
        if self.d != d {
            return Err(Error::DimensionMismatch {
                expected: self.d,
                found: d,
            });
        }
        Ok(())
    }
}

impl TryFrom<Vec<Vec<f64>>> for CenterSet {
    type Error = Error;

    fn try_from(rows: Vec<Vec<f64>>) -> Result<Self> {
        Self::from_rows(rows)
    }
}

impl From<CenterSet> for Vec<Vec<f64>> {
    fn from(c: CenterSet) -> Self {
        c.to_rows()
    }
}
