//! CSV ingestion and the matching writer.
//!
//! A dataset has a mandatory header row. Every column is a numeric
//! coordinate except the reserved `weight` column, which holds optional
//! nonnegative weights.

use std::io::Write;
use std::path::{Path, PathBuf};

use dualrisk::inequality::Allocation;
use dualrisk::{AlignedSample, DiscreteMeasure};

use crate::error::CliError;

pub const WEIGHT_COLUMN: &str = "weight";

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub path: PathBuf,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
    pub weights: Option<Vec<f64>>,
}

impl Dataset {
    pub fn dim(&self) -> usize {
        self.columns.len()
    }

    pub fn to_measure(&self) -> Result<DiscreteMeasure, CliError> {
        Ok(DiscreteMeasure::from_samples(
            &self.rows,
            self.weights.as_deref(),
        )?)
    }

    /// Rows as equally likely joint states; a weight column is refused.
    pub fn to_sample(&self) -> Result<AlignedSample, CliError> {
        self.require_unweighted()?;
        Ok(AlignedSample::from_rows(&self.rows)?)
    }

    pub fn to_allocation(&self) -> Result<Allocation, CliError> {
        self.require_unweighted()?;
        Ok(Allocation::new(
            AlignedSample::from_rows(&self.rows)?,
            Some(self.columns.clone()),
        )?)
    }

    fn require_unweighted(&self) -> Result<(), CliError> {
        if self.weights.is_some() {
            return Err(CliError::Usage(format!(
                "{}: rows are read as equally likely states; remove the `{WEIGHT_COLUMN}` column",
                self.path.display()
            )));
        }
        Ok(())
    }
}

fn read_bytes(path: &Path) -> Result<Vec<u8>, CliError> {
    std::fs::read(path).map_err(|e| match e.kind() {
        std::io::ErrorKind::NotFound => CliError::FileNotFound(path.to_path_buf()),
        _ => CliError::Io {
            path: path.to_path_buf(),
            message: e.to_string(),
        },
    })
}

/// Reads a CSV dataset, rejecting empty, ragged, non-numeric or non-finite input.
pub fn parse_dataset(path: &Path) -> Result<Dataset, CliError> {
    let bytes = read_bytes(path)?;
    parse_bytes(path, &bytes)
}

pub(crate) fn parse_bytes(path: &Path, bytes: &[u8]) -> Result<Dataset, CliError> {
    let parse_error = |line: u64, column: &str, message: String| CliError::Parse {
        path: path.to_path_buf(),
        line,
        column: column.to_string(),
        message,
    };
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(bytes);
    let header = reader
        .headers()
        .map_err(|e| parse_error(1, "", e.to_string()))?
        .clone();
    if header.is_empty() || header.iter().all(str::is_empty) {
        return Err(parse_error(1, "", "missing header row".into()));
    }
    let mut weight_index = None;
    let mut columns = Vec::new();
    for (i, name) in header.iter().enumerate() {
        if name == WEIGHT_COLUMN {
            if weight_index.replace(i).is_some() {
                return Err(parse_error(1, name, "duplicate weight column".into()));
            }
        } else {
            columns.push(name.to_string());
        }
    }
    if columns.is_empty() {
        return Err(parse_error(1, "", "no coordinate columns".into()));
    }

    let mut rows = Vec::new();
    let mut weights = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line());
            parse_error(line, "", e.to_string())
        })?;
        let line = record.position().map_or(0, |p| p.line());
        let mut row = Vec::with_capacity(columns.len());
        for (i, cell) in record.iter().enumerate() {
            let name = header.get(i).unwrap_or("");
            let value: f64 = cell
                .parse()
                .map_err(|_| parse_error(line, name, format!("`{cell}` is not a number")))?;
            if !value.is_finite() {
                return Err(parse_error(
                    line,
                    name,
                    format!("non-finite value `{cell}`"),
                ));
            }
            if Some(i) == weight_index {
                weights.push(value);
            } else {
                row.push(value);
            }
        }
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(parse_error(2, "", "no data rows".into()));
    }
    Ok(Dataset {
        path: path.to_path_buf(),
        columns,
        rows,
        weights: weight_index.map(|_| weights),
    })
}

/// Writes a measure as CSV (`x1..xd,weight`) with round-trip exact floats.
pub fn write_measure_csv<W: Write>(m: &DiscreteMeasure, out: W) -> Result<(), CliError> {
    let io = |e: csv::Error| CliError::Io {
        path: PathBuf::from("<output>"),
        message: e.to_string(),
    };
    let mut w = csv::Writer::from_writer(out);
    let mut header: Vec<String> = (1..=m.dim()).map(|c| format!("x{c}")).collect();
    header.push(WEIGHT_COLUMN.to_string());
    w.write_record(&header).map_err(io)?;
    for (atom, &weight) in m.atoms().zip(m.weights()) {
        let mut record: Vec<String> = atom.iter().map(|v| format!("{v:?}")).collect();
        record.push(format!("{weight:?}"));
        w.write_record(&record).map_err(io)?;
    }
    w.flush().map_err(|e| CliError::Io {
        path: PathBuf::from("<output>"),
        message: e.to_string(),
    })?;
    Ok(())
}
