//! CSV input of observation matrices and CSV output of results.
//!
//! Input rows are time points and columns are series components. A single
//! header line is detected when any field of the first record is not a
//! number. Output numbers carry 16 significant digits.

use std::io::{Read, Write};
use std::path::Path;

use hdwn_core::SeriesMatrix;

use crate::montecarlo::{McReport, Table};

#[derive(Debug, thiserror::Error)]
pub enum CsvError {
    #[error("{path}: {source}")]
    Open { path: String, source: std::io::Error },
    #[error("line {line}: {message}")]
    Line { line: u64, message: String },
    #[error("{0}")]
    Shape(String),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, PartialEq)]
pub struct CsvSeries {
    pub header: Option<Vec<String>>,
    pub data: SeriesMatrix,
}

pub fn read_series_path(path: &Path) -> Result<CsvSeries, CsvError> {
    let file = std::fs::File::open(path).map_err(|source| CsvError::Open { path: path.display().to_string(), source })?;
    read_series(file)
}

pub fn read_series<R: Read>(reader: R) -> Result<CsvSeries, CsvError> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(false).flexible(true).trim(csv::Trim::All).from_reader(reader);
    let mut header = None;
    let mut width = None;
    let mut values = Vec::new();
    let mut rows = 0usize;
    for (index, record) in rdr.records().enumerate() {
        let record = record?;
        let line = record.position().map_or(index as u64 + 1, |p| p.line());
        if record.iter().all(str::is_empty) {
            continue;
        }
        let parsed: Vec<Result<f64, _>> = record.iter().map(str::parse::<f64>).collect();
        if index == 0 && parsed.iter().any(Result::is_err) {
            header = Some(record.iter().map(str::to_string).collect::<Vec<_>>());
            width = Some(record.len());
            continue;
        }
        match width {
            Some(w) if w != record.len() => {
                return Err(CsvError::Line { line, message: format!("expected {w} fields, found {}", record.len()) });
            }
            _ => width = Some(record.len()),
        }
        for (col, value) in parsed.into_iter().enumerate() {
            let v = value.map_err(|_| CsvError::Line {
                line,
                message: format!("field {} is not a number: `{}`", col + 1, &record[col]),
            })?;
            if !v.is_finite() {
                return Err(CsvError::Line { line, message: format!("field {} is not finite", col + 1) });
            }
            values.push(v);
        }
        rows += 1;
    }
    let p = width.unwrap_or(0);
    if rows < 2 || p == 0 {
        return Err(CsvError::Shape(format!("need at least 2 data rows with at least 1 column, found {rows} rows")));
    }
    let data = SeriesMatrix::new(rows, p, values).map_err(|e| CsvError::Shape(e.to_string()))?;
    Ok(CsvSeries { header, data })
}

/// Number formatting used by every CSV writer.
pub fn format_number(v: f64) -> String {
    format!("{v:.15e}")
}

/// One row per `(experiment, test, H)`.
pub fn write_cells<W: Write>(reports: &[McReport], out: W) -> Result<(), CsvError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["cell", "test", "lags", "n", "p", "reps", "valid", "errors", "rejections", "rejection_rate", "mc_se"])?;
    for r in reports {
        for c in &r.cells {
            w.write_record([
                r.config.name.clone(),
                c.test.to_string(),
                c.lags.to_string(),
                r.config.n.to_string(),
                r.config.p.to_string(),
                c.reps.to_string(),
                c.valid.to_string(),
                c.errors.to_string(),
                c.rejections.to_string(),
                format_number(c.rejection_rate),
                format_number(c.mc_se),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn write_table<W: Write>(table: &Table, out: W) -> Result<(), CsvError> {
    let mut w = csv::Writer::from_writer(out);
    let mut head = vec!["cell".to_string()];
    head.extend(table.column_names());
    w.write_record(&head)?;
    for (label, row) in table.row_labels.iter().zip(&table.values) {
        let mut rec = vec![label.clone()];
        rec.extend(row.iter().map(|v| v.map(format_number).unwrap_or_default()));
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}
