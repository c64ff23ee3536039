use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::SweepResult;
use crate::corruption::ErrorType;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CurveFormat {
    Csv,
    Json,
}

impl FromStr for CurveFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "csv" => Ok(Self::Csv),
            "json" => Ok(Self::Json),
            _ => Err(Error::InvalidParameter(format!(
                "unknown output format `{s}` (expected csv or json)"
            ))),
        }
    }
}

/// One line of the long-format curve file.
///
/// `cell` rows carry one model's accuracy in one sweep cell (with the cell's
/// quality score repeated); `aggregate` rows carry per-level means, with
/// `iteration` empty and `model` set to `mean`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurveRow {
    pub row_type: String,
    pub error: ErrorType,
    pub level: f64,
    pub iteration: Option<usize>,
    pub model: String,
    pub accuracy: f64,
    pub qa: Option<f64>,
    pub qa1: Option<f64>,
    pub qa2: Option<f64>,
}

fn rows(result: &SweepResult) -> Vec<CurveRow> {
    let mut out = Vec::new();
    for c in &result.cells {
        for e in &c.accuracies.entries {
            out.push(CurveRow {
                row_type: "cell".into(),
                error: c.error,
                level: c.level,
                iteration: Some(c.iteration),
                model: e.model.clone(),
                accuracy: e.accuracy,
                qa: c.quality.as_ref().map(|q| q.qa),
                qa1: c.quality.as_ref().map(|q| q.qa1),
                qa2: c.quality.as_ref().map(|q| q.qa2),
            });
        }
    }
    for a in &result.aggregates {
        out.push(CurveRow {
            row_type: "aggregate".into(),
            error: a.error,
            level: a.level,
            iteration: None,
            model: "mean".into(),
            accuracy: a.mean_accuracy,
            qa: a.mean_qa,
            qa1: a.mean_qa1,
            qa2: a.mean_qa2,
        });
    }
    out
}

pub fn write_curves_to<W: Write>(
    result: &SweepResult,
    writer: W,
    format: CurveFormat,
) -> Result<()> {
    if result.cells.is_empty() {
        return Err(Error::EmptyResult("sweep produced no cells".into()));
    }
    let rows = rows(result);
    match format {
        CurveFormat::Csv => {
            let mut w = csv::Writer::from_writer(writer);
            for r in &rows {
                w.serialize(r)?;
            }
            w.flush().map_err(|e| Error::io("<csv writer>", e))
        }
        CurveFormat::Json => Ok(serde_json::to_writer_pretty(writer, &rows)?),
    }
}

/// Writes the sweep as a long table. An empty result is an error and leaves
/// no file behind.
pub fn emit_curves(
    result: &SweepResult,
    path: impl AsRef<Path>,
    format: CurveFormat,
) -> Result<()> {
    if result.cells.is_empty() {
        return Err(Error::EmptyResult("sweep produced no cells".into()));
    }
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    write_curves_to(result, BufWriter::new(file), format)
}

pub fn read_curves_csv(path: impl AsRef<Path>) -> Result<Vec<CurveRow>> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    csv::Reader::from_reader(file)
        .deserialize()
        .map(|r| r.map_err(Error::from))
        .collect()
}
