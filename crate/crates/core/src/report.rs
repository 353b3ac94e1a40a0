//! CSV ingestion and the JSON test report.

use std::fmt;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::permutation::TestResult;
use crate::spectral::TimeSeries;

pub const REPORT_SCHEMA: &str = "permspec.test-report";
pub const REPORT_SCHEMA_VERSION: u32 = 1;

/// Which CSV column holds the series: a zero-based index or a header name.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ColumnSelector {
    Index(usize),
    Name(String),
}

impl Default for ColumnSelector {
    fn default() -> Self {
        Self::Index(0)
    }
}

impl FromStr for ColumnSelector {
    type Err = std::convert::Infallible;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        Ok(match s.parse::<usize>() {
            Ok(i) => Self::Index(i),
            Err(_) => Self::Name(s.to_string()),
        })
    }
}

impl fmt::Display for ColumnSelector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Index(i) => write!(f, "{i}"),
            Self::Name(s) => f.write_str(s),
        }
    }
}

const MISSING_TOKENS: &[&str] = &["", "na", "n/a", "nan", "null", "none", "-"];

fn parse_cell(raw: &str, row: u64) -> Result<f64> {
    let token = raw.trim();
    if MISSING_TOKENS.contains(&token.to_ascii_lowercase().as_str()) {
        return Err(Error::Parse {
            row,
            message: format!("missing value {token:?}"),
        });
    }
    let value: f64 = token.parse().map_err(|_| Error::NonNumeric {
        row,
        value: token.to_string(),
    })?;
    if !value.is_finite() {
        return Err(Error::Parse {
            row,
            message: format!("non-finite value {token:?}"),
        });
    }
    Ok(value)
}

/// Reads one numeric column of a CSV file in row order.
///
/// A named column implies a header row. Errors carry the 1-based line
/// number of the offending record.
pub fn ingest_csv(path: &Path, column: &ColumnSelector, has_header: bool) -> Result<TimeSeries> {
    if !path.exists() {
        return Err(Error::FileNotFound(path.to_path_buf()));
    }
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_path(path)?;

    let mut records = reader.records();
    let has_header = has_header || matches!(column, ColumnSelector::Name(_));
    let index = match column {
        ColumnSelector::Index(i) => {
            if has_header {
                records.next().transpose()?;
            }
            *i
        }
        ColumnSelector::Name(name) => {
            let header = records
                .next()
                .transpose()?
                .ok_or_else(|| Error::ColumnNotFound(name.clone()))?;
            header
                .iter()
                .position(|h| h == name)
                .ok_or_else(|| Error::ColumnNotFound(name.clone()))?
        }
    };

    let mut values = Vec::new();
    for record in records {
        let record = record?;
        let row = record.position().map_or(0, |p| p.line());
        let cell = record.get(index).ok_or_else(|| Error::Parse {
            row,
            message: format!("no column {index}"),
        })?;
        values.push(parse_cell(cell, row)?);
    }
    TimeSeries::new(values)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Report {
    schema: String,
    schema_version: u32,
    result: TestResult,
}

pub fn report_json(result: &TestResult) -> String {
    let report = Report {
        schema: REPORT_SCHEMA.to_string(),
        schema_version: REPORT_SCHEMA_VERSION,
        result: result.clone(),
    };
    let mut s = serde_json::to_string_pretty(&report).expect("report serializes");
    s.push('\n');
    s
}

pub fn parse_report(text: &str) -> Result<TestResult> {
    let report: Report = serde_json::from_str(text).map_err(|e| Error::Schema(e.to_string()))?;
    if report.schema != REPORT_SCHEMA {
        return Err(Error::Schema(format!("unexpected schema {:?}", report.schema)));
    }
    if report.schema_version != REPORT_SCHEMA_VERSION {
        return Err(Error::Schema(format!(
            "unsupported schema_version {}",
            report.schema_version
        )));
    }
    Ok(report.result)
}

pub fn emit_report(result: &TestResult, path: &Path) -> Result<()> {
    fs::write(path, report_json(result))?;
    Ok(())
}

pub fn load_report(path: &Path) -> Result<TestResult> {
    if !path.exists() {
        return Err(Error::FileNotFound(path.to_path_buf()));
    }
    parse_report(&fs::read_to_string(path)?)
}
