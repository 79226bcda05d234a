//! Reading censored samples from CSV or JSON.
//!
//! CSV: observations as numbers, one per row under an optional `value` header
//! (a single comma-separated line is accepted too). The total sample size `n`
//! is not part of the file and must come from the caller.
//!
//! JSON: `{"n": 10, "values": [87.0, 92.8, ...]}`.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::blue::CensoredSample;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InputFormat {
    Csv,
    Json,
}

impl InputFormat {
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some(ext) if ext.eq_ignore_ascii_case("json") => InputFormat::Json,
            _ => InputFormat::Csv,
        }
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct JsonSample {
    n: usize,
    values: Vec<f64>,
}

fn parse_error(path: &Path, message: impl Into<String>) -> Error {
    Error::Parse {
        what: path.display().to_string(),
        message: message.into(),
    }
}

/// Reads and validates a sample. `n` is required for CSV; for JSON it must
/// agree with the file when given.
pub fn ingest(path: &Path, format: InputFormat, n: Option<usize>) -> Result<CensoredSample<f64>> {
    let text = fs::read_to_string(path)?;
    let (file_n, values) = match format {
        InputFormat::Csv => (None, parse_csv(&text).map_err(|m| parse_error(path, m))?),
        InputFormat::Json => {
            let doc: JsonSample =
                serde_json::from_str(&text).map_err(|e| parse_error(path, e.to_string()))?;
            (Some(doc.n), doc.values)
        }
    };
    let n = match (n, file_n) {
        (Some(a), Some(b)) if a != b => {
            return Err(Error::InvalidConfig(format!(
                "--n {a} disagrees with n = {b} in {}",
                path.display()
            )))
        }
        (Some(a), _) | (None, Some(a)) => a,
        (None, None) => {
            return Err(Error::InvalidConfig(
                "the total sample size n is required for CSV input (--n)".into(),
            ))
        }
    };
    CensoredSample::new(n, values)
}

fn parse_csv(text: &str) -> std::result::Result<Vec<f64>, String> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let mut values = Vec::new();
    for (row, record) in reader.records().enumerate() {
        let record = record.map_err(|e| e.to_string())?;
        for field in record.iter().filter(|f| !f.is_empty()) {
            match field.parse::<f64>() {
                Ok(v) => values.push(v),
                Err(_) if row == 0 && field.eq_ignore_ascii_case("value") => {}
                Err(_) => return Err(format!("row {}: `{field}` is not a number", row + 1)),
            }
        }
    }
    if values.is_empty() {
        return Err("no observations found".into());
    }
    Ok(values)
}

/// Serializes a sample in the given format; CSV drops `n`.
pub fn emit(sample: &CensoredSample<f64>, format: InputFormat) -> Result<String> {
    match format {
        InputFormat::Csv => {
            let mut out = String::from("value\n");
            for v in sample.values() {
                // `{:?}` prints the shortest representation that parses back exactly.
                out.push_str(&format!("{v:?}\n"));
            }
            Ok(out)
        }
        InputFormat::Json => Ok(serde_json::to_string_pretty(&JsonSample {
            n: sample.n(),
            values: sample.values().to_vec(),
        })?),
    }
}
