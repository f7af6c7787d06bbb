//! Input parsing. Arguments that name an existing file are read from disk;
//! anything else is parsed inline.

use std::path::Path;

use anyhow::{Context, Result};
use representer::spline::Sample;
use representer::{Moments, TrigSystem};
use serde::de::DeserializeOwned;

use crate::report::usage;

pub fn read_text(arg: &str) -> Result<String> {
    let path = Path::new(arg);
    if path.is_file() {
        std::fs::read_to_string(path).with_context(|| format!("reading {arg}"))
    } else {
        Ok(arg.to_string())
    }
}

pub fn read_json<T: DeserializeOwned>(arg: &str, what: &str) -> Result<T> {
    let text = read_text(arg)?;
    serde_json::from_str(&text).map_err(|e| usage(format!("cannot parse {what}: {e}")))
}

fn parse_numbers(text: &str) -> Result<Vec<f64>> {
    text.split(|c: char| c == ',' || c == ';' || c.is_whitespace())
        .filter(|s| !s.is_empty())
        .map(|s| s.parse::<f64>().map_err(|_| usage(format!("not a number: {s:?}"))))
        .collect()
}

/// Moments as `{"f_c": .., "y": [..]}`, a JSON array, or CSV numbers.
/// Without `f_c`, the cutoff is read off the length `2 f_c + 1`.
pub fn parse_moments(arg: &str, f_c: Option<usize>) -> Result<Moments> {
    let text = read_text(arg)?;
    let trimmed = text.trim();
    let y: Moments = if trimmed.starts_with('{') {
        serde_json::from_str(trimmed).map_err(|e| usage(format!("cannot parse moments: {e}")))?
    } else {
        let values: Vec<f64> = if trimmed.starts_with('[') {
            serde_json::from_str(trimmed).map_err(|e| usage(format!("cannot parse moments: {e}")))?
        } else {
            parse_numbers(trimmed)?
        };
        let fc = match f_c {
            Some(fc) => fc,
            None if values.len() % 2 == 1 => values.len() / 2,
            None => return Err(usage(format!("{} moments is not of the form 2 f_c + 1", values.len()))),
        };
        let sys = TrigSystem::new(fc).map_err(|e| usage(e.to_string()))?;
        Moments::new(sys, values).map_err(|e| usage(e.to_string()))?
    };
    if let Some(fc) = f_c {
        if y.system().f_c() != fc {
            return Err(usage(format!("moments have f_c = {}, expected {fc}", y.system().f_c())));
        }
    }
    Ok(y)
}

/// Two-column `s,y` CSV; rows whose first field is not numeric (headers) are skipped.
pub fn read_samples(arg: &str) -> Result<Vec<Sample<f64>>> {
    let text = read_text(arg)?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_reader(text.as_bytes());
    let mut samples = Vec::new();
    for (line, record) in reader.records().enumerate() {
        let record = record.map_err(|e| usage(format!("samples: {e}")))?;
        let Some(Ok(s)) = record.get(0).map(str::parse::<f64>) else { continue };
        let y = record
            .get(1)
            .and_then(|v| v.parse::<f64>().ok())
            .ok_or_else(|| usage(format!("samples line {}: expected `s,y`", line + 1)))?;
        samples.push(Sample { s, y });
    }
    Ok(samples)
}

pub fn write_csv(path: &Path, header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> Result<()> {
    let mut w = csv::Writer::from_path(path).with_context(|| format!("writing {}", path.display()))?;
    w.write_record(header)?;
    for row in rows {
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

pub fn csv_string(header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header)?;
    for row in rows {
        w.write_record(&row)?;
    }
    Ok(String::from_utf8(w.into_inner()?)?)
}
