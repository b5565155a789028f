//! Results files: one CSV row per (cell, algorithm, metric).

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

use super::{OutputFormat, SweepSummary};

pub const CSV_HEADER: [&str; 7] = ["m", "n", "algorithm", "metric", "mean", "stderr", "trials"];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub m: usize,
    pub n: usize,
    pub algorithm: String,
    pub metric: String,
    pub mean: f64,
    pub stderr: f64,
    pub trials: u64,
}

/// Formats `x` with 12 significant digits, plain notation for exponents in
/// `-5..12`, scientific otherwise, trailing zeros trimmed.
pub fn format_sig12(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return if x.is_nan() { "NaN".into() } else if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    let sci = format!("{:.11e}", x.abs());
    let (mantissa, exp) = sci.split_once('e').expect("scientific format");
    let exp: i32 = exp.parse().expect("integer exponent");
    let digits: String = mantissa.chars().filter(char::is_ascii_digit).collect();
    let sign = if x < 0.0 { "-" } else { "" };
    let trim = |s: &str| s.trim_end_matches('0').to_string();

    if (0..12).contains(&exp) {
        let split = exp as usize + 1;
        let frac = trim(&digits[split..]);
        if frac.is_empty() {
            format!("{sign}{}", &digits[..split])
        } else {
            format!("{sign}{}.{frac}", &digits[..split])
        }
    } else if (-5..0).contains(&exp) {
        let zeros = "0".repeat((-exp - 1) as usize);
        format!("{sign}0.{zeros}{}", trim(&digits))
    } else {
        let rest = trim(&digits[1..]);
        if rest.is_empty() {
            format!("{sign}{}e{exp}", &digits[..1])
        } else {
            format!("{sign}{}.{rest}e{exp}", &digits[..1])
        }
    }
}

pub fn rows_to_csv(rows: &[ResultRow]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(CSV_HEADER)?;
    for r in rows {
        w.write_record([
            r.m.to_string(),
            r.n.to_string(),
            r.algorithm.clone(),
            r.metric.clone(),
            format_sig12(r.mean),
            format_sig12(r.stderr),
            r.trials.to_string(),
        ])?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

pub fn parse_csv(text: &str) -> Result<Vec<ResultRow>> {
    let mut reader = csv::Reader::from_reader(text.as_bytes());
    let header = reader.headers()?.clone();
    if header.iter().ne(CSV_HEADER) {
        return Err(Error::Parse(format!("unexpected header {header:?}")));
    }
    reader.deserialize().map(|r| r.map_err(Error::from)).collect()
}

/// Rows with every value rounded through its 12-digit text form, so the
/// JSON carries exactly what the CSV does.
fn rounded(rows: &[ResultRow]) -> Vec<ResultRow> {
    let round = |x: f64| format_sig12(x).parse::<f64>().unwrap_or(x);
    rows.iter().map(|r| ResultRow { mean: round(r.mean), stderr: round(r.stderr), ..r.clone() }).collect()
}

pub fn rows_to_json(rows: &[ResultRow]) -> Result<String> {
    Ok(serde_json::to_string_pretty(&rounded(rows))?)
}

pub fn write_results(summary: &SweepSummary, path: &Path, format: OutputFormat) -> Result<()> {
    let rows = summary.rows();
    let text = match format {
        OutputFormat::Csv => rows_to_csv(&rows)?,
        OutputFormat::Json => rows_to_json(&rows)?,
    };
    std::fs::write(path, text)?;
    Ok(())
}
