//! Plot-ready CSV for shell analyses.
//!
//! Column order is fixed: s, epsilon, count, min_gap, shell_sum_mid, shell_sum_rad, truncated.
//! Numeric text is kept verbatim so that decode followed by encode reproduces the input.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::shells::ShellAnalysis;

pub const SHELL_CSV_HEADER: [&str; 7] =
    ["s", "epsilon", "count", "min_gap", "shell_sum_mid", "shell_sum_rad", "truncated"];

const MID_DIGITS: usize = 20;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ShellCsvRow {
    pub s: u32,
    pub epsilon: f64,
    pub count: u64,
    /// Empty when the shell has fewer than two members.
    pub min_gap: Option<u64>,
    pub shell_sum_mid: String,
    pub shell_sum_rad: String,
    pub truncated: bool,
}

pub fn shell_rows(a: &ShellAnalysis) -> Vec<ShellCsvRow> {
    a.records
        .iter()
        .map(|r| ShellCsvRow {
            s: r.s,
            epsilon: r.epsilon,
            count: r.count() as u64,
            min_gap: r.min_gap(),
            shell_sum_mid: r.shell_sum.mid_decimal(MID_DIGITS),
            shell_sum_rad: r.shell_sum.radius().to_sci_string(),
            truncated: r.truncated,
        })
        .collect()
}

pub fn encode_shell_csv(rows: &[ShellCsvRow]) -> Result<String> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(Vec::new());
    w.write_record(SHELL_CSV_HEADER).map_err(csv_err)?;
    for r in rows {
        w.serialize(r).map_err(csv_err)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Parse(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| Error::Parse(e.to_string()))
}

fn csv_err(e: csv::Error) -> Error {
    Error::Parse(format!("shell csv: {e}"))
}

fn check_number(field: &str, v: &str) -> Result<()> {
    match v.parse::<f64>() {
        Ok(x) if !x.is_nan() => Ok(()),
        _ => Err(Error::Parse(format!("shell csv: {field} {v:?} is not a number"))),
    }
}

pub fn decode_shell_csv(text: &str) -> Result<Vec<ShellCsvRow>> {
    let mut r = csv::ReaderBuilder::new().has_headers(true).from_reader(text.as_bytes());
    let header = r.headers().map_err(csv_err)?.clone();
    if header.iter().ne(SHELL_CSV_HEADER) {
        return Err(Error::Parse(format!("shell csv: header must be {}", SHELL_CSV_HEADER.join(","))));
    }
    let mut rows = Vec::new();
    for rec in r.deserialize::<ShellCsvRow>() {
        let row = rec.map_err(csv_err)?;
        if !row.epsilon.is_finite() {
            return Err(Error::Parse(format!("shell csv: epsilon {} is not finite", row.epsilon)));
        }
        check_number("shell_sum_mid", &row.shell_sum_mid)?;
        check_number("shell_sum_rad", &row.shell_sum_rad)?;
        rows.push(row);
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(s: u32) -> ShellCsvRow {
        ShellCsvRow {
            s,
            epsilon: 2f64.powi(-(s as i32)),
            count: 17,
            min_gap: if s % 2 == 0 { Some(3) } else { None },
            shell_sum_mid: "0.12345678901234567890".into(),
            shell_sum_rad: "1.5e-30".into(),
            truncated: s > 2,
        }
    }

    #[test]
    fn round_trip() {
        let rows: Vec<_> = (0..5).map(row).collect();
        let text = encode_shell_csv(&rows).unwrap();
        assert!(text.starts_with("s,epsilon,count,min_gap,shell_sum_mid,shell_sum_rad,truncated\n"));
        let back = decode_shell_csv(&text).unwrap();
        assert_eq!(back, rows);
        assert_eq!(encode_shell_csv(&back).unwrap(), text);
    }

    #[test]
    fn rejects_bad_header_and_fields() {
        assert!(decode_shell_csv("a,b\n1,2\n").is_err());
        let text = encode_shell_csv(&[row(0)]).unwrap().replace("1.5e-30", "oops");
        assert!(decode_shell_csv(&text).is_err());
    }
}
