//! Sweep results as CSV, one row per point.
//!
//! Floats are written in their shortest round-trip form, so parsing a row
//! back yields the exact bits that were written.

use std::io::{self, Write};

use crate::error::{Error, Result};
use crate::mc::MseRecord;

pub const HEADER: &str =
    "axis_name,axis_value,mse_empirical,mse_stderr,lower_bound,upper_bound,mse_asymptotic,trials,seed";

#[derive(Debug, Clone, PartialEq)]
pub struct CsvRow {
    pub axis_name: String,
    pub axis_value: f64,
    pub mse_empirical: f64,
    pub mse_stderr: f64,
    pub lower_bound: f64,
    pub upper_bound: f64,
    pub mse_asymptotic: f64,
    pub trials: usize,
    pub seed: u64,
}

impl CsvRow {
    pub fn from_record(axis_name: &str, record: &MseRecord) -> Self {
        Self {
            axis_name: axis_name.to_string(),
            axis_value: record.axis_value,
            mse_empirical: record.mse_empirical,
            mse_stderr: record.mse_stderr,
            lower_bound: record.lower_bound,
            upper_bound: record.upper_bound,
            mse_asymptotic: record.mse_asymptotic,
            trials: record.trials,
            seed: record.seed,
        }
    }

    pub fn to_line(&self) -> String {
        let floats = [
            self.axis_value,
            self.mse_empirical,
            self.mse_stderr,
            self.lower_bound,
            self.upper_bound,
            self.mse_asymptotic,
        ];
        let mut fields = vec![self.axis_name.clone()];
        fields.extend(floats.iter().map(|&x| format_float(x)));
        fields.push(self.trials.to_string());
        fields.push(self.seed.to_string());
        fields.join(",")
    }

    pub fn parse_line(line: &str) -> Result<Self> {
        let fields: Vec<&str> = line.trim_end().split(',').collect();
        if fields.len() != 9 {
            return Err(Error::Config(format!("expected 9 CSV fields, got {}", fields.len())));
        }
        let float = |i: usize| {
            fields[i]
                .parse::<f64>()
                .map_err(|e| Error::Config(format!("field {i} '{}': {e}", fields[i])))
        };
        let int = |i: usize| {
            fields[i]
                .parse::<u64>()
                .map_err(|e| Error::Config(format!("field {i} '{}': {e}", fields[i])))
        };
        Ok(Self {
            axis_name: fields[0].to_string(),
            axis_value: float(1)?,
            mse_empirical: float(2)?,
            mse_stderr: float(3)?,
            lower_bound: float(4)?,
            upper_bound: float(5)?,
            mse_asymptotic: float(6)?,
            trials: int(7)? as usize,
            seed: int(8)?,
        })
    }
}

/// Shortest decimal that parses back to `x`; scientific notation outside
/// `[1e-5, 1e16)`.
pub fn format_float(x: f64) -> String {
    let a = x.abs();
    if a == 0.0 || (1e-5..1e16).contains(&a) || !x.is_finite() {
        format!("{x}")
    } else {
        format!("{x:e}")
    }
}

pub fn write_rows<W: Write>(mut out: W, rows: &[CsvRow]) -> io::Result<()> {
    writeln!(out, "{HEADER}")?;
    for row in rows {
        writeln!(out, "{}", row.to_line())?;
    }
    out.flush()
}

pub fn parse(text: &str) -> Result<Vec<CsvRow>> {
    let mut lines = text.lines();
    match lines.next() {
        Some(h) if h.trim_end() == HEADER => {}
        _ => return Err(Error::Config("missing or wrong CSV header".into())),
    }
    lines.filter(|l| !l.trim().is_empty()).map(CsvRow::parse_line).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(x: f64) -> CsvRow {
        CsvRow {
            axis_name: "snr".into(),
            axis_value: -10.0,
            mse_empirical: x,
            mse_stderr: 1.0 / 3.0,
            lower_bound: 2.5e-17,
            upper_bound: 0.1,
            mse_asymptotic: 0.1,
            trials: 10_000,
            seed: u64::MAX,
        }
    }

    #[test]
    fn round_trip_is_exact() {
        let rows: Vec<CsvRow> = [0.0, 1e-300, 0.403_652_637_676_805_9, 123456.789, 3e20, -0.0]
            .into_iter()
            .map(row)
            .collect();
        let mut buf = Vec::new();
        write_rows(&mut buf, &rows).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with(HEADER));
        let back = parse(&text).unwrap();
        assert_eq!(back.len(), rows.len());
        for (a, b) in rows.iter().zip(&back) {
            assert_eq!(a.mse_empirical.to_bits(), b.mse_empirical.to_bits());
            assert_eq!(a, b);
        }
    }

    #[test]
    fn float_format() {
        assert_eq!(format_float(0.5), "0.5");
        assert_eq!(format_float(-10.0), "-10");
        assert_eq!(format_float(2.5e-17), "2.5e-17");
        assert_eq!(format_float(1e16), "1e16");
        assert_eq!(format_float(0.0), "0");
    }

    #[test]
    fn rejects_malformed() {
        assert!(parse("a,b\n").is_err());
        assert!(parse(&format!("{HEADER}\nsnr,1,2\n")).is_err());
        assert!(parse(&format!("{HEADER}\nsnr,x,2,3,4,5,6,7,8\n")).is_err());
    }
}
