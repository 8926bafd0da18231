//! Rectangular numeric results and their CSV form.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{ExperimentError, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct ResultTable {
    pub metadata: Vec<(String, String)>,
    pub header: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

/// `printf("%.12e")`: twelve mantissa digits, signed exponent of at least
/// two digits.
pub fn format_sci(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    let s = format!("{x:.12e}");
    let (mantissa, exp) = s.split_once('e').expect("scientific format has an exponent");
    let exp: i32 = exp.parse().expect("integer exponent");
    let sign = if exp < 0 { '-' } else { '+' };
    format!("{mantissa}e{sign}{:02}", exp.abs())
}

impl ResultTable {
    pub fn new(header: Vec<String>) -> Self {
        Self { metadata: Vec::new(), header, rows: Vec::new() }
    }

    pub fn push_row(&mut self, row: Vec<f64>) -> Result<()> {
        if row.len() != self.header.len() {
            return Err(ExperimentError::Domain(format!(
                "row of {} values for {} columns",
                row.len(),
                self.header.len()
            )));
        }
        self.rows.push(row);
        Ok(())
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let idx = self.header.iter().position(|h| h == name)?;
        Some(self.rows.iter().map(|r| r[idx]).collect())
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        for (k, v) in &self.metadata {
            for line in v.lines() {
                let _ = writeln!(out, "# {k}: {line}");
            }
        }
        let _ = writeln!(out, "{}", self.header.join(","));
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(|&v| format_sci(v)).collect();
            let _ = writeln!(out, "{}", cells.join(","));
        }
        out
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
            std::fs::create_dir_all(parent).map_err(|source| ExperimentError::Io { path: parent.into(), source })?;
        }
        std::fs::write(path, self.to_csv()).map_err(|source| ExperimentError::Io { path: path.into(), source })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn c_style_exponents() {
        assert_eq!(format_sci(1.0), "1.000000000000e+00");
        assert_eq!(format_sci(-2.5e-7), "-2.500000000000e-07");
        assert_eq!(format_sci(6.02e123), "6.020000000000e+123");
        assert_eq!(format_sci(0.0), "0.000000000000e+00");
        assert_eq!(format_sci(f64::NAN), "nan");
    }

    #[test]
    fn csv_layout() {
        let mut t = ResultTable::new(vec!["a".into(), "b".into()]);
        t.metadata.push(("scenario".into(), "demo".into()));
        t.push_row(vec![1.0, 2.0]).unwrap();
        assert!(t.push_row(vec![1.0]).is_err());
        let csv = t.to_csv();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines, vec!["# scenario: demo", "a,b", "1.000000000000e+00,2.000000000000e+00"]);
        assert_eq!(t.column("b"), Some(vec![2.0]));
    }
}
