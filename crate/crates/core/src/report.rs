//! Machine-readable output: JSON reports and the CSV summary table. All
//! floating-point values are written with 12 significant digits.

use std::io::{self, Write};
use std::path::Path;

use serde::Serialize;
use serde_json::ser::{Formatter, PrettyFormatter};

use crate::error::{Error, Result};
use crate::harness::{ConvergenceTable, TheoremReport};

/// `x` with 12 significant digits in exponent notation.
pub fn fmt12(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.11e}")
    } else {
        x.to_string()
    }
}

/// Pretty JSON with floats rounded to 12 significant digits.
struct Sig12<'a>(PrettyFormatter<'a>);

impl Formatter for Sig12<'_> {
    fn write_f64<W: ?Sized + Write>(&mut self, w: &mut W, value: f64) -> io::Result<()> {
        w.write_all(fmt12(value).as_bytes())
    }
    fn write_f32<W: ?Sized + Write>(&mut self, w: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(w, value as f64)
    }
    fn begin_array<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_array(w)
    }
    fn end_array<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array(w)
    }
    fn begin_array_value<W: ?Sized + Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_array_value(w, first)
    }
    fn end_array_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array_value(w)
    }
    fn begin_object<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object(w)
    }
    fn end_object<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object(w)
    }
    fn begin_object_key<W: ?Sized + Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_object_key(w, first)
    }
    fn begin_object_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object_value(w)
    }
    fn end_object_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object_value(w)
    }
}

pub fn to_json<T: Serialize>(value: &T) -> Result<String> {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, Sig12(PrettyFormatter::new()));
    value.serialize(&mut ser).map_err(|e| Error::Invalid(format!("serialisation failed: {e}")))?;
    Ok(String::from_utf8(buf).expect("serde_json writes UTF-8"))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = to_json(value)?;
    text.push('\n');
    std::fs::write(path, text)?;
    Ok(())
}

/// One line of the summary table.
#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct SummaryRow {
    pub scenario: String,
    pub resolution: String,
    pub lambda1: String,
    pub lambda2: String,
    pub bound: String,
    pub margin: String,
    pub order: String,
}

/// One row per resolution, then an `extrapolated` row carrying the
/// observed order.
pub fn summary_rows(report: &TheoremReport) -> Vec<SummaryRow> {
    let mut rows: Vec<SummaryRow> = report
        .per_resolution
        .iter()
        .map(|r| SummaryRow {
            scenario: report.scenario.clone(),
            resolution: r.resolution.to_string(),
            lambda1: fmt12(r.lambda1),
            lambda2: fmt12(r.lambda2),
            bound: fmt12(r.bound),
            margin: fmt12(r.margin),
            order: String::new(),
        })
        .collect();
    rows.push(SummaryRow {
        scenario: report.scenario.clone(),
        resolution: "extrapolated".into(),
        lambda1: String::new(),
        lambda2: fmt12(report.lambda2_extrapolated),
        bound: fmt12(report.bound),
        margin: fmt12(report.margin),
        order: report.order.map(fmt12).unwrap_or_default(),
    });
    rows
}

/// Rows of a refinement study; the bound and margin columns are empty.
pub fn convergence_rows(name: &str, table: &ConvergenceTable) -> Vec<SummaryRow> {
    table
        .rows
        .iter()
        .map(|r| SummaryRow {
            scenario: name.into(),
            resolution: r.resolution.to_string(),
            lambda1: fmt12(r.lambda1),
            lambda2: fmt12(r.lambda2),
            bound: String::new(),
            margin: String::new(),
            order: r.observed_order.map(fmt12).unwrap_or_default(),
        })
        .collect()
}

pub fn write_csv<W: Write>(rows: &[SummaryRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(r).map_err(|e| Error::Invalid(format!("csv: {e}")))?;
    }
    if rows.is_empty() {
        w.write_record(["scenario", "resolution", "lambda1", "lambda2", "bound", "margin", "order"])
            .map_err(|e| Error::Invalid(format!("csv: {e}")))?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn twelve_significant_digits() {
        assert_eq!(fmt12(-2.0), "-2.00000000000e0");
        assert_eq!(fmt12(1.0 / 3.0), "3.33333333333e-1");
        #[derive(Serialize)]
        struct S {
            x: f64,
            y: Vec<f64>,
            z: f64,
        }
        let text = to_json(&S { x: std::f64::consts::PI, y: vec![1e-20], z: f64::NAN }).unwrap();
        let v: serde_json::Value = serde_json::from_str(&text).unwrap();
        assert!((v["x"].as_f64().unwrap() - std::f64::consts::PI).abs() < 5e-12);
        assert!(v["z"].is_null());
        assert!(text.contains("3.14159265359e0"));
    }

    #[test]
    fn csv_header_matches_columns() {
        let mut buf = Vec::new();
        write_csv(&[], &mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap().trim(), "scenario,resolution,lambda1,lambda2,bound,margin,order");
    }
}
