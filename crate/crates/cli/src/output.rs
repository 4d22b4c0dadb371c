//! Command results and their serialization to JSON, CSV and VTK.

use std::io::Write;
use std::path::Path;

use serde_json::Value;

use crate::error::CliError;

/// Shortest round-trip decimal; exponent form for very large or small values.
pub fn num(v: f64) -> String {
    format!("{v:?}")
}

/// Result of one command: a JSON summary, an optional document body, and
/// whether the checked tolerance was met.
#[derive(Debug, Clone, PartialEq)]
pub struct Output {
    pub summary: Value,
    pub body: Option<String>,
    pub pass: bool,
}

impl Output {
    pub fn summary(summary: Value, pass: bool) -> Self {
        Output { summary, body: None, pass }
    }

    pub fn document(summary: Value, body: String, pass: bool) -> Self {
        Output { summary, body: Some(body), pass }
    }

    /// The body (or the summary when there is none) goes to `out` if given,
    /// else to stdout; the summary always reaches stdout.
    pub fn emit(&self, out: Option<&Path>, stdout: &mut dyn Write) -> Result<(), CliError> {
        let summary = serde_json::to_string_pretty(&self.summary).expect("json values serialize");
        let io = |e: std::io::Error| CliError::io(e.to_string());
        match (out, &self.body) {
            (Some(path), body) => {
                let content = body.clone().unwrap_or_else(|| format!("{summary}\n"));
                std::fs::write(path, content).map_err(|e| CliError::io(format!("{}: {e}", path.display())))?;
                writeln!(stdout, "{summary}").map_err(io)
            }
            (None, Some(body)) => stdout.write_all(body.as_bytes()).map_err(io),
            (None, None) => writeln!(stdout, "{summary}").map_err(io),
        }
    }
}

/// CSV with a header row; `None` cells are left empty.
pub fn csv_table(header: &[&str], rows: impl IntoIterator<Item = Vec<Option<String>>>) -> Result<String, CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let err = |e: csv::Error| CliError::io(e.to_string());
    w.write_record(header).map_err(err)?;
    for row in rows {
        w.write_record(row.iter().map(|c| c.as_deref().unwrap_or(""))).map_err(err)?;
    }
    let bytes = w.into_inner().map_err(|e| CliError::io(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

/// Point data attached to a structured grid.
pub enum PointData {
    Scalars(&'static str, Vec<f64>),
    Vectors(&'static str, Vec<[f64; 3]>),
}

/// Legacy ASCII VTK `STRUCTURED_GRID`; `points` ordered with the first
/// dimension fastest.
pub fn vtk_structured_grid(title: &str, dims: [usize; 3], points: &[[f64; 3]], data: &[PointData]) -> String {
    let n = points.len();
    debug_assert_eq!(n, dims.iter().product::<usize>());
    let mut s = String::new();
    s.push_str("# vtk DataFile Version 3.0\n");
    s.push_str(&title.replace('\n', " "));
    s.push_str("\nASCII\nDATASET STRUCTURED_GRID\n");
    s.push_str(&format!("DIMENSIONS {} {} {}\nPOINTS {n} double\n", dims[0], dims[1], dims[2]));
    for p in points {
        s.push_str(&format!("{} {} {}\n", num(p[0]), num(p[1]), num(p[2])));
    }
    s.push_str(&format!("POINT_DATA {n}\n"));
    for d in data {
        match d {
            PointData::Scalars(name, v) => {
                s.push_str(&format!("SCALARS {name} double 1\nLOOKUP_TABLE default\n"));
                for x in v {
                    s.push_str(&num(*x));
                    s.push('\n');
                }
            }
            PointData::Vectors(name, v) => {
                s.push_str(&format!("VECTORS {name} double\n"));
                for x in v {
                    s.push_str(&format!("{} {} {}\n", num(x[0]), num(x[1]), num(x[2])));
                }
            }
        }
    }
    s
}
