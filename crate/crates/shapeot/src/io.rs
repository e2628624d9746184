//! File formats: measure JSON/CSV, coupling JSON, isometry and algebra JSON,
//! curve JSON, and the orbit-subspace report.
//!
//! JSON numbers are written in shortest round-trip form, so a write → read →
//! write cycle is byte-stable. Measure readers renormalize weights only when
//! the stored sum strays beyond the construction tolerance, and reject
//! negative weights outright.

use std::fs;
use std::path::Path;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geodesic::CurveSample;
use crate::isometry::{IsoAlgebraElement, Isometry, IsometryError};
use crate::measure::{DiscreteMeasure, MeasureError};
use crate::tangent::OrbitSubspaceReport;
use crate::transport::Coupling;

#[derive(Debug, Error)]
pub enum IoError {
    #[error("{path}: {source}")]
    Read { path: String, source: std::io::Error },
    #[error("{path}: {source}")]
    Write { path: String, source: std::io::Error },
    #[error("{path}: {message}")]
    Parse { path: String, message: String },
    #[error("{path}: {source}")]
    Measure { path: String, source: MeasureError },
    #[error("{path}: {source}")]
    Isometry { path: String, source: IsometryError },
    #[error("{path}: unsupported extension (expected .json or .csv)")]
    UnknownFormat { path: String },
}

impl IoError {
    pub fn path(&self) -> &str {
        match self {
            IoError::Read { path, .. }
            | IoError::Write { path, .. }
            | IoError::Parse { path, .. }
            | IoError::Measure { path, .. }
            | IoError::Isometry { path, .. }
            | IoError::UnknownFormat { path } => path,
        }
    }
}

#[derive(Serialize, Deserialize)]
struct MeasureWire {
    points: Vec<Vec<f64>>,
    weights: Vec<f64>,
}

impl MeasureWire {
    fn from_measure(mu: &DiscreteMeasure) -> Self {
        let points = (0..mu.len())
            .map(|k| (0..mu.dim()).map(|l| mu.points()[(k, l)]).collect())
            .collect();
        Self { points, weights: mu.weights().iter().copied().collect() }
    }

    fn into_measure(self, path: &str) -> Result<DiscreteMeasure, IoError> {
        DiscreteMeasure::from_rows(&self.points, &self.weights)
            .map_err(|source| IoError::Measure { path: path.into(), source })
    }
}

#[derive(Serialize, Deserialize)]
struct IsometryWire {
    #[serde(rename = "R")]
    rotation: Vec<Vec<f64>>,
    t: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct AlgebraWire {
    #[serde(rename = "A")]
    skew: Vec<Vec<f64>>,
    a: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct CurveWire {
    times: Vec<f64>,
    measures: Vec<MeasureWire>,
}

#[derive(Serialize)]
struct CouplingWire {
    rows: usize,
    cols: usize,
    entries: Vec<(usize, usize, f64)>,
}

#[derive(Serialize)]
struct OrbitReportWire<'a> {
    singular_values: Vec<f64>,
    rank: usize,
    tangent_dim: usize,
    shape_tangent_dim: usize,
    kernel_dim: usize,
    kernel: Vec<AlgebraWire>,
    basis_labels: Vec<&'a str>,
}

fn read_to_string(path: &Path) -> Result<String, IoError> {
    fs::read_to_string(path)
        .map_err(|source| IoError::Read { path: path.display().to_string(), source })
}

fn write_string(path: &Path, contents: &str) -> Result<(), IoError> {
    fs::write(path, contents)
        .map_err(|source| IoError::Write { path: path.display().to_string(), source })
}

fn parse_err<E: std::fmt::Display>(path: &Path) -> impl FnOnce(E) -> IoError + '_ {
    move |e| IoError::Parse { path: path.display().to_string(), message: e.to_string() }
}

fn matrix_from_rows(rows: &[Vec<f64>], path: &Path, what: &str) -> Result<DMatrix<f64>, IoError> {
    let nrows = rows.len();
    let ncols = rows.first().map(Vec::len).unwrap_or(0);
    if rows.iter().any(|r| r.len() != ncols) {
        return Err(IoError::Parse {
            path: path.display().to_string(),
            message: format!("{what}: ragged matrix rows"),
        });
    }
    Ok(DMatrix::from_row_iterator(nrows, ncols, rows.iter().flatten().copied()))
}

/// Reads a measure from `.json` or `.csv`, dispatching on the extension.
pub fn read_measure(path: &Path) -> Result<DiscreteMeasure, IoError> {
    match extension(path) {
        Some("json") => {
            let wire: MeasureWire =
                serde_json::from_str(&read_to_string(path)?).map_err(parse_err(path))?;
            wire.into_measure(&path.display().to_string())
        }
        Some("csv") => read_measure_csv(path),
        _ => Err(IoError::UnknownFormat { path: path.display().to_string() }),
    }
}

/// Writes a measure as `.json` or `.csv`, dispatching on the extension.
pub fn write_measure(path: &Path, mu: &DiscreteMeasure) -> Result<(), IoError> {
    match extension(path) {
        Some("json") => write_string(path, &measure_to_json(mu)),
        Some("csv") => write_measure_csv(path, mu),
        _ => Err(IoError::UnknownFormat { path: path.display().to_string() }),
    }
}

pub fn measure_to_json(mu: &DiscreteMeasure) -> String {
    serde_json::to_string_pretty(&MeasureWire::from_measure(mu)).expect("measure serializes")
}

pub fn measure_from_json(text: &str, origin: &str) -> Result<DiscreteMeasure, IoError> {
    let wire: MeasureWire = serde_json::from_str(text)
        .map_err(|e| IoError::Parse { path: origin.into(), message: e.to_string() })?;
    wire.into_measure(origin)
}

fn extension(path: &Path) -> Option<&str> {
    path.extension().and_then(|e| e.to_str())
}

fn read_measure_csv(path: &Path) -> Result<DiscreteMeasure, IoError> {
    let text = read_to_string(path)?;
    let mut reader = csv::Reader::from_reader(text.as_bytes());
    let headers = reader.headers().map_err(parse_err(path))?.clone();
    let n = headers.len().saturating_sub(1);
    if n == 0 || headers.get(n) != Some("w") {
        return Err(IoError::Parse {
            path: path.display().to_string(),
            message: "expected header x1,...,xn,w".into(),
        });
    }
    for (l, field) in headers.iter().take(n).enumerate() {
        if field != format!("x{}", l + 1) {
            return Err(IoError::Parse {
                path: path.display().to_string(),
                message: format!("column {} named {field:?}, expected x{}", l + 1, l + 1),
            });
        }
    }
    let mut rows = Vec::new();
    let mut weights = Vec::new();
    for record in reader.records() {
        let record = record.map_err(parse_err(path))?;
        let mut row = Vec::with_capacity(n);
        for field in record.iter().take(n) {
            row.push(field.trim().parse::<f64>().map_err(parse_err(path))?);
        }
        weights.push(
            record
                .get(n)
                .ok_or_else(|| IoError::Parse {
                    path: path.display().to_string(),
                    message: "missing weight column".into(),
                })?
                .trim()
                .parse::<f64>()
                .map_err(parse_err(path))?,
        );
        rows.push(row);
    }
    DiscreteMeasure::from_rows(&rows, &weights)
        .map_err(|source| IoError::Measure { path: path.display().to_string(), source })
}

fn write_measure_csv(path: &Path, mu: &DiscreteMeasure) -> Result<(), IoError> {
    let mut out = String::new();
    for l in 0..mu.dim() {
        out.push_str(&format!("x{},", l + 1));
    }
    out.push_str("w\n");
    for k in 0..mu.len() {
        for l in 0..mu.dim() {
            out.push_str(&format!("{},", mu.points()[(k, l)]));
        }
        out.push_str(&format!("{}\n", mu.weights()[k]));
    }
    write_string(path, &out)
}

pub fn read_isometry(path: &Path) -> Result<Isometry, IoError> {
    let wire: IsometryWire =
        serde_json::from_str(&read_to_string(path)?).map_err(parse_err(path))?;
    let rotation = matrix_from_rows(&wire.rotation, path, "rotation")?;
    Isometry::new(rotation, DVector::from_vec(wire.t))
        .map_err(|source| IoError::Isometry { path: path.display().to_string(), source })
}

pub fn write_isometry(path: &Path, g: &Isometry) -> Result<(), IoError> {
    let wire = IsometryWire {
        rotation: (0..g.dim())
            .map(|r| (0..g.dim()).map(|c| g.rotation()[(r, c)]).collect())
            .collect(),
        t: g.translation().iter().copied().collect(),
    };
    write_string(path, &serde_json::to_string_pretty(&wire).expect("isometry serializes"))
}

/// Reads an algebra element, validating skew-symmetry.
pub fn read_algebra(path: &Path) -> Result<IsoAlgebraElement, IoError> {
    let wire: AlgebraWire =
        serde_json::from_str(&read_to_string(path)?).map_err(parse_err(path))?;
    let skew = matrix_from_rows(&wire.skew, path, "skew part")?;
    IsoAlgebraElement::new(skew, DVector::from_vec(wire.a))
        .map_err(|source| IoError::Isometry { path: path.display().to_string(), source })
}

pub fn write_algebra(path: &Path, x_alg: &IsoAlgebraElement) -> Result<(), IoError> {
    let n = x_alg.dim();
    let wire = AlgebraWire {
        skew: (0..n).map(|r| (0..n).map(|c| x_alg.skew()[(r, c)]).collect()).collect(),
        a: x_alg.drift().iter().copied().collect(),
    };
    write_string(path, &serde_json::to_string_pretty(&wire).expect("algebra serializes"))
}

pub fn read_curve(path: &Path) -> Result<CurveSample, IoError> {
    let wire: CurveWire = serde_json::from_str(&read_to_string(path)?).map_err(parse_err(path))?;
    let origin = path.display().to_string();
    let measures = wire
        .measures
        .into_iter()
        .map(|m| m.into_measure(&origin))
        .collect::<Result<Vec<_>, _>>()?;
    CurveSample::new(wire.times, measures)
        .map_err(|e| IoError::Parse { path: origin, message: e.to_string() })
}

pub fn write_curve(path: &Path, curve: &CurveSample) -> Result<(), IoError> {
    write_string(path, &curve_to_json(curve))
}

pub fn curve_to_json(curve: &CurveSample) -> String {
    let wire = CurveWire {
        times: curve.times().to_vec(),
        measures: curve.measures().iter().map(MeasureWire::from_measure).collect(),
    };
    serde_json::to_string_pretty(&wire).expect("curve serializes")
}

/// Coupling export: nonzero entries in row-major order.
pub fn coupling_to_json(coupling: &Coupling) -> String {
    let wire = CouplingWire {
        rows: coupling.rows(),
        cols: coupling.cols(),
        entries: coupling.nonzeros(),
    };
    serde_json::to_string_pretty(&wire).expect("coupling serializes")
}

pub fn write_coupling(path: &Path, coupling: &Coupling) -> Result<(), IoError> {
    write_string(path, &coupling_to_json(coupling))
}

pub fn orbit_report_to_json(report: &OrbitSubspaceReport) -> String {
    let n = report.measure().dim();
    let wire = OrbitReportWire {
        singular_values: report.singular_values().iter().copied().collect(),
        rank: report.rank(),
        tangent_dim: report.tangent_dim(),
        shape_tangent_dim: report.shape_tangent_dim(),
        kernel_dim: report.kernel_basis().len(),
        kernel: report
            .kernel_basis()
            .iter()
            .map(|x_alg| AlgebraWire {
                skew: (0..n).map(|r| (0..n).map(|c| x_alg.skew()[(r, c)]).collect()).collect(),
                a: x_alg.drift().iter().copied().collect(),
            })
            .collect(),
        basis_labels: (0..report.killing_basis().len())
            .map(|l| report.killing_basis().label(l))
            .collect(),
    };
    serde_json::to_string_pretty(&wire).expect("report serializes")
}

/// Evaluation matrix as CSV: one column per Killing basis element, one row
/// per (atom, coordinate) pair.
pub fn evaluation_matrix_to_csv(report: &OrbitSubspaceReport) -> String {
    let basis = report.killing_basis();
    let mut out = String::new();
    let labels: Vec<&str> = (0..basis.len()).map(|l| basis.label(l)).collect();
    out.push_str(&labels.join(","));
    out.push('\n');
    let matrix = report.evaluation_matrix();
    for r in 0..matrix.nrows() {
        let row: Vec<String> = (0..matrix.ncols()).map(|c| format!("{}", matrix[(r, c)])).collect();
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}
