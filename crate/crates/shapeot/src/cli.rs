//! The `shapeot` command-line surface.
//!
//! One binary, subcommand per analysis. JSON output carries full double
//! precision and round-trips through the file parsers byte-stably; table
//! output rounds to six decimals for reading. Exit codes are a stable
//! contract: 0 success, 2 parse, 3 dimension mismatch, 4 unsupported p,
//! 5 solver failure, 6 algebra validation.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use crate::geodesic::{
    branch_curve, constant_speed_check, geodesic_between, mass_mixing_curve, mixing_curve,
    quotient_coefficients, GeodesicError, MixingStyle, RampShape, ShapeDistanceMode,
    SwitchFunction, QUOTIENT_SPREAD_TOL,
};
use crate::io::{self, IoError};
use crate::isometry::{
    random_algebra_element, random_isometry, Component, IsometryError,
};
use crate::measure::MeasureError;
use crate::shapedist::{
    shape_distance, shape_distance_oracle_2d, InnerSolver, ShapeError, ShapeSolverConfig,
};
use crate::tangent::{
    continuity_residual, flow_norm_invariance, orbit_subspace, standard_test_battery,
    TangentError, RANK_REL_TOL,
};
use crate::transport::{wasserstein_entropic, wasserstein_exact, TransportError};
use crate::isometry::flow_pushforward;

pub const EXIT_OK: i32 = 0;
pub const EXIT_PARSE: i32 = 2;
pub const EXIT_DIMENSION: i32 = 3;
pub const EXIT_UNSUPPORTED_P: i32 = 4;
pub const EXIT_SOLVER: i32 = 5;
pub const EXIT_ALGEBRA: i32 = 6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OutputFormat {
    Json,
    Table,
}

/// Parsed invocation: subcommand, input paths, solver options, output sink.
#[derive(Debug, Parser)]
#[command(
    name = "shapeot",
    about = "Wasserstein and shape distances for discrete measures on R^n",
    version
)]
pub struct RunConfig {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct CommonOut {
    /// Output format for the report.
    #[arg(long, value_enum, default_value = "table")]
    format: OutputFormat,
    /// Write the report here instead of standard output.
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Wasserstein distance W_p between two measure files.
    Dist {
        mu: PathBuf,
        nu: PathBuf,
        /// Cost exponent p >= 1.
        #[arg(long, default_value_t = 2.0)]
        p: f64,
        /// Use the entropic solver with this regularization instead of the
        /// exact one.
        #[arg(long)]
        epsilon: Option<f64>,
        /// Dump the optimal coupling to this JSON file.
        #[arg(long)]
        coupling: Option<PathBuf>,
        #[command(flatten)]
        out: CommonOut,
    },
    /// Shape distance D_p = inf over rigid motions of W_p(g#mu, nu).
    ShapeDist {
        mu: PathBuf,
        nu: PathBuf,
        /// Cost exponent; the alternating solver requires 2.
        #[arg(long, default_value_t = 2.0)]
        p: f64,
        /// Restart count for the alternating solver.
        #[arg(long, default_value_t = 16)]
        restarts: usize,
        /// Relative convergence tolerance.
        #[arg(long, default_value_t = 1e-9)]
        rel_tol: f64,
        /// Seed for the restart schedule.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Run Sinkhorn at this epsilon inside alternations.
        #[arg(long)]
        epsilon: Option<f64>,
        /// Switch to the certified rotation-grid oracle with N angles
        /// (measures must be planar).
        #[arg(long, value_name = "N")]
        oracle_2d: Option<usize>,
        #[command(flatten)]
        out: CommonOut,
    },
    /// Displacement interpolation between two measures.
    Geodesic {
        mu: PathBuf,
        nu: PathBuf,
        /// Number of equispaced samples (including endpoints).
        #[arg(long, default_value_t = 5)]
        samples: usize,
        /// Cost exponent for the optimal coupling.
        #[arg(long, default_value_t = 2.0)]
        p: f64,
        /// Align nu to mu with the shape solver before interpolating.
        #[arg(long)]
        align_first: bool,
        /// Restarts for the alignment solver.
        #[arg(long, default_value_t = 16)]
        restarts: usize,
        /// Seed for the alignment solver.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Write the sampled curve to this JSON file.
        #[arg(long)]
        curve: Option<PathBuf>,
        #[command(flatten)]
        out: CommonOut,
    },
    /// Quotient coefficients C = W/D over all sampled pairs of a curve.
    Quotient {
        curve: PathBuf,
        /// Certify D values with the 2D rotation-grid oracle (N angles).
        #[arg(long, value_name = "N")]
        oracle_2d: Option<usize>,
        /// Restarts for the alternating shape solver.
        #[arg(long, default_value_t = 16)]
        restarts: usize,
        /// Seed for the alternating shape solver.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Relative spread tolerance for the geodesic verdict.
        #[arg(long, default_value_t = QUOTIENT_SPREAD_TOL)]
        spread_tol: f64,
        #[command(flatten)]
        out: CommonOut,
    },
    /// Orbit-subspace report: Killing rank and shape tangent dimension.
    Tangent {
        mu: PathBuf,
        /// Relative singular-value cutoff for the rank decision.
        #[arg(long, default_value_t = RANK_REL_TOL)]
        rank_tol: f64,
        /// Export the evaluation matrix as CSV to this path.
        #[arg(long)]
        matrix: Option<PathBuf>,
        #[command(flatten)]
        out: CommonOut,
    },
    /// Push a measure along the isometry flow exp(-tX).
    Flow {
        mu: PathBuf,
        /// Algebra element file {"A": [[..]], "a": [..]} with A skew.
        algebra: PathBuf,
        /// Flow time.
        #[arg(long, default_value_t = 1.0)]
        t: f64,
        /// Run continuity-equation and norm-invariance diagnostics.
        #[arg(long)]
        checks: bool,
        /// Write the transported measure here (.json or .csv).
        #[arg(long)]
        output: Option<PathBuf>,
        /// Output format for the diagnostics report.
        #[arg(long, value_enum, default_value = "table")]
        format: OutputFormat,
    },
    /// Regenerate the seeded fixture corpus used by the acceptance suite.
    Fixtures {
        /// Directory to fill with fixture files.
        #[arg(long)]
        output: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

#[derive(Debug)]
enum CliError {
    Io(IoError),
    Measure(MeasureError),
    Transport(TransportError),
    Shape(ShapeError),
    Geodesic(GeodesicError),
    Tangent(TangentError),
    Isometry(IsometryError),
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Io(e) => write!(f, "{e}"),
            CliError::Measure(e) => write!(f, "{e}"),
            CliError::Transport(e) => write!(f, "{e}"),
            CliError::Shape(e) => write!(f, "{e}"),
            CliError::Geodesic(e) => write!(f, "{e}"),
            CliError::Tangent(e) => write!(f, "{e}"),
            CliError::Isometry(e) => write!(f, "{e}"),
        }
    }
}

macro_rules! impl_from {
    ($variant:ident, $ty:ty) => {
        impl From<$ty> for CliError {
            fn from(e: $ty) -> Self {
                CliError::$variant(e)
            }
        }
    };
}
impl_from!(Io, IoError);
impl_from!(Measure, MeasureError);
impl_from!(Transport, TransportError);
impl_from!(Shape, ShapeError);
impl_from!(Geodesic, GeodesicError);
impl_from!(Tangent, TangentError);
impl_from!(Isometry, IsometryError);

fn transport_code(e: &TransportError) -> i32 {
    match e {
        TransportError::DimensionMismatch { .. } => EXIT_DIMENSION,
        TransportError::InvalidP(_) => EXIT_UNSUPPORTED_P,
        _ => EXIT_SOLVER,
    }
}

fn shape_code(e: &ShapeError) -> i32 {
    match e {
        ShapeError::DimensionMismatch { .. } | ShapeError::DimensionNot2(_) => EXIT_DIMENSION,
        ShapeError::UnsupportedP(_) => EXIT_UNSUPPORTED_P,
        ShapeError::Transport(inner) => transport_code(inner),
        _ => EXIT_SOLVER,
    }
}

impl CliError {
    fn exit_code(&self) -> i32 {
        match self {
            CliError::Io(e) => match e {
                IoError::Isometry { source: IsometryError::SkewnessViolation { .. }, .. } => {
                    EXIT_ALGEBRA
                }
                _ => EXIT_PARSE,
            },
            CliError::Measure(MeasureError::DimensionMismatch { .. }) => EXIT_DIMENSION,
            CliError::Measure(_) => EXIT_PARSE,
            CliError::Transport(e) => transport_code(e),
            CliError::Shape(e) => shape_code(e),
            CliError::Geodesic(GeodesicError::MixedDimensions) => EXIT_DIMENSION,
            CliError::Geodesic(GeodesicError::Transport(inner)) => transport_code(inner),
            CliError::Geodesic(GeodesicError::Shape(inner)) => shape_code(inner),
            CliError::Geodesic(_) => EXIT_SOLVER,
            CliError::Tangent(TangentError::DimensionMismatch { .. }) => EXIT_DIMENSION,
            CliError::Tangent(_) => EXIT_SOLVER,
            CliError::Isometry(IsometryError::SkewnessViolation { .. }) => EXIT_ALGEBRA,
            CliError::Isometry(_) => EXIT_SOLVER,
        }
    }
}

/// Entry point: parses arguments, runs the command, maps errors to the exit
/// code contract. Argument-syntax errors use clap's own exit code 2.
pub fn run() -> i32 {
    let config = RunConfig::parse();
    match dispatch(config) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn dispatch(config: RunConfig) -> Result<(), CliError> {
    match config.command {
        Command::Dist { mu, nu, p, epsilon, coupling, out } => {
            cmd_dist(&mu, &nu, p, epsilon, coupling.as_deref(), &out)
        }
        Command::ShapeDist { mu, nu, p, restarts, rel_tol, seed, epsilon, oracle_2d, out } => {
            cmd_shape_dist(&mu, &nu, p, restarts, rel_tol, seed, epsilon, oracle_2d, &out)
        }
        Command::Geodesic { mu, nu, samples, p, align_first, restarts, seed, curve, out } => {
            cmd_geodesic(&mu, &nu, samples, p, align_first, restarts, seed, curve.as_deref(), &out)
        }
        Command::Quotient { curve, oracle_2d, restarts, seed, spread_tol, out } => {
            cmd_quotient(&curve, oracle_2d, restarts, seed, spread_tol, &out)
        }
        Command::Tangent { mu, rank_tol, matrix, out } => {
            cmd_tangent(&mu, rank_tol, matrix.as_deref(), &out)
        }
        Command::Flow { mu, algebra, t, checks, output, format } => {
            cmd_flow(&mu, &algebra, t, checks, output.as_deref(), format)
        }
        Command::Fixtures { output, seed } => cmd_fixtures(&output, seed),
    }
}

fn emit(out: &CommonOut, text: &str) -> Result<(), CliError> {
    match &out.output {
        Some(path) => std::fs::write(path, text).map_err(|source| {
            CliError::Io(IoError::Write { path: path.display().to_string(), source })
        }),
        None => {
            println!("{text}");
            Ok(())
        }
    }
}

fn table_row(key: &str, value: String) -> String {
    format!("{key:<22}{value}\n")
}

fn fmt6(x: f64) -> String {
    format!("{x:.6}")
}

fn matrix_rows(m: &nalgebra::DMatrix<f64>) -> Vec<Vec<f64>> {
    (0..m.nrows()).map(|r| (0..m.ncols()).map(|c| m[(r, c)]).collect()).collect()
}

#[allow(clippy::too_many_arguments)]
fn cmd_dist(
    mu_path: &Path,
    nu_path: &Path,
    p: f64,
    epsilon: Option<f64>,
    coupling_path: Option<&Path>,
    out: &CommonOut,
) -> Result<(), CliError> {
    let mu = io::read_measure(mu_path)?;
    let nu = io::read_measure(nu_path)?;
    let result = match epsilon {
        Some(eps) => wasserstein_entropic(&mu, &nu, p, eps, 10_000, 1e-9)?,
        None => wasserstein_exact(&mu, &nu, p)?,
    };
    if let Some(path) = coupling_path {
        io::write_coupling(path, &result.coupling)?;
    }
    let text = match out.format {
        OutputFormat::Json => serde_json::to_string_pretty(&json!({
            "p": p,
            "cost": result.cost,
            "distance": result.distance,
            "solver": result.solver.as_str(),
            "iterations": result.iterations,
        }))
        .expect("report serializes"),
        OutputFormat::Table => {
            let mut t = String::new();
            t.push_str(&table_row("distance", fmt6(result.distance)));
            t.push_str(&table_row("cost", fmt6(result.cost)));
            t.push_str(&table_row("p", fmt6(p)));
            t.push_str(&table_row("solver", result.solver.as_str().into()));
            t.push_str(&table_row("iterations", result.iterations.to_string()));
            t.trim_end().to_string()
        }
    };
    emit(out, &text)
}

#[allow(clippy::too_many_arguments)]
fn cmd_shape_dist(
    mu_path: &Path,
    nu_path: &Path,
    p: f64,
    restarts: usize,
    rel_tol: f64,
    seed: u64,
    epsilon: Option<f64>,
    oracle_2d: Option<usize>,
    out: &CommonOut,
) -> Result<(), CliError> {
    let mu = io::read_measure(mu_path)?;
    let nu = io::read_measure(nu_path)?;
    let (result, solver_tag) = match oracle_2d {
        Some(grid) => (shape_distance_oracle_2d(&mu, &nu, grid, p)?, "oracle-2d"),
        None => {
            if p != 2.0 {
                return Err(CliError::Shape(ShapeError::UnsupportedP(p)));
            }
            let config = ShapeSolverConfig {
                p,
                restarts,
                rel_tol,
                seed,
                inner_solver: if epsilon.is_some() {
                    InnerSolver::EntropicThenExact
                } else {
                    InnerSolver::Exact
                },
                entropic_epsilon: epsilon.unwrap_or(1e-2),
                ..ShapeSolverConfig::default()
            };
            (shape_distance(&mu, &nu, &config)?, "alternating")
        }
    };
    let text = match out.format {
        OutputFormat::Json => serde_json::to_string_pretty(&json!({
            "distance": result.distance,
            "p": p,
            "solver": solver_tag,
            "rotation": matrix_rows(result.minimizer.rotation()),
            "translation": result.minimizer.translation().iter().copied().collect::<Vec<_>>(),
            "det": result.minimizer.det(),
            "restarts_used": result.restarts_used,
            "inner_iterations": result.inner_iterations,
            "converged": result.converged,
            "certificate": result.certificate,
        }))
        .expect("report serializes"),
        OutputFormat::Table => {
            let mut t = String::new();
            t.push_str(&table_row("distance", fmt6(result.distance)));
            t.push_str(&table_row("solver", solver_tag.into()));
            t.push_str(&table_row("det(R)", fmt6(result.minimizer.det())));
            for (r, row) in matrix_rows(result.minimizer.rotation()).iter().enumerate() {
                let cells: Vec<String> = row.iter().map(|&v| format!("{v:>10.6}")).collect();
                t.push_str(&table_row(&format!("R[{r}]"), cells.join(" ")));
            }
            let tr: Vec<String> =
                result.minimizer.translation().iter().map(|&v| format!("{v:>10.6}")).collect();
            t.push_str(&table_row("t", tr.join(" ")));
            t.push_str(&table_row("restarts_used", result.restarts_used.to_string()));
            t.push_str(&table_row("inner_iterations", result.inner_iterations.to_string()));
            t.push_str(&table_row("converged", result.converged.to_string()));
            if let Some(gap) = result.certificate {
                t.push_str(&table_row("oracle_gap", format!("{gap:.3e}")));
            }
            t.trim_end().to_string()
        }
    };
    emit(out, &text)
}

#[allow(clippy::too_many_arguments)]
fn cmd_geodesic(
    mu_path: &Path,
    nu_path: &Path,
    samples: usize,
    p: f64,
    align_first: bool,
    restarts: usize,
    seed: u64,
    curve_path: Option<&Path>,
    out: &CommonOut,
) -> Result<(), CliError> {
    let mu = io::read_measure(mu_path)?;
    let mut nu = io::read_measure(nu_path)?;
    if align_first {
        let config = ShapeSolverConfig { restarts, seed, ..ShapeSolverConfig::default() };
        let aligned = shape_distance(&nu, &mu, &config)?;
        nu = aligned.minimizer.apply_measure(&nu);
    }
    let curve = geodesic_between(&mu, &nu, samples, p)?;
    if let Some(path) = curve_path {
        io::write_curve(path, &curve)?;
    }
    let deviation = match constant_speed_check(&curve, p) {
        Ok(d) => Some(d),
        Err(GeodesicError::DegenerateEndpoints) => None,
        Err(e) => return Err(e.into()),
    };
    let text = match out.format {
        OutputFormat::Json => {
            let mut report = json!({
                "samples": samples,
                "p": p,
                "align_first": align_first,
                "constant_speed_deviation": deviation,
            });
            if curve_path.is_none() {
                report["curve"] = serde_json::from_str(&io::curve_to_json(&curve))
                    .expect("curve JSON is valid");
            }
            serde_json::to_string_pretty(&report).expect("report serializes")
        }
        OutputFormat::Table => {
            let mut t = String::new();
            t.push_str(&table_row("samples", samples.to_string()));
            t.push_str(&table_row(
                "constant_speed_dev",
                deviation.map(fmt6).unwrap_or_else(|| "degenerate".into()),
            ));
            if let Some(path) = curve_path {
                t.push_str(&table_row("curve_written", path.display().to_string()));
            }
            t.trim_end().to_string()
        }
    };
    emit(out, &text)
}

fn cmd_quotient(
    curve_path: &Path,
    oracle_2d: Option<usize>,
    restarts: usize,
    seed: u64,
    spread_tol: f64,
    out: &CommonOut,
) -> Result<(), CliError> {
    let curve = io::read_curve(curve_path)?;
    let mode = match oracle_2d {
        Some(grid_steps) => ShapeDistanceMode::Oracle2d { grid_steps },
        None => ShapeDistanceMode::Alternating(ShapeSolverConfig {
            restarts,
            seed,
            ..ShapeSolverConfig::default()
        }),
    };
    let report = quotient_coefficients(&curve, &mode, spread_tol)?;
    let text = match out.format {
        OutputFormat::Json => serde_json::to_string_pretty(&report).expect("report serializes"),
        OutputFormat::Table => {
            let mut t = String::new();
            t.push_str(&format!(
                "{:>10} {:>10} {:>14} {:>14} {:>14}\n",
                "t", "s", "W", "D", "C"
            ));
            for entry in &report.grid {
                t.push_str(&format!(
                    "{:>10.6} {:>10.6} {:>14.6} {:>14.6} {:>14}\n",
                    entry.t,
                    entry.s,
                    entry.w_value,
                    entry.d_value,
                    entry.coefficient.map(fmt6).unwrap_or_else(|| "undefined".into()),
                ));
            }
            t.push_str(&table_row("max_relative_spread", format!("{:.3e}", report.max_relative_spread)));
            t.push_str(&table_row("undefined_pairs", report.undefined_pairs.len().to_string()));
            t.push_str(&table_row("certified", report.certified.to_string()));
            let verdict = serde_json::to_value(report.verdict).expect("verdict serializes");
            t.push_str(&table_row("verdict", verdict.as_str().unwrap_or("?").into()));
            t.trim_end().to_string()
        }
    };
    emit(out, &text)
}

fn cmd_tangent(
    mu_path: &Path,
    rank_tol: f64,
    matrix_path: Option<&Path>,
    out: &CommonOut,
) -> Result<(), CliError> {
    let mu = io::read_measure(mu_path)?;
    let report = orbit_subspace(&mu, rank_tol);
    if let Some(path) = matrix_path {
        std::fs::write(path, io::evaluation_matrix_to_csv(&report)).map_err(|source| {
            CliError::Io(IoError::Write { path: path.display().to_string(), source })
        })?;
    }
    let text = match out.format {
        OutputFormat::Json => io::orbit_report_to_json(&report),
        OutputFormat::Table => {
            let mut t = String::new();
            t.push_str(&table_row("atoms", mu.len().to_string()));
            t.push_str(&table_row("dimension", mu.dim().to_string()));
            t.push_str(&table_row("tangent_dim", report.tangent_dim().to_string()));
            t.push_str(&table_row("killing_rank", report.rank().to_string()));
            t.push_str(&table_row("shape_tangent_dim", report.shape_tangent_dim().to_string()));
            t.push_str(&table_row("kernel_dim", report.kernel_basis().len().to_string()));
            let sv: Vec<String> =
                report.singular_values().iter().map(|&s| format!("{s:.6}")).collect();
            t.push_str(&table_row("singular_values", sv.join(" ")));
            t.trim_end().to_string()
        }
    };
    emit(out, &text)
}

fn cmd_flow(
    mu_path: &Path,
    algebra_path: &Path,
    t: f64,
    checks: bool,
    output: Option<&Path>,
    format: OutputFormat,
) -> Result<(), CliError> {
    let mu = io::read_measure(mu_path)?;
    let x_alg = io::read_algebra(algebra_path)?;
    let moved = flow_pushforward(&mu, &x_alg, t)?;

    let diagnostics = if checks {
        let battery = standard_test_battery(&mu);
        let grid = [0.25, 0.5, 0.75];
        let mut residual: f64 = 0.0;
        for phi in &battery {
            residual = residual.max(continuity_residual(&mu, &x_alg, phi, &grid, 1e-4)?);
        }
        let norm_grid: Vec<f64> = (1..10).map(|i| i as f64 / 10.0).collect();
        let invariance = flow_norm_invariance(&mu, &x_alg, &norm_grid)?;
        Some((residual, invariance))
    } else {
        None
    };

    match output {
        Some(path) => {
            io::write_measure(path, &moved)?;
            let text = match format {
                OutputFormat::Json => {
                    let mut obj = json!({ "t": t, "written": path.display().to_string() });
                    if let Some((residual, invariance)) = diagnostics {
                        obj["continuity_residual_max"] = json!(residual);
                        obj["norm_invariance_max"] = json!(invariance);
                    }
                    serde_json::to_string_pretty(&obj).expect("report serializes")
                }
                OutputFormat::Table => {
                    let mut txt = String::new();
                    txt.push_str(&table_row("written", path.display().to_string()));
                    if let Some((residual, invariance)) = diagnostics {
                        txt.push_str(&table_row("continuity_residual", format!("{residual:.3e}")));
                        txt.push_str(&table_row("norm_invariance", format!("{invariance:.3e}")));
                    }
                    txt.trim_end().to_string()
                }
            };
            println!("{text}");
        }
        None => match format {
            OutputFormat::Json => {
                let mut obj: serde_json::Value =
                    serde_json::from_str(&io::measure_to_json(&moved)).expect("measure JSON");
                if let Some((residual, invariance)) = diagnostics {
                    obj = json!({
                        "measure": obj,
                        "continuity_residual_max": residual,
                        "norm_invariance_max": invariance,
                    });
                }
                println!("{}", serde_json::to_string_pretty(&obj).expect("report serializes"));
            }
            OutputFormat::Table => {
                let mut txt = String::new();
                for k in 0..moved.len() {
                    let coords: Vec<String> =
                        (0..moved.dim()).map(|l| fmt6(moved.points()[(k, l)])).collect();
                    txt.push_str(&format!(
                        "{}  w={}\n",
                        coords.join(" "),
                        fmt6(moved.weights()[k])
                    ));
                }
                if let Some((residual, invariance)) = diagnostics {
                    txt.push_str(&table_row("continuity_residual", format!("{residual:.3e}")));
                    txt.push_str(&table_row("norm_invariance", format!("{invariance:.3e}")));
                }
                println!("{}", txt.trim_end());
            }
        },
    }
    Ok(())
}

/// Writes the seeded fixture corpus: random measures across dimensions,
/// orbit pairs with their generating isometries, geodesic and counterexample
/// curves, and algebra elements for flow tests.
fn cmd_fixtures(dir: &Path, seed: u64) -> Result<(), CliError> {
    std::fs::create_dir_all(dir).map_err(|source| {
        CliError::Io(IoError::Write { path: dir.display().to_string(), source })
    })?;
    let mut manifest = Vec::new();
    fn save_measure(
        dir: &Path,
        manifest: &mut Vec<String>,
        name: String,
        m: &crate::measure::DiscreteMeasure,
    ) -> Result<(), CliError> {
        io::write_measure(&dir.join(&name), m)?;
        manifest.push(name);
        Ok(())
    }

    for i in 0..6u64 {
        let n = 1 + (i % 3) as usize;
        let m = 3 + (i % 4) as usize;
        let mu = crate::measure::DiscreteMeasure::random(m, n, seed.wrapping_add(i), 1.0);
        save_measure(dir, &mut manifest, format!("measure_{i}.json"), &mu)?;
    }

    for i in 0..4u64 {
        let n = 2 + (i % 2) as usize;
        let mu = crate::measure::DiscreteMeasure::random(5, n, seed.wrapping_add(100 + i), 1.0);
        let comp = if i % 2 == 0 { Component::Proper } else { Component::Improper };
        let g = random_isometry(n, seed.wrapping_add(200 + i), comp, 1.5);
        let nu = g.apply_measure(&mu);
        save_measure(dir, &mut manifest, format!("pair_{i}_mu.json"), &mu)?;
        save_measure(dir, &mut manifest, format!("pair_{i}_nu.json"), &nu)?;
        let gpath = dir.join(format!("pair_{i}_g.json"));
        io::write_isometry(&gpath, &g)?;
        manifest.push(format!("pair_{i}_g.json"));
    }

    // geodesic, mass-mixing, switch-mixing, and branch curves in the plane
    let mu = crate::measure::DiscreteMeasure::random(4, 2, seed.wrapping_add(300), 1.0);
    let nu = crate::measure::DiscreteMeasure::random(5, 2, seed.wrapping_add(301), 1.0);
    let curve = geodesic_between(&mu, &nu, 5, 2.0)?;
    io::write_curve(&dir.join("curve_geodesic.json"), &curve)?;
    manifest.push("curve_geodesic.json".into());

    let mixing = mass_mixing_curve(
        &crate::measure::DiscreteMeasure::uniform(&[vec![0.0, 0.0], vec![0.3, 0.0]])
            .map_err(CliError::Measure)?,
        &crate::measure::DiscreteMeasure::uniform(&[vec![4.0, 0.0], vec![4.3, 0.0]])
            .map_err(CliError::Measure)?,
        9,
    )?;
    io::write_curve(&dir.join("curve_mass_mixing.json"), &mixing)?;
    manifest.push("curve_mass_mixing.json".into());

    let g = random_isometry(2, seed.wrapping_add(400), Component::Proper, 0.5);
    let switch = SwitchFunction::new(0.5, RampShape::Smoothstep)?;
    let mixed = mixing_curve(&curve, &g, &switch, MixingStyle::MeasureMixture)?;
    io::write_curve(&dir.join("curve_switch_mixing.json"), &mixed)?;
    manifest.push("curve_switch_mixing.json".into());

    let gpath_curve: Vec<_> = curve
        .times()
        .iter()
        .map(|&t| {
            if t <= 0.5 {
                crate::isometry::Isometry::identity(2)
            } else {
                crate::isometry::Isometry::rotation_2d((t - 0.5) * std::f64::consts::PI)
            }
        })
        .collect();
    let branched = branch_curve(&curve, &gpath_curve)?;
    io::write_curve(&dir.join("curve_branch.json"), &branched)?;
    manifest.push("curve_branch.json".into());

    for i in 0..3u64 {
        let n = 2 + (i % 2) as usize;
        let x_alg = random_algebra_element(n, seed.wrapping_add(500 + i), 1.0, 0.8);
        io::write_algebra(&dir.join(format!("algebra_{i}.json")), &x_alg)?;
        manifest.push(format!("algebra_{i}.json"));
    }

    manifest.sort();
    for name in &manifest {
        println!("{}", dir.join(name).display());
    }
    Ok(())
}
