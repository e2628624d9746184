//! C ABI for the shapeot library.
//!
//! Measures are opaque handles created and freed through this interface.
//! Every fallible call returns a [`ShapeotStatus`]; on failure the
//! thread-local message from [`shapeot_last_error_message`] describes what
//! went wrong. Buffers are caller-allocated; sizes are documented per call.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;

use shapeot::isometry::IsometryError;
use shapeot::measure::{DiscreteMeasure, MeasureError};
use shapeot::shapedist::{
    shape_distance, shape_distance_oracle_2d, InnerSolver, ShapeError, ShapeSolverConfig,
};
use shapeot::tangent::orbit_subspace;
use shapeot::transport::{wasserstein_entropic, wasserstein_exact, TransportError};

/// Status codes returned by every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ShapeotStatus {
    Ok = 0,
    NullArgument = 1,
    InvalidUtf8 = 2,
    ParseError = 3,
    DimensionError = 4,
    UnsupportedP = 5,
    SolverError = 6,
    AlgebraError = 7,
    InvalidArgument = 8,
    IoError = 9,
    Panic = 10,
}

/// Opaque handle to a discrete measure.
pub struct ShapeotMeasure {
    inner: DiscreteMeasure,
}

/// Options for the alternating shape-distance solver.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct ShapeotShapeConfig {
    /// Cost exponent; the alternating solver requires 2.0.
    pub p: f64,
    /// Restart count (identity + PCA + Haar-random).
    pub restarts: usize,
    /// Alternation cap per restart.
    pub max_alternations: usize,
    /// Relative objective-decrease stopping tolerance.
    pub rel_tol: f64,
    /// Seed for the restart schedule.
    pub seed: u64,
    /// Nonzero: run Sinkhorn inside alternations (final value stays exact).
    pub use_entropic: u8,
    /// Target epsilon for the entropic inner loop.
    pub entropic_epsilon: f64,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::new("").unwrap());
}

fn set_error(message: &str) {
    let sanitized = message.replace('\0', " ");
    LAST_ERROR.with(|slot| {
        *slot.borrow_mut() = CString::new(sanitized).unwrap_or_default();
    });
}

fn measure_status(e: &MeasureError) -> ShapeotStatus {
    match e {
        MeasureError::DimensionMismatch { .. } => ShapeotStatus::DimensionError,
        _ => ShapeotStatus::ParseError,
    }
}

fn transport_status(e: &TransportError) -> ShapeotStatus {
    match e {
        TransportError::DimensionMismatch { .. } => ShapeotStatus::DimensionError,
        TransportError::InvalidP(_) => ShapeotStatus::UnsupportedP,
        TransportError::InvalidEpsilon(_) => ShapeotStatus::InvalidArgument,
        _ => ShapeotStatus::SolverError,
    }
}

fn shape_status(e: &ShapeError) -> ShapeotStatus {
    match e {
        ShapeError::DimensionMismatch { .. } | ShapeError::DimensionNot2(_) => {
            ShapeotStatus::DimensionError
        }
        ShapeError::UnsupportedP(_) => ShapeotStatus::UnsupportedP,
        ShapeError::ConfigInvalid(_) | ShapeError::BudgetExceeded { .. } => {
            ShapeotStatus::InvalidArgument
        }
        ShapeError::Transport(inner) => transport_status(inner),
    }
}

fn io_status(e: &shapeot::io::IoError) -> ShapeotStatus {
    use shapeot::io::IoError;
    match e {
        IoError::Isometry { source: IsometryError::SkewnessViolation { .. }, .. } => {
            ShapeotStatus::AlgebraError
        }
        IoError::Read { .. } | IoError::Write { .. } => ShapeotStatus::IoError,
        _ => ShapeotStatus::ParseError,
    }
}

fn guard<F: FnOnce() -> ShapeotStatus>(f: F) -> ShapeotStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(status) => status,
        Err(_) => {
            set_error("internal panic crossed the FFI boundary");
            ShapeotStatus::Panic
        }
    }
}

unsafe fn cstr_to_path<'a>(ptr: *const c_char) -> Result<&'a Path, ShapeotStatus> {
    if ptr.is_null() {
        set_error("null path");
        return Err(ShapeotStatus::NullArgument);
    }
    match CStr::from_ptr(ptr).to_str() {
        Ok(s) => Ok(Path::new(s)),
        Err(_) => {
            set_error("path is not valid UTF-8");
            Err(ShapeotStatus::InvalidUtf8)
        }
    }
}

/// Message describing the most recent failure on this thread. The pointer
/// stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn shapeot_last_error_message() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ptr())
}

/// Library version as a static C string.
#[no_mangle]
pub extern "C" fn shapeot_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

/// Builds a measure from a row-major `atoms x dim` coordinate buffer and an
/// `atoms` weight buffer. Weights are normalized to total mass one.
///
/// # Safety
/// `points` must hold `atoms * dim` doubles, `weights` must hold `atoms`
/// doubles, and `out` must be a valid location for one pointer.
#[no_mangle]
pub unsafe extern "C" fn shapeot_measure_create(
    points: *const f64,
    weights: *const f64,
    atoms: usize,
    dim: usize,
    out: *mut *mut ShapeotMeasure,
) -> ShapeotStatus {
    guard(|| {
        if points.is_null() || weights.is_null() || out.is_null() {
            set_error("null buffer");
            return ShapeotStatus::NullArgument;
        }
        let point_slice = std::slice::from_raw_parts(points, atoms * dim);
        let weight_slice = std::slice::from_raw_parts(weights, atoms);
        let rows: Vec<Vec<f64>> =
            point_slice.chunks_exact(dim.max(1)).map(|chunk| chunk.to_vec()).collect();
        match DiscreteMeasure::from_rows(&rows, weight_slice) {
            Ok(inner) => {
                *out = Box::into_raw(Box::new(ShapeotMeasure { inner }));
                ShapeotStatus::Ok
            }
            Err(e) => {
                set_error(&e.to_string());
                measure_status(&e)
            }
        }
    })
}

/// Reads a measure from a `.json` or `.csv` file.
///
/// # Safety
/// `path` must be a NUL-terminated string and `out` a valid pointer slot.
#[no_mangle]
pub unsafe extern "C" fn shapeot_measure_read(
    path: *const c_char,
    out: *mut *mut ShapeotMeasure,
) -> ShapeotStatus {
    guard(|| {
        if out.is_null() {
            set_error("null output slot");
            return ShapeotStatus::NullArgument;
        }
        let path = match cstr_to_path(path) {
            Ok(p) => p,
            Err(status) => return status,
        };
        match shapeot::io::read_measure(path) {
            Ok(inner) => {
                *out = Box::into_raw(Box::new(ShapeotMeasure { inner }));
                ShapeotStatus::Ok
            }
            Err(e) => {
                set_error(&e.to_string());
                io_status(&e)
            }
        }
    })
}

/// Writes a measure to a `.json` or `.csv` file.
///
/// # Safety
/// `measure` must come from this library and `path` must be NUL-terminated.
#[no_mangle]
pub unsafe extern "C" fn shapeot_measure_write(
    measure: *const ShapeotMeasure,
    path: *const c_char,
) -> ShapeotStatus {
    guard(|| {
        let Some(measure) = measure.as_ref() else {
            set_error("null measure");
            return ShapeotStatus::NullArgument;
        };
        let path = match cstr_to_path(path) {
            Ok(p) => p,
            Err(status) => return status,
        };
        match shapeot::io::write_measure(path, &measure.inner) {
            Ok(()) => ShapeotStatus::Ok,
            Err(e) => {
                set_error(&e.to_string());
                io_status(&e)
            }
        }
    })
}

/// Number of atoms, or 0 for a null handle.
///
/// # Safety
/// `measure` must be null or a live handle from this library.
#[no_mangle]
pub unsafe extern "C" fn shapeot_measure_atoms(measure: *const ShapeotMeasure) -> usize {
    measure.as_ref().map_or(0, |m| m.inner.len())
}

/// Ambient dimension, or 0 for a null handle.
///
/// # Safety
/// `measure` must be null or a live handle from this library.
#[no_mangle]
pub unsafe extern "C" fn shapeot_measure_dim(measure: *const ShapeotMeasure) -> usize {
    measure.as_ref().map_or(0, |m| m.inner.dim())
}

/// Writes the barycenter into `out` (`dim` doubles).
///
/// # Safety
/// `out` must hold at least `shapeot_measure_dim(measure)` doubles.
#[no_mangle]
pub unsafe extern "C" fn shapeot_measure_barycenter(
    measure: *const ShapeotMeasure,
    out: *mut f64,
) -> ShapeotStatus {
    guard(|| {
        let Some(measure) = measure.as_ref() else {
            set_error("null measure");
            return ShapeotStatus::NullArgument;
        };
        if out.is_null() {
            set_error("null output buffer");
            return ShapeotStatus::NullArgument;
        }
        let b = measure.inner.barycenter();
        std::ptr::copy_nonoverlapping(b.as_ptr(), out, b.len());
        ShapeotStatus::Ok
    })
}

/// Frees a measure handle; null is a no-op.
///
/// # Safety
/// `measure` must be null or a pointer previously returned by a constructor
/// in this library, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn shapeot_measure_free(measure: *mut ShapeotMeasure) {
    if !measure.is_null() {
        drop(Box::from_raw(measure));
    }
}

/// Exact Wasserstein transport: writes the optimal cost and distance.
///
/// # Safety
/// Handles must be live; output pointers may each be null to skip them.
#[no_mangle]
pub unsafe extern "C" fn shapeot_wasserstein_exact(
    mu: *const ShapeotMeasure,
    nu: *const ShapeotMeasure,
    p: f64,
    out_cost: *mut f64,
    out_distance: *mut f64,
) -> ShapeotStatus {
    guard(|| {
        let (Some(mu), Some(nu)) = (mu.as_ref(), nu.as_ref()) else {
            set_error("null measure");
            return ShapeotStatus::NullArgument;
        };
        match wasserstein_exact(&mu.inner, &nu.inner, p) {
            Ok(result) => {
                if !out_cost.is_null() {
                    *out_cost = result.cost;
                }
                if !out_distance.is_null() {
                    *out_distance = result.distance;
                }
                ShapeotStatus::Ok
            }
            Err(e) => {
                set_error(&e.to_string());
                transport_status(&e)
            }
        }
    })
}

/// Entropic transport with marginal repair; cost is an upper bound on exact.
///
/// # Safety
/// Same contract as [`shapeot_wasserstein_exact`].
#[no_mangle]
pub unsafe extern "C" fn shapeot_wasserstein_entropic(
    mu: *const ShapeotMeasure,
    nu: *const ShapeotMeasure,
    p: f64,
    epsilon: f64,
    max_iter: usize,
    marginal_tol: f64,
    out_cost: *mut f64,
    out_distance: *mut f64,
) -> ShapeotStatus {
    guard(|| {
        let (Some(mu), Some(nu)) = (mu.as_ref(), nu.as_ref()) else {
            set_error("null measure");
            return ShapeotStatus::NullArgument;
        };
        match wasserstein_entropic(&mu.inner, &nu.inner, p, epsilon, max_iter, marginal_tol) {
            Ok(result) => {
                if !out_cost.is_null() {
                    *out_cost = result.cost;
                }
                if !out_distance.is_null() {
                    *out_distance = result.distance;
                }
                ShapeotStatus::Ok
            }
            Err(e) => {
                set_error(&e.to_string());
                transport_status(&e)
            }
        }
    })
}

/// Default solver configuration (p = 2, 16 restarts, exact inner loop).
#[no_mangle]
pub extern "C" fn shapeot_shape_config_default() -> ShapeotShapeConfig {
    let d = ShapeSolverConfig::default();
    ShapeotShapeConfig {
        p: d.p,
        restarts: d.restarts,
        max_alternations: d.max_alternations,
        rel_tol: d.rel_tol,
        seed: d.seed,
        use_entropic: 0,
        entropic_epsilon: d.entropic_epsilon,
    }
}

/// Alternating shape-distance solver. On success writes the best distance
/// and, when the buffers are non-null, the minimizing rotation (row-major
/// `dim x dim`) and translation (`dim`).
///
/// # Safety
/// Handles must be live. `config` may be null for defaults. `out_rotation`
/// must hold `dim*dim` doubles and `out_translation` `dim` doubles when
/// non-null.
#[no_mangle]
pub unsafe extern "C" fn shapeot_shape_distance(
    mu: *const ShapeotMeasure,
    nu: *const ShapeotMeasure,
    config: *const ShapeotShapeConfig,
    out_distance: *mut f64,
    out_rotation: *mut f64,
    out_translation: *mut f64,
) -> ShapeotStatus {
    guard(|| {
        let (Some(mu), Some(nu)) = (mu.as_ref(), nu.as_ref()) else {
            set_error("null measure");
            return ShapeotStatus::NullArgument;
        };
        let cfg = match config.as_ref() {
            Some(c) => ShapeSolverConfig {
                p: c.p,
                restarts: c.restarts,
                max_alternations: c.max_alternations,
                rel_tol: c.rel_tol,
                seed: c.seed,
                inner_solver: if c.use_entropic != 0 {
                    InnerSolver::EntropicThenExact
                } else {
                    InnerSolver::Exact
                },
                entropic_epsilon: c.entropic_epsilon,
            },
            None => ShapeSolverConfig::default(),
        };
        match shape_distance(&mu.inner, &nu.inner, &cfg) {
            Ok(result) => {
                if !out_distance.is_null() {
                    *out_distance = result.distance;
                }
                let n = mu.inner.dim();
                if !out_rotation.is_null() {
                    for r in 0..n {
                        for c in 0..n {
                            *out_rotation.add(r * n + c) = result.minimizer.rotation()[(r, c)];
                        }
                    }
                }
                if !out_translation.is_null() {
                    for l in 0..n {
                        *out_translation.add(l) = result.minimizer.translation()[l];
                    }
                }
                ShapeotStatus::Ok
            }
            Err(e) => {
                set_error(&e.to_string());
                shape_status(&e)
            }
        }
    })
}

/// Certified rotation-grid oracle for planar measures.
///
/// # Safety
/// Handles must be live; `out_distance` may be null.
#[no_mangle]
pub unsafe extern "C" fn shapeot_shape_distance_oracle_2d(
    mu: *const ShapeotMeasure,
    nu: *const ShapeotMeasure,
    grid_steps: usize,
    p: f64,
    out_distance: *mut f64,
) -> ShapeotStatus {
    guard(|| {
        let (Some(mu), Some(nu)) = (mu.as_ref(), nu.as_ref()) else {
            set_error("null measure");
            return ShapeotStatus::NullArgument;
        };
        match shape_distance_oracle_2d(&mu.inner, &nu.inner, grid_steps, p) {
            Ok(result) => {
                if !out_distance.is_null() {
                    *out_distance = result.distance;
                }
                ShapeotStatus::Ok
            }
            Err(e) => {
                set_error(&e.to_string());
                shape_status(&e)
            }
        }
    })
}

/// Orbit-subspace dimensions at a measure: Killing rank, tangent dimension
/// m·n, shape tangent dimension, and kernel dimension.
///
/// # Safety
/// `measure` must be live; output pointers may each be null to skip them.
#[no_mangle]
pub unsafe extern "C" fn shapeot_orbit_dimensions(
    measure: *const ShapeotMeasure,
    rank_rel_tol: f64,
    out_rank: *mut usize,
    out_tangent_dim: *mut usize,
    out_shape_tangent_dim: *mut usize,
    out_kernel_dim: *mut usize,
) -> ShapeotStatus {
    guard(|| {
        let Some(measure) = measure.as_ref() else {
            set_error("null measure");
            return ShapeotStatus::NullArgument;
        };
        if !(rank_rel_tol > 0.0) || !rank_rel_tol.is_finite() {
            set_error("rank tolerance must be positive and finite");
            return ShapeotStatus::InvalidArgument;
        }
        let report = orbit_subspace(&measure.inner, rank_rel_tol);
        if !out_rank.is_null() {
            *out_rank = report.rank();
        }
        if !out_tangent_dim.is_null() {
            *out_tangent_dim = report.tangent_dim();
        }
        if !out_shape_tangent_dim.is_null() {
            *out_shape_tangent_dim = report.shape_tangent_dim();
        }
        if !out_kernel_dim.is_null() {
            *out_kernel_dim = report.kernel_basis().len();
        }
        ShapeotStatus::Ok
    })
}
