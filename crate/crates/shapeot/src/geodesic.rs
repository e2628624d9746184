//! Geodesic diagnostics in W₂ and in shape space.
//!
//! A [`CurveSample`] is a curve seen through finitely many time slices.
//! [`constant_speed_check`] measures how far the sampled pairs sit from the
//! law d(γ_t, γ_s) = |t−s| d(γ_0, γ_1), [`metric_derivative`] estimates curve
//! speed, and [`quotient_coefficients`] compares the W and D metrics over all
//! sampled pairs to decide whether the projected curve is a shape-space
//! geodesic. [`mixing_curve`] and [`branch_curve`] build the two classical
//! counterexamples: curves that stop being W-geodesics while their shape
//! projections stay put classwise.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::isometry::Isometry;
use crate::measure::DiscreteMeasure;
use crate::shapedist::{
    shape_distance, shape_distance_oracle_2d, ShapeError, ShapeSolverConfig,
};
use crate::transport::{displacement_interpolation, wasserstein_exact, TransportError};

#[derive(Debug, Error)]
pub enum GeodesicError {
    #[error("a sampled curve needs at least two samples, got {0}")]
    TooFewSamples(usize),
    #[error("sample times must be strictly increasing within [0, 1]")]
    BadTimes,
    #[error("times and measures differ in length: {times} vs {measures}")]
    LengthMismatch { times: usize, measures: usize },
    #[error("curve endpoints coincide (W_p(mu_0, mu_1) = 0)")]
    DegenerateEndpoints,
    #[error("index {0} is not an interior sample")]
    BoundaryIndex(usize),
    #[error("switch function needs 0 <= t0 < 1, got {0}")]
    BadSwitchFunction(f64),
    #[error("sampled measures must share one ambient dimension")]
    MixedDimensions,
    #[error(transparent)]
    Transport(#[from] TransportError),
    #[error(transparent)]
    Shape(#[from] ShapeError),
}

/// A curve in Wasserstein space sampled at strictly increasing times in [0, 1].
#[derive(Debug, Clone)]
pub struct CurveSample {
    times: Vec<f64>,
    measures: Vec<DiscreteMeasure>,
}

impl CurveSample {
    pub fn new(times: Vec<f64>, measures: Vec<DiscreteMeasure>) -> Result<Self, GeodesicError> {
        if times.len() != measures.len() {
            return Err(GeodesicError::LengthMismatch {
                times: times.len(),
                measures: measures.len(),
            });
        }
        if times.len() < 2 {
            return Err(GeodesicError::TooFewSamples(times.len()));
        }
        let in_range = times.iter().all(|t| (0.0..=1.0).contains(t) && t.is_finite());
        let increasing = times.windows(2).all(|w| w[0] < w[1]);
        if !in_range || !increasing {
            return Err(GeodesicError::BadTimes);
        }
        let n = measures[0].dim();
        if measures.iter().any(|m| m.dim() != n) {
            return Err(GeodesicError::MixedDimensions);
        }
        Ok(Self { times, measures })
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn measures(&self) -> &[DiscreteMeasure] {
        &self.measures
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        false // at least two samples by construction
    }

    pub fn dim(&self) -> usize {
        self.measures[0].dim()
    }
}

/// Displacement interpolation between μ and ν through one exact optimal
/// coupling, sampled at `samples` equispaced times.
pub fn geodesic_between(
    mu: &DiscreteMeasure,
    nu: &DiscreteMeasure,
    samples: usize,
    p: f64,
) -> Result<CurveSample, GeodesicError> {
    if samples < 2 {
        return Err(GeodesicError::TooFewSamples(samples));
    }
    let plan = wasserstein_exact(mu, nu, p)?.coupling;
    let mut times = Vec::with_capacity(samples);
    let mut measures = Vec::with_capacity(samples);
    for s in 0..samples {
        let t = s as f64 / (samples - 1) as f64;
        times.push(t);
        measures.push(displacement_interpolation(&plan, t)?);
    }
    CurveSample::new(times, measures)
}

/// Max over sampled pairs of |W_p(μ_t, μ_s) − |t−s| W_p(μ_0, μ_1)| relative
/// to the endpoint distance. Zero for perfect constant-speed sampling.
pub fn constant_speed_check(curve: &CurveSample, p: f64) -> Result<f64, GeodesicError> {
    let last = curve.len() - 1;
    let endpoint = wasserstein_exact(&curve.measures[0], &curve.measures[last], p)?.distance;
    if endpoint <= 0.0 {
        return Err(GeodesicError::DegenerateEndpoints);
    }
    let mut worst: f64 = 0.0;
    for a in 0..curve.len() {
        for b in (a + 1)..curve.len() {
            let d = wasserstein_exact(&curve.measures[a], &curve.measures[b], p)?.distance;
            let expected = (curve.times[b] - curve.times[a]) * endpoint;
            worst = worst.max((d - expected).abs() / endpoint);
        }
    }
    Ok(worst)
}

/// Symmetric difference quotient W₂(μ_{i+1}, μ_{i−1}) / (t_{i+1} − t_{i−1})
/// at an interior sample; equals the endpoint distance along a geodesic.
pub fn metric_derivative(curve: &CurveSample, index: usize) -> Result<f64, GeodesicError> {
    if index == 0 || index + 1 >= curve.len() {
        return Err(GeodesicError::BoundaryIndex(index));
    }
    let d = wasserstein_exact(&curve.measures[index - 1], &curve.measures[index + 1], 2.0)?
        .distance;
    Ok(d / (curve.times[index + 1] - curve.times[index - 1]))
}

/// How D values are produced for the quotient-coefficient grid.
#[derive(Debug, Clone)]
pub enum ShapeDistanceMode {
    /// Alternating solver: D values are upper bounds, verdicts stay
    /// conservative (`not-geodesic` is never issued).
    Alternating(ShapeSolverConfig),
    /// Certified 2D rotation-grid oracle with this many grid steps.
    Oracle2d { grid_steps: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Verdict {
    #[serde(rename = "geodesic-in-shape-space")]
    GeodesicInShapeSpace,
    #[serde(rename = "not-geodesic")]
    NotGeodesic,
    #[serde(rename = "inconclusive")]
    Inconclusive,
}

/// One grid entry: times, both distances, and the coefficient C = W/D when
/// the pair is defined (D above the class-coincidence threshold).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct QuotientEntry {
    pub t: f64,
    pub s: f64,
    pub w_value: f64,
    pub d_value: f64,
    pub coefficient: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct QuotientCoefficientReport {
    pub grid: Vec<QuotientEntry>,
    /// Max relative deviation of defined coefficients from C_01 (or from the
    /// smallest defined coefficient when C_01 itself is undefined).
    pub max_relative_spread: f64,
    /// Pairs whose classes coincide (D below threshold).
    pub undefined_pairs: Vec<(f64, f64)>,
    pub verdict: Verdict,
    /// Whether D values are oracle-certified.
    pub certified: bool,
}

/// Default relative tolerance on coefficient spread.
pub const QUOTIENT_SPREAD_TOL: f64 = 1e-4;
/// Classes are considered equal when D falls below this times the curve scale.
pub const CLASS_COINCIDENCE_REL: f64 = 1e-7;

/// Evaluates W₂ and D₂ on all sampled pairs and classifies the projected
/// curve. The verdict is `geodesic-in-shape-space` iff every defined
/// coefficient agrees with C_01 within `spread_tol` and no pair of distinct
/// times has coinciding classes; `not-geodesic` requires oracle-certified D
/// values; everything else is `inconclusive`.
pub fn quotient_coefficients(
    curve: &CurveSample,
    mode: &ShapeDistanceMode,
    spread_tol: f64,
) -> Result<QuotientCoefficientReport, GeodesicError> {
    let certified = matches!(mode, ShapeDistanceMode::Oracle2d { .. });
    let len = curve.len();

    // curve scale: RMS radius of the samples plus the largest pair distance
    let mut scale = 0.0_f64;
    for m in &curve.measures {
        scale = scale.max(m.second_moment(&m.barycenter()).unwrap_or(0.0).sqrt());
    }

    let mut grid = Vec::new();
    let mut undefined = Vec::new();
    let mut c01 = None;
    let mut w_max = 0.0_f64;
    for a in 0..len {
        for b in (a + 1)..len {
            let w = wasserstein_exact(&curve.measures[a], &curve.measures[b], 2.0)?.distance;
            w_max = w_max.max(w);
            let d = match mode {
                ShapeDistanceMode::Alternating(config) => {
                    shape_distance(&curve.measures[a], &curve.measures[b], config)?.distance
                }
                ShapeDistanceMode::Oracle2d { grid_steps } => {
                    shape_distance_oracle_2d(
                        &curve.measures[a],
                        &curve.measures[b],
                        *grid_steps,
                        2.0,
                    )?
                    .distance
                }
            };
            let threshold = CLASS_COINCIDENCE_REL * scale.max(w_max).max(1e-300);
            let coefficient = if d > threshold { Some(w / d) } else { None };
            if coefficient.is_none() {
                undefined.push((curve.times[a], curve.times[b]));
            }
            if a == 0 && b == len - 1 {
                c01 = coefficient;
            }
            grid.push(QuotientEntry {
                t: curve.times[a],
                s: curve.times[b],
                w_value: w,
                d_value: d,
                coefficient,
            });
        }
    }

    let defined: Vec<f64> = grid.iter().filter_map(|e| e.coefficient).collect();
    let reference = c01.or_else(|| {
        defined.iter().copied().min_by(|x, y| x.total_cmp(y))
    });
    let max_relative_spread = match reference {
        Some(c_ref) if c_ref > 0.0 => defined
            .iter()
            .map(|&c| (c - c_ref).abs() / c_ref)
            .fold(0.0_f64, f64::max),
        _ => 0.0,
    };

    let verdict = if defined.is_empty() {
        Verdict::Inconclusive
    } else if undefined.is_empty() && c01.is_some() && max_relative_spread <= spread_tol {
        Verdict::GeodesicInShapeSpace
    } else if certified {
        Verdict::NotGeodesic
    } else {
        Verdict::Inconclusive
    };

    Ok(QuotientCoefficientReport {
        grid,
        max_relative_spread,
        undefined_pairs: undefined,
        verdict,
        certified,
    })
}

/// Continuous ramp shapes for the mixing switch function.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RampShape {
    Linear,
    Smoothstep,
}

/// F(t) = 1 for t ≤ t0, then decays continuously toward 0 at t = 1.
#[derive(Debug, Clone, Copy)]
pub struct SwitchFunction {
    pub t0: f64,
    pub ramp: RampShape,
}

impl SwitchFunction {
    pub fn new(t0: f64, ramp: RampShape) -> Result<Self, GeodesicError> {
        if !(0.0..1.0).contains(&t0) {
            return Err(GeodesicError::BadSwitchFunction(t0));
        }
        Ok(Self { t0, ramp })
    }

    pub fn eval(&self, t: f64) -> f64 {
        if t <= self.t0 {
            return 1.0;
        }
        let s = ((t - self.t0) / (1.0 - self.t0)).clamp(0.0, 1.0);
        match self.ramp {
            RampShape::Linear => 1.0 - s,
            RampShape::Smoothstep => 1.0 - s * s * (3.0 - 2.0 * s),
        }
    }
}

/// The two readings of the mixing construction (the formula pushes μ_t
/// through a formal combination F(t) + (1−F(t))g, which is ambiguous).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MixingStyle {
    /// Convex combination of measures: F μ_t + (1−F) g#μ_t.
    MeasureMixture,
    /// Atomwise interpolation: atoms move to F x + (1−F) g(x).
    PointInterpolation,
}

/// Applies the mixing construction sample by sample. For t ≤ t0 the input
/// sample is returned unchanged (bit-identical).
pub fn mixing_curve(
    curve: &CurveSample,
    g: &Isometry,
    switch: &SwitchFunction,
    style: MixingStyle,
) -> Result<CurveSample, GeodesicError> {
    if g.dim() != curve.dim() {
        return Err(GeodesicError::MixedDimensions);
    }
    let mut measures = Vec::with_capacity(curve.len());
    for (idx, mu_t) in curve.measures.iter().enumerate() {
        let f = switch.eval(curve.times[idx]);
        if f >= 1.0 {
            measures.push(mu_t.clone());
            continue;
        }
        let mixed = match style {
            MixingStyle::MeasureMixture => {
                let moved = g.apply_measure(mu_t);
                let mut rows = Vec::with_capacity(2 * mu_t.len());
                let mut weights = Vec::with_capacity(2 * mu_t.len());
                for k in 0..mu_t.len() {
                    rows.push((0..mu_t.dim()).map(|l| mu_t.points()[(k, l)]).collect());
                    weights.push(f * mu_t.weights()[k]);
                }
                for k in 0..moved.len() {
                    rows.push((0..moved.dim()).map(|l| moved.points()[(k, l)]).collect());
                    weights.push((1.0 - f) * moved.weights()[k]);
                }
                DiscreteMeasure::from_rows(&rows, &weights)
                    .map_err(|e| GeodesicError::Transport(TransportError::SolverFailure(
                        format!("mixing produced {e}"),
                    )))?
            }
            MixingStyle::PointInterpolation => mu_t.pushforward(|x| {
                let xv = nalgebra::DVector::from_column_slice(x);
                let gx = g.apply(&xv);
                (0..x.len()).map(|l| f * x[l] + (1.0 - f) * gx[l]).collect()
            }),
        };
        measures.push(mixed);
    }
    CurveSample::new(curve.times.clone(), measures)
}

/// Pointwise pushforward g_t#μ_t along a path of isometries matching the
/// sample times. Classes are preserved at every sample by construction.
pub fn branch_curve(
    curve: &CurveSample,
    gpath: &[Isometry],
) -> Result<CurveSample, GeodesicError> {
    if gpath.len() != curve.len() {
        return Err(GeodesicError::LengthMismatch {
            times: curve.len(),
            measures: gpath.len(),
        });
    }
    if gpath.iter().any(|g| g.dim() != curve.dim()) {
        return Err(GeodesicError::MixedDimensions);
    }
    let measures = curve
        .measures
        .iter()
        .zip(gpath.iter())
        .map(|(m, g)| g.apply_measure(m))
        .collect();
    CurveSample::new(curve.times.clone(), measures)
}

/// Linear mass mixing (1−t)μ + tν: the classical non-geodesic interpolation,
/// kept as a counterexample generator.
pub fn mass_mixing_curve(
    mu: &DiscreteMeasure,
    nu: &DiscreteMeasure,
    samples: usize,
) -> Result<CurveSample, GeodesicError> {
    if samples < 2 {
        return Err(GeodesicError::TooFewSamples(samples));
    }
    if mu.dim() != nu.dim() {
        return Err(GeodesicError::MixedDimensions);
    }
    let mut times = Vec::with_capacity(samples);
    let mut measures = Vec::with_capacity(samples);
    for s in 0..samples {
        let t = s as f64 / (samples - 1) as f64;
        times.push(t);
        if t == 0.0 {
            measures.push(mu.clone());
        } else if t == 1.0 {
            measures.push(nu.clone());
        } else {
            let mut rows = Vec::with_capacity(mu.len() + nu.len());
            let mut weights = Vec::with_capacity(mu.len() + nu.len());
            for k in 0..mu.len() {
                rows.push((0..mu.dim()).map(|l| mu.points()[(k, l)]).collect());
                weights.push((1.0 - t) * mu.weights()[k]);
            }
            for k in 0..nu.len() {
                rows.push((0..nu.dim()).map(|l| nu.points()[(k, l)]).collect());
                weights.push(t * nu.weights()[k]);
            }
            measures.push(DiscreteMeasure::from_rows(&rows, &weights).map_err(|e| {
                GeodesicError::Transport(TransportError::SolverFailure(format!(
                    "mass mixing produced {e}"
                )))
            })?);
        }
    }
    CurveSample::new(times, measures)
}
