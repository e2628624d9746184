//! Shape distance D_p(μ,ν) = inf_{g ∈ E(n)} W_p(g#μ, ν).
//!
//! The optimizer is specialized to p = 2, where the translation component has
//! a closed form: for any coupling, the squared cost splits into the centered
//! transport cost plus the squared barycenter offset, so the optimal
//! translation aligns barycenters and the search runs over O(n) only. Each
//! restart alternates exact (or entropic) optimal transport with a weighted
//! orthogonal Procrustes step, R = UVᵀ from the SVD of the cross-correlation
//! — deliberately without a determinant correction, since the group is full
//! O(n), not SO(n). Restarts seed identity, principal-axes alignments with
//! all sign combinations, and Haar-random rotations on alternating
//! components.
//!
//! The problem is non-convex and the result is a best-found local minimum;
//! [`shape_distance_oracle_2d`] provides a certified-to-grid global answer in
//! the plane, and [`shape_distance_certified_2d`] reports the gap between the
//! two.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use thiserror::Error;

use crate::isometry::{random_isometry, Component, Isometry};
use crate::measure::DiscreteMeasure;
use crate::transport::{
    wasserstein_entropic, wasserstein_exact, Coupling, TransportError, TransportResult,
};

#[derive(Debug, Error)]
pub enum ShapeError {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("the alternating optimizer only supports p = 2, got p = {0}")]
    UnsupportedP(f64),
    #[error("invalid solver configuration: {0}")]
    ConfigInvalid(String),
    #[error("the rotation-grid oracle needs planar measures, got dimension {0}")]
    DimensionNot2(usize),
    #[error("oracle budget exceeded: {needed} cost evaluations, cap {cap}")]
    BudgetExceeded { needed: u64, cap: u64 },
    #[error(transparent)]
    Transport(#[from] TransportError),
}

/// Inner transport solver used during alternations. The final reported value
/// always comes from one exact solve on the best isometry.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InnerSolver {
    Exact,
    EntropicThenExact,
}

#[derive(Debug, Clone)]
pub struct ShapeSolverConfig {
    /// Cost exponent; the alternating optimizer requires 2.
    pub p: f64,
    /// Number of restarts (identity + PCA + Haar-random).
    pub restarts: usize,
    /// Alternation cap per restart.
    pub max_alternations: usize,
    /// Relative objective decrease below which a restart stops.
    pub rel_tol: f64,
    pub inner_solver: InnerSolver,
    /// Target ε for the entropic inner loop.
    pub entropic_epsilon: f64,
    pub seed: u64,
}

impl Default for ShapeSolverConfig {
    fn default() -> Self {
        Self {
            p: 2.0,
            restarts: 16,
            max_alternations: 200,
            rel_tol: 1e-9,
            inner_solver: InnerSolver::Exact,
            entropic_epsilon: 1e-2,
            seed: 0,
        }
    }
}

impl ShapeSolverConfig {
    fn validate(&self) -> Result<(), ShapeError> {
        if self.p != 2.0 {
            return Err(ShapeError::UnsupportedP(self.p));
        }
        if self.restarts < 1 {
            return Err(ShapeError::ConfigInvalid("restarts must be at least 1".into()));
        }
        if !(self.rel_tol > 0.0) {
            return Err(ShapeError::ConfigInvalid("rel_tol must be positive".into()));
        }
        if self.inner_solver == InnerSolver::EntropicThenExact && !(self.entropic_epsilon > 0.0) {
            return Err(ShapeError::ConfigInvalid("entropic_epsilon must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct ShapeDistanceResult {
    pub distance: f64,
    /// Best-found isometry g with distance = W_p(g#μ, ν).
    pub minimizer: Isometry,
    /// Optimal coupling between g#μ and ν.
    pub coupling: Coupling,
    pub restarts_used: usize,
    pub inner_iterations: usize,
    /// True when the best restart stopped on the relative-decrease rule
    /// rather than the alternation cap.
    pub converged: bool,
    /// Best-found minus oracle distance; only set when the oracle ran.
    pub certificate: Option<f64>,
}

/// Optimal O(n) alignment for a fixed coupling: maximizes tr(R·crossᵀ) over
/// R ∈ O(n) via the SVD of cross = Σ_ij γ_ij y_j x_iᵀ, giving R = UVᵀ.
pub fn weighted_procrustes(coupling: &Coupling) -> DMatrix<f64> {
    let n = coupling.source().dim();
    let mut cross = DMatrix::zeros(n, n);
    for (i, j, w) in coupling.nonzeros() {
        for r in 0..n {
            for c in 0..n {
                cross[(r, c)] +=
                    w * coupling.target().points()[(j, r)] * coupling.source().points()[(i, c)];
            }
        }
    }
    orthogonal_factor(&cross)
}

fn orthogonal_factor(cross: &DMatrix<f64>) -> DMatrix<f64> {
    let svd = cross.clone().svd(true, true);
    svd.u.unwrap() * svd.v_t.unwrap()
}

/// One block-coordinate step for the p = 2 objective: solve transport for the
/// current g#μ vs ν, then the weighted Procrustes problem for the resulting
/// coupling. Inputs must be barycenter-centered at the origin. Returns the
/// new rotation (as an isometry with zero translation) and the transport
/// result at the current g; the objective never increases across the pair.
pub fn alternation_step(
    mu_aligned: &DiscreteMeasure,
    nu: &DiscreteMeasure,
    g: &Isometry,
) -> Result<(Isometry, TransportResult), ShapeError> {
    if mu_aligned.dim() != nu.dim() {
        return Err(ShapeError::DimensionMismatch { expected: mu_aligned.dim(), got: nu.dim() });
    }
    let transported = g.apply_measure(mu_aligned);
    let result = wasserstein_exact(&transported, nu, 2.0)?;
    // re-express the coupling against the *unrotated* source so the SVD
    // produces an absolute rotation, not an increment
    let absolute =
        Coupling::from_triplets(mu_aligned.clone(), nu.clone(), result.coupling.nonzeros())?;
    let rotation = weighted_procrustes(&absolute);
    let next = Isometry::new(rotation, DVector::zeros(mu_aligned.dim()))
        .map_err(|e| ShapeError::ConfigInvalid(format!("procrustes factor: {e}")))?;
    Ok((next, result))
}

fn covariance(mu: &DiscreteMeasure) -> DMatrix<f64> {
    let n = mu.dim();
    let mut cov = DMatrix::zeros(n, n);
    for k in 0..mu.len() {
        let w = mu.weights()[k];
        for r in 0..n {
            for c in 0..n {
                cov[(r, c)] += w * mu.points()[(k, r)] * mu.points()[(k, c)];
            }
        }
    }
    cov
}

fn sorted_eigenvectors(cov: &DMatrix<f64>) -> DMatrix<f64> {
    let eig = SymmetricEigen::new(cov.clone());
    let n = cov.nrows();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let mut out = DMatrix::zeros(n, n);
    for (col, &idx) in order.iter().enumerate() {
        out.set_column(col, &eig.eigenvectors.column(idx));
    }
    out
}

/// Restart schedule: identity, then principal-axes alignments over all sign
/// flips (capped at 16), then Haar rotations alternating between the proper
/// and improper components. Deterministic per seed.
fn restart_rotations(
    mu_c: &DiscreteMeasure,
    nu_c: &DiscreteMeasure,
    config: &ShapeSolverConfig,
) -> Vec<DMatrix<f64>> {
    let n = mu_c.dim();
    let mut list = vec![DMatrix::identity(n, n)];
    let e_mu = sorted_eigenvectors(&covariance(mu_c));
    let e_nu = sorted_eigenvectors(&covariance(nu_c));
    let combos = (1usize << n.min(20)).min(16);
    for s in 0..combos {
        let mut signs = DMatrix::identity(n, n);
        for b in 0..n {
            if (s >> b) & 1 == 1 {
                signs[(b, b)] = -1.0;
            }
        }
        list.push(&e_nu * signs * e_mu.transpose());
    }
    let mut extra_seed = config.seed;
    while list.len() < config.restarts {
        let comp = if list.len() % 2 == 0 { Component::Proper } else { Component::Improper };
        list.push(random_isometry(n, extra_seed, comp, 0.0).rotation().clone());
        extra_seed = extra_seed.wrapping_add(1);
    }
    list.truncate(config.restarts.max(1));
    list
}

struct RestartOutcome {
    cost: f64,
    rotation: DMatrix<f64>,
    triplets: Vec<(usize, usize, f64)>,
    converged: bool,
    alternations: usize,
}

fn run_restart(
    mu_c: &DiscreteMeasure,
    nu_c: &DiscreteMeasure,
    r0: DMatrix<f64>,
    config: &ShapeSolverConfig,
) -> Result<RestartOutcome, ShapeError> {
    let n = mu_c.dim();
    let mut rotation = r0;
    let mut alternations = 0usize;
    let mut converged = false;
    let mut last_cost = f64::INFINITY;
    for _ in 0..config.max_alternations {
        let moved = Isometry::new(rotation.clone(), DVector::zeros(n))
            .map_err(|e| ShapeError::ConfigInvalid(format!("restart rotation: {e}")))?
            .apply_measure(mu_c);
        let inner = match config.inner_solver {
            InnerSolver::Exact => wasserstein_exact(&moved, nu_c, 2.0)?,
            InnerSolver::EntropicThenExact => {
                wasserstein_entropic(&moved, nu_c, 2.0, config.entropic_epsilon, 500, 1e-7)?
            }
        };
        alternations += 1;
        let cost = inner.cost;
        if last_cost.is_finite() && last_cost - cost <= config.rel_tol * last_cost.max(1e-300) {
            converged = true;
            break;
        }
        last_cost = cost;
        let absolute =
            Coupling::from_triplets(mu_c.clone(), nu_c.clone(), inner.coupling.nonzeros())?;
        rotation = weighted_procrustes(&absolute);
    }
    // one exact solve on the final rotation reports the true cost
    let moved = Isometry::new(rotation.clone(), DVector::zeros(n))
        .map_err(|e| ShapeError::ConfigInvalid(format!("final rotation: {e}")))?
        .apply_measure(mu_c);
    let fin = wasserstein_exact(&moved, nu_c, 2.0)?;
    Ok(RestartOutcome {
        cost: fin.cost,
        rotation,
        triplets: fin.coupling.nonzeros(),
        converged,
        alternations,
    })
}

/// Best-found local minimum of g ↦ W₂(g#μ, ν) over the restart schedule.
///
/// Global optimality is not guaranteed (the problem is non-convex); the
/// `certificate` field stays empty unless the 2D oracle is consulted via
/// [`shape_distance_certified_2d`].
pub fn shape_distance(
    mu: &DiscreteMeasure,
    nu: &DiscreteMeasure,
    config: &ShapeSolverConfig,
) -> Result<ShapeDistanceResult, ShapeError> {
    if mu.dim() != nu.dim() {
        return Err(ShapeError::DimensionMismatch { expected: mu.dim(), got: nu.dim() });
    }
    config.validate()?;
    let b_mu = mu.barycenter();
    let b_nu = nu.barycenter();
    let mu_c = mu.centered();
    let nu_c = nu.centered();
    let rotations = restart_rotations(&mu_c, &nu_c, config);
    let restarts_used = rotations.len();

    let mut best: Option<RestartOutcome> = None;
    let mut total_alternations = 0usize;
    for r0 in rotations {
        let outcome = run_restart(&mu_c, &nu_c, r0, config)?;
        total_alternations += outcome.alternations;
        let better = match &best {
            None => true,
            Some(b) => outcome.cost < b.cost,
        };
        if better {
            best = Some(outcome);
        }
    }
    let best = best.expect("at least one restart ran");

    let translation = &b_nu - &best.rotation * &b_mu;
    let minimizer = Isometry::new(best.rotation, translation)
        .map_err(|e| ShapeError::ConfigInvalid(format!("best rotation: {e}")))?;
    let aligned = minimizer.apply_measure(mu);
    let coupling = Coupling::from_triplets(aligned, nu.clone(), best.triplets)?;
    Ok(ShapeDistanceResult {
        distance: best.cost.max(0.0).sqrt(),
        minimizer,
        coupling,
        restarts_used,
        inner_iterations: total_alternations,
        converged: best.converged,
        certificate: None,
    })
}

/// Exhaustive rotation-angle scan in the plane: `grid_steps` angles on each
/// of the proper and improper components, exact transport at every node,
/// golden-section refinement of the best bracket down to 1e-10 radians.
/// Measures are barycenter-centered first (exact translation elimination for
/// p = 2; for other p this restricts the search to barycenter-aligned
/// translations, which is how the oracle is defined).
pub fn shape_distance_oracle_2d(
    mu: &DiscreteMeasure,
    nu: &DiscreteMeasure,
    grid_steps: usize,
    p: f64,
) -> Result<ShapeDistanceResult, ShapeError> {
    const EVAL_BUDGET: u64 = 200_000_000;
    if mu.dim() != 2 || nu.dim() != 2 {
        return Err(ShapeError::DimensionNot2(mu.dim().max(nu.dim())));
    }
    if grid_steps < 1 {
        return Err(ShapeError::ConfigInvalid("grid_steps must be at least 1".into()));
    }
    let needed = 2 * grid_steps as u64 * (mu.len() * nu.len()) as u64;
    if needed > EVAL_BUDGET {
        return Err(ShapeError::BudgetExceeded { needed, cap: EVAL_BUDGET });
    }
    let b_mu = mu.barycenter();
    let b_nu = nu.barycenter();
    let mu_c = mu.centered();
    let nu_c = nu.centered();

    let eval = |theta: f64, improper: bool| -> Result<f64, ShapeError> {
        let g =
            if improper { Isometry::reflection_2d(theta) } else { Isometry::rotation_2d(theta) };
        Ok(wasserstein_exact(&g.apply_measure(&mu_c), &nu_c, p)?.cost)
    };

    let step = 2.0 * std::f64::consts::PI / grid_steps as f64;
    let mut best = (f64::INFINITY, 0.0, false);
    for comp in [false, true] {
        for gidx in 0..grid_steps {
            let theta = gidx as f64 * step;
            let cost = eval(theta, comp)?;
            if cost < best.0 {
                best = (cost, theta, comp);
            }
        }
    }
    // golden-section refinement of the winning bracket
    let improper = best.2;
    let (mut lo, mut hi) = (best.1 - step, best.1 + step);
    let golden = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = hi - golden * (hi - lo);
    let mut x2 = lo + golden * (hi - lo);
    let mut f1 = eval(x1, improper)?;
    let mut f2 = eval(x2, improper)?;
    let mut golden_iters = 0usize;
    while hi - lo > 1e-10 {
        golden_iters += 1;
        if f1 <= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - golden * (hi - lo);
            f1 = eval(x1, improper)?;
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + golden * (hi - lo);
            f2 = eval(x2, improper)?;
        }
    }
    let theta_mid = 0.5 * (lo + hi);
    let refined = eval(theta_mid, improper)?;
    let theta_star = if refined <= best.0 { theta_mid } else { best.1 };

    let rot = if improper {
        Isometry::reflection_2d(theta_star)
    } else {
        Isometry::rotation_2d(theta_star)
    };
    let translation = &b_nu - rot.rotation() * &b_mu;
    let minimizer = Isometry::new(rot.rotation().clone(), translation)
        .map_err(|e| ShapeError::ConfigInvalid(format!("oracle rotation: {e}")))?;
    let aligned = minimizer.apply_measure(mu);
    let fin = wasserstein_exact(&aligned, nu, p)?;
    Ok(ShapeDistanceResult {
        distance: fin.distance,
        minimizer,
        coupling: fin.coupling,
        restarts_used: 2 * grid_steps,
        inner_iterations: golden_iters,
        converged: true,
        certificate: Some(0.0),
    })
}

/// Runs both the alternating solver and the 2D oracle, returns the better
/// minimizer and stores the gap (alternating minus oracle) as certificate.
pub fn shape_distance_certified_2d(
    mu: &DiscreteMeasure,
    nu: &DiscreteMeasure,
    config: &ShapeSolverConfig,
    grid_steps: usize,
) -> Result<ShapeDistanceResult, ShapeError> {
    let alternating = shape_distance(mu, nu, config)?;
    let oracle = shape_distance_oracle_2d(mu, nu, grid_steps, config.p)?;
    let gap = alternating.distance - oracle.distance;
    let mut best = if oracle.distance <= alternating.distance { oracle } else { alternating };
    best.certificate = Some(gap);
    Ok(best)
}

/// Radius R' from the minimizer-existence argument: with ε = 1/4, take R so
/// that both measures put mass ≥ 1 − ε in the ball B_R around the pooled
/// barycenter, C = W_p(μ,ν)^p, and
///
/// ```text
/// R' = R + (1/2) · (C / (1 − 2ε))^{1/p}.
/// ```
///
/// Any isometry whose translation (in the pooled-barycenter frame) exceeds
/// 2R' moves the covering ball off itself and therefore strictly exceeds
/// W_p(μ,ν); such isometries can be pruned from the search.
pub fn translation_search_bound(
    mu: &DiscreteMeasure,
    nu: &DiscreteMeasure,
    p: f64,
) -> Result<f64, ShapeError> {
    if mu.dim() != nu.dim() {
        return Err(ShapeError::DimensionMismatch { expected: mu.dim(), got: nu.dim() });
    }
    let eps = 0.25;
    let center = (mu.barycenter() + nu.barycenter()) * 0.5;
    let radius =
        covering_radius(mu, &center, 1.0 - eps).max(covering_radius(nu, &center, 1.0 - eps));
    let cost = wasserstein_exact(mu, nu, p)?.cost;
    Ok(radius + 0.5 * (cost / (1.0 - 2.0 * eps)).powf(1.0 / p))
}

/// Smallest radius around `center` holding at least `mass` of μ.
fn covering_radius(mu: &DiscreteMeasure, center: &DVector<f64>, mass: f64) -> f64 {
    let mut dist_weight: Vec<(f64, f64)> =
        (0..mu.len()).map(|k| ((mu.atom(k) - center).norm(), mu.weights()[k])).collect();
    dist_weight.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut acc = 0.0;
    for &(d, w) in &dist_weight {
        acc += w;
        if acc >= mass - 1e-15 {
            return d;
        }
    }
    dist_weight.last().map(|&(d, _)| d).unwrap_or(0.0)
}

#[cfg(test)]
mod tests;
