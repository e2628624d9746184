//! Optimal transport between discrete measures.
//!
//! [`wasserstein_exact`] solves the transportation linear program
//! min_{γ ∈ Adm(μ,ν)} Σ γ_ij ‖x_i − y_j‖^p to global optimality: a network
//! simplex over the bipartite graph in general, an assignment solver when
//! both measures are uniform with equal cardinality. [`wasserstein_oracle`]
//! is the exhaustive permutation check used to validate the exact solver,
//! and [`wasserstein_entropic`] is the fast approximate inner loop used by
//! the shape-distance optimizer. All solvers are pure functions and
//! deterministic for fixed inputs.

mod assignment;
mod entropic;
mod simplex;

use nalgebra::DMatrix;
use thiserror::Error;

use crate::measure::DiscreteMeasure;

/// Couplings with at most this many entries are stored dense.
const DENSE_ENTRY_CAP: usize = 4_000_000;
/// Absolute tolerance on coupling marginals.
pub const MARGINAL_TOL: f64 = 1e-9;
/// Largest oracle instance (m! matchings are enumerated).
pub const ORACLE_MAX_ATOMS: usize = 8;

#[derive(Debug, Error)]
pub enum TransportError {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("cost exponent must satisfy p >= 1, got {0}")]
    InvalidP(f64),
    #[error("interpolation time {0} outside [0, 1]")]
    TOutOfRange(f64),
    #[error("oracle limited to {max} atoms, got {m}")]
    OracleTooLarge { m: usize, max: usize },
    #[error("oracle requires equal cardinalities, got {m} and {k}")]
    OracleSizeMismatch { m: usize, k: usize },
    #[error("oracle requires uniform weights on both measures")]
    NonUniformWeights,
    #[error("entropic solver underflow; epsilon {0} too small for this instance")]
    NumericalUnderflow(f64),
    #[error("epsilon must be positive, got {0}")]
    InvalidEpsilon(f64),
    #[error("internal solver failure: {0}")]
    SolverFailure(String),
    #[error("coupling marginals violate the prescribed weights by {0:.3e}")]
    MarginalViolation(f64),
}

/// Which algorithm produced a transport result.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolverKind {
    Exact,
    Entropic,
    Oracle,
}

impl SolverKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            SolverKind::Exact => "exact",
            SolverKind::Entropic => "entropic",
            SolverKind::Oracle => "oracle",
        }
    }
}

#[derive(Debug, Clone)]
enum CouplingStorage {
    Dense(DMatrix<f64>),
    Triplets(Vec<(usize, usize, f64)>),
}

/// A transport plan γ ∈ Adm(μ,ν): an m × k nonnegative matrix whose row sums
/// are μ's weights and column sums are ν's weights (within [`MARGINAL_TOL`]).
#[derive(Debug, Clone)]
pub struct Coupling {
    source: DiscreteMeasure,
    target: DiscreteMeasure,
    storage: CouplingStorage,
}

impl Coupling {
    /// Builds a coupling from nonzero entries, validating the marginals.
    pub fn from_triplets(
        source: DiscreteMeasure,
        target: DiscreteMeasure,
        mut entries: Vec<(usize, usize, f64)>,
    ) -> Result<Self, TransportError> {
        let (m, k) = (source.len(), target.len());
        entries.sort_by_key(|&(i, j, _)| (i, j));
        for &(i, j, w) in &entries {
            if i >= m || j >= k {
                return Err(TransportError::SolverFailure(format!(
                    "coupling entry ({i},{j}) outside {m}x{k}"
                )));
            }
            if w < 0.0 || !w.is_finite() {
                return Err(TransportError::SolverFailure(format!(
                    "coupling entry ({i},{j}) has invalid weight {w}"
                )));
            }
        }
        let storage = if m * k <= DENSE_ENTRY_CAP {
            let mut dense = DMatrix::zeros(m, k);
            for &(i, j, w) in &entries {
                dense[(i, j)] += w;
            }
            CouplingStorage::Dense(dense)
        } else {
            CouplingStorage::Triplets(entries)
        };
        let coupling = Self { source, target, storage };
        coupling.validate()?;
        Ok(coupling)
    }

    /// Builds a coupling from a dense matrix, validating the marginals.
    pub fn from_dense(
        source: DiscreteMeasure,
        target: DiscreteMeasure,
        gamma: DMatrix<f64>,
    ) -> Result<Self, TransportError> {
        if gamma.nrows() != source.len() || gamma.ncols() != target.len() {
            return Err(TransportError::SolverFailure(format!(
                "coupling shape {}x{} does not match measures {}x{}",
                gamma.nrows(),
                gamma.ncols(),
                source.len(),
                target.len()
            )));
        }
        if gamma.iter().any(|&w| w < 0.0 || !w.is_finite()) {
            return Err(TransportError::SolverFailure("negative coupling entry".into()));
        }
        let coupling = Self { source, target, storage: CouplingStorage::Dense(gamma) };
        coupling.validate()?;
        Ok(coupling)
    }

    fn validate(&self) -> Result<(), TransportError> {
        let rows = self.row_sums();
        let cols = self.col_sums();
        let mut worst = 0.0_f64;
        for (got, want) in rows.iter().zip(self.source.weights().iter()) {
            worst = worst.max((got - want).abs());
        }
        for (got, want) in cols.iter().zip(self.target.weights().iter()) {
            worst = worst.max((got - want).abs());
        }
        if worst > MARGINAL_TOL {
            return Err(TransportError::MarginalViolation(worst));
        }
        Ok(())
    }

    pub fn rows(&self) -> usize {
        self.source.len()
    }

    pub fn cols(&self) -> usize {
        self.target.len()
    }

    pub fn source(&self) -> &DiscreteMeasure {
        &self.source
    }

    pub fn target(&self) -> &DiscreteMeasure {
        &self.target
    }

    /// Nonzero entries in row-major order.
    pub fn nonzeros(&self) -> Vec<(usize, usize, f64)> {
        match &self.storage {
            CouplingStorage::Dense(g) => {
                let mut out = Vec::new();
                for i in 0..g.nrows() {
                    for j in 0..g.ncols() {
                        if g[(i, j)] != 0.0 {
                            out.push((i, j, g[(i, j)]));
                        }
                    }
                }
                out
            }
            CouplingStorage::Triplets(t) => t.clone(),
        }
    }

    pub fn row_sums(&self) -> Vec<f64> {
        let mut sums = vec![0.0; self.rows()];
        match &self.storage {
            CouplingStorage::Dense(g) => {
                for i in 0..g.nrows() {
                    sums[i] = g.row(i).sum();
                }
            }
            CouplingStorage::Triplets(t) => {
                for &(i, _, w) in t {
                    sums[i] += w;
                }
            }
        }
        sums
    }

    pub fn col_sums(&self) -> Vec<f64> {
        let mut sums = vec![0.0; self.cols()];
        match &self.storage {
            CouplingStorage::Dense(g) => {
                for j in 0..g.ncols() {
                    sums[j] = g.column(j).sum();
                }
            }
            CouplingStorage::Triplets(t) => {
                for &(_, j, w) in t {
                    sums[j] += w;
                }
            }
        }
        sums
    }

    /// Transport cost Σ γ_ij ‖x_i − y_j‖^p of this plan.
    pub fn cost(&self, p: f64) -> f64 {
        self.nonzeros()
            .iter()
            .map(|&(i, j, w)| w * ground_cost(&self.source, i, &self.target, j, p))
            .sum()
    }
}

/// Outcome of a transport solve.
#[derive(Debug, Clone)]
pub struct TransportResult {
    pub cost: f64,
    pub distance: f64,
    pub coupling: Coupling,
    pub solver: SolverKind,
    pub iterations: usize,
}

fn check_pair(mu: &DiscreteMeasure, nu: &DiscreteMeasure, p: f64) -> Result<(), TransportError> {
    if mu.dim() != nu.dim() {
        return Err(TransportError::DimensionMismatch { expected: mu.dim(), got: nu.dim() });
    }
    if !(p >= 1.0) || !p.is_finite() {
        return Err(TransportError::InvalidP(p));
    }
    Ok(())
}

/// ‖x_i − y_j‖^p in double precision, with fast paths for p = 1 and p = 2.
pub fn ground_cost(
    mu: &DiscreteMeasure,
    i: usize,
    nu: &DiscreteMeasure,
    j: usize,
    p: f64,
) -> f64 {
    let mut d2 = 0.0;
    for l in 0..mu.dim() {
        let d = mu.points()[(i, l)] - nu.points()[(j, l)];
        d2 += d * d;
    }
    if p == 2.0 {
        d2
    } else if p == 1.0 {
        d2.sqrt()
    } else {
        d2.powf(p / 2.0)
    }
}

/// Full m × k matrix of p-th power ground costs.
pub fn cost_matrix(mu: &DiscreteMeasure, nu: &DiscreteMeasure, p: f64) -> DMatrix<f64> {
    DMatrix::from_fn(mu.len(), nu.len(), |i, j| ground_cost(mu, i, nu, j, p))
}

fn distance_from_cost(cost: f64, p: f64) -> f64 {
    if p == 1.0 {
        cost
    } else if p == 2.0 {
        cost.sqrt()
    } else {
        cost.powf(1.0 / p)
    }
}

/// Globally optimal W_p transport between two discrete measures.
///
/// Uniform equal-cardinality inputs dispatch to the assignment solver; the
/// general case runs the transportation network simplex. The returned plan
/// satisfies the [`Coupling`] invariants and the reported distance is
/// cost^{1/p}.
pub fn wasserstein_exact(
    mu: &DiscreteMeasure,
    nu: &DiscreteMeasure,
    p: f64,
) -> Result<TransportResult, TransportError> {
    check_pair(mu, nu, p)?;
    let cost = cost_matrix(mu, nu, p);
    let (triplets, iterations) =
        if mu.len() == nu.len() && mu.is_uniform() && nu.is_uniform() && mu.len() > 1 {
            let (assignment, iters) = assignment::solve(&cost);
            let w = 1.0 / mu.len() as f64;
            (assignment.into_iter().enumerate().map(|(i, j)| (i, j, w)).collect(), iters)
        } else {
            simplex::solve(mu.weights().as_slice(), nu.weights().as_slice(), &cost)?
        };
    let coupling = Coupling::from_triplets(mu.clone(), nu.clone(), triplets)?;
    let total = coupling.cost(p);
    Ok(TransportResult {
        cost: total,
        distance: distance_from_cost(total, p),
        coupling,
        solver: SolverKind::Exact,
        iterations,
    })
}

/// Exhaustive minimum over all m! permutation matchings; only defined for
/// uniform measures of equal cardinality m ≤ [`ORACLE_MAX_ATOMS`].
pub fn wasserstein_oracle(
    mu: &DiscreteMeasure,
    nu: &DiscreteMeasure,
    p: f64,
) -> Result<TransportResult, TransportError> {
    check_pair(mu, nu, p)?;
    let m = mu.len();
    if m != nu.len() {
        return Err(TransportError::OracleSizeMismatch { m, k: nu.len() });
    }
    if m > ORACLE_MAX_ATOMS {
        return Err(TransportError::OracleTooLarge { m, max: ORACLE_MAX_ATOMS });
    }
    if !mu.is_uniform() || !nu.is_uniform() {
        return Err(TransportError::NonUniformWeights);
    }
    let cost = cost_matrix(mu, nu, p);
    let mut perm: Vec<usize> = (0..m).collect();
    let mut best_perm = perm.clone();
    let mut best = perm_cost(&cost, &perm);
    let mut evaluated = 1usize;
    // Heap's algorithm, iterative
    let mut c = vec![0usize; m];
    let mut i = 0;
    while i < m {
        if c[i] < i {
            if i % 2 == 0 {
                perm.swap(0, i);
            } else {
                perm.swap(c[i], i);
            }
            let total = perm_cost(&cost, &perm);
            evaluated += 1;
            if total < best {
                best = total;
                best_perm.copy_from_slice(&perm);
            }
            c[i] += 1;
            i = 0;
        } else {
            c[i] = 0;
            i += 1;
        }
    }
    let w = 1.0 / m as f64;
    let triplets = best_perm.iter().enumerate().map(|(i, &j)| (i, j, w)).collect();
    let coupling = Coupling::from_triplets(mu.clone(), nu.clone(), triplets)?;
    let total = coupling.cost(p);
    Ok(TransportResult {
        cost: total,
        distance: distance_from_cost(total, p),
        coupling,
        solver: SolverKind::Oracle,
        iterations: evaluated,
    })
}

fn perm_cost(cost: &DMatrix<f64>, perm: &[usize]) -> f64 {
    perm.iter().enumerate().map(|(i, &j)| cost[(i, j)]).sum()
}

/// Entropically regularized transport: log-domain Sinkhorn with ε-annealing,
/// marginal-repaired so the returned plan is strictly admissible.
///
/// Stops when both L¹ marginal residuals fall below `marginal_tol` or after
/// `max_iter` total iterations. The reported cost is the unregularized cost
/// of the repaired plan, an upper bound on the exact cost.
pub fn wasserstein_entropic(
    mu: &DiscreteMeasure,
    nu: &DiscreteMeasure,
    p: f64,
    epsilon: f64,
    max_iter: usize,
    marginal_tol: f64,
) -> Result<TransportResult, TransportError> {
    check_pair(mu, nu, p)?;
    if !(epsilon > 0.0) || !epsilon.is_finite() {
        return Err(TransportError::InvalidEpsilon(epsilon));
    }
    let cost = cost_matrix(mu, nu, p);
    let (gamma, iterations) = entropic::solve(
        mu.weights().as_slice(),
        nu.weights().as_slice(),
        &cost,
        epsilon,
        max_iter,
        marginal_tol,
    )?;
    let coupling = Coupling::from_dense(mu.clone(), nu.clone(), gamma)?;
    let total = coupling.cost(p);
    Ok(TransportResult {
        cost: total,
        distance: distance_from_cost(total, p),
        coupling,
        solver: SolverKind::Entropic,
        iterations,
    })
}

/// Displacement interpolation μ_t = ((1−t)π¹ + tπ²)#γ: one atom per nonzero
/// coupling entry at (1−t)x_i + t y_j with weight γ_ij, in row-major entry
/// order.
pub fn displacement_interpolation(
    coupling: &Coupling,
    t: f64,
) -> Result<DiscreteMeasure, TransportError> {
    if !(0.0..=1.0).contains(&t) || t.is_nan() {
        return Err(TransportError::TOutOfRange(t));
    }
    let n = coupling.source.dim();
    let entries = coupling.nonzeros();
    let mut rows = Vec::with_capacity(entries.len());
    let mut weights = Vec::with_capacity(entries.len());
    for &(i, j, w) in &entries {
        let mut atom = Vec::with_capacity(n);
        for l in 0..n {
            atom.push(
                (1.0 - t) * coupling.source.points()[(i, l)] + t * coupling.target.points()[(j, l)],
            );
        }
        rows.push(atom);
        weights.push(w);
    }
    DiscreteMeasure::from_rows(&rows, &weights)
        .map_err(|e| TransportError::SolverFailure(format!("interpolation produced {e}")))
}

#[cfg(test)]
mod tests;
