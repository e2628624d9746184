//! Discrete tangent-space analysis.
//!
//! For a finitely supported μ the Wasserstein tangent space at μ is the whole
//! of L²(μ), which for m atoms in ℝⁿ is just ℝ^{m·n} with the √w-weighted
//! Euclidean metric. The orbit subspace U_μ is the span of the Killing-basis
//! fundamental fields evaluated on the atoms; its dimension is the rank of an
//! (m·n) × n(n+1)/2 evaluation matrix, and the shape-space tangent dimension
//! is m·n minus that rank. One spectral factorization of the evaluation
//! matrix serves rank, kernel extraction, and orthogonal projection.

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use thiserror::Error;

use crate::isometry::{
    flow_pushforward, fundamental_field, IsoAlgebraElement, Isometry, IsometryError, KillingBasis,
};
use crate::measure::{DiscreteMeasure, TestFunction};

/// Default relative cutoff on singular values for rank decisions.
pub const RANK_REL_TOL: f64 = 1e-8;

#[derive(Debug, Error)]
pub enum TangentError {
    #[error("vector field is attached to a different measure")]
    MeasureMismatch,
    #[error("field shape {rows}x{cols} does not match measure {m}x{n}")]
    ShapeMismatch { rows: usize, cols: usize, m: usize, n: usize },
    #[error("finite-difference step must be positive and finite, got {0}")]
    BadStep(f64),
    #[error("quadrature needs at least one step")]
    NoQuadratureSteps,
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error(transparent)]
    Isometry(#[from] IsometryError),
}

/// An element of L²(μ) for discrete μ: one vector per atom.
#[derive(Debug, Clone)]
pub struct DiscreteVectorField {
    vectors: DMatrix<f64>,
    measure: DiscreteMeasure,
}

impl DiscreteVectorField {
    pub fn new(measure: DiscreteMeasure, vectors: DMatrix<f64>) -> Result<Self, TangentError> {
        if vectors.nrows() != measure.len() || vectors.ncols() != measure.dim() {
            return Err(TangentError::ShapeMismatch {
                rows: vectors.nrows(),
                cols: vectors.ncols(),
                m: measure.len(),
                n: measure.dim(),
            });
        }
        Ok(Self { vectors, measure })
    }

    pub fn zero(measure: DiscreteMeasure) -> Self {
        let vectors = DMatrix::zeros(measure.len(), measure.dim());
        Self { vectors, measure }
    }

    /// The fundamental field X̃ evaluated on the atoms of μ.
    pub fn from_fundamental_field(
        measure: DiscreteMeasure,
        x_alg: &IsoAlgebraElement,
    ) -> Result<Self, TangentError> {
        if x_alg.dim() != measure.dim() {
            return Err(TangentError::DimensionMismatch {
                expected: measure.dim(),
                got: x_alg.dim(),
            });
        }
        let mut vectors = DMatrix::zeros(measure.len(), measure.dim());
        for k in 0..measure.len() {
            let value = fundamental_field(x_alg, &measure.atom(k))?;
            for l in 0..measure.dim() {
                vectors[(k, l)] = value[l];
            }
        }
        Ok(Self { vectors, measure })
    }

    /// Gaussian random field, deterministic per seed.
    pub fn random(measure: DiscreteMeasure, seed: u64, scale: f64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let vectors = DMatrix::from_fn(measure.len(), measure.dim(), |_, _| {
            let v: f64 = StandardNormal.sample(&mut rng);
            scale * v
        });
        Self { vectors, measure }
    }

    pub fn vectors(&self) -> &DMatrix<f64> {
        &self.vectors
    }

    pub fn measure(&self) -> &DiscreteMeasure {
        &self.measure
    }

    pub fn norm(&self) -> f64 {
        l2_inner(self, self).expect("field is attached to its own measure").sqrt()
    }

    fn same_measure(&self, other: &Self) -> bool {
        self.measure == other.measure
    }

    pub fn add(&self, other: &Self) -> Result<Self, TangentError> {
        if !self.same_measure(other) {
            return Err(TangentError::MeasureMismatch);
        }
        Ok(Self { vectors: &self.vectors + &other.vectors, measure: self.measure.clone() })
    }

    pub fn sub(&self, other: &Self) -> Result<Self, TangentError> {
        if !self.same_measure(other) {
            return Err(TangentError::MeasureMismatch);
        }
        Ok(Self { vectors: &self.vectors - &other.vectors, measure: self.measure.clone() })
    }
}

/// L²(μ) inner product Σ_k w_k ⟨u_k, v_k⟩.
pub fn l2_inner(u: &DiscreteVectorField, v: &DiscreteVectorField) -> Result<f64, TangentError> {
    if !u.same_measure(v) {
        return Err(TangentError::MeasureMismatch);
    }
    let mut acc = 0.0;
    for k in 0..u.measure.len() {
        let mut dot = 0.0;
        for l in 0..u.measure.dim() {
            dot += u.vectors[(k, l)] * v.vectors[(k, l)];
        }
        acc += u.measure.weights()[k] * dot;
    }
    Ok(acc)
}

/// Spectral report on U_μ: the √w-scaled evaluation matrix of the Killing
/// basis, its singular values, rank, the kernel {X : X̃ = 0 μ-a.e.}, and the
/// derived shape-space tangent dimension m·n − rank.
#[derive(Debug, Clone)]
pub struct OrbitSubspaceReport {
    evaluation_matrix: DMatrix<f64>,
    singular_values: DVector<f64>,
    rank: usize,
    tangent_dim: usize,
    shape_tangent_dim: usize,
    kernel_basis: Vec<IsoAlgebraElement>,
    basis: KillingBasis,
    left_vectors: DMatrix<f64>,
    right_vectors: DMatrix<f64>,
    measure: DiscreteMeasure,
}

impl OrbitSubspaceReport {
    pub fn evaluation_matrix(&self) -> &DMatrix<f64> {
        &self.evaluation_matrix
    }

    /// Singular values in descending order.
    pub fn singular_values(&self) -> &DVector<f64> {
        &self.singular_values
    }

    /// dim U_μ.
    pub fn rank(&self) -> usize {
        self.rank
    }

    /// dim T_μW = m·n for discrete μ.
    pub fn tangent_dim(&self) -> usize {
        self.tangent_dim
    }

    /// dim T_[μ]Sh = m·n − rank.
    pub fn shape_tangent_dim(&self) -> usize {
        self.shape_tangent_dim
    }

    pub fn kernel_basis(&self) -> &[IsoAlgebraElement] {
        &self.kernel_basis
    }

    pub fn killing_basis(&self) -> &KillingBasis {
        &self.basis
    }

    pub fn measure(&self) -> &DiscreteMeasure {
        &self.measure
    }
}

/// Builds the orbit-subspace report for μ. Column ℓ of the evaluation matrix
/// stacks √w_k · X̃_ℓ(x_k) over atoms k, so plain Euclidean geometry of the
/// matrix equals L²(μ) geometry. Rank counts singular values above
/// `rank_rel_tol` times the largest (rank 0 when the matrix vanishes).
pub fn orbit_subspace(mu: &DiscreteMeasure, rank_rel_tol: f64) -> OrbitSubspaceReport {
    let n = mu.dim();
    let m = mu.len();
    let basis = KillingBasis::new(n);
    let q = basis.len();
    let mut eval = DMatrix::zeros(m * n, q);
    for (l, element) in basis.elements().iter().enumerate() {
        for k in 0..m {
            let field = fundamental_field(element, &mu.atom(k))
                .expect("basis elements share the measure dimension");
            let sw = mu.weights()[k].sqrt();
            for c in 0..n {
                eval[(k * n + c, l)] = sw * field[c];
            }
        }
    }

    // one SVD serves rank, kernel and projection; the matrix is padded with
    // zero rows up to q x q when m·n < q so the full right-singular basis
    // (and with it the kernel) is available
    let padded_rows = (m * n).max(q);
    let mut padded = DMatrix::zeros(padded_rows, q);
    padded.view_mut((0, 0), (m * n, q)).copy_from(&eval);
    let svd = padded.svd(true, true);
    let singular_values = svd.singular_values.clone();
    let left_vectors = svd.u.expect("svd computed with u");
    let right_vectors = svd.v_t.expect("svd computed with v_t").transpose();
    let sigma_max = singular_values[0];
    let rank = if sigma_max <= 0.0 {
        0
    } else {
        (0..q).filter(|&i| singular_values[i] > rank_rel_tol * sigma_max).count()
    };
    let kernel_basis =
        (rank..q).map(|i| basis.combine(&right_vectors.column(i).into_owned())).collect();

    OrbitSubspaceReport {
        evaluation_matrix: eval,
        singular_values,
        rank,
        tangent_dim: m * n,
        shape_tangent_dim: m * n - rank,
        kernel_basis,
        basis,
        left_vectors,
        right_vectors,
        measure: mu.clone(),
    }
}

/// Orthogonal split v = v_orbit + v_shape within L²(μ): v_orbit is the
/// least-squares combination of fundamental fields (through the stored
/// factorization), v_shape the residual. Idempotent and self-adjoint up to
/// 1e-10 on well-scaled inputs.
pub fn project_onto_orbit(
    v: &DiscreteVectorField,
    report: &OrbitSubspaceReport,
) -> Result<(DiscreteVectorField, DiscreteVectorField), TangentError> {
    if v.measure != report.measure {
        return Err(TangentError::MeasureMismatch);
    }
    let (m, n) = (report.measure.len(), report.measure.dim());
    let padded_rows = report.left_vectors.nrows();
    let mut scaled = DVector::zeros(padded_rows);
    for k in 0..m {
        let sw = report.measure.weights()[k].sqrt();
        for l in 0..n {
            scaled[k * n + l] = sw * v.vectors[(k, l)];
        }
    }
    // least squares through the stored factorization: c = V Σ⁺ Uᵀ ṽ
    let projected = report.left_vectors.transpose() * scaled;
    let mut coeffs = DVector::zeros(report.basis.len());
    for i in 0..report.rank {
        coeffs += report.right_vectors.column(i) * (projected[i] / report.singular_values[i]);
    }
    let combined = report.basis.combine(&coeffs);
    let v_orbit = DiscreteVectorField::from_fundamental_field(report.measure.clone(), &combined)?;
    let v_shape = v.sub(&v_orbit)?;
    Ok((v_orbit, v_shape))
}

/// Max residual of the weak continuity equation along the isometry flow:
/// |d/dt ∫φ dμ_t − ∫⟨∇φ, X̃⟩ dμ_t| over the time grid, the derivative by
/// central differences of step `fd_step`, the transport term in closed form.
/// Second-order in `fd_step` for the fixed sign convention.
pub fn continuity_residual(
    mu: &DiscreteMeasure,
    x_alg: &IsoAlgebraElement,
    phi: &TestFunction,
    t_grid: &[f64],
    fd_step: f64,
) -> Result<f64, TangentError> {
    if !(fd_step > 0.0) || !fd_step.is_finite() {
        return Err(TangentError::BadStep(fd_step));
    }
    if x_alg.dim() != mu.dim() {
        return Err(TangentError::DimensionMismatch { expected: mu.dim(), got: x_alg.dim() });
    }
    if phi.dim() != mu.dim() {
        return Err(TangentError::DimensionMismatch { expected: mu.dim(), got: phi.dim() });
    }
    let mut worst = 0.0_f64;
    for &t in t_grid {
        let plus = flow_pushforward(mu, x_alg, t + fd_step)?;
        let minus = flow_pushforward(mu, x_alg, t - fd_step)?;
        let fd = (phi.integrate(&plus) - phi.integrate(&minus)) / (2.0 * fd_step);
        let mu_t = flow_pushforward(mu, x_alg, t)?;
        let mut transport = 0.0;
        for k in 0..mu_t.len() {
            let z = mu_t.atom(k);
            let field = fundamental_field(x_alg, &z)?;
            transport += mu_t.weights()[k] * phi.gradient(&z).dot(&field);
        }
        worst = worst.max((fd - transport).abs());
    }
    Ok(worst)
}

/// ‖X̃‖_{L²(μ_t)} along the flow.
fn field_norm_at(mu: &DiscreteMeasure, x_alg: &IsoAlgebraElement, t: f64) -> Result<f64, TangentError> {
    let mu_t = flow_pushforward(mu, x_alg, t)?;
    let field = DiscreteVectorField::from_fundamental_field(mu_t, x_alg)?;
    Ok(field.norm())
}

/// Max over the grid of |‖X̃‖_{L²(μ_t)} − ‖X̃‖_{L²(μ)}|; the flow preserves
/// the norm exactly, so this measures only the exponential-map error.
pub fn flow_norm_invariance(
    mu: &DiscreteMeasure,
    x_alg: &IsoAlgebraElement,
    t_grid: &[f64],
) -> Result<f64, TangentError> {
    if x_alg.dim() != mu.dim() {
        return Err(TangentError::DimensionMismatch { expected: mu.dim(), got: x_alg.dim() });
    }
    let base = field_norm_at(mu, x_alg, 0.0)?;
    let mut worst = 0.0_f64;
    for &t in t_grid {
        worst = worst.max((field_norm_at(mu, x_alg, t)? - base).abs());
    }
    Ok(worst)
}

/// Trapezoidal ∫₀¹ ‖X̃‖_{L²(μ_t)} dt; equals ‖X̃‖_{L²(μ)} because the
/// integrand is constant along the flow.
pub fn l1_in_time_norm(
    mu: &DiscreteMeasure,
    x_alg: &IsoAlgebraElement,
    quadrature_steps: usize,
) -> Result<f64, TangentError> {
    if quadrature_steps == 0 {
        return Err(TangentError::NoQuadratureSteps);
    }
    let h = 1.0 / quadrature_steps as f64;
    let mut acc = 0.0;
    let mut prev = field_norm_at(mu, x_alg, 0.0)?;
    for step in 1..=quadrature_steps {
        let next = field_norm_at(mu, x_alg, step as f64 * h)?;
        acc += 0.5 * (prev + next) * h;
        prev = next;
    }
    Ok(acc)
}

/// Outcome of the representative-independence audit between μ and g#μ.
#[derive(Debug, Clone)]
pub struct IndependenceReport {
    pub rank_source: usize,
    pub rank_image: usize,
    pub shape_dim_source: usize,
    pub shape_dim_image: usize,
    /// Max over sampled fields of ‖dg(P⊥v) − P⊥(dg v)‖ / ‖v‖.
    pub max_commutation_discrepancy: f64,
}

impl IndependenceReport {
    /// Infinite when the integer invariants disagree, otherwise the
    /// commutation discrepancy.
    pub fn max_discrepancy(&self) -> f64 {
        if self.rank_source != self.rank_image || self.shape_dim_source != self.shape_dim_image {
            f64::INFINITY
        } else {
            self.max_commutation_discrepancy
        }
    }
}

/// Checks the concrete consequences of representative independence: equal
/// ranks and shape dimensions for μ and g#μ, and commutation of the orbit
/// projection with the isometry pushforward dg (v_k ↦ R v_k on transported
/// atoms), on `samples` random fields.
pub fn representative_independence_check(
    mu: &DiscreteMeasure,
    g: &Isometry,
    samples: usize,
    seed: u64,
) -> Result<IndependenceReport, TangentError> {
    if g.dim() != mu.dim() {
        return Err(TangentError::DimensionMismatch { expected: mu.dim(), got: g.dim() });
    }
    let moved = g.apply_measure(mu);
    let report_mu = orbit_subspace(mu, RANK_REL_TOL);
    let report_moved = orbit_subspace(&moved, RANK_REL_TOL);

    let mut worst = 0.0_f64;
    for s in 0..samples {
        let v = DiscreteVectorField::random(mu.clone(), seed.wrapping_add(s as u64), 1.0);
        let v_norm = v.norm().max(1e-300);
        let (_, v_shape) = project_onto_orbit(&v, &report_mu)?;

        let push = |field: &DiscreteVectorField| -> Result<DiscreteVectorField, TangentError> {
            DiscreteVectorField::new(moved.clone(), field.vectors() * g.rotation().transpose())
        };
        let dg_v_shape = push(&v_shape)?;
        let dg_v = push(&v)?;
        let (_, dg_v_then_shape) = project_onto_orbit(&dg_v, &report_moved)?;
        let diff = dg_v_shape.sub(&dg_v_then_shape)?;
        worst = worst.max(diff.norm() / v_norm);
    }
    Ok(IndependenceReport {
        rank_source: report_mu.rank,
        rank_image: report_moved.rank,
        shape_dim_source: report_mu.shape_tangent_dim,
        shape_dim_image: report_moved.shape_tangent_dim,
        max_commutation_discrepancy: worst,
    })
}

/// Scale-aware battery of closed-form test functions for a measure: one
/// centered quadratic and two Gaussians at the RMS radius.
pub fn standard_test_battery(mu: &DiscreteMeasure) -> Vec<TestFunction> {
    let n = mu.dim();
    let center = mu.barycenter();
    let radius = mu.second_moment(&center).map(|s| s.sqrt()).unwrap_or(1.0).max(1e-3);
    let quadratic = TestFunction::quadratic(
        1.0,
        DVector::from_element(n, 0.5),
        DMatrix::identity(n, n) * 0.5,
    )
    .expect("square quadratic form");
    let near = TestFunction::gaussian(center.clone(), radius).expect("positive width");
    let mut offset = center.clone();
    offset[0] += radius;
    let shifted = TestFunction::gaussian(offset, 1.5 * radius).expect("positive width");
    vec![quadratic, near, shifted]
}

#[cfg(test)]
mod tests;
