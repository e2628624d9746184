//! Discrete probability measures on ℝⁿ.
//!
//! A [`DiscreteMeasure`] is a multiset of weighted atoms: an `m × n` matrix of
//! coordinates plus `m` nonnegative weights summing to one. Duplicate atoms
//! are allowed and never merged implicitly; [`DiscreteMeasure::consolidate`]
//! merges them on request.

use nalgebra::{DMatrix, DVector};
use thiserror::Error;

/// Weight sums are accepted as normalized when within this of 1.
pub const WEIGHT_SUM_TOL: f64 = 1e-12;

#[derive(Debug, Error)]
pub enum MeasureError {
    #[error("weight {value} at atom {index} is negative")]
    NegativeWeight { index: usize, value: f64 },
    #[error("total mass is zero (or there are no atoms)")]
    ZeroTotalMass,
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("atoms must live in at least one dimension")]
    ZeroDimension,
    #[error("non-finite value in {context}")]
    NonFinite { context: &'static str },
    #[error("gaussian width must be positive, got {0}")]
    NonPositiveWidth(f64),
}

/// A finitely supported probability measure μ = Σ w_k δ_{x_k} on ℝⁿ.
///
/// Immutable after construction; all operations return new values.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteMeasure {
    points: DMatrix<f64>,
    weights: DVector<f64>,
}

impl DiscreteMeasure {
    /// Builds a measure from an `m × n` coordinate matrix and `m` raw weights.
    ///
    /// Weights are rescaled to sum to one unless they already do within
    /// [`WEIGHT_SUM_TOL`] (so re-reading a written measure is byte-stable).
    pub fn new(points: DMatrix<f64>, weights: DVector<f64>) -> Result<Self, MeasureError> {
        if points.nrows() == 0 || weights.len() == 0 {
            return Err(MeasureError::ZeroTotalMass);
        }
        if points.ncols() == 0 {
            return Err(MeasureError::ZeroDimension);
        }
        if points.nrows() != weights.len() {
            return Err(MeasureError::DimensionMismatch {
                expected: points.nrows(),
                got: weights.len(),
            });
        }
        if points.iter().any(|x| !x.is_finite()) {
            return Err(MeasureError::NonFinite { context: "points" });
        }
        for (k, &w) in weights.iter().enumerate() {
            if !w.is_finite() {
                return Err(MeasureError::NonFinite { context: "weights" });
            }
            if w < 0.0 {
                return Err(MeasureError::NegativeWeight { index: k, value: w });
            }
        }
        let total: f64 = weights.sum();
        if total <= 0.0 {
            return Err(MeasureError::ZeroTotalMass);
        }
        let weights = if (total - 1.0).abs() <= WEIGHT_SUM_TOL {
            weights
        } else {
            weights / total
        };
        Ok(Self { points, weights })
    }

    /// Builds a measure from row vectors, validating that all rows share one dimension.
    pub fn from_rows(rows: &[Vec<f64>], weights: &[f64]) -> Result<Self, MeasureError> {
        if rows.is_empty() {
            return Err(MeasureError::ZeroTotalMass);
        }
        let n = rows[0].len();
        for row in rows {
            if row.len() != n {
                return Err(MeasureError::DimensionMismatch {
                    expected: n,
                    got: row.len(),
                });
            }
        }
        let points = DMatrix::from_row_iterator(rows.len(), n, rows.iter().flatten().copied());
        Self::new(points, DVector::from_column_slice(weights))
    }

    /// Uniform weights on the given rows.
    pub fn uniform(rows: &[Vec<f64>]) -> Result<Self, MeasureError> {
        Self::from_rows(rows, &vec![1.0; rows.len()])
    }

    /// A Dirac measure δ_x.
    pub fn dirac(x: &[f64]) -> Result<Self, MeasureError> {
        Self::from_rows(&[x.to_vec()], &[1.0])
    }

    /// Number of atoms m.
    pub fn len(&self) -> usize {
        self.points.nrows()
    }

    pub fn is_empty(&self) -> bool {
        false // m ≥ 1 by construction
    }

    /// Ambient dimension n.
    pub fn dim(&self) -> usize {
        self.points.ncols()
    }

    pub fn points(&self) -> &DMatrix<f64> {
        &self.points
    }

    pub fn weights(&self) -> &DVector<f64> {
        &self.weights
    }

    /// Coordinates of atom `k` as an owned column vector.
    pub fn atom(&self, k: usize) -> DVector<f64> {
        self.points.row(k).transpose()
    }

    /// True when every weight equals 1/m within relative 1e-12.
    pub fn is_uniform(&self) -> bool {
        let w0 = 1.0 / self.len() as f64;
        self.weights.iter().all(|&w| (w - w0).abs() <= 1e-12 * w0.max(1.0))
    }

    /// Pushforward T#μ: transforms every atom, keeps weights.
    pub fn pushforward<F>(&self, map: F) -> Self
    where
        F: Fn(&[f64]) -> Vec<f64>,
    {
        let row: Vec<f64> = (0..self.dim()).map(|l| self.points[(0, l)]).collect();
        let first = map(&row);
        let n_out = first.len();
        let mut points = DMatrix::zeros(self.len(), n_out);
        for (l, &v) in first.iter().enumerate() {
            points[(0, l)] = v;
        }
        for k in 1..self.len() {
            let row: Vec<f64> = (0..self.dim()).map(|l| self.points[(k, l)]).collect();
            let image = map(&row);
            assert_eq!(image.len(), n_out, "pushforward map changed dimension between atoms");
            for (l, &v) in image.iter().enumerate() {
                points[(k, l)] = v;
            }
        }
        Self { points, weights: self.weights.clone() }
    }

    /// Barycenter Σ w_k x_k.
    pub fn barycenter(&self) -> DVector<f64> {
        let mut b = DVector::zeros(self.dim());
        for k in 0..self.len() {
            b += self.weights[k] * self.points.row(k).transpose();
        }
        b
    }

    /// Second moment Σ w_k ‖x_k − x0‖².
    pub fn second_moment(&self, x0: &DVector<f64>) -> Result<f64, MeasureError> {
        if x0.len() != self.dim() {
            return Err(MeasureError::DimensionMismatch { expected: self.dim(), got: x0.len() });
        }
        let mut s = 0.0;
        for k in 0..self.len() {
            let mut d2 = 0.0;
            for l in 0..self.dim() {
                let d = self.points[(k, l)] - x0[l];
                d2 += d * d;
            }
            s += self.weights[k] * d2;
        }
        Ok(s)
    }

    /// Translates all atoms so the barycenter sits at the origin.
    pub fn centered(&self) -> Self {
        let b = self.barycenter();
        let mut points = self.points.clone();
        for k in 0..self.len() {
            for l in 0..self.dim() {
                points[(k, l)] -= b[l];
            }
        }
        Self { points, weights: self.weights.clone() }
    }

    /// Merges groups of atoms whose coordinates lie within `eps` of the group
    /// representative; group position is the weighted mean, weights add.
    ///
    /// `eps = 0` merges exactly coincident atoms only. Deterministic: groups
    /// are seeded in atom index order.
    pub fn consolidate(&self, eps: f64) -> Self {
        let m = self.len();
        let mut assigned = vec![usize::MAX; m];
        let mut reps: Vec<usize> = Vec::new();
        for k in 0..m {
            let mut found = false;
            for (g, &r) in reps.iter().enumerate() {
                let mut d2 = 0.0;
                for l in 0..self.dim() {
                    let d = self.points[(k, l)] - self.points[(r, l)];
                    d2 += d * d;
                }
                if d2.sqrt() <= eps {
                    assigned[k] = g;
                    found = true;
                    break;
                }
            }
            if !found {
                assigned[k] = reps.len();
                reps.push(k);
            }
        }
        let mut points = DMatrix::zeros(reps.len(), self.dim());
        let mut weights = DVector::zeros(reps.len());
        for k in 0..m {
            let g = assigned[k];
            weights[g] += self.weights[k];
            for l in 0..self.dim() {
                points[(g, l)] += self.weights[k] * self.points[(k, l)];
            }
        }
        for (g, &r) in reps.iter().enumerate() {
            if weights[g] > 0.0 {
                for l in 0..self.dim() {
                    points[(g, l)] /= weights[g];
                }
            } else {
                // A group of zero-weight atoms keeps its representative position.
                points.set_row(g, &self.points.row(r));
            }
        }
        Self { points, weights }
    }

    /// Drops atoms with weight ≤ `threshold` and renormalizes.
    pub fn prune(&self, threshold: f64) -> Result<Self, MeasureError> {
        let keep: Vec<usize> = (0..self.len()).filter(|&k| self.weights[k] > threshold).collect();
        if keep.is_empty() {
            return Err(MeasureError::ZeroTotalMass);
        }
        let mut points = DMatrix::zeros(keep.len(), self.dim());
        let mut weights = DVector::zeros(keep.len());
        for (row, &k) in keep.iter().enumerate() {
            points.set_row(row, &self.points.row(k));
            weights[row] = self.weights[k];
        }
        Self::new(points, weights)
    }

    /// True when both measures carry the same atoms with the same weights, up
    /// to `tol` in positions and weights and up to reordering. Coincident
    /// atoms are consolidated first.
    pub fn approx_eq_atoms(&self, other: &Self, tol: f64) -> bool {
        if self.dim() != other.dim() {
            return false;
        }
        let a = self.consolidate(tol);
        let b = other.consolidate(tol);
        if a.len() != b.len() {
            return false;
        }
        let mut used = vec![false; b.len()];
        'outer: for k in 0..a.len() {
            for j in 0..b.len() {
                if used[j] {
                    continue;
                }
                let mut d2 = 0.0;
                for l in 0..a.dim() {
                    let d = a.points[(k, l)] - b.points[(j, l)];
                    d2 += d * d;
                }
                if d2.sqrt() <= tol && (a.weights[k] - b.weights[j]).abs() <= tol {
                    used[j] = true;
                    continue 'outer;
                }
            }
            return false;
        }
        true
    }

    /// Random measure with Gaussian atoms of the given scale and weights
    /// drawn uniformly from [0.5, 1.5] before normalization. Deterministic
    /// per seed.
    pub fn random(m: usize, n: usize, seed: u64, scale: f64) -> Self {
        use rand::{Rng, SeedableRng};
        use rand_distr::{Distribution, StandardNormal};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let points = DMatrix::from_fn(m, n, |_, _| {
            let v: f64 = StandardNormal.sample(&mut rng);
            scale * v
        });
        let weights = DVector::from_fn(m, |_, _| rng.random_range(0.5..1.5));
        Self::new(points, weights).expect("random measure parameters are valid")
    }

    /// Random measure with Gaussian atoms and exactly uniform weights.
    pub fn random_uniform(m: usize, n: usize, seed: u64, scale: f64) -> Self {
        use rand::SeedableRng;
        use rand_distr::{Distribution, StandardNormal};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let points = DMatrix::from_fn(m, n, |_, _| {
            let v: f64 = StandardNormal.sample(&mut rng);
            scale * v
        });
        Self::new(points, DVector::from_element(m, 1.0 / m as f64))
            .expect("random measure parameters are valid")
    }

    /// Largest pairwise distance between support atoms.
    pub fn support_diameter(&self) -> f64 {
        let mut best = 0.0_f64;
        for i in 0..self.len() {
            for j in (i + 1)..self.len() {
                let mut d2 = 0.0;
                for l in 0..self.dim() {
                    let d = self.points[(i, l)] - self.points[(j, l)];
                    d2 += d * d;
                }
                best = best.max(d2.sqrt());
            }
        }
        best
    }
}

/// Closed-form test functions standing in for C_c^∞ in residual checks.
///
/// Two families: polynomials of degree ≤ 2 and isotropic Gaussians. Both have
/// exact gradients, which is what the continuity-equation diagnostics need.
#[derive(Debug, Clone)]
pub enum TestFunction {
    /// φ(x) = c + bᵀx + xᵀQx.
    Quadratic { constant: f64, linear: DVector<f64>, quadratic: DMatrix<f64> },
    /// φ(x) = exp(−‖x−c‖² / (2σ²)).
    Gaussian { center: DVector<f64>, width: f64 },
}

impl TestFunction {
    pub fn quadratic(
        constant: f64,
        linear: DVector<f64>,
        quadratic: DMatrix<f64>,
    ) -> Result<Self, MeasureError> {
        if quadratic.nrows() != linear.len() || quadratic.ncols() != linear.len() {
            return Err(MeasureError::DimensionMismatch {
                expected: linear.len(),
                got: quadratic.nrows(),
            });
        }
        Ok(Self::Quadratic { constant, linear, quadratic })
    }

    pub fn gaussian(center: DVector<f64>, width: f64) -> Result<Self, MeasureError> {
        if !(width > 0.0) {
            return Err(MeasureError::NonPositiveWidth(width));
        }
        Ok(Self::Gaussian { center, width })
    }

    pub fn dim(&self) -> usize {
        match self {
            Self::Quadratic { linear, .. } => linear.len(),
            Self::Gaussian { center, .. } => center.len(),
        }
    }

    pub fn eval(&self, x: &DVector<f64>) -> f64 {
        match self {
            Self::Quadratic { constant, linear, quadratic } => {
                constant + linear.dot(x) + (x.transpose() * quadratic * x)[(0, 0)]
            }
            Self::Gaussian { center, width } => {
                let d = x - center;
                (-d.norm_squared() / (2.0 * width * width)).exp()
            }
        }
    }

    /// Exact gradient ∇φ(x).
    pub fn gradient(&self, x: &DVector<f64>) -> DVector<f64> {
        match self {
            Self::Quadratic { linear, quadratic, .. } => {
                linear + (quadratic + quadratic.transpose()) * x
            }
            Self::Gaussian { center, width } => {
                let d = x - center;
                let phi = (-d.norm_squared() / (2.0 * width * width)).exp();
                d * (-phi / (width * width))
            }
        }
    }

    /// Mean of φ against a measure: ∫ φ dμ.
    pub fn integrate(&self, mu: &DiscreteMeasure) -> f64 {
        (0..mu.len()).map(|k| mu.weights()[k] * self.eval(&mu.atom(k))).sum()
    }
}
