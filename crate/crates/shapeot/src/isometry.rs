//! The Euclidean isometry group E(n) = O(n) ⋉ ℝⁿ and its Lie algebra
//! iso(n) = so(n) ⋉ ℝⁿ.
//!
//! Group elements act as x ↦ Rx + t with R orthogonal (both components of
//! O(n) allowed). Algebra elements X = (A, a) with A skew generate one-
//! parameter subgroups exp(tX): x ↦ e^{tA}x + V(t)a, V(t) = ∫₀ᵗ e^{sA} ds,
//! and fundamental (Killing) fields
//!
//! ```text
//! X̃(x) = d/dt exp(−tX)·x |_{t=0} = −(Ax + a).
//! ```
//!
//! The minus sign is fixed once here: flows are pushforwards by exp(−tX), so
//! the pair (exp(−tX)#μ, X̃) solves the weak continuity equation with no sign
//! flip anywhere downstream.

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal, Uniform};
use thiserror::Error;

use crate::measure::DiscreteMeasure;

/// Orthogonality drift above which construction repairs via the polar factor.
const ORTHO_REPAIR_TOL: f64 = 1e-12;
/// Orthogonality drift above which construction rejects (caller bug).
const ORTHO_REJECT_TOL: f64 = 1e-6;
/// Skew-symmetry tolerance for algebra elements.
const SKEW_TOL: f64 = 1e-12;

#[derive(Debug, Error)]
pub enum IsometryError {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("matrix is not orthogonal: ||R^T R - I||_F = {deviation:.3e}")]
    NotOrthogonal { deviation: f64 },
    #[error("matrix is not skew-symmetric: max |A + A^T| entry = {deviation:.3e}")]
    SkewnessViolation { deviation: f64 },
}

/// Which component of O(n) a random rotation is drawn from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Component {
    /// det R = +1
    Proper,
    /// det R = −1
    Improper,
    /// fair coin between the two
    Either,
}

/// A Euclidean isometry x ↦ Rx + t.
#[derive(Debug, Clone, PartialEq)]
pub struct Isometry {
    rotation: DMatrix<f64>,
    translation: DVector<f64>,
}

impl Isometry {
    /// Builds an isometry, re-orthonormalizing R through its polar factor when
    /// the drift exceeds 1e-12 and rejecting when it exceeds 1e-6.
    pub fn new(rotation: DMatrix<f64>, translation: DVector<f64>) -> Result<Self, IsometryError> {
        let n = rotation.nrows();
        if rotation.ncols() != n {
            return Err(IsometryError::DimensionMismatch { expected: n, got: rotation.ncols() });
        }
        if translation.len() != n {
            return Err(IsometryError::DimensionMismatch { expected: n, got: translation.len() });
        }
        let drift = (rotation.transpose() * &rotation - DMatrix::identity(n, n)).norm();
        if drift > ORTHO_REJECT_TOL {
            return Err(IsometryError::NotOrthogonal { deviation: drift });
        }
        let rotation = if drift > ORTHO_REPAIR_TOL {
            let svd = rotation.svd(true, true);
            svd.u.unwrap() * svd.v_t.unwrap()
        } else {
            rotation
        };
        Ok(Self { rotation, translation })
    }

    pub fn identity(n: usize) -> Self {
        Self { rotation: DMatrix::identity(n, n), translation: DVector::zeros(n) }
    }

    pub fn translation_by(t: DVector<f64>) -> Self {
        let n = t.len();
        Self { rotation: DMatrix::identity(n, n), translation: t }
    }

    /// Planar rotation by `theta`.
    pub fn rotation_2d(theta: f64) -> Self {
        let (s, c) = theta.sin_cos();
        Self {
            rotation: DMatrix::from_row_slice(2, 2, &[c, -s, s, c]),
            translation: DVector::zeros(2),
        }
    }

    /// Planar rotation by `theta` composed with reflection across the x-axis
    /// (det = −1 representative of the improper component).
    pub fn reflection_2d(theta: f64) -> Self {
        let (s, c) = theta.sin_cos();
        Self {
            rotation: DMatrix::from_row_slice(2, 2, &[c, s, s, -c]),
            translation: DVector::zeros(2),
        }
    }

    pub fn dim(&self) -> usize {
        self.translation.len()
    }

    pub fn rotation(&self) -> &DMatrix<f64> {
        &self.rotation
    }

    pub fn translation(&self) -> &DVector<f64> {
        &self.translation
    }

    pub fn det(&self) -> f64 {
        self.rotation.determinant()
    }

    pub fn apply(&self, x: &DVector<f64>) -> DVector<f64> {
        &self.rotation * x + &self.translation
    }

    /// Pushforward g#μ; atoms keep their order and weights.
    pub fn apply_measure(&self, mu: &DiscreteMeasure) -> DiscreteMeasure {
        let mut points = mu.points() * self.rotation.transpose();
        for k in 0..points.nrows() {
            for l in 0..points.ncols() {
                points[(k, l)] += self.translation[l];
            }
        }
        DiscreteMeasure::new(points, mu.weights().clone())
            .expect("isometry image of a valid measure is valid")
    }

    /// Group law: (g ∘ h)(x) = g(h(x)).
    pub fn compose(&self, h: &Isometry) -> Result<Isometry, IsometryError> {
        if self.dim() != h.dim() {
            return Err(IsometryError::DimensionMismatch { expected: self.dim(), got: h.dim() });
        }
        Ok(Isometry {
            rotation: &self.rotation * &h.rotation,
            translation: &self.rotation * &h.translation + &self.translation,
        })
    }

    /// g⁻¹: rotation Rᵀ, translation −Rᵀt.
    pub fn inverse(&self) -> Isometry {
        let rt = self.rotation.transpose();
        let translation = -(&rt * &self.translation);
        Isometry { rotation: rt, translation }
    }
}

/// An element X = (A, a) of iso(n) with A skew-symmetric.
#[derive(Debug, Clone, PartialEq)]
pub struct IsoAlgebraElement {
    skew: DMatrix<f64>,
    drift: DVector<f64>,
}

impl IsoAlgebraElement {
    pub fn new(skew: DMatrix<f64>, drift: DVector<f64>) -> Result<Self, IsometryError> {
        let n = skew.nrows();
        if skew.ncols() != n {
            return Err(IsometryError::DimensionMismatch { expected: n, got: skew.ncols() });
        }
        if drift.len() != n {
            return Err(IsometryError::DimensionMismatch { expected: n, got: drift.len() });
        }
        let deviation = (&skew + skew.transpose()).amax();
        if deviation > SKEW_TOL {
            return Err(IsometryError::SkewnessViolation { deviation });
        }
        Ok(Self { skew, drift })
    }

    pub fn zero(n: usize) -> Self {
        Self { skew: DMatrix::zeros(n, n), drift: DVector::zeros(n) }
    }

    pub fn dim(&self) -> usize {
        self.drift.len()
    }

    pub fn skew(&self) -> &DMatrix<f64> {
        &self.skew
    }

    pub fn drift(&self) -> &DVector<f64> {
        &self.drift
    }

    pub fn scaled(&self, c: f64) -> Self {
        Self { skew: &self.skew * c, drift: &self.drift * c }
    }

    pub fn add(&self, other: &Self) -> Self {
        Self { skew: &self.skew + &other.skew, drift: &self.drift + &other.drift }
    }

    /// Semidirect-product commutator [X, Y] = (AB − BA, Ab − Ba).
    pub fn bracket(&self, other: &Self) -> Result<Self, IsometryError> {
        if self.dim() != other.dim() {
            return Err(IsometryError::DimensionMismatch {
                expected: self.dim(),
                got: other.dim(),
            });
        }
        Ok(Self {
            skew: &self.skew * &other.skew - &other.skew * &self.skew,
            drift: &self.skew * &other.drift - &other.skew * &self.drift,
        })
    }
}

/// Value of the fundamental field X̃ at x (the minus-sign convention above).
pub fn fundamental_field(
    x_alg: &IsoAlgebraElement,
    x: &DVector<f64>,
) -> Result<DVector<f64>, IsometryError> {
    if x.len() != x_alg.dim() {
        return Err(IsometryError::DimensionMismatch { expected: x_alg.dim(), got: x.len() });
    }
    Ok(-(x_alg.skew() * x + x_alg.drift()))
}

/// exp(tX) as an isometry: rotation e^{tA}, translation V(t)a.
///
/// Closed form up to n = 3 (planar rotation / Rodrigues), order-13 truncated
/// series with scaling-and-squaring (halve t until ‖tA‖_F ≤ 0.5) above.
pub fn group_exponential(x_alg: &IsoAlgebraElement, t: f64) -> Isometry {
    let n = x_alg.dim();
    let b = x_alg.skew() * t;
    let (rot, v) = if n <= 3 { exp_closed_form(&b) } else { exp_series_squared(&b) };
    // V(t) = t · ∫₀¹ e^{uB} du with B = tA
    Isometry { rotation: rot, translation: v * x_alg.drift() * t }
}

/// Pushforward of μ by the flow at time t: μ_t = exp(−tX)#μ.
pub fn flow_pushforward(
    mu: &DiscreteMeasure,
    x_alg: &IsoAlgebraElement,
    t: f64,
) -> Result<DiscreteMeasure, IsometryError> {
    if mu.dim() != x_alg.dim() {
        return Err(IsometryError::DimensionMismatch { expected: x_alg.dim(), got: mu.dim() });
    }
    Ok(group_exponential(x_alg, -t).apply_measure(mu))
}

/// sin(θ)/θ, (1−cos θ)/θ², (θ−sin θ)/θ³ with series fallbacks near zero.
fn sinc_like(theta: f64) -> (f64, f64, f64) {
    let t2 = theta * theta;
    if theta.abs() < 1e-4 {
        (
            1.0 - t2 / 6.0 + t2 * t2 / 120.0,
            0.5 - t2 / 24.0 + t2 * t2 / 720.0,
            1.0 / 6.0 - t2 / 120.0 + t2 * t2 / 5040.0,
        )
    } else {
        (
            theta.sin() / theta,
            (1.0 - theta.cos()) / t2,
            (theta - theta.sin()) / (t2 * theta),
        )
    }
}

/// e^B and ∫₀¹ e^{uB} du for skew B with n ≤ 3, via B³ = −θ²B.
fn exp_closed_form(b: &DMatrix<f64>) -> (DMatrix<f64>, DMatrix<f64>) {
    let n = b.nrows();
    let eye = DMatrix::identity(n, n);
    let theta = match n {
        1 => 0.0,
        2 => b[(1, 0)].abs(),
        3 => (b[(2, 1)].powi(2) + b[(0, 2)].powi(2) + b[(1, 0)].powi(2)).sqrt(),
        _ => unreachable!("closed form only for n <= 3"),
    };
    if theta == 0.0 {
        return (eye.clone(), eye);
    }
    let (s1, s2, s3) = sinc_like(theta);
    let b2 = b * b;
    let rot = &eye + b * s1 + &b2 * s2;
    let v = &eye + b * s2 + &b2 * s3;
    (rot, v)
}

/// e^B and ∫₀¹ e^{uB} du by truncated series plus squaring.
fn exp_series_squared(b: &DMatrix<f64>) -> (DMatrix<f64>, DMatrix<f64>) {
    let n = b.nrows();
    let eye = DMatrix::identity(n, n);
    let mut squarings = 0u32;
    let mut norm = b.norm();
    while norm > 0.5 {
        squarings += 1;
        norm *= 0.5;
    }
    let scaled = b / 2f64.powi(squarings as i32);
    let mut exp = eye.clone();
    let mut int = eye.clone();
    let mut term = eye.clone();
    for k in 1..=13u64 {
        term = &term * &scaled / k as f64;
        exp += &term;
        int += &term / (k + 1) as f64;
    }
    // E(2τ) = E(τ)², V(2τ) = (I + E(τ)) V(τ) / 2 in the ∫₀¹-normalized form:
    // with W(τ) = ∫₀¹ e^{uτA} du, W(2τ) = (I + E(τ)) W(τ) / 2.
    for _ in 0..squarings {
        int = (&eye + &exp) * &int * 0.5;
        exp = &exp * &exp;
    }
    (exp, int)
}

/// The ordered Killing basis of iso(n): translations P_1..P_n first, then
/// rotations M_ij, i < j, in lexicographic order. Length n(n+1)/2. The
/// ordering is part of the public contract; tangent-space matrices index
/// columns by it.
#[derive(Debug, Clone)]
pub struct KillingBasis {
    elements: Vec<IsoAlgebraElement>,
    labels: Vec<String>,
    n: usize,
}

impl KillingBasis {
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "dimension must be at least 1");
        let mut elements = Vec::with_capacity(n * (n + 1) / 2);
        let mut labels = Vec::with_capacity(n * (n + 1) / 2);
        for i in 0..n {
            let mut a = DVector::zeros(n);
            a[i] = 1.0;
            elements.push(IsoAlgebraElement { skew: DMatrix::zeros(n, n), drift: a });
            labels.push(format!("P{}", i + 1));
        }
        for i in 0..n {
            for j in (i + 1)..n {
                // M_ij = x_i ∂_j − x_j ∂_i as the matrix e_j e_iᵀ − e_i e_jᵀ
                let mut skew = DMatrix::zeros(n, n);
                skew[(j, i)] = 1.0;
                skew[(i, j)] = -1.0;
                elements.push(IsoAlgebraElement { skew, drift: DVector::zeros(n) });
                labels.push(format!("M{}{}", i + 1, j + 1));
            }
        }
        Self { elements, labels, n }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn elements(&self) -> &[IsoAlgebraElement] {
        &self.elements
    }

    pub fn label(&self, idx: usize) -> &str {
        &self.labels[idx]
    }

    /// Linear combination Σ c_ℓ B_ℓ of basis elements.
    pub fn combine(&self, coeffs: &DVector<f64>) -> IsoAlgebraElement {
        assert_eq!(coeffs.len(), self.len());
        let mut out = IsoAlgebraElement::zero(self.n);
        for (l, el) in self.elements.iter().enumerate() {
            out = out.add(&el.scaled(coeffs[l]));
        }
        out
    }
}

/// Haar-distributed rotation on the requested O(n) component plus a uniform
/// translation in the ball of radius `translation_radius`. Deterministic per
/// seed.
pub fn random_isometry(
    n: usize,
    seed: u64,
    component: Component,
    translation_radius: f64,
) -> Isometry {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let normal = StandardNormal;
    let mut gauss: DMatrix<f64> = DMatrix::zeros(n, n);
    for l in 0..n {
        for k in 0..n {
            gauss[(k, l)] = normal.sample(&mut rng);
        }
    }
    let qr = gauss.qr();
    let r = qr.r();
    let mut q = qr.q();
    for j in 0..n {
        if r[(j, j)] < 0.0 {
            for i in 0..n {
                q[(i, j)] = -q[(i, j)];
            }
        }
    }
    let det = q.determinant();
    let flip = match component {
        Component::Proper => det < 0.0,
        Component::Improper => det > 0.0,
        Component::Either => false,
    };
    if flip {
        for i in 0..n {
            q[(i, 0)] = -q[(i, 0)];
        }
    }
    let mut translation: DVector<f64> = DVector::zeros(n);
    if translation_radius > 0.0 {
        let mut dir: DVector<f64> = DVector::zeros(n);
        for i in 0..n {
            dir[i] = normal.sample(&mut rng);
        }
        let norm: f64 = dir.norm();
        if norm > 0.0 {
            let u: f64 = Uniform::new(0.0, 1.0).unwrap().sample(&mut rng);
            translation = dir * (translation_radius * u.powf(1.0 / n as f64) / norm);
        }
    }
    Isometry { rotation: q, translation }
}

/// Random algebra element with Gaussian entries, scaled per part. Deterministic per seed.
pub fn random_algebra_element(
    n: usize,
    seed: u64,
    rotation_scale: f64,
    drift_scale: f64,
) -> IsoAlgebraElement {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let normal = StandardNormal;
    let mut skew = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in (i + 1)..n {
            let v: f64 = normal.sample(&mut rng);
            skew[(i, j)] = rotation_scale * v;
            skew[(j, i)] = -rotation_scale * v;
        }
    }
    let mut drift = DVector::zeros(n);
    for i in 0..n {
        let v: f64 = normal.sample(&mut rng);
        drift[i] = drift_scale * v;
    }
    IsoAlgebraElement { skew, drift }
}
