//! Optimal transport and shape analysis for finitely supported measures on ℝⁿ.
//!
//! The library computes Wasserstein distances `W_p` between weighted point
//! clouds, the shape distance `D_p(μ,ν) = inf_g W_p(g#μ, ν)` over the full
//! Euclidean isometry group `E(n) = O(n) ⋉ ℝⁿ`, geodesic diagnostics in both
//! metrics, and the dimension of the shape-space tangent model at a discrete
//! measure.
//!
//! Every optimizer ships with a brute-force oracle: the exact transport
//! solver is checked against exhaustive permutation matching, and the
//! alternating shape-distance solver against a certified rotation-grid scan
//! in 2D.
//!
//! Modules mirror the problem structure:
//!
//! * [`measure`] — discrete probability measures and closed-form test functions
//! * [`transport`] — exact / entropic optimal transport, couplings, interpolation
//! * [`isometry`] — `E(n)`, its Lie algebra `iso(n)`, exponential flows, Killing fields
//! * [`shapedist`] — the shape-distance optimizer and its 2D oracle
//! * [`geodesic`] — curve diagnostics, quotient coefficients, counterexample constructors
//! * [`tangent`] — `L²(μ)` vector fields, orbit subspaces, continuity-equation residuals
//! * [`io`] — JSON / CSV readers and writers for all file formats
//! * [`cli`] — the `shapeot` command-line surface

pub mod cli;
pub mod geodesic;
pub mod io;
pub mod isometry;
pub mod measure;
pub mod shapedist;
pub mod tangent;
pub mod transport;

pub use geodesic::{CurveSample, QuotientCoefficientReport, Verdict};
pub use isometry::{Isometry, IsoAlgebraElement, KillingBasis};
pub use measure::{DiscreteMeasure, TestFunction};
pub use shapedist::{ShapeDistanceResult, ShapeSolverConfig};
pub use tangent::{DiscreteVectorField, OrbitSubspaceReport};
pub use transport::{Coupling, TransportResult};
