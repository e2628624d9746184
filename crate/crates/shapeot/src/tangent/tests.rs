use approx::{assert_abs_diff_eq, assert_relative_eq};

use super::*;
use crate::isometry::{random_algebra_element, random_isometry, Component};

#[test]
fn l2_inner_examples() {
    let mu = DiscreteMeasure::dirac(&[0.0, 0.0]).unwrap();
    let zero = DiscreteVectorField::zero(mu.clone());
    assert_eq!(l2_inner(&zero, &zero).unwrap(), 0.0);

    let e1 = DiscreteVectorField::new(mu.clone(), DMatrix::from_row_slice(1, 2, &[1.0, 0.0]))
        .unwrap();
    assert_eq!(l2_inner(&e1, &e1).unwrap(), 1.0);

    let pair = DiscreteMeasure::uniform(&[vec![0.0], vec![1.0]]).unwrap();
    let swing =
        DiscreteVectorField::new(pair, DMatrix::from_row_slice(2, 1, &[1.0, -1.0])).unwrap();
    assert_relative_eq!(l2_inner(&swing, &swing).unwrap(), 1.0);

    let other = DiscreteMeasure::dirac(&[1.0, 0.0]).unwrap();
    let attached = DiscreteVectorField::zero(other);
    assert!(matches!(l2_inner(&zero, &attached), Err(TangentError::MeasureMismatch)));
}

#[test]
fn dirac_in_r3_has_trivial_shape_tangent() {
    let mu = DiscreteMeasure::dirac(&[0.4, -1.0, 2.0]).unwrap();
    let report = orbit_subspace(&mu, RANK_REL_TOL);
    assert_eq!(report.rank(), 3);
    assert_eq!(report.tangent_dim(), 3);
    assert_eq!(report.shape_tangent_dim(), 0);
    assert_eq!(report.kernel_basis().len(), 3);
}

#[test]
fn dirac_kernel_is_the_stabilizer_algebra() {
    // rotations about the atom kill the field there: kernel dim = n(n−1)/2
    for n in 2..=4usize {
        let point: Vec<f64> = (0..n).map(|l| 0.3 * (l as f64 + 1.0)).collect();
        let mu = DiscreteMeasure::dirac(&point).unwrap();
        let report = orbit_subspace(&mu, RANK_REL_TOL);
        assert_eq!(report.rank(), n, "rank at a Dirac is n");
        assert_eq!(report.kernel_basis().len(), n * (n - 1) / 2);
        // kernel elements vanish on the support
        for element in report.kernel_basis() {
            let value = fundamental_field(element, &mu.atom(0)).unwrap();
            assert!(value.norm() <= 1e-9, "kernel field value {}", value.norm());
        }
    }
}

#[test]
fn two_atom_configuration_matches_the_hand_matrix() {
    let mu = DiscreteMeasure::uniform(&[vec![0.0, 0.0], vec![1.0, 0.0]]).unwrap();
    let report = orbit_subspace(&mu, RANK_REL_TOL);
    let sw = 0.5_f64.sqrt();
    // columns: P1, P2, M12 with the field X̃(x) = −(Ax + a)
    let expected = DMatrix::from_row_slice(
        4,
        3,
        &[
            -sw, 0.0, 0.0, //
            0.0, -sw, 0.0, //
            -sw, 0.0, 0.0, //
            0.0, -sw, -sw,
        ],
    );
    assert_abs_diff_eq!(report.evaluation_matrix(), &expected, epsilon = 1e-15);
    assert_eq!(report.rank(), 3);
    assert_eq!(report.shape_tangent_dim(), 1);
}

#[test]
fn generic_configurations_reach_full_killing_rank() {
    for n in 2..=4usize {
        let full = n * (n + 1) / 2;
        for seed in 0..5u64 {
            let m = n + 2;
            let mu = DiscreteMeasure::random(m, n, 4000 + 100 * n as u64 + seed, 1.0);
            let report = orbit_subspace(&mu, RANK_REL_TOL);
            assert_eq!(report.rank(), full, "n = {n}, seed = {seed}");
            assert_eq!(report.shape_tangent_dim(), m * n - full);
            assert!(report.kernel_basis().is_empty());
        }
    }
}

#[test]
fn rank_is_invariant_under_reindexing_and_translation() {
    let mu = DiscreteMeasure::random(5, 3, 42, 1.0);
    let base = orbit_subspace(&mu, RANK_REL_TOL);

    // reverse the atom order
    let m = mu.len();
    let mut rows = Vec::new();
    let mut weights = Vec::new();
    for k in (0..m).rev() {
        rows.push((0..mu.dim()).map(|l| mu.points()[(k, l)]).collect::<Vec<_>>());
        weights.push(mu.weights()[k]);
    }
    let reversed = DiscreteMeasure::from_rows(&rows, &weights).unwrap();
    let re = orbit_subspace(&reversed, RANK_REL_TOL);
    assert_eq!(re.rank(), base.rank());
    assert_eq!(re.shape_tangent_dim(), base.shape_tangent_dim());

    // global translation
    let shifted = mu.pushforward(|x| x.iter().map(|v| v + 10.0).collect());
    let sh = orbit_subspace(&shifted, RANK_REL_TOL);
    assert_eq!(sh.rank(), base.rank());
    assert_eq!(sh.shape_tangent_dim(), base.shape_tangent_dim());
}

#[test]
fn projection_splits_orthogonally_and_idempotently() {
    for seed in 0..10u64 {
        let n = 2 + (seed % 3) as usize;
        let mu = DiscreteMeasure::random(4, n, 6000 + seed, 1.0);
        let report = orbit_subspace(&mu, RANK_REL_TOL);
        let v = DiscreteVectorField::random(mu.clone(), 6100 + seed, 1.0);
        let (v_orbit, v_shape) = project_onto_orbit(&v, &report).unwrap();

        let norm2 = l2_inner(&v, &v).unwrap();
        let cross = l2_inner(&v_orbit, &v_shape).unwrap();
        assert!(cross.abs() <= 1e-10 * norm2.max(1.0), "cross term {cross}");

        // idempotence on both parts
        let (again, residue) = project_onto_orbit(&v_orbit, &report).unwrap();
        assert!(residue.norm() <= 1e-10 * v.norm().max(1.0));
        assert!((again.sub(&v_orbit).unwrap()).norm() <= 1e-10 * v.norm().max(1.0));
        let (orbitless, _) = project_onto_orbit(&v_shape, &report).unwrap();
        assert!(orbitless.norm() <= 1e-10 * v.norm().max(1.0));

        // self-adjointness of the projection in the L²(μ) inner product
        let u = DiscreteVectorField::random(mu.clone(), 6200 + seed, 1.0);
        let (u_orbit, _) = project_onto_orbit(&u, &report).unwrap();
        let lhs = l2_inner(&u_orbit, &v).unwrap();
        let rhs = l2_inner(&u, &v_orbit).unwrap();
        assert_abs_diff_eq!(lhs, rhs, epsilon = 1e-10 * (1.0 + lhs.abs()));
    }
}

#[test]
fn fundamental_fields_project_onto_themselves() {
    for seed in 0..8u64 {
        let n = 2 + (seed % 2) as usize;
        let mu = DiscreteMeasure::random(5, n, 7000 + seed, 1.0);
        let report = orbit_subspace(&mu, RANK_REL_TOL);
        let x_alg = random_algebra_element(n, 7100 + seed, 1.0, 1.0);
        let v = DiscreteVectorField::from_fundamental_field(mu.clone(), &x_alg).unwrap();
        let (_, v_shape) = project_onto_orbit(&v, &report).unwrap();
        assert!(v_shape.norm() <= 1e-9 * v.norm().max(1e-12), "shape part {}", v_shape.norm());
    }

    let mu = DiscreteMeasure::random(4, 2, 7500, 1.0);
    let report = orbit_subspace(&mu, RANK_REL_TOL);
    let zero = DiscreteVectorField::zero(mu);
    let (o, s) = project_onto_orbit(&zero, &report).unwrap();
    assert_eq!(o.norm(), 0.0);
    assert_eq!(s.norm(), 0.0);
}

#[test]
fn continuity_residual_examples() {
    let mu = DiscreteMeasure::random(4, 2, 8000, 1.0);
    let battery = standard_test_battery(&mu);

    // zero generator: nothing moves
    let zero = IsoAlgebraElement::zero(2);
    for phi in &battery {
        let r = continuity_residual(&mu, &zero, phi, &[0.25, 0.5], 1e-4).unwrap();
        assert!(r <= 1e-14, "zero-flow residual {r}");
    }

    // translation flow with a quadratic: central differences are exact
    let p1 = IsoAlgebraElement::new(DMatrix::zeros(2, 2), DVector::from_column_slice(&[1.0, 0.0]))
        .unwrap();
    let quad = &battery[0];
    let r = continuity_residual(&mu, &p1, quad, &[0.2, 0.5, 0.8], 1e-4).unwrap();
    assert!(r <= 1e-10, "translation residual {r}");

    assert!(matches!(
        continuity_residual(&mu, &zero, quad, &[0.5], 0.0),
        Err(TangentError::BadStep(_))
    ));
}

#[test]
fn continuity_residual_decays_at_second_order() {
    // rotation flow against a Gaussian: halving the step divides the
    // residual by about four
    for seed in 0..6u64 {
        let n = 2 + (seed % 2) as usize;
        let mu = DiscreteMeasure::random(4, n, 8200 + seed, 1.0);
        let x_alg = random_algebra_element(n, 8300 + seed, 1.2, 0.4);
        let center = mu.barycenter();
        let phi = TestFunction::gaussian(center, 1.0).unwrap();
        let steps = [2e-2, 1e-2, 5e-3];
        let residuals: Vec<f64> = steps
            .iter()
            .map(|&h| continuity_residual(&mu, &x_alg, &phi, &[0.3, 0.6], h).unwrap())
            .collect();
        let slope = log_log_slope(&steps, &residuals);
        assert!(
            (slope - 2.0).abs() <= 0.2,
            "seed {seed}: slope {slope}, residuals {residuals:?}"
        );
    }
}

fn log_log_slope(steps: &[f64], values: &[f64]) -> f64 {
    let n = steps.len() as f64;
    let xs: Vec<f64> = steps.iter().map(|h| h.ln()).collect();
    let ys: Vec<f64> = values.iter().map(|r| r.ln()).collect();
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let num: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let den: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    num / den
}

#[test]
fn flow_norm_invariance_examples() {
    // pure translation: the field is constant, both norms equal |a| exactly
    let mu = DiscreteMeasure::random(5, 2, 8400, 1.0);
    let p = IsoAlgebraElement::new(DMatrix::zeros(2, 2), DVector::from_column_slice(&[0.6, -0.8]))
        .unwrap();
    assert!(flow_norm_invariance(&mu, &p, &[0.5, 1.0]).unwrap() <= 1e-15);

    // rotation on the unit circle: radii are preserved
    let circle = DiscreteMeasure::uniform(&[
        vec![1.0, 0.0],
        vec![0.0, 1.0],
        vec![-1.0, 0.0],
        vec![0.0, -1.0],
    ])
    .unwrap();
    let basis = KillingBasis::new(2);
    let m12 = &basis.elements()[2];
    assert!(flow_norm_invariance(&circle, m12, &[0.3, 0.7]).unwrap() <= 1e-12);

    // random generators on the closed-form exponential path
    let grid: Vec<f64> = (1..10).map(|i| i as f64 / 10.0).collect();
    for seed in 0..10u64 {
        let n = 1 + (seed % 3) as usize;
        let mu = DiscreteMeasure::random(4, n, 8500 + seed, 1.0);
        let x_alg = random_algebra_element(n, 8600 + seed, 1.0, 1.0);
        let dev = flow_norm_invariance(&mu, &x_alg, &grid).unwrap();
        assert!(dev <= 1e-10, "seed {seed}: deviation {dev}");
    }
}

#[test]
fn l1_in_time_norm_matches_the_static_norm() {
    let mu = DiscreteMeasure::random(4, 2, 8700, 1.0);
    let zero = IsoAlgebraElement::zero(2);
    assert_eq!(l1_in_time_norm(&mu, &zero, 4).unwrap(), 0.0);

    let p1 = IsoAlgebraElement::new(DMatrix::zeros(2, 2), DVector::from_column_slice(&[1.0, 0.0]))
        .unwrap();
    assert_relative_eq!(l1_in_time_norm(&mu, &p1, 7).unwrap(), 1.0, epsilon = 1e-12);

    for seed in 0..6u64 {
        let n = 2 + (seed % 2) as usize;
        let mu = DiscreteMeasure::random(5, n, 8800 + seed, 1.0);
        let x_alg = random_algebra_element(n, 8900 + seed, 0.9, 0.7);
        let field = DiscreteVectorField::from_fundamental_field(mu.clone(), &x_alg).unwrap();
        let integral = l1_in_time_norm(&mu, &x_alg, 16).unwrap();
        assert_abs_diff_eq!(integral, field.norm(), epsilon = 1e-9);
    }

    assert!(matches!(l1_in_time_norm(&mu, &zero, 0), Err(TangentError::NoQuadratureSteps)));
}

#[test]
fn representative_independence_examples() {
    let mu = DiscreteMeasure::random(5, 2, 9000, 1.0);

    // identity: projections commute bit for bit
    let id = Isometry::identity(2);
    let report = representative_independence_check(&mu, &id, 8, 1).unwrap();
    assert!(report.max_discrepancy() <= 1e-15);

    // dirac case: ranks n, shape dims 0 on both sides
    let dirac = DiscreteMeasure::dirac(&[1.0, -2.0, 0.5]).unwrap();
    let g3 = random_isometry(3, 9100, Component::Proper, 1.0);
    let report = representative_independence_check(&dirac, &g3, 4, 2).unwrap();
    assert_eq!(report.rank_source, 3);
    assert_eq!(report.rank_image, 3);
    assert_eq!(report.shape_dim_source, 0);
    assert_eq!(report.shape_dim_image, 0);
    assert!(report.max_discrepancy() <= 1e-9);

    // random pairs in the plane
    for seed in 0..8u64 {
        let mu = DiscreteMeasure::random(5, 2, 9200 + seed, 1.0);
        let g = random_isometry(2, 9300 + seed, Component::Either, 2.0);
        let report = representative_independence_check(&mu, &g, 6, seed).unwrap();
        assert!(
            report.max_discrepancy() <= 1e-9,
            "seed {seed}: discrepancy {}",
            report.max_discrepancy()
        );
    }
}

proptest::proptest! {
    #![proptest_config(proptest::prelude::ProptestConfig::with_cases(48))]

    #[test]
    fn killing_rank_never_exceeds_the_algebra_dimension(
        seed in 0u64..10_000,
        m in 1usize..7,
        n in 1usize..5,
    ) {
        let mu = DiscreteMeasure::random(m, n, seed, 1.0);
        let report = orbit_subspace(&mu, RANK_REL_TOL);
        let full = n * (n + 1) / 2;
        proptest::prop_assert!(report.rank() <= full.min(m * n));
        proptest::prop_assert_eq!(report.rank() + report.kernel_basis().len(), full);
        proptest::prop_assert_eq!(report.shape_tangent_dim(), m * n - report.rank());
    }

    #[test]
    fn kernel_fields_vanish_on_the_support(seed in 0u64..10_000) {
        let mu = DiscreteMeasure::random(2, 2, seed, 1.0);
        let report = orbit_subspace(&mu, RANK_REL_TOL);
        let scale = mu.support_diameter().max(1.0);
        for element in report.kernel_basis() {
            for k in 0..mu.len() {
                let v = fundamental_field(element, &mu.atom(k)).unwrap();
                proptest::prop_assert!(v.norm() <= 1e-9 * scale);
            }
        }
    }
}
