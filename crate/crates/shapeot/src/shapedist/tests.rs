use approx::assert_abs_diff_eq;
use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_distr::{Distribution, StandardNormal};

use super::*;
use crate::isometry::random_algebra_element;

fn default_config(seed: u64) -> ShapeSolverConfig {
    ShapeSolverConfig { seed, ..ShapeSolverConfig::default() }
}

#[test]
fn dirac_pair_is_a_translation() {
    let mu = DiscreteMeasure::dirac(&[1.0, 2.0]).unwrap();
    let nu = DiscreteMeasure::dirac(&[-3.0, 0.5]).unwrap();
    let result = shape_distance(&mu, &nu, &default_config(0)).unwrap();
    assert!(result.distance <= 1e-9);
    let mapped = result.minimizer.apply(&mu.atom(0));
    assert_abs_diff_eq!(mapped, nu.atom(0), epsilon = 1e-9);
}

#[test]
fn recovers_orbit_pairs_in_2d_and_3d() {
    for seed in 0..12u64 {
        let n = 2 + (seed % 2) as usize;
        let m = 4 + (seed % 5) as usize;
        let mu = DiscreteMeasure::random(m, n, 9000 + seed, 1.0);
        let comp = if seed % 2 == 0 { Component::Proper } else { Component::Improper };
        let g0 = random_isometry(n, 9100 + seed, comp, 2.0);
        let nu = g0.apply_measure(&mu);
        let result = shape_distance(&mu, &nu, &default_config(seed)).unwrap();
        assert!(result.distance <= 1e-7, "seed {seed}: distance {}", result.distance);
    }
}

#[test]
fn segment_pair_distance_is_half() {
    // two segments of lengths 1 and 2 sharing the best rigid overlay: the
    // closed-form optimum is 1/2 (atoms matched with residual 1/2 each)
    let mu = DiscreteMeasure::uniform(&[vec![0.0, 0.0], vec![1.0, 0.0]]).unwrap();
    let nu = DiscreteMeasure::uniform(&[vec![0.0, 0.0], vec![0.0, 2.0]]).unwrap();
    let alt = shape_distance(&mu, &nu, &default_config(3)).unwrap();
    let oracle = shape_distance_oracle_2d(&mu, &nu, 720, 2.0).unwrap();
    assert_abs_diff_eq!(oracle.distance, 0.5, epsilon = 1e-9);
    assert_abs_diff_eq!(alt.distance, 0.5, epsilon = 1e-7);
}

#[test]
fn reflections_are_found() {
    let mu = DiscreteMeasure::random(6, 2, 77, 1.0);
    let mirror = Isometry::new(
        DMatrix::from_row_slice(2, 2, &[-1.0, 0.0, 0.0, 1.0]),
        DVector::zeros(2),
    )
    .unwrap();
    let nu = mirror.apply_measure(&mu);
    let result = shape_distance(&mu, &nu, &default_config(5)).unwrap();
    assert!(result.distance <= 1e-7, "distance {}", result.distance);
}

#[test]
fn result_distance_is_recomputable_and_dominated_by_w() {
    for seed in 0..10u64 {
        let n = 2 + (seed % 2) as usize;
        let mu = DiscreteMeasure::random(5, n, 500 + seed, 1.0);
        let nu = DiscreteMeasure::random(6, n, 600 + seed, 1.0);
        let result = shape_distance(&mu, &nu, &default_config(seed)).unwrap();
        let recheck =
            wasserstein_exact(&result.minimizer.apply_measure(&mu), &nu, 2.0).unwrap().distance;
        assert_abs_diff_eq!(result.distance, recheck, epsilon = 1e-9 * (1.0 + recheck));
        let plain = wasserstein_exact(&mu, &nu, 2.0).unwrap().distance;
        assert!(result.distance <= plain + 1e-9);
    }
}

#[test]
fn optimizer_is_symmetric_on_regression_instances() {
    for seed in 0..6u64 {
        let mu = DiscreteMeasure::random(5, 2, 1500 + seed, 1.0);
        let nu = DiscreteMeasure::random(4, 2, 1600 + seed, 1.0);
        let d1 = shape_distance(&mu, &nu, &default_config(seed)).unwrap().distance;
        let d2 = shape_distance(&nu, &mu, &default_config(seed)).unwrap().distance;
        assert_abs_diff_eq!(d1, d2, epsilon = 1e-7);
    }
}

#[test]
fn orbit_invariance_of_the_distance() {
    for seed in 0..6u64 {
        let mu = DiscreteMeasure::random(4, 2, 2500 + seed, 1.0);
        let nu = DiscreteMeasure::random(5, 2, 2600 + seed, 1.0);
        let g = random_isometry(2, 2700 + seed, Component::Either, 1.5);
        let h = random_isometry(2, 2800 + seed, Component::Either, 1.5);
        let base = shape_distance_certified_2d(&mu, &nu, &default_config(seed), 360).unwrap();
        let moved = shape_distance_certified_2d(
            &g.apply_measure(&mu),
            &h.apply_measure(&nu),
            &default_config(seed),
            360,
        )
        .unwrap();
        assert_abs_diff_eq!(base.distance, moved.distance, epsilon = 1e-6);
    }
}

#[test]
fn alternation_step_examples() {
    // fixed point at the optimum
    let mu = DiscreteMeasure::random(5, 2, 42, 1.0).centered();
    let (rot, result) = alternation_step(&mu, &mu, &Isometry::identity(2)).unwrap();
    assert!(result.distance <= 1e-12);
    assert_abs_diff_eq!(rot.rotation(), &DMatrix::identity(2, 2), epsilon = 1e-9);

    // monotonicity: objective never increases across consecutive steps
    for seed in 0..8u64 {
        let n = 2 + (seed % 2) as usize;
        let mu = DiscreteMeasure::random(5, n, 4300 + seed, 1.0).centered();
        let nu = DiscreteMeasure::random(6, n, 4400 + seed, 1.0).centered();
        let mut g = Isometry::identity(n);
        let mut last = f64::INFINITY;
        for _ in 0..6 {
            let (next, result) = alternation_step(&mu, &nu, &g).unwrap();
            assert!(result.cost <= last + 1e-12, "objective increased");
            last = result.cost;
            g = next;
        }
    }
}

#[test]
fn procrustes_recovers_a_planted_rotation() {
    for seed in 0..10u64 {
        let n = 2 + (seed % 2) as usize;
        let mu = DiscreteMeasure::random(6, n, 5200 + seed, 1.0).centered();
        let r0 = random_isometry(n, 5300 + seed, Component::Either, 0.0);
        let nu = r0.apply_measure(&mu);
        let triplets: Vec<(usize, usize, f64)> =
            (0..mu.len()).map(|k| (k, k, mu.weights()[k])).collect();
        let coupling = Coupling::from_triplets(mu.clone(), nu.clone(), triplets).unwrap();
        let recovered = weighted_procrustes(&coupling);
        assert!((&recovered - r0.rotation()).norm() <= 1e-8, "seed {seed}");
    }
}

#[test]
fn procrustes_beats_random_orthogonal_matrices() {
    let mu = DiscreteMeasure::random(5, 3, 61, 1.0).centered();
    let nu = DiscreteMeasure::random(7, 3, 62, 1.0).centered();
    let base = wasserstein_exact(&mu, &nu, 2.0).unwrap();
    let coupling = base.coupling;
    let best = weighted_procrustes(
        &Coupling::from_triplets(mu.clone(), nu.clone(), coupling.nonzeros()).unwrap(),
    );
    let objective = |r: &DMatrix<f64>| -> f64 {
        coupling
            .nonzeros()
            .iter()
            .map(|&(i, j, w)| {
                let x = mu.atom(i);
                let y = nu.atom(j);
                w * (r * x - y).norm_squared()
            })
            .sum()
    };
    let best_obj = objective(&best);
    for seed in 0..1000u64 {
        let candidate = random_isometry(3, 100_000 + seed, Component::Either, 0.0);
        assert!(objective(candidate.rotation()) >= best_obj - 1e-9);
    }
}

#[test]
fn oracle_examples() {
    // planted rotation is recovered
    let mu = DiscreteMeasure::random(5, 2, 71, 1.0);
    let g0 = Isometry::rotation_2d(1.1);
    let nu = g0.apply_measure(&mu);
    let oracle = shape_distance_oracle_2d(&mu, &nu, 360, 2.0).unwrap();
    assert!(oracle.distance <= 1e-7);
    assert!(oracle.certificate == Some(0.0));

    // oracle never loses to the alternating solver by more than tolerance
    for seed in 0..6u64 {
        let mu = DiscreteMeasure::random(4, 2, 7100 + seed, 1.0);
        let nu = DiscreteMeasure::random(5, 2, 7200 + seed, 1.0);
        let alt = shape_distance(&mu, &nu, &default_config(seed)).unwrap();
        let oracle = shape_distance_oracle_2d(&mu, &nu, 360, 2.0).unwrap();
        assert!(oracle.distance <= alt.distance + 1e-7);
    }

    // one grid step on barycentered identical measures still lands at zero
    let centered = DiscreteMeasure::random(4, 2, 81, 1.0).centered();
    let trivial = shape_distance_oracle_2d(&centered, &centered, 1, 2.0).unwrap();
    assert!(trivial.distance <= 1e-9);

    // dimension guard
    let three_d = DiscreteMeasure::random(3, 3, 82, 1.0);
    assert!(matches!(
        shape_distance_oracle_2d(&three_d, &three_d, 10, 2.0),
        Err(ShapeError::DimensionNot2(3))
    ));
}

#[test]
fn certified_gap_is_small_on_generic_instances() {
    for seed in 0..5u64 {
        let mu = DiscreteMeasure::random(4, 2, 9300 + seed, 1.0);
        let nu = DiscreteMeasure::random(4, 2, 9400 + seed, 1.0);
        let result = shape_distance_certified_2d(&mu, &nu, &default_config(seed), 360).unwrap();
        let gap = result.certificate.unwrap();
        assert!(gap >= -1e-7, "oracle beat by alternating solver beyond tolerance: {gap}");
    }
}

#[test]
fn translation_bound_examples() {
    // coincident diracs: bound is finite and keeps the identity
    let dirac = DiscreteMeasure::dirac(&[0.0, 0.0]).unwrap();
    let bound = translation_search_bound(&dirac, &dirac, 2.0).unwrap();
    assert!(bound.is_finite() && bound >= 0.0);

    // pruning audit: translations beyond 2R' never beat the untranslated cost
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(4);
    for seed in 0..20u64 {
        let n = 2;
        let mu = DiscreteMeasure::random(4, n, 9700 + seed, 1.0);
        let nu = DiscreteMeasure::random(5, n, 9800 + seed, 1.0);
        // work in the pooled-barycenter frame
        let center = (mu.barycenter() + nu.barycenter()) * 0.5;
        let shift = |m: &DiscreteMeasure| {
            let c = center.clone();
            m.pushforward(move |x| x.iter().zip(c.iter()).map(|(a, b)| a - b).collect())
        };
        let mu0 = shift(&mu);
        let nu0 = shift(&nu);
        for p in [1.0, 2.0] {
            let bound = translation_search_bound(&mu0, &nu0, p).unwrap();
            let w = wasserstein_exact(&mu0, &nu0, p).unwrap().distance;
            for _ in 0..5 {
                let mut dir = DVector::zeros(n);
                for l in 0..n {
                    dir[l] = StandardNormal.sample(&mut rng);
                }
                let t = dir.normalize() * (2.0 * bound + 0.1);
                let g = Isometry::translation_by(t);
                let moved = wasserstein_exact(&g.apply_measure(&mu0), &nu0, p).unwrap().distance;
                assert!(moved > w - 1e-9, "pruned translation beat the base distance");
            }
        }
    }

    // exact positive homogeneity under scaling, recomputed from scratch
    let mu = DiscreteMeasure::random(5, 2, 9901, 1.0);
    let nu = DiscreteMeasure::random(4, 2, 9902, 1.0);
    for p in [1.0, 2.0] {
        let base = translation_search_bound(&mu, &nu, p).unwrap();
        let lambda = 3.5;
        let scale = |m: &DiscreteMeasure| m.pushforward(|x| x.iter().map(|v| lambda * v).collect());
        let scaled = translation_search_bound(&scale(&mu), &scale(&nu), p).unwrap();
        assert_abs_diff_eq!(scaled, lambda * base, epsilon = 1e-9 * (1.0 + lambda * base));
    }
}

#[test]
fn config_validation() {
    let mu = DiscreteMeasure::random(3, 2, 1, 1.0);
    let bad_p = ShapeSolverConfig { p: 1.5, ..ShapeSolverConfig::default() };
    assert!(matches!(shape_distance(&mu, &mu, &bad_p), Err(ShapeError::UnsupportedP(_))));
    let bad_restarts = ShapeSolverConfig { restarts: 0, ..ShapeSolverConfig::default() };
    assert!(matches!(shape_distance(&mu, &mu, &bad_restarts), Err(ShapeError::ConfigInvalid(_))));
    let three_d = DiscreteMeasure::random(3, 3, 2, 1.0);
    assert!(matches!(
        shape_distance(&mu, &three_d, &ShapeSolverConfig::default()),
        Err(ShapeError::DimensionMismatch { .. })
    ));
}

#[test]
fn entropic_inner_solver_agrees_with_exact_on_orbit_pairs() {
    let mu = DiscreteMeasure::random(6, 2, 333, 1.0);
    let g0 = random_isometry(2, 334, Component::Proper, 1.0);
    let nu = g0.apply_measure(&mu);
    let config = ShapeSolverConfig {
        inner_solver: InnerSolver::EntropicThenExact,
        entropic_epsilon: 5e-3,
        ..default_config(7)
    };
    let result = shape_distance(&mu, &nu, &config).unwrap();
    assert!(result.distance <= 1e-6, "entropic-guided distance {}", result.distance);
    // the reported value comes from an exact solve regardless of inner mode
    let recheck =
        wasserstein_exact(&result.minimizer.apply_measure(&mu), &nu, 2.0).unwrap().distance;
    assert_abs_diff_eq!(result.distance, recheck, epsilon = 1e-12);
}

#[test]
fn algebra_seeded_orbits_are_recovered() {
    // orbit pairs produced through the exponential map rather than QR sampling
    for seed in 0..4u64 {
        let x_alg = random_algebra_element(2, 11_000 + seed, 1.0, 0.5);
        let g0 = crate::isometry::group_exponential(&x_alg, 1.0);
        let mu = DiscreteMeasure::random(5, 2, 11_100 + seed, 1.0);
        let nu = g0.apply_measure(&mu);
        let d = shape_distance(&mu, &nu, &default_config(seed)).unwrap().distance;
        assert!(d <= 1e-7);
    }
}
