use approx::assert_abs_diff_eq;
use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::fixtures;
use crate::forward::{generate_landscape, sample_environment, sample_simplex};

fn tol() -> Tolerances {
    Tolerances::default()
}

fn landscape_of(env: &InformationalEnvironment) -> BeliefLandscape {
    generate_landscape(env, &tol()).unwrap().landscape
}

#[test]
fn ex1_regression_operator() {
    let b = fixtures::ex1_landscape(0.5).b().clone();
    let op = linalg::least_squares(&b, &DMatrix::identity(4, 4), &tol()).unwrap();
    assert_abs_diff_eq!(op, fixtures::ex1_regression_operator(), epsilon = 1e-12);
}

#[test]
fn ex1_identification() {
    for eps in [0.1, 0.5, 0.9] {
        let r = identify(&fixtures::ex1_landscape(eps), &tol()).unwrap();
        assert_abs_diff_eq!(r.structure.entries(), &fixtures::ex1_structure(eps), epsilon = 1e-12);
        let p = r.prior.unique().unwrap();
        assert_abs_diff_eq!(p.entries(), &DVector::from_element(3, 1.0 / 3.0), epsilon = 1e-12);
        assert!(r.round_trip.passes(&tol()));
    }
}

#[test]
fn ex2_regression_operator_and_verdicts() {
    let op = linalg::least_squares(&fixtures::ex2_beliefs(), &DMatrix::identity(2, 2), &tol()).unwrap();
    assert_abs_diff_eq!(
        op,
        DMatrix::from_row_slice(2, 2, &[-0.5, 1.5, 1.5, -0.5]),
        epsilon = 1e-12
    );

    let r = identify(&fixtures::ex2_landscape(9.0 / 16.0, 9.0 / 16.0), &tol()).unwrap();
    assert_abs_diff_eq!(
        r.structure.entries(),
        &DMatrix::from_row_slice(2, 2, &[0.375, 0.625, 0.625, 0.375]),
        epsilon = 1e-12
    );
    assert!(r.estimate.is_nonnegative());
    assert!(!r.round_trip.passes(&tol()));

    let r = identify(&fixtures::ex2_landscape(0.625, 0.625), &tol()).unwrap();
    assert_abs_diff_eq!(r.structure.entries(), &fixtures::ex2_beliefs(), epsilon = 1e-12);
    assert_abs_diff_eq!(
        r.prior.unique().unwrap().entries(),
        &DVector::from_vec(vec![0.5, 0.5]),
        epsilon = 1e-12
    );
    assert!(r.round_trip.passes(&tol()));
}

#[test]
fn ex1_q_tilde_has_negative_entries() {
    let est = identify_structure(&fixtures::ex1_q_tilde_landscape(), &tol()).unwrap();
    assert_abs_diff_eq!(est.raw, fixtures::ex1_q_tilde_regression(), epsilon = 1e-12);
    assert_eq!(est.negative.len(), 2);
    for n in &est.negative {
        assert_abs_diff_eq!(n.value, -1.0 / 48.0, epsilon = 1e-12);
    }
    // Rows still sum to one.
    assert!(est.row_sum_error < 1e-12);
}

#[test]
fn preconditions_route_elsewhere() {
    assert!(matches!(
        identify(&fixtures::ex3_landscape(), &tol()),
        Err(Error::Underdetermined { states: 3, signals: 2 })
    ));
    assert!(matches!(
        identify(&fixtures::ex4_landscape(), &tol()),
        Err(Error::RankDeficient { rank: 3, columns: 4 })
    ));
    let bad = Tolerances {
        matching: -1.0,
        ..tol()
    };
    assert!(matches!(
        identify(&fixtures::ex1_landscape(0.5), &bad),
        Err(Error::InvalidTolerance { .. })
    ));
}

#[test]
fn ex3_prior_and_peer_accuracy() {
    let env = fixtures::ex3_environment();
    let l = fixtures::ex3_landscape();
    let m = peer_accuracy_matrix(l.beliefs(), env.structure()).unwrap();
    assert_abs_diff_eq!(m, fixtures::ex3_peer_accuracy(), epsilon = 1e-12);
    let p = identify_prior(l.beliefs(), env.structure(), &tol()).unwrap();
    assert_abs_diff_eq!(
        p.unique().unwrap().entries(),
        &DVector::from_vec(vec![0.5, 1.0 / 6.0, 1.0 / 3.0]),
        epsilon = 1e-12
    );
}

#[test]
fn ex5_prior_family_is_per_cell() {
    let (p2, p3) = (1.0 / 6.0, 1.0 / 3.0);
    let env = fixtures::ex5_environment(p2, p3);
    let l = landscape_of(&env);
    let family = identify_prior(l.beliefs(), env.structure(), &tol()).unwrap();
    match &family {
        PriorFamily::Classes { priors, decomposition } => {
            assert_eq!(decomposition.classes, vec![vec![0], vec![1, 2], vec![3]]);
            assert_eq!(priors.len(), 3);
            assert_abs_diff_eq!(
                priors[0].prior.entries(),
                &DVector::from_vec(vec![1.0, 0.0, 0.0, 0.0]),
                epsilon = 1e-12
            );
            assert_abs_diff_eq!(
                priors[1].prior.entries(),
                &DVector::from_vec(vec![0.0, p2 / (p2 + p3), p3 / (p2 + p3), 0.0]),
                epsilon = 1e-12
            );
            assert_eq!(priors[1].states, vec![1, 2]);
        }
        other => panic!("expected a family, got {other:?}"),
    }
    let m = peer_accuracy_matrix(l.beliefs(), env.structure()).unwrap();
    for p in family.members() {
        assert!((&m * p.entries() - p.entries()).amax() <= tol().matching);
    }
}

#[test]
fn fully_revealing_prior_is_the_whole_simplex() {
    let l = BeliefLandscape::from_matrices(DMatrix::identity(3, 3), DMatrix::identity(3, 3)).unwrap();
    let r = identify(&l, &tol()).unwrap();
    assert_eq!(r.peer_accuracy, DMatrix::identity(3, 3));
    assert_eq!(r.prior.members().len(), 3);
    assert!(r.round_trip.passes(&tol()));
}

#[test]
fn peer_accuracy_sharpens_as_noise_falls() {
    let diag = |eps: f64| {
        let env = fixtures::ex1_environment(eps);
        let l = landscape_of(&env);
        peer_accuracy_matrix(l.beliefs(), env.structure()).unwrap().diagonal()
    };
    let (sharp, blurred) = (diag(0.1), diag(0.9));
    for t in 0..3 {
        assert!(sharp[t] > blurred[t]);
        assert!(sharp[t] > 0.5);
    }
}

#[test]
fn single_column_regression() {
    let eps = 0.3;
    let l = fixtures::ex1_landscape(eps);
    let null = identify_single_column(l.beliefs(), &l.hypothetical().column(0), &tol()).unwrap();
    assert_abs_diff_eq!(null, DVector::from_element(3, eps), epsilon = 1e-12);
    let reveal = identify_single_column(l.beliefs(), &l.hypothetical().column(1), &tol()).unwrap();
    assert_abs_diff_eq!(reveal, DVector::from_vec(vec![1.0 - eps, 0.0, 0.0]), epsilon = 1e-12);

    let l3 = fixtures::ex3_landscape();
    assert!(matches!(
        identify_single_column(l3.beliefs(), &l3.hypothetical().column(0), &tol()),
        Err(Error::Underdetermined { .. })
    ));
}

#[test]
fn clipping_policy() {
    let t = tol();
    let raw = DMatrix::from_row_slice(2, 2, &[-5e-10, 1.0 + 5e-10, 0.5, 0.5]);
    let (clipped, n) = clip_noise(&raw, &t);
    assert_eq!(n, 2);
    assert_eq!(clipped, DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 0.5, 0.5]));

    let raw = DMatrix::from_row_slice(1, 2, &[-1e-3, 1.001]);
    let (clipped, n) = clip_noise(&raw, &t);
    assert_eq!(n, 0);
    assert_eq!(clipped, raw);
}

/// Random perturbation with zero row sums and Frobenius norm `size`.
fn zero_sum_perturbation(rng: &mut ChaCha8Rng, rows: usize, cols: usize, size: f64) -> DMatrix<f64> {
    let mut d = DMatrix::from_fn(rows, cols, |_, _| rng.random_range(-1.0..1.0));
    for mut row in d.row_iter_mut() {
        let mean = row.mean();
        row.add_scalar_mut(-mean);
    }
    let scale = size / d.norm();
    d * scale
}

#[test]
fn perturbed_landscapes_are_inconsistent() {
    let mut rng = ChaCha8Rng::seed_from_u64(1234);
    let mut flipped = 0;
    for _ in 0..100 {
        let n_states = rng.random_range(2..=4);
        let n_signals = rng.random_range(n_states + 1..=7);
        let env = sample_environment(&mut rng, n_states, n_signals);
        let l = landscape_of(&env);
        let q = l.q() + zero_sum_perturbation(&mut rng, n_signals, n_signals, 1e-3);
        let perturbed = BeliefLandscape::from_matrices(l.b().clone(), q).unwrap();
        if !consistency_check(&perturbed, &tol()).unwrap().is_consistent() {
            flipped += 1;
        }
    }
    assert!(flipped >= 99, "only {flipped}/100 flipped");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn round_trip_recovers_environment(seed in any::<u64>(), n_states in 2usize..6, extra in 0usize..4) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let env = sample_environment(&mut rng, n_states, n_states + extra);
        let r = identify(&landscape_of(&env), &tol()).unwrap();
        prop_assert!((r.structure.entries() - env.structure().entries()).amax() <= tol().matching);
        let p = r.prior.unique().expect("unique prior");
        prop_assert!((p.entries() - env.prior().entries()).amax() <= tol().matching);
        prop_assert!(r.round_trip.passes(&tol()));
    }

    #[test]
    fn regression_preserves_row_sums(seed in any::<u64>(), n_states in 2usize..5, extra in 0usize..4) {
        // Arbitrary stochastic Q, not necessarily model generated.
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n_signals = n_states + extra;
        let b = DMatrix::from_rows(&(0..n_signals).map(|_| sample_simplex(&mut rng, n_states, 0.0).transpose()).collect::<Vec<_>>());
        let q = DMatrix::from_rows(&(0..n_signals).map(|_| sample_simplex(&mut rng, n_signals, 0.0).transpose()).collect::<Vec<_>>());
        let sv = linalg::singular_values(&b);
        prop_assume!(sv.min() > 1e-6 * sv.max());
        let l = BeliefLandscape::from_matrices(b, q).unwrap();
        match identify_structure(&l, &tol()) {
            Ok(est) => prop_assert!(est.row_sum_error <= tol().matching, "{}", est.row_sum_error),
            Err(Error::RankDeficient { .. }) => {}
            Err(e) => return Err(TestCaseError::fail(e.to_string())),
        }
    }

    #[test]
    fn peer_accuracy_is_column_stochastic_and_fixes_the_prior(seed in any::<u64>(), n_states in 1usize..6, n_signals in 1usize..7) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let env = sample_environment(&mut rng, n_states, n_signals);
        let l = landscape_of(&env);
        let m = peer_accuracy_matrix(l.beliefs(), env.structure()).unwrap();
        for col in m.column_iter() {
            prop_assert!((col.sum() - 1.0).abs() <= tol().matching);
        }
        prop_assert!((&m * env.prior().entries() - env.prior().entries()).amax() <= tol().matching);
    }

    #[test]
    fn distinct_priors_give_distinct_q(seed in any::<u64>(), n_states in 2usize..5, extra in 0usize..3) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let env = sample_environment(&mut rng, n_states, n_states + extra);
        let b = landscape_of(&env).beliefs().clone();
        let n_signals = n_states + extra;
        // Priors inside the hull of the belief rows, so both are attainable under B.
        let draw = |rng: &mut ChaCha8Rng| {
            Prior::with_default_labels(b.entries().transpose() * sample_simplex(rng, n_signals, 0.02))
        };
        for _ in 0..100 {
            let p = draw(&mut rng);
            let p2 = draw(&mut rng);
            prop_assume!((p.entries() - p2.entries()).amax() > 1e-6);
            let q1 = b.entries() * reconstruct_from_prior(&b, &p, &tol()).unwrap().entries();
            let q2 = b.entries() * reconstruct_from_prior(&b, &p2, &tol()).unwrap().entries();
            prop_assert!((q1 - q2).amax() > tol().matching);
        }
    }

    #[test]
    fn exact_solutions_differ_by_null_vectors(seed in any::<u64>(), n_states in 3usize..7) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let env = sample_environment(&mut rng, n_states, n_states - 1);
        let r = identify_underdetermined(&landscape_of(&env), &tol()).unwrap();
        let point = r.feasible.point().expect("feasible").clone();
        for x in [env.structure().entries().clone(), point] {
            let gap = x - &r.ridge_limit;
            for col in gap.column_iter() {
                prop_assert!(r.null_basis.distance(&col.into_owned()) <= tol().matching);
            }
        }
    }
}
