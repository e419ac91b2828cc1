//! Forward model: from an informational environment to its belief landscape.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::Exp1;

use crate::error::{Error, Result};
use crate::model::{
    ensure_same_labels, BeliefLandscape, HypotheticalBeliefMatrix, InformationStructure, InformationalEnvironment,
    Prior, SignalMarginal, StateBeliefMatrix, Tolerances,
};

/// Posterior beliefs together with the signals that survived.
#[derive(Debug, Clone, PartialEq)]
pub struct Posterior {
    pub beliefs: StateBeliefMatrix,
    /// Indices (into the structure's signals) of the rows of `beliefs`.
    pub kept: Vec<usize>,
    /// Labels of signals with zero marginal probability.
    pub dropped: Vec<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GeneratedLandscape {
    pub landscape: BeliefLandscape,
    pub marginal: SignalMarginal,
    pub dropped: Vec<String>,
}

/// `ℙ[s] = Σ_θ I(θ)[s] p(θ)`.
pub fn signal_marginal(env: &InformationalEnvironment) -> SignalMarginal {
    let p = env.structure().entries().transpose() * env.prior().entries();
    SignalMarginal::new(p, env.structure().signal_labels().to_vec()).expect("labels come from a validated structure")
}

/// Bayes' rule: `b[s, θ] = p(θ) I(θ)[s] / ℙ[s]`, dropping signals with `ℙ[s] <= tol.entry`.
pub fn posterior_matrix(env: &InformationalEnvironment, tol: &Tolerances) -> Result<Posterior> {
    let structure = env.structure();
    let prior = env.prior().entries();
    let marginal = signal_marginal(env);

    let mut kept = Vec::new();
    let mut dropped = Vec::new();
    for (s, &mass) in marginal.entries().iter().enumerate() {
        if mass > tol.entry {
            kept.push(s);
        } else {
            dropped.push(structure.signal_labels()[s].clone());
        }
    }
    if kept.is_empty() {
        return Err(Error::AllSignalsDropped);
    }

    let b = DMatrix::from_fn(kept.len(), structure.n_states(), |r, t| {
        let s = kept[r];
        prior[t] * structure.entries()[(t, s)] / marginal.entries()[s]
    });
    let signal_labels = kept.iter().map(|&s| structure.signal_labels()[s].clone()).collect();
    let beliefs = StateBeliefMatrix::new(b, structure.state_labels().to_vec(), signal_labels)?;
    Ok(Posterior { beliefs, kept, dropped })
}

/// Law of total probability: `Q = B I`.
pub fn hypothetical_matrix(
    structure: &InformationStructure,
    beliefs: &StateBeliefMatrix,
) -> Result<HypotheticalBeliefMatrix> {
    if structure.n_states() != beliefs.n_states() {
        return Err(Error::DimensionMismatch {
            axis: "states of information structure".into(),
            expected: beliefs.n_states(),
            found: structure.n_states(),
        });
    }
    if structure.n_signals() != beliefs.n_signals() {
        return Err(Error::DimensionMismatch {
            axis: "signals of information structure".into(),
            expected: beliefs.n_signals(),
            found: structure.n_signals(),
        });
    }
    ensure_same_labels("state", structure.state_labels(), beliefs.state_labels())?;
    ensure_same_labels("signal", structure.signal_labels(), beliefs.signal_labels())?;
    HypotheticalBeliefMatrix::new(
        beliefs.entries() * structure.entries(),
        beliefs.signal_labels().to_vec(),
    )
}

/// Posterior beliefs and hypothetical beliefs generated by `env`.
pub fn generate_landscape(env: &InformationalEnvironment, tol: &Tolerances) -> Result<GeneratedLandscape> {
    let posterior = posterior_matrix(env, tol)?;
    let structure = env.structure();
    let columns: Vec<_> = posterior
        .kept
        .iter()
        .map(|&s| structure.entries().column(s).into_owned())
        .collect();
    let restricted = InformationStructure::new(
        DMatrix::from_columns(&columns),
        structure.state_labels().to_vec(),
        posterior.beliefs.signal_labels().to_vec(),
    )?;
    let q = hypothetical_matrix(&restricted, &posterior.beliefs)?;
    Ok(GeneratedLandscape {
        landscape: BeliefLandscape::new(posterior.beliefs, q)?,
        marginal: signal_marginal(env),
        dropped: posterior.dropped,
    })
}

/// A uniform draw from the probability simplex conditioned on every entry being at least `min_entry`.
pub fn sample_simplex<R: Rng + ?Sized>(rng: &mut R, n: usize, min_entry: f64) -> DVector<f64> {
    assert!(n > 0 && min_entry * (n as f64) < 1.0, "empty truncated simplex");
    loop {
        let mut v = DVector::from_fn(n, |_, _| rng.sample::<f64, _>(Exp1));
        v /= v.sum();
        if v.iter().all(|&x| x >= min_entry) {
            return v;
        }
    }
}

/// Smallest entry used by [`sample_environment`].
pub const SAMPLER_MIN_ENTRY: f64 = 0.02;

/// Random environment with prior and structure rows drawn by [`sample_simplex`] with entries at least 0.02.
pub fn sample_environment<R: Rng + ?Sized>(rng: &mut R, n_states: usize, n_signals: usize) -> InformationalEnvironment {
    sample_environment_with_min(rng, n_states, n_signals, SAMPLER_MIN_ENTRY)
}

pub fn sample_environment_with_min<R: Rng + ?Sized>(
    rng: &mut R,
    n_states: usize,
    n_signals: usize,
    min_entry: f64,
) -> InformationalEnvironment {
    let prior = Prior::with_default_labels(sample_simplex(rng, n_states, min_entry));
    let rows: Vec<_> = (0..n_states)
        .map(|_| sample_simplex(rng, n_signals, min_entry).transpose())
        .collect();
    let structure = InformationStructure::with_default_labels(DMatrix::from_rows(&rows));
    InformationalEnvironment::new(structure, prior).expect("default labels agree")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::model::validate_landscape;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn tol() -> Tolerances {
        Tolerances::default()
    }

    #[test]
    fn ex1_forward() {
        for eps in [0.1, 0.5, 0.9] {
            let g = generate_landscape(&fixtures::ex1_environment(eps), &tol()).unwrap();
            let expected = fixtures::ex1_landscape(eps);
            assert_abs_diff_eq!(g.landscape.b(), expected.b(), epsilon = 1e-12);
            assert_abs_diff_eq!(g.landscape.q(), expected.q(), epsilon = 1e-12);
            let r = (1.0 - eps) / 3.0;
            assert_abs_diff_eq!(
                g.marginal.entries(),
                &DVector::from_vec(vec![eps, r, r, r]),
                epsilon = 1e-12
            );
            assert!(g.dropped.is_empty());
        }
    }

    #[test]
    fn revealing_structure_gives_identity_beliefs() {
        let p = DVector::from_vec(vec![0.2, 0.3, 0.5]);
        let env = InformationalEnvironment::from_matrices(DMatrix::identity(3, 3), p.clone()).unwrap();
        let g = generate_landscape(&env, &tol()).unwrap();
        assert_abs_diff_eq!(g.landscape.b(), &DMatrix::identity(3, 3), epsilon = 1e-15);
        assert_abs_diff_eq!(g.landscape.q(), &DMatrix::identity(3, 3), epsilon = 1e-15);
        assert_abs_diff_eq!(signal_marginal(&env).entries(), &p, epsilon = 1e-15);
    }

    #[test]
    fn ex3_forward() {
        let g = generate_landscape(&fixtures::ex3_environment(), &tol()).unwrap();
        let expected = fixtures::ex3_landscape();
        assert_abs_diff_eq!(g.landscape.b(), expected.b(), epsilon = 1e-12);
        assert_abs_diff_eq!(g.landscape.q(), expected.q(), epsilon = 1e-12);
    }

    #[test]
    fn ex4_forward_and_marginal() {
        let env = fixtures::ex4_environment();
        let g = generate_landscape(&env, &tol()).unwrap();
        let expected = fixtures::ex4_landscape();
        assert_abs_diff_eq!(g.landscape.b(), expected.b(), epsilon = 1e-12);
        assert_abs_diff_eq!(g.marginal.entries(), &fixtures::ex4_signal_marginal(), epsilon = 1e-12);
        // The published Q is the reduced model's B̃ Ĩ; the four-state structure gives a
        // different first row because state 3 carries a mixed signal distribution.
        assert_abs_diff_eq!(g.landscape.q()[(0, 0)], 5.0 / 12.0, epsilon = 1e-12);
        assert_abs_diff_eq!(g.landscape.q()[(0, 2)], 1.0 / 12.0, epsilon = 1e-12);
        assert_abs_diff_eq!(expected.q()[(0, 0)], 0.5, epsilon = 1e-12);
    }

    #[test]
    fn state_independent_signals_copy_the_row() {
        let sigma = [0.2, 0.5, 0.3];
        let i = DMatrix::from_fn(2, 3, |_, s| sigma[s]);
        let env = InformationalEnvironment::from_matrices(i, DVector::from_vec(vec![0.4, 0.6])).unwrap();
        let g = generate_landscape(&env, &tol()).unwrap();
        for row in g.landscape.q().row_iter() {
            for (s, &x) in row.iter().enumerate() {
                assert_abs_diff_eq!(x, sigma[s], epsilon = 1e-14);
            }
        }
    }

    #[test]
    fn zero_marginal_signals_are_dropped() {
        let i = DMatrix::from_row_slice(2, 3, &[0.5, 0.0, 0.5, 0.0, 0.0, 1.0]);
        let env = InformationalEnvironment::from_matrices(i, DVector::from_vec(vec![0.5, 0.5])).unwrap();
        let g = generate_landscape(&env, &tol()).unwrap();
        assert_eq!(g.dropped, vec!["s2".to_string()]);
        assert_eq!(
            g.landscape.beliefs().signal_labels(),
            &["s1".to_string(), "s3".to_string()]
        );
        let report = validate_landscape(g.landscape.beliefs(), g.landscape.hypothetical(), &tol()).unwrap();
        assert!(report.plausible, "{:?}", report.violations);

        let none = InformationalEnvironment::from_matrices(
            DMatrix::from_row_slice(1, 1, &[1.0]),
            DVector::from_vec(vec![0.0]),
        )
        .unwrap();
        assert_eq!(generate_landscape(&none, &tol()).unwrap_err(), Error::AllSignalsDropped);
    }

    #[test]
    fn hypothetical_matrix_checks_dimensions() {
        let s = InformationStructure::with_default_labels(DMatrix::identity(2, 2));
        let b = StateBeliefMatrix::with_default_labels(DMatrix::identity(3, 3));
        assert!(matches!(
            hypothetical_matrix(&s, &b),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn sampler_respects_floor() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..50 {
            let env = sample_environment(&mut rng, 4, 6);
            assert!(env.prior().entries().iter().all(|&x| x >= SAMPLER_MIN_ENTRY));
            assert!(env.structure().entries().iter().all(|&x| x >= SAMPLER_MIN_ENTRY));
            assert_abs_diff_eq!(env.prior().sum(), 1.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn random_environments_give_plausible_landscapes() {
        let mut rng = ChaCha8Rng::seed_from_u64(500);
        for _ in 0..500 {
            let n_states = rng.random_range(2..=5);
            let n_signals = rng.random_range(2..=8);
            let env = sample_environment(&mut rng, n_states, n_signals);
            let g = generate_landscape(&env, &tol()).unwrap();
            let report = validate_landscape(g.landscape.beliefs(), g.landscape.hypothetical(), &tol()).unwrap();
            assert!(report.plausible, "{:?}", report.violations);
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(128))]

        #[test]
        fn forward_identities(seed in any::<u64>(), n_states in 1usize..6, n_signals in 1usize..8) {
            let t = tol();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let env = sample_environment(&mut rng, n_states, n_signals);
            let g = generate_landscape(&env, &t).unwrap();
            let (b, q) = (g.landscape.b(), g.landscape.q());
            let marginal = g.marginal.entries();

            // Martingale: beliefs average back to the prior.
            let averaged = b.transpose() * marginal;
            prop_assert!((averaged - env.prior().entries()).amax() <= t.matching);

            prop_assert!((q - b * env.structure().entries()).amax() <= t.matching);
            for row in b.row_iter().chain(q.row_iter()) {
                prop_assert!((row.sum() - 1.0).abs() <= t.stochastic);
            }

            // The marginal is a left eigenvector of Q.
            let left = q.transpose() * marginal;
            prop_assert!((left - marginal).amax() <= t.matching);

            // B^T I^T is column stochastic and fixes the prior.
            let m = b.transpose() * env.structure().entries().transpose();
            for col in m.column_iter() {
                prop_assert!((col.sum() - 1.0).abs() <= t.matching);
            }
            prop_assert!((&m * env.prior().entries() - env.prior().entries()).amax() <= t.matching);
        }
    }
}
