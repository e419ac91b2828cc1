//! Removing states whose belief columns are mixtures of other states' columns.

use nalgebra::{DMatrix, DVector};

use super::{bayes_structure, identify, IdentificationResult};
use crate::error::{Error, Result};
use crate::linalg;
use crate::model::{
    BeliefLandscape, InformationStructure, InformationalEnvironment, Prior, StateBeliefMatrix, Tolerances,
};

#[derive(Debug, Clone, PartialEq)]
pub struct Reduction {
    /// `(B̃, Q)` on the kept states.
    pub reduced: BeliefLandscape,
    /// Indices of kept states in the original order.
    pub kept: Vec<usize>,
    /// Indices of removed states in the original order.
    pub removed: Vec<usize>,
    /// `weights[(r, k)]`: column of removed state `r` = `Σ_k weights[(r, k)]` column of kept state `k`.
    pub weights: DMatrix<f64>,
    beliefs: StateBeliefMatrix,
    tol: Tolerances,
}

impl Reduction {
    pub fn is_trivial(&self) -> bool {
        self.removed.is_empty()
    }

    /// The original (unreduced) state beliefs.
    pub fn beliefs(&self) -> &StateBeliefMatrix {
        &self.beliefs
    }

    /// Maps an environment identified on the kept states back to all states.
    ///
    /// The reduced environment's signal marginal `ℙ = Ĩ^T p̃` is the left
    /// eigenvector of `Q`, so it does not depend on which states were removed.
    /// The full environment is then `p = B^T ℙ` and
    /// `I(θ)[s] = b[s, θ] ℙ[s] / p(θ)`. Each removed state's row comes out as a
    /// prior-weighted mixture of the kept rows it is built from.
    pub fn embed(&self, structure: &InformationStructure, prior: &Prior) -> Result<InformationalEnvironment> {
        let k = self.kept.len();
        if structure.n_states() != k || prior.len() != k {
            return Err(Error::DimensionMismatch {
                axis: "reduced states".into(),
                expected: k,
                found: structure.n_states(),
            });
        }
        let mut marginal = structure.entries().transpose() * prior.entries();
        let total = marginal.sum();
        if !(total > f64::EPSILON) {
            return Err(Error::NotModelGenerated);
        }
        marginal /= total;
        let b = &self.beliefs;
        InformationalEnvironment::new(
            InformationStructure::new(
                bayes_structure(b.entries(), &marginal, &self.tol),
                b.state_labels().to_vec(),
                structure.signal_labels().to_vec(),
            )?,
            Prior::new(b.entries().transpose() * marginal, b.state_labels().to_vec())?,
        )
    }
}

/// Keeps a maximal set of linearly independent state columns of `B` (earliest first) and folds each
/// removed state into the kept ones.
pub fn reduce_dependencies(landscape: &BeliefLandscape, tol: &Tolerances) -> Result<Reduction> {
    tol.validate()?;
    let b = landscape.b();
    let labels = landscape.beliefs();
    let n_states = landscape.n_states();

    let mut kept: Vec<usize> = Vec::new();
    let mut removed = Vec::new();
    for t in 0..n_states {
        let mut candidate = kept.clone();
        candidate.push(t);
        if linalg::rank(&b.select_columns(&candidate), tol) == candidate.len() {
            kept = candidate;
        } else {
            removed.push(t);
        }
    }

    let basis = b.select_columns(&kept);
    let mut weights = DMatrix::zeros(removed.len(), kept.len());
    for (r, &t) in removed.iter().enumerate() {
        let column = b.column(t).into_owned();
        let w = linalg::least_squares_coefficients(&basis, &column, tol)?;
        let residual = (&basis * &w - &column).amax();
        if residual > tol.matching || w.min() < -tol.entry {
            return Err(Error::NotConvexDependent {
                state: labels.state_labels()[t].clone(),
            });
        }
        weights.row_mut(r).copy_from(&w.map(|x| x.max(0.0)).transpose());
    }

    let scale = DVector::from_fn(kept.len(), |j, _| 1.0 + weights.column(j).sum());
    let mut reduced_b = basis;
    for (j, mut col) in reduced_b.column_iter_mut().enumerate() {
        col *= scale[j];
    }
    let kept_labels = kept.iter().map(|&t| labels.state_labels()[t].clone()).collect();
    let beliefs = StateBeliefMatrix::new(reduced_b, kept_labels, labels.signal_labels().to_vec())?;
    Ok(Reduction {
        reduced: BeliefLandscape::new(beliefs, landscape.hypothetical().clone())?,
        kept,
        removed,
        weights,
        beliefs: labels.clone(),
        tol: *tol,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReducedIdentification {
    pub reduction: Reduction,
    pub reduced: IdentificationResult,
    /// The identified environment mapped back to all states (representative prior for families).
    pub embedded: InformationalEnvironment,
}

/// [`reduce_dependencies`] followed by [`identify`] on the reduced landscape and the embedding.
pub fn identify_reduced(landscape: &BeliefLandscape, tol: &Tolerances) -> Result<ReducedIdentification> {
    let reduction = reduce_dependencies(landscape, tol)?;
    let reduced = identify(&reduction.reduced, tol)?;
    let embedded = reduction.embed(&reduced.structure, &reduced.prior.representative())?;
    Ok(ReducedIdentification {
        reduction,
        reduced,
        embedded,
    })
}
