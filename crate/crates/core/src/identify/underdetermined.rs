//! More states than signals: ridge limit, null-space family and prior recovery.

use nalgebra::DMatrix;

use super::{prior_family_from_matrix, reconstruct_from_prior, restore_feasibility, Feasibility, PriorFamily};
use crate::error::Result;
use crate::linalg::{self, NullSpaceBasis, Regularizer};
use crate::model::{BeliefLandscape, InformationStructure, Tolerances};

#[derive(Debug, Clone, PartialEq)]
pub struct UnderdeterminedResult {
    /// `lim_{λ -> 0} (B^T B + λ M)^{-1} B^T Q`; solves `Q = B X` but need not be stochastic.
    pub ridge_limit: DMatrix<f64>,
    /// Every exact solution is `ridge_limit` plus, column by column, vectors in this span.
    pub null_basis: NullSpaceBasis,
    /// `max |B X - Q|` for the ridge limit.
    pub residual: f64,
    /// Eigenvalue-1 eigenvector(s) of `B^T X^T`, which do not depend on which exact solution `X` is used.
    pub prior: PriorFamily,
    /// Information structures among the exact solutions.
    pub feasible: Feasibility,
    /// A single information structure consistent with the data and the recovered prior, when one exists.
    ///
    /// With a unique prior this is the Bayes-consistent member of the feasible set;
    /// otherwise it is only set when the feasible set is a single point.
    pub restored: Option<InformationStructure>,
}

/// [`identify_underdetermined_with`] using the identity regularizer.
pub fn identify_underdetermined(landscape: &BeliefLandscape, tol: &Tolerances) -> Result<UnderdeterminedResult> {
    identify_underdetermined_with(landscape, &Regularizer::identity(landscape.n_states()), tol)
}

pub fn identify_underdetermined_with(
    landscape: &BeliefLandscape,
    reg: &Regularizer,
    tol: &Tolerances,
) -> Result<UnderdeterminedResult> {
    tol.validate()?;
    let (b, q) = (landscape.b(), landscape.q());
    let ridge_limit = linalg::ridge_limit(b, q, reg, tol)?;
    let residual = (b * &ridge_limit - q).amax();
    let null_basis = linalg::null_space_basis(b, tol);
    let m = b.transpose() * ridge_limit.transpose();
    let prior = prior_family_from_matrix(&m, landscape.beliefs().state_labels(), tol)?;
    let feasible = restore_feasibility(&ridge_limit, &null_basis, tol)?;

    let labelled = |x: DMatrix<f64>| {
        InformationStructure::new(
            x,
            landscape.beliefs().state_labels().to_vec(),
            landscape.beliefs().signal_labels().to_vec(),
        )
    };
    let restored = match (&feasible, prior.unique()) {
        (Feasibility::Unique(x), _) => Some(labelled(x.clone())?),
        (Feasibility::Family { .. }, Some(p)) => reconstruct_from_prior(landscape.beliefs(), p, tol)
            .ok()
            .filter(|s| feasible.contains(s.entries(), tol)),
        _ => None,
    };

    Ok(UnderdeterminedResult {
        ridge_limit,
        null_basis,
        residual,
        prior,
        feasible,
        restored,
    })
}
