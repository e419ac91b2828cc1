//! Identification through the signal marginal, the left eigenvalue-1 eigenvector of `Q`.

use super::bayes_structure;
use crate::error::{Error, Result};
use crate::linalg::{self, ClassDecomposition, EigenvalueOne};
use crate::model::{BeliefLandscape, InformationStructure, Prior, SignalMarginal, Tolerances};

#[derive(Debug, Clone, PartialEq)]
pub struct SignalPriorsResult {
    /// One marginal when `Q` is irreducible, one per closed class of `Q^T` otherwise.
    pub marginals: Vec<SignalMarginal>,
    /// `B^T ℙ` for each marginal.
    pub priors: Vec<Prior>,
    /// `I(θ)[s] = b[s, θ] ℙ[s] / p(θ)` using the (equal-weight mixture of the) marginals.
    pub structure: InformationStructure,
    /// Class structure of `Q^T` when the marginal is not unique.
    pub classes: Option<ClassDecomposition>,
}

impl SignalPriorsResult {
    pub fn is_unique(&self) -> bool {
        self.classes.is_none()
    }
}

pub fn signal_priors_identify(landscape: &BeliefLandscape, tol: &Tolerances) -> Result<SignalPriorsResult> {
    tol.validate()?;
    let (b, q) = (landscape.b(), landscape.q());
    let (vectors, classes) = match linalg::unit_eigenvector_eigenvalue_one(&q.transpose(), tol) {
        EigenvalueOne::Unique(v) => (vec![v], None),
        EigenvalueOne::Family { extremes, classes } => (extremes, Some(classes)),
        EigenvalueOne::None => return Err(Error::NotModelGenerated),
    };
    let signal_labels = landscape.beliefs().signal_labels().to_vec();
    let state_labels = landscape.beliefs().state_labels().to_vec();

    let mixture = vectors
        .iter()
        .fold(nalgebra::DVector::zeros(q.nrows()), |acc, v| acc + v)
        / vectors.len() as f64;
    let structure = InformationStructure::new(
        bayes_structure(b, &mixture, tol),
        state_labels.clone(),
        signal_labels.clone(),
    )?;
    let priors = vectors
        .iter()
        .map(|v| Prior::new(b.transpose() * v, state_labels.clone()))
        .collect::<Result<Vec<_>>>()?;
    let marginals = vectors
        .into_iter()
        .map(|v| SignalMarginal::new(v, signal_labels.clone()))
        .collect::<Result<Vec<_>>>()?;
    Ok(SignalPriorsResult {
        marginals,
        priors,
        structure,
        classes,
    })
}
