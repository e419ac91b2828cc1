//! Rationalizing a landscape with one prior per belief type.

use nalgebra::DVector;

use super::identify_structure;
use crate::error::{Error, Result};
use crate::model::{BeliefLandscape, InformationStructure, Prior, Tolerances};

#[derive(Debug, Clone, PartialEq)]
pub struct NonCommonPriorRationalization {
    /// The regression structure, shared by all types.
    pub structure: InformationStructure,
    /// `type_priors[s]` is the prior that type `s` would have needed.
    pub type_priors: Vec<Prior>,
    /// `max |posterior - B row|` per type.
    pub belief_residuals: Vec<f64>,
    /// `max |predicted peer distribution - Q row|` per type.
    pub hypothetical_residuals: Vec<f64>,
}

/// Per-type priors `p^s(θ) ∝ b[s, θ] / I(θ)[s]` under which the regression structure reproduces `B` and `Q`.
///
/// This needs a nonnegative regression output that solves `Q = B I` exactly,
/// which holds whenever `B` is square and invertible.
pub fn rationalize_noncommon(landscape: &BeliefLandscape, tol: &Tolerances) -> Result<NonCommonPriorRationalization> {
    let estimate = identify_structure(landscape, tol)?;
    let labels = landscape.beliefs();
    if let Some(neg) = estimate.negative.first() {
        return Err(Error::NegativeStructure {
            state: labels.state_labels()[neg.state].clone(),
            signal: labels.signal_labels()[neg.signal].clone(),
            value: neg.value,
        });
    }
    if estimate.residual > tol.matching {
        return Err(Error::NotRationalizable {
            residual: estimate.residual,
        });
    }

    let (b, q) = (landscape.b(), landscape.q());
    let structure = estimate.structure;
    let x = structure.entries();
    let n_states = landscape.n_states();

    let mut type_priors = Vec::with_capacity(landscape.n_signals());
    let mut belief_residuals = Vec::with_capacity(landscape.n_signals());
    let mut hypothetical_residuals = Vec::with_capacity(landscape.n_signals());
    for s in 0..landscape.n_signals() {
        let mut r = DVector::zeros(n_states);
        for t in 0..n_states {
            let (likelihood, belief) = (x[(t, s)], b[(s, t)]);
            if likelihood > tol.entry {
                r[t] = belief / likelihood;
            } else if belief > tol.entry {
                return Err(Error::DivisionByZeroStructure {
                    signal: labels.signal_labels()[s].clone(),
                    state: labels.state_labels()[t].clone(),
                });
            }
        }
        let prior = &r / r.sum();

        // Bayes update of the type's prior at its own signal.
        let joint = prior.component_mul(&x.column(s));
        let posterior = &joint / joint.sum();
        belief_residuals.push((posterior.transpose() - b.row(s)).amax());
        let predicted = posterior.transpose() * x;
        hypothetical_residuals.push((predicted - q.row(s)).amax());

        type_priors.push(Prior::new(prior, labels.state_labels().to_vec())?);
    }

    Ok(NonCommonPriorRationalization {
        structure,
        type_priors,
        belief_residuals,
        hypothetical_residuals,
    })
}
