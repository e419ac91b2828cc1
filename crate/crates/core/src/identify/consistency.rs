//! Whether a landscape could have been generated by some informational environment.

use std::fmt;

use super::{identify_prior, identify_structure, round_trip, PriorFamily, RoundTrip, StructureEstimate};
use crate::error::{Error, Result};
use crate::model::{BeliefLandscape, Tolerances};

/// The three conditions a model-generated landscape satisfies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ConsistencyCondition {
    /// Regression output has no entry below `-tol.entry`.
    NonnegativeStructure,
    /// `B^T I^T` has an eigenvalue-1 eigenvector on the simplex.
    Prior,
    /// Regenerating from the identified environment reproduces `B` and `Q`.
    RoundTrip,
}

impl fmt::Display for ConsistencyCondition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ConsistencyCondition::NonnegativeStructure => "nonnegative-structure",
            ConsistencyCondition::Prior => "prior",
            ConsistencyCondition::RoundTrip => "round-trip",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConsistencyVerdict {
    pub failed: Vec<ConsistencyCondition>,
    pub estimate: StructureEstimate,
    /// `None` when `B^T I^T` has no eigenvalue 1.
    pub prior: Option<PriorFamily>,
    /// `None` when there was no prior to regenerate from.
    pub round_trip: Option<RoundTrip>,
}

impl ConsistencyVerdict {
    pub fn is_consistent(&self) -> bool {
        self.failed.is_empty()
    }

    pub fn failed(&self, condition: ConsistencyCondition) -> bool {
        self.failed.contains(&condition)
    }
}

/// Runs the regression path and reports which consistency conditions fail.
///
/// Structural problems (dimension, rank) are errors; everything else is a verdict.
pub fn consistency_check(landscape: &BeliefLandscape, tol: &Tolerances) -> Result<ConsistencyVerdict> {
    let estimate = identify_structure(landscape, tol)?;
    let mut failed = Vec::new();
    if !estimate.is_nonnegative() {
        failed.push(ConsistencyCondition::NonnegativeStructure);
    }
    let prior = match identify_prior(landscape.beliefs(), &estimate.structure, tol) {
        Ok(p) => Some(p),
        Err(Error::NotModelGenerated) => None,
        Err(e) => return Err(e),
    };
    if !prior.as_ref().is_some_and(|p| p.is_nonnegative(tol)) {
        failed.push(ConsistencyCondition::Prior);
    }
    let round_trip = prior
        .as_ref()
        .map(|p| round_trip(landscape, &estimate.structure, &p.representative(), tol));
    if !round_trip.is_some_and(|r| r.passes(tol)) {
        failed.push(ConsistencyCondition::RoundTrip);
    }
    Ok(ConsistencyVerdict {
        failed,
        estimate,
        prior,
        round_trip,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use approx::assert_abs_diff_eq;
    use nalgebra::DVector;

    fn tol() -> Tolerances {
        Tolerances::default()
    }

    #[test]
    fn ex2_five_eighths_is_consistent() {
        let v = consistency_check(&fixtures::ex2_landscape(0.625, 0.625), &tol()).unwrap();
        assert!(v.is_consistent(), "{:?}", v.failed);
        let p = v.prior.unwrap();
        assert_abs_diff_eq!(
            p.unique().unwrap().entries(),
            &DVector::from_vec(vec![0.5, 0.5]),
            epsilon = 1e-12
        );
    }

    #[test]
    fn ex2_nine_sixteenths_fails_the_round_trip() {
        let v = consistency_check(&fixtures::ex2_landscape(9.0 / 16.0, 9.0 / 16.0), &tol()).unwrap();
        assert_eq!(v.failed, vec![ConsistencyCondition::RoundTrip]);
    }

    #[test]
    fn q_tilde_fails_nonnegativity() {
        let v = consistency_check(&fixtures::ex1_q_tilde_landscape(), &tol()).unwrap();
        assert!(v.failed(ConsistencyCondition::NonnegativeStructure));
        assert!(!v.is_consistent());
    }

    #[test]
    fn structural_errors_propagate() {
        assert!(matches!(
            consistency_check(&fixtures::ex3_landscape(), &tol()),
            Err(Error::Underdetermined { .. })
        ));
        assert!(matches!(
            consistency_check(&fixtures::ex4_landscape(), &tol()),
            Err(Error::RankDeficient { .. })
        ));
    }
}
