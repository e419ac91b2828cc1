//! Inferring the realized state from the observed share of a belief type.

use nalgebra::{DMatrix, DVector};

use crate::model::Tolerances;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum StateInference {
    State(usize),
    /// Several states fit equally well (within tolerance); listed in index order.
    Ambiguous(Vec<usize>),
}

fn pick(gaps: &[f64], values: Option<&[f64]>, tol: &Tolerances) -> StateInference {
    let Some(best) = (0..gaps.len()).min_by(|&a, &b| gaps[a].total_cmp(&gaps[b])) else {
        return StateInference::Ambiguous(Vec::new());
    };
    let candidates: Vec<usize> = (0..gaps.len())
        .filter(|&t| {
            t == best
                || gaps[t] - gaps[best] < tol.matching
                || values.is_some_and(|v| (v[t] - v[best]).abs() <= 2.0 * tol.matching)
        })
        .collect();
    if candidates.len() == 1 {
        StateInference::State(best)
    } else {
        StateInference::Ambiguous(candidates)
    }
}

/// The state whose probability of producing a signal is closest to that signal's observed share.
pub fn infer_state(column: &DVector<f64>, observed_share: f64, tol: &Tolerances) -> StateInference {
    let gaps: Vec<f64> = column.iter().map(|&x| (x - observed_share).abs()).collect();
    pick(&gaps, Some(column.as_slice()), tol)
}

/// The state whose signal distribution (a row of `structure`) is closest in squared distance to `observed`.
pub fn infer_state_from_distribution(
    structure: &DMatrix<f64>,
    observed: &DVector<f64>,
    tol: &Tolerances,
) -> StateInference {
    let gaps: Vec<f64> = structure
        .row_iter()
        .map(|row| (row.transpose() - observed).norm_squared())
        .collect();
    pick(&gaps, None, tol)
}
