//! Inverse procedures: recover the information structure and the prior from a landscape.
//!
//! The main entry point is [`identify`], which regresses each column of `Q` on
//! `B` and then reads the prior off the eigenvalue-1 eigenvector of `B^T I^T`.
//! Landscapes outside its preconditions go through
//! [`identify_underdetermined`] (more states than signals) or
//! [`reduce_dependencies`] (linearly dependent states).

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::forward;
use crate::linalg::{self, ClassDecomposition, EigenvalueOne};
use crate::model::{
    BeliefLandscape, InformationStructure, InformationalEnvironment, Prior, StateBeliefMatrix, Tolerances,
};

mod consistency;
mod feasibility;
mod infer;
mod partition;
mod rationalize;
mod reduce;
mod signal_priors;
mod underdetermined;

pub use consistency::{consistency_check, ConsistencyCondition, ConsistencyVerdict};
pub use feasibility::{reconstruct_from_prior, restore_feasibility, Feasibility};
pub use infer::{infer_state, infer_state_from_distribution, StateInference};
pub use partition::{detect_partitional, Partition, PartitionOutcome};
pub use rationalize::{rationalize_noncommon, NonCommonPriorRationalization};
pub use reduce::{identify_reduced, reduce_dependencies, ReducedIdentification, Reduction};
pub use signal_priors::{signal_priors_identify, SignalPriorsResult};
pub use underdetermined::{identify_underdetermined, identify_underdetermined_with, UnderdeterminedResult};

/// A regression entry below `-tol.entry`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NegativeEntry {
    pub state: usize,
    pub signal: usize,
    pub value: f64,
}

/// Output of [`identify_structure`].
#[derive(Debug, Clone, PartialEq)]
pub struct StructureEstimate {
    /// Regression output after clipping float noise.
    pub structure: InformationStructure,
    /// Regression output before clipping.
    pub raw: DMatrix<f64>,
    /// Entries more negative than `-tol.entry`; nonempty means `Q` is outside the model.
    pub negative: Vec<NegativeEntry>,
    /// Number of entries moved onto `[0, 1]` by clipping.
    pub clipped: usize,
    /// `max |B I - Q|` for the raw regression output.
    pub residual: f64,
    /// `max |row sum - 1|` of the raw regression output.
    pub row_sum_error: f64,
}

impl StructureEstimate {
    pub fn is_nonnegative(&self) -> bool {
        self.negative.is_empty()
    }
}

/// The prior identified from `M = B^T I^T`.
#[derive(Debug, Clone, PartialEq)]
pub enum PriorFamily {
    Unique(Prior),
    /// One prior per closed class of `M`, each supported on its class.
    /// Any convex combination is also consistent with the data.
    Classes {
        priors: Vec<ClassPrior>,
        decomposition: ClassDecomposition,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClassPrior {
    pub states: Vec<usize>,
    pub prior: Prior,
}

impl PriorFamily {
    pub fn is_unique(&self) -> bool {
        matches!(self, PriorFamily::Unique(_))
    }

    pub fn unique(&self) -> Option<&Prior> {
        match self {
            PriorFamily::Unique(p) => Some(p),
            PriorFamily::Classes { .. } => None,
        }
    }

    /// The unique prior, or every class prior.
    pub fn members(&self) -> Vec<&Prior> {
        match self {
            PriorFamily::Unique(p) => vec![p],
            PriorFamily::Classes { priors, .. } => priors.iter().map(|c| &c.prior).collect(),
        }
    }

    /// The unique prior, or the equal-weight mixture of the class priors.
    pub fn representative(&self) -> Prior {
        match self {
            PriorFamily::Unique(p) => p.clone(),
            PriorFamily::Classes { priors, .. } => {
                let n = priors[0].prior.len();
                let sum = priors.iter().fold(DVector::zeros(n), |acc, c| acc + c.prior.entries());
                Prior::new(sum / priors.len() as f64, priors[0].prior.state_labels().to_vec())
                    .expect("class priors share labels")
            }
        }
    }

    pub fn is_nonnegative(&self, tol: &Tolerances) -> bool {
        self.members().iter().all(|p| p.is_nonnegative(tol))
    }
}

/// Forward-model residuals of a candidate environment against the observed landscape.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RoundTrip {
    /// `max |B' - B|`, infinite when the regenerated landscape has a different shape.
    pub beliefs: f64,
    /// `max |Q' - Q|`, infinite when the regenerated landscape has a different shape.
    pub hypothetical: f64,
}

impl RoundTrip {
    pub fn max(&self) -> f64 {
        self.beliefs.max(self.hypothetical)
    }

    pub fn passes(&self, tol: &Tolerances) -> bool {
        self.max() <= tol.matching
    }
}

/// Output of [`identify`].
#[derive(Debug, Clone, PartialEq)]
pub struct IdentificationResult {
    pub structure: InformationStructure,
    pub prior: PriorFamily,
    /// `B^T I^T`; entry `(i, j)` is the expected peer belief on state `i` when the state is `j`.
    pub peer_accuracy: DMatrix<f64>,
    pub estimate: StructureEstimate,
    /// Regenerating from the structure and the representative prior.
    pub round_trip: RoundTrip,
}

pub(crate) fn max_abs_diff(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    if a.shape() != b.shape() {
        return f64::INFINITY;
    }
    (a - b).amax()
}

/// Regenerates a landscape from `(structure, prior)` and compares it with `landscape`.
pub fn round_trip(
    landscape: &BeliefLandscape,
    structure: &InformationStructure,
    prior: &Prior,
    tol: &Tolerances,
) -> RoundTrip {
    let failed = RoundTrip {
        beliefs: f64::INFINITY,
        hypothetical: f64::INFINITY,
    };
    let Ok(env) = InformationalEnvironment::new(structure.clone(), prior.clone()) else {
        return failed;
    };
    match forward::generate_landscape(&env, tol) {
        Ok(g) if g.dropped.is_empty() => RoundTrip {
            beliefs: max_abs_diff(g.landscape.b(), landscape.b()),
            hypothetical: max_abs_diff(g.landscape.q(), landscape.q()),
        },
        _ => failed,
    }
}

/// Clips entries in `[-tol.entry, 0)` to zero and `(1, 1 + tol.entry]` to one.
///
/// A row is renormalized afterwards only when that moves no entry by more than `tol.entry`.
fn clip_noise(raw: &DMatrix<f64>, tol: &Tolerances) -> (DMatrix<f64>, usize) {
    let mut out = raw.clone();
    let mut clipped = 0;
    for mut row in out.row_iter_mut() {
        let mut touched = false;
        for x in row.iter_mut() {
            if (-tol.entry..0.0).contains(x) {
                *x = 0.0;
                touched = true;
                clipped += 1;
            } else if *x > 1.0 && *x <= 1.0 + tol.entry {
                *x = 1.0;
                touched = true;
                clipped += 1;
            }
        }
        if touched {
            let sum = row.sum();
            if sum > 0.0 {
                let renormalized = row.map(|x| x / sum);
                if (&renormalized - &row).amax() <= tol.entry {
                    row.copy_from(&renormalized);
                }
            }
        }
    }
    (out, clipped)
}

fn structure_from_matrix(entries: DMatrix<f64>, beliefs: &StateBeliefMatrix) -> Result<InformationStructure> {
    InformationStructure::new(
        entries,
        beliefs.state_labels().to_vec(),
        beliefs.signal_labels().to_vec(),
    )
}

/// Regresses every column of `Q` on `B`: `I = (B^T B)^{-1} B^T Q`.
pub fn identify_structure(landscape: &BeliefLandscape, tol: &Tolerances) -> Result<StructureEstimate> {
    tol.validate()?;
    let (b, q) = (landscape.b(), landscape.q());
    if landscape.n_states() > landscape.n_signals() {
        return Err(Error::Underdetermined {
            states: landscape.n_states(),
            signals: landscape.n_signals(),
        });
    }
    let raw = linalg::least_squares(b, q, tol)?;

    let mut negative = Vec::new();
    for state in 0..raw.nrows() {
        for signal in 0..raw.ncols() {
            let value = raw[(state, signal)];
            if value < -tol.entry {
                negative.push(NegativeEntry { state, signal, value });
            }
        }
    }

    let residual = (b * &raw - q).amax();
    let row_sum_error = raw.row_iter().map(|r| (r.sum() - 1.0).abs()).fold(0.0, f64::max);
    let (clipped_entries, clipped) = clip_noise(&raw, tol);
    Ok(StructureEstimate {
        structure: structure_from_matrix(clipped_entries, landscape.beliefs())?,
        raw,
        negative,
        clipped,
        residual,
        row_sum_error,
    })
}

/// `B^T I^T`.
pub fn peer_accuracy_matrix(beliefs: &StateBeliefMatrix, structure: &InformationStructure) -> Result<DMatrix<f64>> {
    check_pair(beliefs, structure)?;
    Ok(beliefs.entries().transpose() * structure.entries().transpose())
}

fn check_pair(beliefs: &StateBeliefMatrix, structure: &InformationStructure) -> Result<()> {
    if beliefs.n_states() != structure.n_states() {
        return Err(Error::DimensionMismatch {
            axis: "states of information structure".into(),
            expected: beliefs.n_states(),
            found: structure.n_states(),
        });
    }
    if beliefs.n_signals() != structure.n_signals() {
        return Err(Error::DimensionMismatch {
            axis: "signals of information structure".into(),
            expected: beliefs.n_signals(),
            found: structure.n_signals(),
        });
    }
    Ok(())
}

pub(crate) fn prior_family_from_matrix(
    m: &DMatrix<f64>,
    state_labels: &[String],
    tol: &Tolerances,
) -> Result<PriorFamily> {
    let prior = |v: &DVector<f64>| Prior::new(v.clone(), state_labels.to_vec()).expect("labels match the matrix size");
    match linalg::unit_eigenvector_eigenvalue_one(m, tol) {
        EigenvalueOne::Unique(v) => Ok(PriorFamily::Unique(prior(&v))),
        EigenvalueOne::Family { extremes, classes } => {
            let priors = extremes
                .iter()
                .map(|v| ClassPrior {
                    states: (0..v.len()).filter(|&i| v[i].abs() > tol.entry).collect(),
                    prior: prior(v),
                })
                .collect();
            Ok(PriorFamily::Classes {
                priors,
                decomposition: classes,
            })
        }
        EigenvalueOne::None => Err(Error::NotModelGenerated),
    }
}

/// Eigenvalue-1 eigenvector(s) of `B^T I^T`, normalized to sum to one.
pub fn identify_prior(
    beliefs: &StateBeliefMatrix,
    structure: &InformationStructure,
    tol: &Tolerances,
) -> Result<PriorFamily> {
    let m = peer_accuracy_matrix(beliefs, structure)?;
    prior_family_from_matrix(&m, beliefs.state_labels(), tol)
}

/// Regression identification of the structure followed by prior recovery.
pub fn identify(landscape: &BeliefLandscape, tol: &Tolerances) -> Result<IdentificationResult> {
    let estimate = identify_structure(landscape, tol)?;
    let structure = estimate.structure.clone();
    let prior = identify_prior(landscape.beliefs(), &structure, tol)?;
    let peer_accuracy = peer_accuracy_matrix(landscape.beliefs(), &structure)?;
    let round_trip = round_trip(landscape, &structure, &prior.representative(), tol);
    Ok(IdentificationResult {
        structure,
        prior,
        peer_accuracy,
        estimate,
        round_trip,
    })
}

/// Regression of a single column of `Q`: the probability of that signal in each state.
pub fn identify_single_column(
    beliefs: &StateBeliefMatrix,
    column: &DVector<f64>,
    tol: &Tolerances,
) -> Result<DVector<f64>> {
    if beliefs.n_states() > beliefs.n_signals() {
        return Err(Error::Underdetermined {
            states: beliefs.n_states(),
            signals: beliefs.n_signals(),
        });
    }
    linalg::least_squares_coefficients(beliefs.entries(), column, tol)
}

/// `I(θ)[s] = b[s, θ] w[s] / Σ_s' b[s', θ] w[s']` for nonnegative signal weights `w`.
///
/// The denominator is the implied prior `B^T w`. A state with zero implied
/// prior has no identified row; it gets its belief column normalized instead.
pub(crate) fn bayes_structure(b: &DMatrix<f64>, weights: &DVector<f64>, tol: &Tolerances) -> DMatrix<f64> {
    let (n_signals, n_states) = b.shape();
    let mut out = DMatrix::zeros(n_states, n_signals);
    for t in 0..n_states {
        let mass: f64 = (0..n_signals).map(|s| b[(s, t)] * weights[s]).sum();
        if mass > tol.entry {
            for s in 0..n_signals {
                out[(t, s)] = b[(s, t)] * weights[s] / mass;
            }
        } else {
            let col_sum = b.column(t).sum();
            for s in 0..n_signals {
                out[(t, s)] = b[(s, t)] / col_sum;
            }
        }
    }
    out
}

#[cfg(test)]
mod tests;
