//! Domain types for belief landscapes and informational environments.
//!
//! Orientation is fixed across the crate:
//!
//! - state beliefs `B`: rows are signals (belief types), columns are states;
//! - hypothetical beliefs `Q`: rows are the conditioning type, columns the peer's type;
//! - information structure `I`: rows are states, columns are signals.
//!
//! With this orientation the law of total probability reads `Q = B * I`.

use std::collections::HashSet;
use std::fmt;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::linalg;

/// Numerical tolerances shared by every routine.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    /// Allowed deviation of a row (or vector) sum from 1.
    pub stochastic: f64,
    /// Threshold for "positive entry"; negatives above `-entry` count as zero.
    pub entry: f64,
    /// Relative singular value cutoff, scaled by the largest singular value.
    pub rank: f64,
    /// Equality of matrices and vectors in checks.
    pub matching: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            stochastic: 1e-9,
            entry: 1e-9,
            rank: 1e-10,
            matching: 1e-8,
        }
    }
}

impl Tolerances {
    pub fn validate(&self) -> Result<()> {
        for (name, value) in [
            ("tol_stochastic", self.stochastic),
            ("tol_entry", self.entry),
            ("tol_rank", self.rank),
            ("tol_match", self.matching),
        ] {
            if !(value.is_finite() && value > 0.0) {
                return Err(Error::InvalidTolerance { name, value });
            }
        }
        Ok(())
    }

    /// Absolute singular value cutoff for a matrix whose largest singular value is `sigma_max`.
    pub fn rank_cutoff(&self, sigma_max: f64) -> f64 {
        self.rank * sigma_max
    }
}

/// `t1, t2, ...` style labels.
pub fn default_labels(prefix: &str, n: usize) -> Vec<String> {
    (1..=n).map(|i| format!("{prefix}{i}")).collect()
}

pub fn default_state_labels(n: usize) -> Vec<String> {
    default_labels("t", n)
}

pub fn default_signal_labels(n: usize) -> Vec<String> {
    default_labels("s", n)
}

/// Build a dense matrix from row vectors; ragged input is rejected.
pub fn matrix_from_rows(rows: &[Vec<f64>]) -> Result<DMatrix<f64>> {
    let ncols = rows.first().map_or(0, Vec::len);
    for (i, row) in rows.iter().enumerate() {
        if row.len() != ncols {
            return Err(Error::DimensionMismatch {
                axis: format!("row {} length", i + 1),
                expected: ncols,
                found: row.len(),
            });
        }
    }
    Ok(DMatrix::from_fn(rows.len(), ncols, |i, j| rows[i][j]))
}

pub fn matrix_to_rows(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    (0..m.nrows()).map(|i| m.row(i).iter().copied().collect()).collect()
}

fn check_labels(axis: &str, labels: &[String], expected: usize) -> Result<()> {
    if labels.len() != expected {
        return Err(Error::DimensionMismatch {
            axis: format!("{axis} labels"),
            expected,
            found: labels.len(),
        });
    }
    let mut seen = HashSet::new();
    for label in labels {
        if !seen.insert(label.as_str()) {
            return Err(Error::DuplicateLabel {
                axis: axis.to_string(),
                label: label.clone(),
            });
        }
    }
    Ok(())
}

pub(crate) fn ensure_same_labels(axis: &str, left: &[String], right: &[String]) -> Result<()> {
    if left != right {
        return Err(Error::LabelMismatch {
            axis: axis.to_string(),
            left: left.to_vec(),
            right: right.to_vec(),
        });
    }
    Ok(())
}

/// Posterior beliefs: row `s` is belief type `s`'s distribution over states.
#[derive(Debug, Clone, PartialEq)]
pub struct StateBeliefMatrix {
    entries: DMatrix<f64>,
    state_labels: Vec<String>,
    signal_labels: Vec<String>,
}

impl StateBeliefMatrix {
    pub fn new(entries: DMatrix<f64>, state_labels: Vec<String>, signal_labels: Vec<String>) -> Result<Self> {
        check_labels("state", &state_labels, entries.ncols())?;
        check_labels("signal", &signal_labels, entries.nrows())?;
        Ok(Self {
            entries,
            state_labels,
            signal_labels,
        })
    }

    pub fn with_default_labels(entries: DMatrix<f64>) -> Self {
        let state_labels = default_state_labels(entries.ncols());
        let signal_labels = default_signal_labels(entries.nrows());
        Self {
            entries,
            state_labels,
            signal_labels,
        }
    }

    pub fn entries(&self) -> &DMatrix<f64> {
        &self.entries
    }

    pub fn state_labels(&self) -> &[String] {
        &self.state_labels
    }

    pub fn signal_labels(&self) -> &[String] {
        &self.signal_labels
    }

    pub fn n_signals(&self) -> usize {
        self.entries.nrows()
    }

    pub fn n_states(&self) -> usize {
        self.entries.ncols()
    }

    pub fn rank(&self, tol: &Tolerances) -> usize {
        linalg::rank(&self.entries, tol)
    }

    pub fn has_full_column_rank(&self, tol: &Tolerances) -> bool {
        self.rank(tol) == self.n_states()
    }
}

/// Row `s` is type `s`'s expected distribution of a random peer's type.
#[derive(Debug, Clone, PartialEq)]
pub struct HypotheticalBeliefMatrix {
    entries: DMatrix<f64>,
    signal_labels: Vec<String>,
}

impl HypotheticalBeliefMatrix {
    pub fn new(entries: DMatrix<f64>, signal_labels: Vec<String>) -> Result<Self> {
        if entries.nrows() != entries.ncols() {
            return Err(Error::DimensionMismatch {
                axis: "hypothetical belief columns".into(),
                expected: entries.nrows(),
                found: entries.ncols(),
            });
        }
        check_labels("signal", &signal_labels, entries.nrows())?;
        Ok(Self { entries, signal_labels })
    }

    pub fn with_default_labels(entries: DMatrix<f64>) -> Result<Self> {
        let labels = default_signal_labels(entries.nrows());
        Self::new(entries, labels)
    }

    pub fn entries(&self) -> &DMatrix<f64> {
        &self.entries
    }

    pub fn signal_labels(&self) -> &[String] {
        &self.signal_labels
    }

    pub fn n_signals(&self) -> usize {
        self.entries.nrows()
    }

    /// Column `s` as a vector: each type's probability that a peer is of type `s`.
    pub fn column(&self, signal: usize) -> DVector<f64> {
        self.entries.column(signal).into_owned()
    }
}

/// A Blackwell experiment: row `θ` is the signal distribution in state `θ`.
#[derive(Debug, Clone, PartialEq)]
pub struct InformationStructure {
    entries: DMatrix<f64>,
    state_labels: Vec<String>,
    signal_labels: Vec<String>,
}

impl InformationStructure {
    pub fn new(entries: DMatrix<f64>, state_labels: Vec<String>, signal_labels: Vec<String>) -> Result<Self> {
        check_labels("state", &state_labels, entries.nrows())?;
        check_labels("signal", &signal_labels, entries.ncols())?;
        Ok(Self {
            entries,
            state_labels,
            signal_labels,
        })
    }

    pub fn with_default_labels(entries: DMatrix<f64>) -> Self {
        let state_labels = default_state_labels(entries.nrows());
        let signal_labels = default_signal_labels(entries.ncols());
        Self {
            entries,
            state_labels,
            signal_labels,
        }
    }

    pub fn entries(&self) -> &DMatrix<f64> {
        &self.entries
    }

    pub fn state_labels(&self) -> &[String] {
        &self.state_labels
    }

    pub fn signal_labels(&self) -> &[String] {
        &self.signal_labels
    }

    pub fn n_states(&self) -> usize {
        self.entries.nrows()
    }

    pub fn n_signals(&self) -> usize {
        self.entries.ncols()
    }

    /// Probability of the given signal in each state.
    pub fn signal_column(&self, signal: usize) -> DVector<f64> {
        self.entries.column(signal).into_owned()
    }

    pub fn signal_index(&self, label: &str) -> Option<usize> {
        self.signal_labels.iter().position(|l| l == label)
    }
}

/// A probability vector with labelled coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct Distribution {
    entries: DVector<f64>,
    labels: Vec<String>,
}

impl Distribution {
    fn new(entries: DVector<f64>, labels: Vec<String>, axis: &str) -> Result<Self> {
        check_labels(axis, &labels, entries.len())?;
        Ok(Self { entries, labels })
    }

    pub fn entries(&self) -> &DVector<f64> {
        &self.entries
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn sum(&self) -> f64 {
        self.entries.sum()
    }

    /// All entries strictly above `tol.entry`.
    pub fn is_interior(&self, tol: &Tolerances) -> bool {
        self.entries.iter().all(|&x| x > tol.entry)
    }

    pub fn is_nonnegative(&self, tol: &Tolerances) -> bool {
        self.entries.iter().all(|&x| x >= -tol.entry)
    }
}

/// Prior over states.
#[derive(Debug, Clone, PartialEq)]
pub struct Prior(Distribution);

impl Prior {
    pub fn new(entries: DVector<f64>, state_labels: Vec<String>) -> Result<Self> {
        Distribution::new(entries, state_labels, "state").map(Self)
    }

    pub fn with_default_labels(entries: DVector<f64>) -> Self {
        let labels = default_state_labels(entries.len());
        Self(Distribution { entries, labels })
    }

    pub fn uniform(n: usize) -> Self {
        Self::with_default_labels(DVector::from_element(n, 1.0 / n as f64))
    }

    pub fn state_labels(&self) -> &[String] {
        self.0.labels()
    }
}

impl std::ops::Deref for Prior {
    type Target = Distribution;
    fn deref(&self) -> &Distribution {
        &self.0
    }
}

/// Ex-ante probability of each signal.
#[derive(Debug, Clone, PartialEq)]
pub struct SignalMarginal(Distribution);

impl SignalMarginal {
    pub fn new(entries: DVector<f64>, signal_labels: Vec<String>) -> Result<Self> {
        Distribution::new(entries, signal_labels, "signal").map(Self)
    }

    pub fn signal_labels(&self) -> &[String] {
        self.0.labels()
    }
}

impl std::ops::Deref for SignalMarginal {
    type Target = Distribution;
    fn deref(&self) -> &Distribution {
        &self.0
    }
}

/// Observed ex-post data: state beliefs and hypothetical beliefs.
#[derive(Debug, Clone, PartialEq)]
pub struct BeliefLandscape {
    beliefs: StateBeliefMatrix,
    hypothetical: HypotheticalBeliefMatrix,
}

impl BeliefLandscape {
    pub fn new(beliefs: StateBeliefMatrix, hypothetical: HypotheticalBeliefMatrix) -> Result<Self> {
        if beliefs.n_signals() != hypothetical.n_signals() {
            return Err(Error::DimensionMismatch {
                axis: "signal rows of hypothetical beliefs".into(),
                expected: beliefs.n_signals(),
                found: hypothetical.n_signals(),
            });
        }
        ensure_same_labels("signal", beliefs.signal_labels(), hypothetical.signal_labels())?;
        Ok(Self { beliefs, hypothetical })
    }

    /// Convenience constructor with default labels.
    pub fn from_matrices(b: DMatrix<f64>, q: DMatrix<f64>) -> Result<Self> {
        let beliefs = StateBeliefMatrix::with_default_labels(b);
        let hypothetical = HypotheticalBeliefMatrix::with_default_labels(q)?;
        Self::new(beliefs, hypothetical)
    }

    pub fn beliefs(&self) -> &StateBeliefMatrix {
        &self.beliefs
    }

    pub fn hypothetical(&self) -> &HypotheticalBeliefMatrix {
        &self.hypothetical
    }

    pub fn b(&self) -> &DMatrix<f64> {
        self.beliefs.entries()
    }

    pub fn q(&self) -> &DMatrix<f64> {
        self.hypothetical.entries()
    }

    pub fn n_states(&self) -> usize {
        self.beliefs.n_states()
    }

    pub fn n_signals(&self) -> usize {
        self.beliefs.n_signals()
    }
}

/// Ex-ante ground truth: an information structure and a common prior.
#[derive(Debug, Clone, PartialEq)]
pub struct InformationalEnvironment {
    structure: InformationStructure,
    prior: Prior,
}

impl InformationalEnvironment {
    pub fn new(structure: InformationStructure, prior: Prior) -> Result<Self> {
        if structure.n_states() != prior.len() {
            return Err(Error::DimensionMismatch {
                axis: "prior length".into(),
                expected: structure.n_states(),
                found: prior.len(),
            });
        }
        ensure_same_labels("state", structure.state_labels(), prior.state_labels())?;
        Ok(Self { structure, prior })
    }

    pub fn from_matrices(structure: DMatrix<f64>, prior: DVector<f64>) -> Result<Self> {
        Self::new(
            InformationStructure::with_default_labels(structure),
            Prior::with_default_labels(prior),
        )
    }

    pub fn structure(&self) -> &InformationStructure {
        &self.structure
    }

    pub fn prior(&self) -> &Prior {
        &self.prior
    }

    pub fn n_states(&self) -> usize {
        self.structure.n_states()
    }

    pub fn n_signals(&self) -> usize {
        self.structure.n_signals()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MatrixKind {
    StateBeliefs,
    HypotheticalBeliefs,
    Structure,
    Prior,
}

impl fmt::Display for MatrixKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            MatrixKind::StateBeliefs => "B",
            MatrixKind::HypotheticalBeliefs => "Q",
            MatrixKind::Structure => "I",
            MatrixKind::Prior => "prior",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    NegativeEntry {
        matrix: MatrixKind,
        row: usize,
        col: usize,
        value: f64,
    },
    RowSum {
        matrix: MatrixKind,
        row: usize,
        sum: f64,
    },
    ZeroColumn {
        col: usize,
    },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::NegativeEntry {
                matrix,
                row,
                col,
                value,
            } => write!(f, "{matrix}[{row},{col}] = {value:e} is negative"),
            Violation::RowSum { matrix, row, sum } => {
                write!(f, "{matrix} row {row} sums to {sum}")
            }
            Violation::ZeroColumn { col } => write!(f, "B column {col} is zero"),
        }
    }
}

/// Outcome of a plausibility or validity check.
#[derive(Debug, Clone, PartialEq)]
pub struct PlausibilityReport {
    pub plausible: bool,
    pub violations: Vec<Violation>,
    /// Rank of the state belief matrix (landscapes only).
    pub rank: Option<usize>,
    pub full_column_rank: Option<bool>,
    /// Whether every prior entry is strictly positive (environments only).
    pub interior: Option<bool>,
}

fn check_stochastic_rows(m: &DMatrix<f64>, kind: MatrixKind, tol: &Tolerances, out: &mut Vec<Violation>) {
    for (i, row) in m.row_iter().enumerate() {
        for (j, &value) in row.iter().enumerate() {
            if value < -tol.entry || !value.is_finite() {
                out.push(Violation::NegativeEntry {
                    matrix: kind,
                    row: i,
                    col: j,
                    value,
                });
            }
        }
        let sum = row.sum();
        if !((sum - 1.0).abs() <= tol.stochastic) {
            out.push(Violation::RowSum {
                matrix: kind,
                row: i,
                sum,
            });
        }
    }
}

/// Checks that `B` and `Q` are nonnegative and row stochastic, and that `B` has no zero column.
pub fn validate_landscape(
    beliefs: &StateBeliefMatrix,
    hypothetical: &HypotheticalBeliefMatrix,
    tol: &Tolerances,
) -> Result<PlausibilityReport> {
    if hypothetical.n_signals() != beliefs.n_signals() {
        return Err(Error::DimensionMismatch {
            axis: "signal rows of hypothetical beliefs".into(),
            expected: beliefs.n_signals(),
            found: hypothetical.n_signals(),
        });
    }
    ensure_same_labels("signal", beliefs.signal_labels(), hypothetical.signal_labels())?;

    let mut violations = Vec::new();
    check_stochastic_rows(beliefs.entries(), MatrixKind::StateBeliefs, tol, &mut violations);
    check_stochastic_rows(
        hypothetical.entries(),
        MatrixKind::HypotheticalBeliefs,
        tol,
        &mut violations,
    );
    for (j, col) in beliefs.entries().column_iter().enumerate() {
        if col.iter().all(|x| x.abs() <= tol.entry) {
            violations.push(Violation::ZeroColumn { col: j });
        }
    }
    let rank = beliefs.rank(tol);
    Ok(PlausibilityReport {
        plausible: violations.is_empty(),
        violations,
        rank: Some(rank),
        full_column_rank: Some(rank == beliefs.n_states()),
        interior: None,
    })
}

/// Report-only check of an environment: stochastic structure rows and a prior on the simplex.
pub fn validate_environment(env: &InformationalEnvironment, tol: &Tolerances) -> PlausibilityReport {
    let mut violations = Vec::new();
    check_stochastic_rows(env.structure().entries(), MatrixKind::Structure, tol, &mut violations);
    let prior_row = env.prior().entries().transpose();
    check_stochastic_rows(
        &DMatrix::from_row_slice(1, prior_row.len(), prior_row.as_slice()),
        MatrixKind::Prior,
        tol,
        &mut violations,
    );
    PlausibilityReport {
        plausible: violations.is_empty(),
        violations,
        rank: None,
        full_column_rank: None,
        interior: Some(env.prior().is_interior(tol)),
    }
}
