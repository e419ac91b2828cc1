//! Moving an exact solution of `Q = B X` onto the set of information structures.

use microlp::{ComparisonOp, OptimizationDirection, Problem, Variable};
use nalgebra::{DMatrix, DVector};

use super::bayes_structure;
use crate::error::{Error, Result};
use crate::linalg::{self, NullSpaceBasis};
use crate::model::{InformationStructure, Prior, StateBeliefMatrix, Tolerances};

/// Row-stochastic, nonnegative matrices of the form `ridge_limit + N A`, where the columns of `N` span `null(B)`.
#[derive(Debug, Clone, PartialEq)]
pub enum Feasibility {
    /// Exactly one such matrix.
    Unique(DMatrix<f64>),
    /// A polytope: `point` is feasible, and `directions` span its affine hull.
    Family {
        point: DMatrix<f64>,
        directions: Vec<DMatrix<f64>>,
    },
    /// No such matrix. `best_min_entry` is the largest achievable smallest entry.
    Infeasible { best_min_entry: f64 },
}

impl Feasibility {
    pub fn is_feasible(&self) -> bool {
        !matches!(self, Feasibility::Infeasible { .. })
    }

    pub fn point(&self) -> Option<&DMatrix<f64>> {
        match self {
            Feasibility::Unique(x) | Feasibility::Family { point: x, .. } => Some(x),
            Feasibility::Infeasible { .. } => None,
        }
    }

    pub fn dimension(&self) -> usize {
        match self {
            Feasibility::Family { directions, .. } => directions.len(),
            _ => 0,
        }
    }

    /// Whether `x` lies in the feasible set.
    pub fn contains(&self, x: &DMatrix<f64>, tol: &Tolerances) -> bool {
        let Some(point) = self.point() else {
            return false;
        };
        if x.shape() != point.shape() || x.min() < -tol.entry {
            return false;
        }
        let mut diff = DVector::from_column_slice((x - point).as_slice());
        for d in self.directions() {
            let d = DVector::from_column_slice(d.as_slice());
            diff -= &d * d.dot(&diff);
        }
        diff.amax() <= tol.matching
    }

    fn directions(&self) -> &[DMatrix<f64>] {
        match self {
            Feasibility::Family { directions, .. } => directions,
            _ => &[],
        }
    }
}

fn lp_error(e: microlp::Error) -> Error {
    Error::Solver(e.to_string())
}

/// Variables `A` (k x |S|) and entries of `X = ridge_limit + N A` as linear expressions.
struct Layout {
    vars: Vec<Variable>,
    k: usize,
    n_signals: usize,
}

impl Layout {
    fn new(problem: &mut Problem, k: usize, n_signals: usize) -> Self {
        let vars = (0..k * n_signals)
            .map(|_| problem.add_var(0.0, (f64::NEG_INFINITY, f64::INFINITY)))
            .collect();
        Self { vars, k, n_signals }
    }

    fn a(&self, l: usize, j: usize) -> Variable {
        self.vars[l * self.n_signals + j]
    }

    /// Terms of `(N A)[i, j]`.
    fn entry(&self, n: &DMatrix<f64>, i: usize, j: usize) -> Vec<(Variable, f64)> {
        (0..self.k).map(|l| (self.a(l, j), n[(i, l)])).collect()
    }

    fn add_row_sums(&self, problem: &mut Problem, targets: &DVector<f64>) {
        for l in 0..self.k {
            let terms: Vec<_> = (0..self.n_signals).map(|j| (self.a(l, j), 1.0)).collect();
            problem.add_constraint(terms, ComparisonOp::Eq, targets[l]);
        }
    }

    fn matrix(&self, solution: &microlp::Solution) -> DMatrix<f64> {
        DMatrix::from_fn(self.k, self.n_signals, |l, j| *solution.var_value(self.a(l, j)))
    }
}

/// Searches `X = ridge_limit + N A` with every row summing to one and every entry nonnegative.
///
/// This is a linear program in `A`. Maximizing the smallest entry `t` of `X`
/// decides feasibility (`t* >= 0`) and, when `t* > 0`, shows that the feasible
/// set has full dimension `k (|S| - 1)`. When `t* = 0`, entries that cannot
/// leave zero are found by maximizing each one in turn, and the directions of
/// the feasible set are the remaining degrees of freedom.
pub fn restore_feasibility(
    ridge_limit: &DMatrix<f64>,
    null_basis: &NullSpaceBasis,
    tol: &Tolerances,
) -> Result<Feasibility> {
    let (n_states, n_signals) = ridge_limit.shape();
    if null_basis.ambient_dim() != n_states {
        return Err(Error::DimensionMismatch {
            axis: "null basis length".into(),
            expected: n_states,
            found: null_basis.ambient_dim(),
        });
    }
    let k = null_basis.dim();
    let n = null_basis.as_matrix();
    let deficit = DVector::from_element(n_states, 1.0) - ridge_limit.column_sum();

    // Row sums: N (A 1) = deficit, so A 1 = N^T deficit when the deficit lies in span(N).
    let targets = n.transpose() * &deficit;
    if (&n * &targets - &deficit).amax() > tol.matching {
        let best_min_entry = f64::NEG_INFINITY;
        return Ok(Feasibility::Infeasible { best_min_entry });
    }
    if k == 0 {
        let min = ridge_limit.min();
        return Ok(if min >= -tol.entry {
            Feasibility::Unique(ridge_limit.map(|x| x.max(0.0)))
        } else {
            Feasibility::Infeasible { best_min_entry: min }
        });
    }

    let mut problem = Problem::new(OptimizationDirection::Maximize);
    let layout = Layout::new(&mut problem, k, n_signals);
    let t = problem.add_var(1.0, (f64::NEG_INFINITY, 1.0));
    layout.add_row_sums(&mut problem, &targets);
    for i in 0..n_states {
        for j in 0..n_signals {
            let mut terms = layout.entry(&n, i, j);
            terms.push((t, -1.0));
            problem.add_constraint(terms, ComparisonOp::Ge, -ridge_limit[(i, j)]);
        }
    }
    let solution = problem.solve().map_err(lp_error)?;
    let best = *solution.var_value(t);
    if best < -tol.entry {
        return Ok(Feasibility::Infeasible { best_min_entry: best });
    }
    let point = (ridge_limit + &n * layout.matrix(&solution)).map(|x| x.max(0.0));

    // Entries pinned at zero over the whole feasible set.
    let mut pinned = Vec::new();
    if best <= tol.entry {
        let slack = (-best).max(0.0);
        for i in 0..n_states {
            for j in 0..n_signals {
                let mut probe = Problem::new(OptimizationDirection::Maximize);
                let probe_layout = Layout::new(&mut probe, k, n_signals);
                probe_layout.add_row_sums(&mut probe, &targets);
                for a in 0..n_states {
                    for b in 0..n_signals {
                        probe.add_constraint(
                            probe_layout.entry(&n, a, b),
                            ComparisonOp::Ge,
                            -ridge_limit[(a, b)] - slack,
                        );
                    }
                }
                // Objective: maximize (N A)[i, j].
                let objective = probe.add_var(1.0, (f64::NEG_INFINITY, f64::INFINITY));
                let mut terms = probe_layout.entry(&n, i, j);
                terms.push((objective, -1.0));
                probe.add_constraint(terms, ComparisonOp::Eq, 0.0);
                let best_entry = ridge_limit[(i, j)] + probe.solve().map_err(lp_error)?.objective();
                if best_entry <= tol.matching {
                    pinned.push((i, j));
                }
            }
        }
    }

    // Linear constraints on vec(A): zero row sums and zero change on pinned entries.
    let n_vars = k * n_signals;
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for l in 0..k {
        let mut row = vec![0.0; n_vars];
        for j in 0..n_signals {
            row[l * n_signals + j] = 1.0;
        }
        rows.push(row);
    }
    for &(i, j) in &pinned {
        let mut row = vec![0.0; n_vars];
        for l in 0..k {
            row[l * n_signals + j] = n[(i, l)];
        }
        rows.push(row);
    }
    let constraints = DMatrix::from_fn(rows.len(), n_vars, |r, c| rows[r][c]);
    let free = linalg::null_space_basis(&constraints, tol);
    let directions: Vec<DMatrix<f64>> = free
        .vectors()
        .iter()
        .map(|v| {
            let a = DMatrix::from_fn(k, n_signals, |l, j| v[l * n_signals + j]);
            &n * a
        })
        .collect();

    Ok(if directions.is_empty() {
        Feasibility::Unique(point)
    } else {
        Feasibility::Family { point, directions }
    })
}

/// Largest-minimum nonnegative `α` with `B^T α = p`, or `None` if none exists.
fn nonnegative_weights(b: &DMatrix<f64>, p: &DVector<f64>) -> Result<Option<DVector<f64>>> {
    let (n_signals, n_states) = b.shape();
    let mut problem = Problem::new(OptimizationDirection::Maximize);
    let alpha: Vec<_> = (0..n_signals)
        .map(|_| problem.add_var(0.0, (0.0, f64::INFINITY)))
        .collect();
    let t = problem.add_var(1.0, (f64::NEG_INFINITY, 1.0));
    for th in 0..n_states {
        let terms: Vec<_> = (0..n_signals).map(|s| (alpha[s], b[(s, th)])).collect();
        problem.add_constraint(terms, ComparisonOp::Eq, p[th]);
    }
    for &a in &alpha {
        problem.add_constraint([(a, 1.0), (t, -1.0)], ComparisonOp::Ge, 0.0);
    }
    match problem.solve() {
        Ok(solution) => Ok(Some(DVector::from_iterator(
            n_signals,
            alpha.iter().map(|&a| *solution.var_value(a)),
        ))),
        Err(microlp::Error::Infeasible) => Ok(None),
        Err(e) => Err(lp_error(e)),
    }
}

/// Structure that, under `prior`, produces the posteriors `B`.
///
/// Solves `Σ_s α_s b[s, θ] = p(θ)` for nonnegative signal weights `α` and sets
/// `I(θ)[s] = b[s, θ] α_s / p(θ)`. When `B` has full row rank the weights are
/// unique and found by least squares; otherwise a linear program picks the
/// solution with the largest smallest weight.
pub fn reconstruct_from_prior(
    beliefs: &StateBeliefMatrix,
    prior: &Prior,
    tol: &Tolerances,
) -> Result<InformationStructure> {
    let b = beliefs.entries();
    let p = prior.entries();
    if p.len() != beliefs.n_states() {
        return Err(Error::DimensionMismatch {
            axis: "prior length".into(),
            expected: beliefs.n_states(),
            found: p.len(),
        });
    }
    let bt = b.transpose();
    let alpha = if linalg::rank(b, tol) == beliefs.n_signals() {
        let alpha = linalg::least_squares_coefficients(&bt, p, tol)?;
        let residual = (&bt * &alpha - p).amax();
        if residual > tol.matching || alpha.min() < -tol.entry {
            return Err(Error::NotInHull { residual });
        }
        alpha.map(|a| a.max(0.0))
    } else {
        match nonnegative_weights(b, p)? {
            Some(alpha) if (&bt * &alpha - p).amax() <= tol.matching => alpha.map(|a| a.max(0.0)),
            _ => {
                let nearest =
                    linalg::min_norm_solution(&bt, &DMatrix::from_column_slice(p.len(), 1, p.as_slice()), tol);
                let residual = (&bt * nearest - DMatrix::from_column_slice(p.len(), 1, p.as_slice())).amax();
                return Err(Error::NotInHull { residual });
            }
        }
    };
    InformationStructure::new(
        bayes_structure(b, &alpha, tol),
        beliefs.state_labels().to_vec(),
        beliefs.signal_labels().to_vec(),
    )
}
