//! Dense linear algebra kernels.
//!
//! Everything here works on small matrices (a few dozen rows at most) and uses
//! orthogonal factorizations: QR for full-rank least squares, SVD for
//! pseudo-inverses, ridge paths, null spaces and the eigenvalue-1 test.

use nalgebra::{DMatrix, DVector};
use petgraph::algo::tarjan_scc;
use petgraph::graph::DiGraph;

use crate::error::{Error, Result};
use crate::model::Tolerances;

fn largest(values: &DVector<f64>) -> f64 {
    values.iter().copied().fold(0.0, f64::max)
}

pub fn singular_values(m: &DMatrix<f64>) -> DVector<f64> {
    if m.is_empty() {
        return DVector::zeros(0);
    }
    m.clone().svd(false, false).singular_values
}

/// Numerical rank with cutoff `tol.rank * sigma_max`.
pub fn rank(m: &DMatrix<f64>, tol: &Tolerances) -> usize {
    let sv = singular_values(m);
    let cutoff = tol.rank_cutoff(largest(&sv));
    sv.iter().filter(|&&s| s > cutoff).count()
}

fn ensure_full_column_rank(b: &DMatrix<f64>, tol: &Tolerances) -> Result<()> {
    let r = rank(b, tol);
    if r < b.ncols() {
        return Err(Error::RankDeficient {
            rank: r,
            columns: b.ncols(),
        });
    }
    Ok(())
}

/// Solves `min ||rhs - B X||` column by column for a full-column-rank `B` via thin QR.
pub fn least_squares(b: &DMatrix<f64>, rhs: &DMatrix<f64>, tol: &Tolerances) -> Result<DMatrix<f64>> {
    if rhs.nrows() != b.nrows() {
        return Err(Error::DimensionMismatch {
            axis: "regression target rows".into(),
            expected: b.nrows(),
            found: rhs.nrows(),
        });
    }
    ensure_full_column_rank(b, tol)?;
    let qr = b.clone().qr();
    let projected = qr.q().transpose() * rhs;
    qr.r().solve_upper_triangular(&projected).ok_or(Error::RankDeficient {
        rank: 0,
        columns: b.ncols(),
    })
}

/// OLS coefficients of `v` on the columns of `B`, i.e. `(B^T B)^{-1} B^T v`.
pub fn least_squares_coefficients(b: &DMatrix<f64>, v: &DVector<f64>, tol: &Tolerances) -> Result<DVector<f64>> {
    let rhs = DMatrix::from_column_slice(v.len(), 1, v.as_slice());
    least_squares(b, &rhs, tol).map(|x| x.column(0).into_owned())
}

/// Moore-Penrose pseudo-inverse with singular values below `tol.rank * sigma_max` dropped.
pub fn pseudo_inverse(b: &DMatrix<f64>, tol: &Tolerances) -> DMatrix<f64> {
    if b.is_empty() {
        return DMatrix::zeros(b.ncols(), b.nrows());
    }
    let svd = b.clone().svd(true, true);
    let (u, v_t) = (svd.u.expect("u requested"), svd.v_t.expect("v_t requested"));
    let cutoff = tol.rank_cutoff(largest(&svd.singular_values));
    let mut pinv = DMatrix::zeros(b.ncols(), b.nrows());
    for (k, &s) in svd.singular_values.iter().enumerate() {
        if s > cutoff {
            pinv += v_t.row(k).transpose() * u.column(k).transpose() / s;
        }
    }
    pinv
}

/// Minimum-norm least-squares solution of `Q = B X`; the `λ -> 0` limit of ridge regression.
pub fn min_norm_solution(b: &DMatrix<f64>, q: &DMatrix<f64>, tol: &Tolerances) -> DMatrix<f64> {
    pseudo_inverse(b, tol) * q
}

/// Orthogonal projector onto `null(B)`, the limit of `λ (B^T B + λ I)^{-1}` as `λ -> 0`.
pub fn null_space_projector(b: &DMatrix<f64>, tol: &Tolerances) -> DMatrix<f64> {
    let n = b.ncols();
    DMatrix::identity(n, n) - pseudo_inverse(b, tol) * b
}

/// Symmetric positive-definite weight `M` for the penalty `λ tr(X^T M X)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Regularizer {
    matrix: DMatrix<f64>,
    /// `L^{-T}` where `M = L L^T`.
    whitening: DMatrix<f64>,
}

impl Regularizer {
    pub fn identity(n: usize) -> Self {
        Self {
            matrix: DMatrix::identity(n, n),
            whitening: DMatrix::identity(n, n),
        }
    }

    pub fn new(matrix: DMatrix<f64>, tol: &Tolerances) -> Result<Self> {
        if matrix.nrows() != matrix.ncols() {
            return Err(Error::InvalidRegularizer(format!(
                "not square ({}x{})",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        let asym = (&matrix - matrix.transpose()).abs().max();
        if asym > tol.matching {
            return Err(Error::InvalidRegularizer(format!(
                "asymmetry {asym:e} exceeds tolerance"
            )));
        }
        let min_eig = matrix
            .clone()
            .symmetric_eigen()
            .eigenvalues
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min);
        if !(min_eig > 0.0) {
            return Err(Error::InvalidRegularizer(format!(
                "smallest eigenvalue {min_eig:e} is not positive"
            )));
        }
        let chol = nalgebra::Cholesky::new(matrix.clone())
            .ok_or_else(|| Error::InvalidRegularizer("Cholesky factorization failed".into()))?;
        let n = matrix.nrows();
        let whitening = chol
            .l()
            .transpose()
            .solve_upper_triangular(&DMatrix::identity(n, n))
            .ok_or_else(|| Error::InvalidRegularizer("singular Cholesky factor".into()))?;
        Ok(Self { matrix, whitening })
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    fn check_dim(&self, b: &DMatrix<f64>) -> Result<()> {
        if self.dim() != b.ncols() {
            return Err(Error::DimensionMismatch {
                axis: "regularizer size".into(),
                expected: b.ncols(),
                found: self.dim(),
            });
        }
        Ok(())
    }
}

/// `(B^T B + λ M)^{-1} B^T Q`, evaluated through the SVD of the whitened design `B L^{-T}`.
pub fn ridge_solution_at(b: &DMatrix<f64>, q: &DMatrix<f64>, lambda: f64, reg: &Regularizer) -> Result<DMatrix<f64>> {
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(Error::InvalidLambda(lambda));
    }
    reg.check_dim(b)?;
    if q.nrows() != b.nrows() {
        return Err(Error::DimensionMismatch {
            axis: "hypothetical belief rows".into(),
            expected: b.nrows(),
            found: q.nrows(),
        });
    }
    let design = b * &reg.whitening;
    let svd = design.svd(true, true);
    let (u, v_t) = (svd.u.expect("u requested"), svd.v_t.expect("v_t requested"));
    let mut y = DMatrix::zeros(b.ncols(), q.ncols());
    for (k, &s) in svd.singular_values.iter().enumerate() {
        let shrink = s / (s * s + lambda);
        y += v_t.row(k).transpose() * (u.column(k).transpose() * q) * shrink;
    }
    Ok(&reg.whitening * y)
}

/// `lim_{λ -> 0} (B^T B + λ M)^{-1} B^T Q`: the exact solution of `Q = B X` with least `M`-norm.
pub fn ridge_limit(b: &DMatrix<f64>, q: &DMatrix<f64>, reg: &Regularizer, tol: &Tolerances) -> Result<DMatrix<f64>> {
    reg.check_dim(b)?;
    let design = b * &reg.whitening;
    Ok(&reg.whitening * min_norm_solution(&design, q, tol))
}

/// Orthonormal basis of `{v : B v = 0}`.
#[derive(Debug, Clone, PartialEq)]
pub struct NullSpaceBasis {
    vectors: Vec<DVector<f64>>,
    ambient: usize,
}

impl NullSpaceBasis {
    pub fn vectors(&self) -> &[DVector<f64>] {
        &self.vectors
    }

    pub fn dim(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient
    }

    /// Basis vectors as the columns of an `ambient x dim` matrix.
    pub fn as_matrix(&self) -> DMatrix<f64> {
        if self.vectors.is_empty() {
            return DMatrix::zeros(self.ambient, 0);
        }
        DMatrix::from_columns(&self.vectors)
    }

    /// Distance from `v` to the span of the basis (infinity norm of the residual).
    pub fn distance(&self, v: &DVector<f64>) -> f64 {
        let mut r = v.clone();
        for b in &self.vectors {
            r -= b * b.dot(v);
        }
        r.amax()
    }
}

fn null_space_with_cutoff(m: &DMatrix<f64>, cutoff: Option<f64>, tol: &Tolerances) -> Vec<DVector<f64>> {
    let n = m.ncols();
    if n == 0 {
        return Vec::new();
    }
    // Pad short matrices with zero rows so the SVD returns a full right basis.
    let padded = if m.nrows() < n {
        let mut p = DMatrix::zeros(n, n);
        p.rows_mut(0, m.nrows()).copy_from(m);
        p
    } else {
        m.clone()
    };
    let svd = padded.svd(false, true);
    let v_t = svd.v_t.expect("v_t requested");
    let cutoff = cutoff.unwrap_or_else(|| tol.rank_cutoff(largest(&svd.singular_values)));
    let mut out = Vec::new();
    for (k, &s) in svd.singular_values.iter().enumerate() {
        if s <= cutoff {
            let mut v: DVector<f64> = v_t.row(k).transpose();
            let pivot = v.iamax();
            if v[pivot] < 0.0 {
                v.neg_mut();
            }
            out.push(v);
        }
    }
    out
}

pub fn null_space_basis(b: &DMatrix<f64>, tol: &Tolerances) -> NullSpaceBasis {
    NullSpaceBasis {
        vectors: null_space_with_cutoff(b, None, tol),
        ambient: b.ncols(),
    }
}

/// Strongly connected components of the positive-entry graph of a square matrix.
///
/// The graph has an edge `j -> i` whenever `M[i, j] > tol.entry`, so for a
/// column-stochastic `M` a closed class is a recurrent class of the chain.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClassDecomposition {
    /// Sorted index sets, ordered by their smallest member.
    pub classes: Vec<Vec<usize>>,
    /// `closed[c]` when no edge leaves class `c`.
    pub closed: Vec<bool>,
    /// Class indices in topological order of the condensation.
    pub order: Vec<usize>,
}

impl ClassDecomposition {
    pub fn is_irreducible(&self) -> bool {
        self.classes.len() == 1
    }

    pub fn closed_classes(&self) -> impl Iterator<Item = &Vec<usize>> {
        self.classes
            .iter()
            .zip(&self.closed)
            .filter_map(|(c, &closed)| closed.then_some(c))
    }

    pub fn class_of(&self, index: usize) -> Option<usize> {
        self.classes.iter().position(|c| c.contains(&index))
    }
}

pub fn irreducibility(m: &DMatrix<f64>, tol: &Tolerances) -> ClassDecomposition {
    let n = m.nrows();
    let mut graph = DiGraph::<(), ()>::with_capacity(n, n * n);
    let nodes: Vec<_> = (0..n).map(|_| graph.add_node(())).collect();
    let mut edges = Vec::new();
    for j in 0..n {
        for i in 0..n {
            if i != j && m[(i, j)] > tol.entry {
                graph.add_edge(nodes[j], nodes[i], ());
                edges.push((j, i));
            }
        }
    }

    let mut classes: Vec<Vec<usize>> = tarjan_scc(&graph)
        .into_iter()
        .map(|c| {
            let mut c: Vec<usize> = c.into_iter().map(|ix| ix.index()).collect();
            c.sort_unstable();
            c
        })
        .collect();
    classes.sort_by_key(|c| c[0]);

    let mut class_of = vec![0; n];
    for (k, c) in classes.iter().enumerate() {
        for &i in c {
            class_of[i] = k;
        }
    }

    let nc = classes.len();
    let mut closed = vec![true; nc];
    let mut succ = vec![Vec::new(); nc];
    let mut indeg = vec![0usize; nc];
    for &(from, to) in &edges {
        let (a, b) = (class_of[from], class_of[to]);
        if a != b {
            closed[a] = false;
            if !succ[a].contains(&b) {
                succ[a].push(b);
                indeg[b] += 1;
            }
        }
    }

    // Kahn's algorithm, smallest class index first.
    let mut order = Vec::with_capacity(nc);
    let mut ready: std::collections::BTreeSet<usize> = (0..nc).filter(|&c| indeg[c] == 0).collect();
    while let Some(c) = ready.pop_first() {
        order.push(c);
        for &d in &succ[c] {
            indeg[d] -= 1;
            if indeg[d] == 0 {
                ready.insert(d);
            }
        }
    }

    ClassDecomposition { classes, closed, order }
}

/// Eigenvalue-1 eigenvectors of a square matrix, scaled to sum to one.
#[derive(Debug, Clone, PartialEq)]
pub enum EigenvalueOne {
    Unique(DVector<f64>),
    /// One vector per closed class; their convex hull is the eigenvalue-1 simplex.
    Family {
        extremes: Vec<DVector<f64>>,
        classes: ClassDecomposition,
    },
    None,
}

impl EigenvalueOne {
    pub fn vectors(&self) -> Vec<&DVector<f64>> {
        match self {
            EigenvalueOne::Unique(v) => vec![v],
            EigenvalueOne::Family { extremes, .. } => extremes.iter().collect(),
            EigenvalueOne::None => Vec::new(),
        }
    }
}

/// Scales `v` to sum to one and zeroes entries in `[-tol.entry, 0)`.
///
/// Returns `None` when the entries sum to (numerically) zero. Larger negative
/// entries are kept so callers can see that the input was not model-generated.
fn to_unit_sum(mut v: DVector<f64>, tol: &Tolerances) -> Option<DVector<f64>> {
    let s = v.sum();
    if !(s.abs() > tol.matching * v.lp_norm(1)) {
        return None;
    }
    v /= s;
    if v.iter().all(|&x| x >= -tol.entry) {
        v.iter_mut().for_each(|x| *x = x.max(0.0));
        v /= v.sum();
    }
    Some(v)
}

fn eigen_one_cutoff(shifted: &DMatrix<f64>, tol: &Tolerances) -> f64 {
    tol.rank_cutoff(largest(&singular_values(shifted)).max(1.0))
}

/// Null space of `M - I`, normalized onto the simplex.
///
/// A one-dimensional null space yields [`EigenvalueOne::Unique`]. A larger one is
/// resolved class by class using [`irreducibility`]: each closed class contributes
/// the eigenvector of its diagonal block.
pub fn unit_eigenvector_eigenvalue_one(m: &DMatrix<f64>, tol: &Tolerances) -> EigenvalueOne {
    let n = m.nrows();
    if n == 0 || m.ncols() != n {
        return EigenvalueOne::None;
    }
    let shifted = m - DMatrix::identity(n, n);
    let cutoff = eigen_one_cutoff(&shifted, tol);
    let basis = null_space_with_cutoff(&shifted, Some(cutoff), tol);
    match basis.len() {
        0 => EigenvalueOne::None,
        1 => match to_unit_sum(basis.into_iter().next().unwrap(), tol) {
            Some(v) => EigenvalueOne::Unique(v),
            None => EigenvalueOne::None,
        },
        _ => {
            let classes = irreducibility(m, tol);
            let mut extremes = Vec::new();
            for class in classes.closed_classes() {
                let k = class.len();
                let block = DMatrix::from_fn(k, k, |a, b| m[(class[a], class[b])]);
                let block_shifted = &block - DMatrix::identity(k, k);
                let local = null_space_with_cutoff(&block_shifted, Some(cutoff), tol);
                let Some(v) = local.into_iter().next() else {
                    continue;
                };
                let mut full = DVector::zeros(n);
                for (a, &i) in class.iter().enumerate() {
                    full[i] = v[a];
                }
                if let Some(full) = to_unit_sum(full, tol) {
                    extremes.push(full);
                }
            }
            if extremes.is_empty() {
                EigenvalueOne::None
            } else {
                EigenvalueOne::Family { extremes, classes }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn tol() -> Tolerances {
        Tolerances::default()
    }

    fn random_matrix(rng: &mut ChaCha8Rng, r: usize, c: usize) -> DMatrix<f64> {
        DMatrix::from_fn(r, c, |_, _| rng.random_range(-1.0..1.0))
    }

    #[test]
    fn ex1_regression_of_ones_is_ones() {
        let b = fixtures::ex1_landscape(0.3).b().clone();
        let beta = least_squares_coefficients(&b, &DVector::from_element(4, 1.0), &tol()).unwrap();
        assert_abs_diff_eq!(beta, DVector::from_element(3, 1.0), epsilon = 1e-12);
    }

    #[test]
    fn ex1_regression_of_revealing_column() {
        let eps = 0.3;
        let b = fixtures::ex1_landscape(eps).b().clone();
        let v = DVector::from_vec(vec![(1.0 - eps) / 3.0, 1.0 - eps, 0.0, 0.0]);
        let beta = least_squares_coefficients(&b, &v, &tol()).unwrap();
        assert_abs_diff_eq!(beta, DVector::from_vec(vec![1.0 - eps, 0.0, 0.0]), epsilon = 1e-12);
    }

    #[test]
    fn ex2_regression_of_unit_vector() {
        let b = fixtures::ex2_beliefs();
        let beta = least_squares_coefficients(&b, &DVector::from_vec(vec![1.0, 0.0]), &tol()).unwrap();
        assert_abs_diff_eq!(beta, DVector::from_vec(vec![-0.5, 1.5]), epsilon = 1e-12);
    }

    #[test]
    fn rank_deficient_regression_is_rejected() {
        let b = fixtures::ex4_landscape().b().clone();
        let err = least_squares_coefficients(&b, &DVector::from_element(4, 1.0), &tol()).unwrap_err();
        assert_eq!(err, Error::RankDeficient { rank: 3, columns: 4 });
    }

    #[test]
    fn ex3_min_norm_solution() {
        let l = fixtures::ex3_landscape();
        let x = min_norm_solution(l.b(), l.q(), &tol());
        assert_abs_diff_eq!(x, fixtures::ex3_ridge_limit(), epsilon = 1e-12);
    }

    #[test]
    fn identity_design_returns_target() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let q = random_matrix(&mut rng, 4, 4);
        let x = min_norm_solution(&DMatrix::identity(4, 4), &q, &tol());
        assert_abs_diff_eq!(x, q, epsilon = 1e-14);
    }

    #[test]
    fn tall_full_rank_recovers_coefficients() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..20 {
            let b = random_matrix(&mut rng, 5, 3);
            let x0 = random_matrix(&mut rng, 3, 4);
            let q = &b * &x0;
            assert_abs_diff_eq!(min_norm_solution(&b, &q, &tol()), x0, epsilon = 1e-8);
            assert_abs_diff_eq!(least_squares(&b, &q, &tol()).unwrap(), x0, epsilon = 1e-8);
        }
    }

    #[test]
    fn ex3_ridge_path_shrinks_toward_limit() {
        let l = fixtures::ex3_landscape();
        let limit = min_norm_solution(l.b(), l.q(), &tol());
        let reg = Regularizer::identity(3);
        let gaps: Vec<f64> = [1e-2, 1e-4, 1e-6]
            .iter()
            .map(|&lam| (ridge_solution_at(l.b(), l.q(), lam, &reg).unwrap() - &limit).amax())
            .collect();
        assert!(gaps[0] > gaps[1] && gaps[1] > gaps[2], "{gaps:?}");
        assert!(gaps[2] < 1e-4);
    }

    #[test]
    fn ridge_matches_normal_equations() {
        let l = fixtures::ex3_landscape();
        let lam = 0.05;
        let direct = (l.b().transpose() * l.b() + DMatrix::identity(3, 3) * lam)
            .try_inverse()
            .unwrap()
            * l.b().transpose()
            * l.q();
        let svd_path = ridge_solution_at(l.b(), l.q(), lam, &Regularizer::identity(3)).unwrap();
        assert_abs_diff_eq!(direct, svd_path, epsilon = 1e-12);

        let m = DMatrix::from_row_slice(3, 3, &[2.0, 0.5, 0.0, 0.5, 1.0, 0.2, 0.0, 0.2, 3.0]);
        let reg = Regularizer::new(m.clone(), &tol()).unwrap();
        let direct = (l.b().transpose() * l.b() + &m * lam).try_inverse().unwrap() * l.b().transpose() * l.q();
        assert_abs_diff_eq!(
            direct,
            ridge_solution_at(l.b(), l.q(), lam, &reg).unwrap(),
            epsilon = 1e-12
        );
    }

    #[test]
    fn ex5_weighted_regularizer_recovers_partition() {
        let (p2, p3) = (1.0 / 6.0, 1.0 / 3.0);
        let l = fixtures::ex5_landscape(p2, p3);
        let reg = Regularizer::new(fixtures::ex5_regularizer(p2, p3), &tol()).unwrap();
        let near = ridge_solution_at(l.b(), l.q(), 1e-12, &reg).unwrap();
        assert_abs_diff_eq!(near, fixtures::ex5_structure(), epsilon = 1e-9);
        let limit = ridge_limit(l.b(), l.q(), &reg, &tol()).unwrap();
        assert_abs_diff_eq!(limit, fixtures::ex5_structure(), epsilon = 1e-12);
    }

    #[test]
    fn huge_lambda_shrinks_to_zero() {
        let l = fixtures::ex3_landscape();
        let x = ridge_solution_at(l.b(), l.q(), 1e12, &Regularizer::identity(3)).unwrap();
        assert!(x.amax() < 1e-11);
    }

    #[test]
    fn ridge_rejects_bad_inputs() {
        let l = fixtures::ex3_landscape();
        assert!(matches!(
            ridge_solution_at(l.b(), l.q(), 0.0, &Regularizer::identity(3)),
            Err(Error::InvalidLambda(_))
        ));
        assert!(ridge_solution_at(l.b(), l.q(), 1.0, &Regularizer::identity(2)).is_err());
        let not_spd = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 1.0]);
        assert!(Regularizer::new(not_spd, &tol()).is_err());
        let asym = DMatrix::from_row_slice(2, 2, &[1.0, 0.1, 0.0, 1.0]);
        assert!(Regularizer::new(asym, &tol()).is_err());
    }

    #[test]
    fn ex3_null_space_is_the_printed_direction() {
        let basis = null_space_basis(fixtures::ex3_landscape().b(), &tol());
        assert_eq!(basis.dim(), 1);
        let expected = DVector::from_vec(vec![-2.0, 4.0, 1.0]).normalize();
        assert_abs_diff_eq!(basis.vectors()[0], expected, epsilon = 1e-12);
    }

    #[test]
    fn full_rank_has_empty_null_space() {
        let basis = null_space_basis(fixtures::ex1_landscape(0.4).b(), &tol());
        assert!(basis.is_empty());
        assert_eq!(basis.as_matrix().shape(), (3, 0));
    }

    #[test]
    fn ex4_null_space() {
        let b = fixtures::ex4_landscape().b().clone();
        let basis = null_space_basis(&b, &tol());
        assert_eq!(basis.dim(), 1);
        let expected = DVector::from_vec(vec![1.0, 1.0, -2.0, 0.0]).normalize();
        let v = &basis.vectors()[0];
        assert_abs_diff_eq!(v.dot(&expected).abs(), 1.0, epsilon = 1e-12);
        assert!((&b * v).amax() < 1e-12);
    }

    #[test]
    fn null_space_projector_is_ridge_residual_limit() {
        let l = fixtures::ex3_landscape();
        let proj = null_space_projector(l.b(), &tol());
        let lam = 1e-9;
        let approx = (l.b().transpose() * l.b() + DMatrix::identity(3, 3) * lam)
            .try_inverse()
            .unwrap()
            * lam;
        assert_abs_diff_eq!(proj, approx, epsilon = 1e-6);
    }

    #[test]
    fn ex3_peer_accuracy_prior() {
        let env = fixtures::ex3_environment();
        let b = fixtures::ex3_landscape().b().clone();
        let m = b.transpose() * env.structure().entries().transpose();
        match unit_eigenvector_eigenvalue_one(&m, &tol()) {
            EigenvalueOne::Unique(p) => {
                assert_abs_diff_eq!(p, DVector::from_vec(vec![0.5, 1.0 / 6.0, 1.0 / 3.0]), epsilon = 1e-12)
            }
            other => panic!("expected unique, got {other:?}"),
        }
    }

    #[test]
    fn identity_gives_vertex_family() {
        match unit_eigenvector_eigenvalue_one(&DMatrix::identity(3, 3), &tol()) {
            EigenvalueOne::Family { extremes, classes } => {
                assert_eq!(classes.classes, vec![vec![0], vec![1], vec![2]]);
                for (k, e) in extremes.iter().enumerate() {
                    let mut unit = DVector::zeros(3);
                    unit[k] = 1.0;
                    assert_eq!(*e, unit);
                }
            }
            other => panic!("expected family, got {other:?}"),
        }
    }

    #[test]
    fn ex4_left_eigenvector_of_q() {
        let q = fixtures::ex4_landscape().q().clone();
        match unit_eigenvector_eigenvalue_one(&q.transpose(), &tol()) {
            EigenvalueOne::Unique(v) => assert_abs_diff_eq!(v, fixtures::ex4_signal_marginal(), epsilon = 1e-12),
            other => panic!("expected unique, got {other:?}"),
        }
    }

    #[test]
    fn no_unit_eigenvalue() {
        let m = DMatrix::from_row_slice(2, 2, &[0.5, 0.0, 0.0, 0.25]);
        assert_eq!(unit_eigenvector_eigenvalue_one(&m, &tol()), EigenvalueOne::None);
    }

    #[test]
    fn irreducibility_examples() {
        let t = tol();
        let dense = DMatrix::from_element(3, 3, 1.0 / 3.0);
        assert!(irreducibility(&dense, &t).is_irreducible());

        let block = DMatrix::from_row_slice(
            4,
            4,
            &[
                0.5, 0.5, 0.0, 0.0, 0.5, 0.5, 0.0, 0.0, 0.0, 0.0, 0.3, 0.7, 0.0, 0.0, 0.7, 0.3,
            ],
        );
        let d = irreducibility(&block, &t);
        assert_eq!(d.classes, vec![vec![0, 1], vec![2, 3]]);
        assert_eq!(d.closed, vec![true, true]);

        let l = fixtures::ex5_landscape(0.25, 0.25);
        let m = l.b().transpose() * fixtures::ex5_structure().transpose();
        let d = irreducibility(&m, &t);
        assert_eq!(d.classes, vec![vec![0], vec![1, 2], vec![3]]);
        assert!(d.closed.iter().all(|&c| c));
    }

    #[test]
    fn transient_class_is_open_and_ordered_first() {
        // Column-stochastic: state 0 leaks into the closed class {1, 2}.
        let m = DMatrix::from_row_slice(3, 3, &[0.5, 0.0, 0.0, 0.25, 0.5, 0.5, 0.25, 0.5, 0.5]);
        let d = irreducibility(&m, &tol());
        assert_eq!(d.classes, vec![vec![0], vec![1, 2]]);
        assert_eq!(d.closed, vec![false, true]);
        assert_eq!(d.order, vec![0, 1]);
        match unit_eigenvector_eigenvalue_one(&m, &tol()) {
            EigenvalueOne::Unique(v) => assert_abs_diff_eq!(v, DVector::from_vec(vec![0.0, 0.5, 0.5]), epsilon = 1e-12),
            other => panic!("expected unique, got {other:?}"),
        }
    }

    fn column_stochastic(rng: &mut ChaCha8Rng, n: usize, sparsity: f64) -> DMatrix<f64> {
        let mut m = DMatrix::from_fn(n, n, |i, j| {
            if i == j || rng.random::<f64>() > sparsity {
                rng.random_range(0.05..1.0)
            } else {
                0.0
            }
        });
        for mut col in m.column_iter_mut() {
            let s = col.sum();
            col /= s;
        }
        m
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn least_squares_inverts_full_rank_products(seed in any::<u64>(), rows in 3usize..8, cols in 1usize..4) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let b = random_matrix(&mut rng, rows, cols);
            prop_assume!(rank(&b, &tol()) == cols);
            let x = DVector::from_fn(cols, |_, _| rng.random_range(-2.0..2.0));
            let beta = least_squares_coefficients(&b, &(&b * &x), &tol()).unwrap();
            let cond = { let sv = singular_values(&b); largest(&sv) / sv.min() };
            prop_assume!(cond < 1e6);
            prop_assert!((beta - x).amax() <= tol().matching);
        }

        #[test]
        fn min_norm_is_optimal_and_orthogonal_to_null_space(seed in any::<u64>(), rows in 1usize..5, extra in 1usize..4) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let cols = rows + extra;
            let b = random_matrix(&mut rng, rows, cols);
            let q = random_matrix(&mut rng, rows, 3);
            let x = min_norm_solution(&b, &q, &tol());
            let best = (&b * &x - &q).norm();
            for _ in 0..100 {
                let y = random_matrix(&mut rng, cols, 3);
                prop_assert!(best <= (&b * &y - &q).norm() + 1e-12);
            }
            let null = null_space_basis(&b, &tol());
            prop_assert_eq!(null.dim(), cols - rank(&b, &tol()));
            for v in null.vectors() {
                prop_assert!((&b * v).amax() <= tol().matching);
                for col in x.column_iter() {
                    prop_assert!(v.dot(&col).abs() <= tol().matching);
                }
            }
            let n = null.as_matrix();
            let gram = n.transpose() * &n;
            prop_assert!((gram - DMatrix::identity(null.dim(), null.dim())).amax() < 1e-10);
        }

        #[test]
        fn eigenvectors_are_fixed_points_on_the_simplex(seed in any::<u64>(), n in 2usize..7, sparsity in 0.0f64..0.9) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let m = column_stochastic(&mut rng, n, sparsity);
            let t = tol();
            let result = unit_eigenvector_eigenvalue_one(&m, &t);
            let vectors = result.vectors();
            prop_assert!(!vectors.is_empty());
            for x in vectors {
                prop_assert!((&m * x - x).amax() <= t.matching);
                prop_assert!(x.iter().all(|&v| v >= -t.entry));
                prop_assert!((x.sum() - 1.0).abs() <= t.stochastic);
            }
        }

        #[test]
        fn classes_partition_and_closed_classes_keep_mass(seed in any::<u64>(), n in 1usize..8, sparsity in 0.0f64..0.95) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let m = column_stochastic(&mut rng, n, sparsity);
            let t = tol();
            let d = irreducibility(&m, &t);
            let mut all: Vec<usize> = d.classes.iter().flatten().copied().collect();
            all.sort_unstable();
            prop_assert_eq!(all, (0..n).collect::<Vec<_>>());
            prop_assert_eq!(d.order.len(), d.classes.len());
            for class in d.closed_classes() {
                for &j in class {
                    for i in 0..n {
                        if !class.contains(&i) {
                            prop_assert!(m[(i, j)] <= t.entry);
                        }
                    }
                }
            }
        }
    }
}
