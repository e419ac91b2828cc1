//! Worked instances used throughout the tests, the CLI self-test and the docs.
//!
//! - EX1: truth-or-noise, a null signal with probability `eps`, otherwise the state is revealed.
//! - EX2: the 2x2 landscape with `Q(a, b) = [[a, 1-a], [1-b, b]]`.
//! - EX3: two signals, three states.
//! - EX4: four states where the third state's beliefs are a mixture of the first two.
//! - EX5: a partitional structure over four states, cells `{t1}, {t2, t3}, {t4}`.

use nalgebra::{DMatrix, DVector};

use crate::model::{BeliefLandscape, InformationalEnvironment};

fn landscape(b: DMatrix<f64>, q: DMatrix<f64>) -> BeliefLandscape {
    BeliefLandscape::from_matrices(b, q).expect("fixture dimensions are consistent")
}

fn environment(structure: DMatrix<f64>, prior: Vec<f64>) -> InformationalEnvironment {
    InformationalEnvironment::from_matrices(structure, DVector::from_vec(prior))
        .expect("fixture dimensions are consistent")
}

/// EX1 structure: signal 1 is the null signal, signal `i + 1` reveals state `i`.
pub fn ex1_structure(eps: f64) -> DMatrix<f64> {
    let r = 1.0 - eps;
    DMatrix::from_row_slice(
        3,
        4,
        &[
            eps, r, 0.0, 0.0, //
            eps, 0.0, r, 0.0, //
            eps, 0.0, 0.0, r,
        ],
    )
}

pub fn ex1_environment_with_prior(eps: f64, prior: [f64; 3]) -> InformationalEnvironment {
    environment(ex1_structure(eps), prior.to_vec())
}

pub fn ex1_environment(eps: f64) -> InformationalEnvironment {
    ex1_environment_with_prior(eps, [1.0 / 3.0; 3])
}

pub fn ex1_landscape_with_prior(eps: f64, p: [f64; 3]) -> BeliefLandscape {
    let r = 1.0 - eps;
    let b = DMatrix::from_row_slice(
        4,
        3,
        &[
            p[0], p[1], p[2], //
            1.0, 0.0, 0.0, //
            0.0, 1.0, 0.0, //
            0.0, 0.0, 1.0,
        ],
    );
    let q = DMatrix::from_row_slice(
        4,
        4,
        &[
            eps,
            r * p[0],
            r * p[1],
            r * p[2], //
            eps,
            r,
            0.0,
            0.0, //
            eps,
            0.0,
            r,
            0.0, //
            eps,
            0.0,
            0.0,
            r,
        ],
    );
    landscape(b, q)
}

/// EX1 with a uniform prior.
pub fn ex1_landscape(eps: f64) -> BeliefLandscape {
    ex1_landscape_with_prior(eps, [1.0 / 3.0; 3])
}

/// `(B^T B)^{-1} B^T` for EX1 with a uniform prior.
pub fn ex1_regression_operator() -> DMatrix<f64> {
    let (a, b, c) = (0.25, 11.0 / 12.0, -1.0 / 12.0);
    DMatrix::from_row_slice(
        3,
        4,
        &[
            a, b, c, c, //
            a, c, b, c, //
            a, c, c, b,
        ],
    )
}

/// EX1 beliefs (uniform prior) paired with a plausible `Q` that no structure produces.
pub fn ex1_q_tilde_landscape() -> BeliefLandscape {
    let b = ex1_landscape(0.5).b().clone();
    let q = DMatrix::from_row_slice(
        4,
        4,
        &[
            0.5,
            1.0 / 6.0,
            1.0 / 6.0,
            1.0 / 6.0,
            0.5,
            0.5,
            0.0,
            0.0,
            0.5,
            0.0,
            0.5,
            0.0,
            0.25,
            0.25,
            0.25,
            0.25,
        ],
    );
    landscape(b, q)
}

/// Regression output for [`ex1_q_tilde_landscape`].
pub fn ex1_q_tilde_regression() -> DMatrix<f64> {
    let f = |x: f64| x / 48.0;
    DMatrix::from_row_slice(
        3,
        4,
        &[
            f(25.0),
            f(23.0),
            f(-1.0),
            f(1.0),
            f(25.0),
            f(-1.0),
            f(23.0),
            f(1.0),
            f(13.0),
            f(11.0),
            f(11.0),
            f(13.0),
        ],
    )
}

pub fn ex2_beliefs() -> DMatrix<f64> {
    DMatrix::from_row_slice(2, 2, &[0.25, 0.75, 0.75, 0.25])
}

pub fn ex2_landscape(a: f64, b: f64) -> BeliefLandscape {
    let q = DMatrix::from_row_slice(2, 2, &[a, 1.0 - a, 1.0 - b, b]);
    landscape(ex2_beliefs(), q)
}

pub fn ex3_landscape() -> BeliefLandscape {
    let b = DMatrix::from_row_slice(2, 3, &[2.0 / 3.0, 1.0 / 3.0, 0.0, 4.0 / 9.0, 1.0 / 9.0, 4.0 / 9.0]);
    let q = DMatrix::from_row_slice(2, 2, &[7.0 / 18.0, 11.0 / 18.0, 11.0 / 54.0, 43.0 / 54.0]);
    landscape(b, q)
}

/// The environment behind EX3.
pub fn ex3_environment() -> InformationalEnvironment {
    environment(
        DMatrix::from_row_slice(3, 2, &[1.0 / 3.0, 2.0 / 3.0, 0.5, 0.5, 0.0, 1.0]),
        vec![0.5, 1.0 / 6.0, 1.0 / 3.0],
    )
}

/// Minimum-norm solution of `Q = B X` for EX3.
pub fn ex3_ridge_limit() -> DMatrix<f64> {
    DMatrix::from_row_slice(
        3,
        2,
        &[
            29.0 / 63.0,
            52.0 / 63.0,
            31.0 / 126.0,
            23.0 / 126.0,
            -4.0 / 63.0,
            58.0 / 63.0,
        ],
    )
}

/// `B^T I^T` for the EX3 environment.
pub fn ex3_peer_accuracy() -> DMatrix<f64> {
    DMatrix::from_row_slice(
        3,
        3,
        &[
            14.0 / 27.0,
            5.0 / 9.0,
            4.0 / 9.0,
            5.0 / 27.0,
            2.0 / 9.0,
            1.0 / 9.0,
            8.0 / 27.0,
            2.0 / 9.0,
            4.0 / 9.0,
        ],
    )
}

/// `B^T X^T` for the EX3 ridge limit `X`.
pub fn ex3_ridge_peer_accuracy() -> DMatrix<f64> {
    DMatrix::from_row_slice(
        3,
        3,
        &[
            382.0, 139.0, 208.0, //
            139.0, 58.0, 46.0, //
            208.0, 46.0, 232.0,
        ],
    ) / 567.0
}

pub fn ex4_landscape() -> BeliefLandscape {
    let b = DMatrix::from_row_slice(
        4,
        4,
        &[
            2.0 / 3.0,
            0.0,
            1.0 / 3.0,
            0.0,
            1.0 / 3.0,
            1.0 / 3.0,
            1.0 / 3.0,
            0.0,
            0.0,
            2.0 / 5.0,
            1.0 / 5.0,
            2.0 / 5.0,
            0.0,
            0.0,
            0.0,
            1.0,
        ],
    );
    let q = DMatrix::from_row_slice(
        4,
        4,
        &[
            0.5, 0.5, 0.0, 0.0, //
            0.25, 0.5, 0.25, 0.0, //
            0.0, 0.3, 0.5, 0.2, //
            0.0, 0.0, 0.5, 0.5,
        ],
    );
    landscape(b, q)
}

/// The four-state environment that generates EX4's `B` (uniform prior).
///
/// Its `Q = B I` is not EX4's `Q`; the printed `Q` is generated by the reduced
/// environment on three states.
pub fn ex4_environment() -> InformationalEnvironment {
    environment(
        DMatrix::from_row_slice(
            4,
            4,
            &[
                0.5, 0.5, 0.0, 0.0, //
                0.0, 0.5, 0.5, 0.0, //
                0.25, 0.5, 0.25, 0.0, //
                0.0, 0.0, 0.5, 0.5,
            ],
        ),
        vec![0.25; 4],
    )
}

/// EX4 beliefs with the third state folded back into the first two.
pub fn ex4_reduced_beliefs() -> DMatrix<f64> {
    DMatrix::from_row_slice(
        4,
        3,
        &[
            1.0, 0.0, 0.0, //
            0.5, 0.5, 0.0, //
            0.0, 0.6, 0.4, //
            0.0, 0.0, 1.0,
        ],
    )
}

pub fn ex4_reduced_structure() -> DMatrix<f64> {
    DMatrix::from_row_slice(
        3,
        4,
        &[
            0.5, 0.5, 0.0, 0.0, //
            0.0, 0.5, 0.5, 0.0, //
            0.0, 0.0, 0.5, 0.5,
        ],
    )
}

/// Prior on the reduced states; with [`ex4_reduced_structure`] it generates `(B̃, Q)`.
pub fn ex4_reduced_prior() -> DVector<f64> {
    DVector::from_vec(vec![0.375, 0.375, 0.25])
}

/// Left eigenvector of EX4's `Q`, i.e. the signal marginal.
pub fn ex4_signal_marginal() -> DVector<f64> {
    DVector::from_vec(vec![3.0 / 16.0, 3.0 / 8.0, 5.0 / 16.0, 1.0 / 8.0])
}

/// EX5 partition structure: signals reveal the cell of `{t1}, {t2, t3}, {t4}`.
pub fn ex5_structure() -> DMatrix<f64> {
    DMatrix::from_row_slice(
        4,
        3,
        &[
            1.0, 0.0, 0.0, //
            0.0, 1.0, 0.0, //
            0.0, 1.0, 0.0, //
            0.0, 0.0, 1.0,
        ],
    )
}

/// EX5 landscape; only the conditional weights of `t2` and `t3` enter `B`.
pub fn ex5_landscape(p2: f64, p3: f64) -> BeliefLandscape {
    let s = p2 + p3;
    let b = DMatrix::from_row_slice(
        3,
        4,
        &[
            1.0,
            0.0,
            0.0,
            0.0, //
            0.0,
            p2 / s,
            p3 / s,
            0.0, //
            0.0,
            0.0,
            0.0,
            1.0,
        ],
    );
    landscape(b, DMatrix::identity(3, 3))
}

/// EX5 environment with the leftover mass split evenly between `t1` and `t4`.
pub fn ex5_environment(p2: f64, p3: f64) -> InformationalEnvironment {
    let rest = (1.0 - p2 - p3) / 2.0;
    environment(ex5_structure(), vec![rest, p2, p3, rest])
}

/// Closed form of the identity-regularized ridge limit for EX5.
pub fn ex5_ridge_limit(p2: f64, p3: f64) -> DMatrix<f64> {
    let d = p2 * p2 + p3 * p3;
    let s = p2 + p3;
    DMatrix::from_row_slice(
        4,
        3,
        &[1.0, 0.0, 0.0, 0.0, p2 * s / d, 0.0, 0.0, p3 * s / d, 0.0, 0.0, 0.0, 1.0],
    )
}

/// Closed form of `lim (B^T B + λI)^{-1} λ I_struct`, the part of the true structure the ridge limit loses.
pub fn ex5_ridge_gap(p2: f64, p3: f64) -> DMatrix<f64> {
    let d = p2 * p2 + p3 * p3;
    let mut m = DMatrix::zeros(4, 3);
    m[(1, 1)] = p3 * (p3 - p2) / d;
    m[(2, 1)] = p2 * (p2 - p3) / d;
    m
}

/// The prior-dependent diagonal regularizer under which the ridge limit is the partition structure.
pub fn ex5_regularizer(p2: f64, p3: f64) -> DMatrix<f64> {
    DMatrix::from_diagonal(&DVector::from_vec(vec![1.0, 1.0, p3 / p2, 1.0]))
}
