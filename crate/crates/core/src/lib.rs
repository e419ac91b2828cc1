//! Identification of information structures and priors from belief landscapes.
//!
//! A belief landscape is the pair `(B, Q)`: each belief type's posterior over
//! states, and each type's expected distribution of a random peer's type. The
//! [`forward`] module generates landscapes from an information structure and a
//! prior. The [`identify`] module inverts that map.
//!
//! ```
//! use beliefscape::{fixtures, forward, identify, Tolerances};
//!
//! let tol = Tolerances::default();
//! let env = fixtures::ex1_environment(0.25);
//! let landscape = forward::generate_landscape(&env, &tol).unwrap().landscape;
//! let result = identify::identify(&landscape, &tol).unwrap();
//! assert!((result.structure.entries() - env.structure().entries()).amax() < 1e-9);
//! ```

pub mod error;
pub mod fixtures;
pub mod forward;
pub mod identify;
pub mod linalg;
pub mod model;

pub use error::{Error, Result};
pub use linalg::{ClassDecomposition, EigenvalueOne, NullSpaceBasis, Regularizer};
pub use model::{
    validate_environment, validate_landscape, BeliefLandscape, Distribution, HypotheticalBeliefMatrix,
    InformationStructure, InformationalEnvironment, MatrixKind, PlausibilityReport, Prior, SignalMarginal,
    StateBeliefMatrix, Tolerances, Violation,
};
