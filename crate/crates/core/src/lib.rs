//! Operator perspectives and non-commutative f-divergences on dense
//! Hermitian matrices, with a randomized harness that checks the associated
//! Loewner-order inequalities.
//!
//! The layers build on each other:
//!
//! - [`hermitian`]: Hermitian and positive definite matrices, spectral
//!   calculus, Kronecker products and Loewner comparison.
//! - [`funcs`]: the catalog of scalar operator functions.
//! - [`perspective`]: the perspective `g(L, R)`, weighted fields, `Theta`
//!   and the `f-Delta-h` / `f-nabla-h` constructions.
//! - [`posmap`]: positive linear maps, map fields and the refined Jensen chain.
//! - [`norms`]: singular values and Ky Fan norms.
//! - [`lab`]: random generation and the registry of checks.

pub mod error;
pub mod funcs;
pub mod hermitian;
pub mod lab;
pub mod norms;
pub mod perspective;
pub mod posmap;
pub mod tolerance;

pub use error::{Error, Result};
pub use funcs::{builtin, FunctionSpec, Interval, ScalarOperatorFunction};
pub use hermitian::{loewner_compare, HermitianMatrix, PositiveDefiniteMatrix};
pub use lab::{run_check, run_suite, CheckResult, ExecMode, GenConfig, SuiteReport};
pub use perspective::{perspective, theta_divergence, WeightedOperatorField};
pub use tolerance::ToleranceConfig;
