//! Deterministic Lipschitz global optimization.
//!
//! Box-constrained black-box minimization with univariate geometric methods,
//! a multidimensional method on diagonal partitions with vertex reuse, the
//! DIRECT and DIRECT-l baselines, a GKLS-style generator of test classes with
//! known minima, and a benchmark harness built around the trial-count
//! comparison protocol.

pub mod diagonal;
pub mod direct;
pub mod error;
pub mod framework;
pub mod hull;
pub mod minorant;
pub mod problem;
pub mod testfns;
pub mod geometric1d;
pub mod gkls;
pub mod harness;

pub use error::{Error, EvalError, Result};
pub use framework::{run_divide_the_best, StoppingCriteria};
pub use problem::{BoxDomain, LipschitzSpec, Objective, SolverResult, Termination, Trial};
