//! Solvers for Caputo fractional ordinary differential equations.

// `!(x > 0.0)` is used on purpose so that NaN inputs are rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod library;
pub mod multiterm;
pub mod problem;
pub mod specfun;
pub mod solvers;
pub mod weights;

pub use error::{FracError, Result};
pub use problem::{
    taylor_initial_part, uniform_mesh, FodeProblem, FractionalOrderVec, Mesh, MultiTermProblem, RetCode, Solution,
    SolverConfig, SolverStats,
};
pub use solvers::{newton_step, solve, solve_flmm, solve_pece, solve_pi_explicit, solve_pi_implicit, MethodId, PiVariant};
pub use weights::FlmmMethod;
pub use multiterm::{oscillator_problem, solve_multiterm, to_companion, CompanionSystem, MultiTermMethod};
pub use library::{case_by_id, exact_error, BenchmarkCase, CaseProblem, ErrorMetric, CASE_IDS};
