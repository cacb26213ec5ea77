//! Command-line front end for fracsolve: single solves written as CSV,
//! step-size sweeps written as work-precision records, and direct
//! Mittag-Leffler evaluation.
//!
//! Every command returns its exit code instead of exiting, and writes to
//! the supplied streams, so the binary is a thin wrapper and the commands
//! can be driven in-process.

pub mod args;
pub mod commands;
pub mod format;
pub mod record;
pub mod svg;

pub use args::{BenchArgs, Cli, Command, MittleffArgs, SolveArgs};
pub use commands::{cmd_bench, cmd_mittleff, cmd_solve, resolve_method, run, ResolvedMethod};
pub use record::{ErrorValue, WorkPrecisionRecord};

/// Exit codes shared by all commands.
pub mod exit {
    pub const SUCCESS: i32 = 0;
    pub const USAGE: i32 = 1;
    /// The solver stopped early (divergence or a failed Newton solve).
    pub const SOLVER_FAILURE: i32 = 2;
}
