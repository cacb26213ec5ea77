//! Time-stepping engines for [`FodeProblem`].

mod flmm;
mod newton;
mod pi;

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

pub use flmm::solve_flmm;
pub use newton::{newton_step, NewtonSolution};
pub use pi::{solve_pece, solve_pi_explicit, solve_pi_implicit, PiVariant};

use crate::error::Result;
use crate::problem::{uniform_mesh, FodeProblem, Mesh, RetCode, Solution, SolverConfig, SolverStats};
use crate::weights::{FlmmMethod, Halt, HistoryMode};

/// Solver selector; [`MethodId::token`] gives the command-line spelling.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MethodId {
    PiEx,
    PiRect,
    PiTrap,
    Pece,
    Flmm(FlmmMethod),
}

impl MethodId {
    pub const ALL: [MethodId; 7] = [
        MethodId::PiEx,
        MethodId::PiRect,
        MethodId::PiTrap,
        MethodId::Pece,
        MethodId::Flmm(FlmmMethod::Bdf2),
        MethodId::Flmm(FlmmMethod::NewtonGregory),
        MethodId::Flmm(FlmmMethod::Trapezoidal),
    ];

    pub fn token(self) -> &'static str {
        match self {
            MethodId::PiEx => "piex",
            MethodId::PiRect => "pirect",
            MethodId::PiTrap => "pitrap",
            MethodId::Pece => "pece",
            MethodId::Flmm(m) => m.token(),
        }
    }

    /// Whether the newest node enters its own update.
    pub fn is_implicit(self) -> bool {
        !matches!(self, MethodId::PiEx | MethodId::Pece)
    }
}

impl fmt::Display for MethodId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.token())
    }
}

impl FromStr for MethodId {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        MethodId::ALL.into_iter().find(|m| m.token() == s).ok_or_else(|| {
            let valid: Vec<&str> = MethodId::ALL.iter().map(|m| m.token()).collect();
            format!("unknown method `{s}` (expected one of {})", valid.join(", "))
        })
    }
}

pub fn solve(problem: &FodeProblem, config: &SolverConfig, method: MethodId) -> Result<Solution> {
    match method {
        MethodId::PiEx => solve_pi_explicit(problem, config),
        MethodId::PiRect => solve_pi_implicit(problem, config, PiVariant::Rect),
        MethodId::PiTrap => solve_pi_implicit(problem, config, PiVariant::Trap),
        MethodId::Pece => solve_pece(problem, config),
        MethodId::Flmm(m) => solve_flmm(problem, config, m),
    }
}

fn history_mode(config: &SolverConfig) -> HistoryMode {
    if config.use_fft_history {
        HistoryMode::FftBlocked { threshold: config.fft_block_threshold }
    } else {
        HistoryMode::Direct
    }
}

/// Accumulates rows and counters for one march.
struct Recorder {
    mesh: Mesh,
    dim: usize,
    states: Vec<f64>,
    stats: SolverStats,
    started: Instant,
}

impl Recorder {
    fn new(problem: &FodeProblem, config: &SolverConfig) -> Result<Self> {
        config.validate(problem.tspan())?;
        let mesh = uniform_mesh(problem.tspan(), config.dt)?;
        let dim = problem.dim();
        let mut states = Vec::with_capacity((mesh.steps + 1) * dim);
        states.extend(problem.u0());
        let stats = SolverStats { mesh_end_mismatch: mesh.end_mismatch, ..SolverStats::default() };
        Ok(Self { mesh, dim, states, stats, started: Instant::now() })
    }

    fn steps(&self) -> usize {
        self.mesh.steps
    }

    fn push(&mut self, row: &[f64]) {
        self.states.extend_from_slice(row);
    }

    fn row(&self, n: usize) -> &[f64] {
        &self.states[n * self.dim..(n + 1) * self.dim]
    }

    fn finish(mut self, outcome: std::result::Result<(), (usize, Halt)>) -> Solution {
        let retcode = match outcome {
            Ok(()) => RetCode::Success,
            Err((_, Halt::Diverged)) => RetCode::Diverged,
            Err((_, Halt::NewtonFailed)) => RetCode::NewtonFailed,
        };
        // a diverged march keeps only its finite prefix
        while self.states.len() >= self.dim && !all_finite(&self.states[self.states.len() - self.dim..]) {
            self.states.truncate(self.states.len() - self.dim);
        }
        self.stats.wall_time = self.started.elapsed().as_secs_f64();
        Solution { mesh: self.mesh.points(), dim: self.dim, states: self.states, retcode, stats: self.stats }
    }
}

fn all_finite(v: &[f64]) -> bool {
    v.iter().all(|x| x.is_finite())
}
