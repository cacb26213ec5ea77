//! Linear multi-term equations, solved through an equivalent system of
//! single-order equations.

use std::fmt;
use std::str::FromStr;

use crate::error::{FracError, Result};
use crate::problem::{FodeProblem, MultiTermProblem, Solution, SolverConfig};
use crate::solvers::{solve, MethodId};

const STAGE_EPS: f64 = 1e-12;

/// Sequential reformulation `z_1 = y`, `D^{beta_j} z_j = z_{j+1}` whose last
/// stage carries the equation itself.
#[derive(Debug, Clone)]
pub struct CompanionSystem {
    /// Stage orders, each in `(0, 1]`.
    pub betas: Vec<f64>,
    /// Cumulative order `sigma_j` represented by stage `j` (`sigma_0 = 0`).
    pub sigmas: Vec<f64>,
    /// Initial value of every stage.
    pub init: Vec<f64>,
    /// Stage holding `D^{alpha_k} y` for each lower-order term.
    pub term_stage: Vec<usize>,
    pub problem: FodeProblem,
}

impl CompanionSystem {
    pub fn dim(&self) -> usize {
        self.betas.len()
    }
}

fn is_integer(x: f64) -> Option<usize> {
    let r = x.round();
    ((x - r).abs() <= STAGE_EPS).then_some(r as usize)
}

/// Builds the companion system.
///
/// Stage orders are the successive differences of `0 < alpha_1 < ... <
/// alpha_Q`; a difference above one is split into unit stages followed by
/// the fractional remainder. A stage whose cumulative order is an integer
/// `k` starts at `y^(k)(0)`, every other stage starts at zero.
pub fn to_companion(mt: &MultiTermProblem) -> Result<CompanionSystem> {
    let orders = mt.orders();
    let mut betas = Vec::new();
    let mut sigmas = vec![0.0];
    let mut prev = 0.0;
    for &alpha in orders {
        let mut beta = alpha - prev;
        while beta > 1.0 + STAGE_EPS {
            betas.push(1.0);
            sigmas.push(sigmas.last().unwrap() + 1.0);
            beta -= 1.0;
        }
        if beta > STAGE_EPS {
            betas.push(beta);
            sigmas.push(alpha);
        }
        prev = alpha;
    }
    sigmas.pop(); // the top order is the equation, not a stage

    let init: Vec<f64> = sigmas
        .iter()
        .map(|&s| is_integer(s).map_or(0.0, |k| mt.init()[k]))
        .collect();

    let q = orders.len();
    let term_stage: Vec<usize> = orders[..q - 1]
        .iter()
        .map(|&a| {
            sigmas
                .iter()
                .position(|&s| (s - a).abs() <= STAGE_EPS)
                .expect("every lower order is a cumulative stage order")
        })
        .collect();

    let lambdas = mt.lambdas().to_vec();
    let lead = lambdas[q - 1];
    let stages = betas.len();
    let equation = mt.clone();
    let rhs_terms = term_stage.clone();
    let rhs = move |t: f64, z: &[f64], _: &[f64], dz: &mut [f64]| {
        dz[..stages - 1].copy_from_slice(&z[1..stages]);
        let mut top = equation.eval(t, z[0]);
        for (k, &stage) in rhs_terms.iter().enumerate() {
            top -= lambdas[k] * z[stage];
        }
        dz[stages - 1] = top / lead;
    };
    let problem = FodeProblem::new(rhs, betas.clone(), init.clone(), mt.tspan(), mt.params().to_vec())?;
    Ok(CompanionSystem { betas, sigmas, init, term_stage, problem })
}

/// Multi-term solver selector, one per product-integration engine.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MultiTermMethod {
    MtPiEx,
    MtPiRect,
    MtPiTrap,
    MtPece,
}

impl MultiTermMethod {
    pub const ALL: [MultiTermMethod; 4] =
        [MultiTermMethod::MtPiEx, MultiTermMethod::MtPiRect, MultiTermMethod::MtPiTrap, MultiTermMethod::MtPece];

    pub fn token(self) -> &'static str {
        match self {
            MultiTermMethod::MtPiEx => "mtpiex",
            MultiTermMethod::MtPiRect => "mtpirect",
            MultiTermMethod::MtPiTrap => "mtpitrap",
            MultiTermMethod::MtPece => "mtpece",
        }
    }

    /// Engine used on the companion system.
    pub fn engine(self) -> MethodId {
        match self {
            MultiTermMethod::MtPiEx => MethodId::PiEx,
            MultiTermMethod::MtPiRect => MethodId::PiRect,
            MultiTermMethod::MtPiTrap => MethodId::PiTrap,
            MultiTermMethod::MtPece => MethodId::Pece,
        }
    }

    /// Multi-term counterpart of a single-term method, if there is one.
    pub fn from_engine(method: MethodId) -> Option<Self> {
        Self::ALL.into_iter().find(|m| m.engine() == method)
    }
}

impl fmt::Display for MultiTermMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.token())
    }
}

impl FromStr for MultiTermMethod {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        Self::ALL
            .into_iter()
            .find(|m| m.token() == s)
            .ok_or_else(|| format!("unknown multi-term method `{s}`"))
    }
}

/// Solves through the companion system and returns the `y` trajectory.
pub fn solve_multiterm(mt: &MultiTermProblem, config: &SolverConfig, method: MultiTermMethod) -> Result<Solution> {
    let companion = to_companion(mt)?;
    let full = solve(&companion.problem, config, method.engine())?;
    let y = full.component(0);
    Ok(Solution { mesh: full.mesh, dim: 1, states: y, retcode: full.retcode, stats: full.stats })
}

/// Fractional oscillator `u'' + a u' + b D^theta u + g u = 0`,
/// `u(0) = u'(0) = -0.5`, on `[0, 80]`.
pub fn oscillator_problem(theta: f64, a: f64, b: f64, g: f64) -> Result<MultiTermProblem> {
    if !(theta > 0.0 && theta < 1.0) {
        return Err(FracError::InvalidParameters(format!("oscillator order must lie in (0, 1), got {theta}")));
    }
    MultiTermProblem::new(vec![g, b, a, 1.0], vec![0.0, theta, 1.0, 2.0], |_, _, _| 0.0, vec![-0.5, -0.5], (0.0, 80.0), vec![])
}
