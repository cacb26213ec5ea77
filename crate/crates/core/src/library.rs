//! Benchmark and application problems, with analytical solutions where
//! they are known.

use std::f64::consts::{FRAC_PI_4, PI, SQRT_2};
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use crate::error::{FracError, Result};
use crate::multiterm::{oscillator_problem, solve_multiterm, MultiTermMethod};
use crate::problem::{FodeProblem, MultiTermProblem, Solution, SolverConfig};
use crate::solvers::{solve, MethodId};
use crate::specfun::{gamma_fn, ml};

pub type ExactFn = dyn Fn(f64) -> Vec<f64> + Send + Sync;

pub const CASE_IDS: [&str; 9] =
    ["linear1", "nonlinear1", "nonstiff3", "stiff3", "chua", "bagley", "mtosc", "oscillator", "ferment"];

/// Order used by the single-term benchmarks when the caller gives none.
pub const DEFAULT_BENCH_ALPHA: f64 = 0.5;

#[derive(Debug, Clone)]
pub enum CaseProblem {
    Fode(FodeProblem),
    MultiTerm(MultiTermProblem),
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct CaseTags {
    pub stiff: bool,
    pub commensurate: bool,
    pub multiterm: bool,
}

#[derive(Clone)]
pub struct BenchmarkCase {
    pub id: &'static str,
    pub problem: CaseProblem,
    pub exact: Option<Arc<ExactFn>>,
    pub default_t: f64,
    pub tags: CaseTags,
}

impl fmt::Debug for BenchmarkCase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("BenchmarkCase")
            .field("id", &self.id)
            .field("problem", &self.problem)
            .field("has_exact", &self.exact.is_some())
            .field("default_t", &self.default_t)
            .field("tags", &self.tags)
            .finish()
    }
}

impl BenchmarkCase {
    pub fn exact_at(&self, t: f64) -> Option<Vec<f64>> {
        self.exact.as_ref().map(|e| e(t))
    }

    pub fn dim(&self) -> usize {
        match &self.problem {
            CaseProblem::Fode(p) => p.dim(),
            CaseProblem::MultiTerm(_) => 1,
        }
    }

    pub fn tspan(&self) -> (f64, f64) {
        match &self.problem {
            CaseProblem::Fode(p) => p.tspan(),
            CaseProblem::MultiTerm(p) => p.tspan(),
        }
    }

    /// State at `t0` as stored in the problem.
    pub fn initial_state(&self) -> Vec<f64> {
        match &self.problem {
            CaseProblem::Fode(p) => p.u0(),
            CaseProblem::MultiTerm(p) => vec![p.init()[0]],
        }
    }

    /// Same case integrated up to `tf`.
    pub fn with_final_time(&self, tf: f64) -> Result<Self> {
        let t0 = self.tspan().0;
        let problem = match &self.problem {
            CaseProblem::Fode(p) => CaseProblem::Fode(p.with_tspan((t0, tf))?),
            CaseProblem::MultiTerm(p) => CaseProblem::MultiTerm(p.with_tspan((t0, tf))?),
        };
        Ok(Self { problem, ..self.clone() })
    }

    /// Solves with a single-term method token; on multi-term cases the
    /// product-integration methods map to their multi-term variants.
    pub fn solve(&self, config: &SolverConfig, method: MethodId) -> Result<Solution> {
        match &self.problem {
            CaseProblem::Fode(p) => solve(p, config, method),
            CaseProblem::MultiTerm(p) => {
                let mt = MultiTermMethod::from_engine(method).ok_or_else(|| FracError::UnsupportedMethod {
                    method: method.token().to_string(),
                    problem: self.id.to_string(),
                })?;
                solve_multiterm(p, config, mt)
            }
        }
    }
}

pub fn case_by_id(id: &str) -> Result<BenchmarkCase, String> {
    let case = match id {
        "linear1" => case_linear_singleterm(DEFAULT_BENCH_ALPHA),
        "nonlinear1" => case_nonlinear_singleterm(DEFAULT_BENCH_ALPHA),
        "nonstiff3" => case_nonstiff_system(),
        "stiff3" => case_stiff_system_default(),
        "chua" => case_chua(),
        "bagley" => case_bagley_torvik(),
        "mtosc" => case_multiterm_oscillation(),
        "oscillator" => case_oscillator(0.81695, -1.0, 1.2, 4.0),
        "ferment" => case_fermentation(DEFAULT_FERMENT_INIT),
        _ => return Err(format!("unknown case `{id}` (expected one of {})", CASE_IDS.join(", "))),
    };
    case.map_err(|e| e.to_string())
}

/// `D^a u = 40320/G(9-a) t^{8-a} - 3 G(5+a/2)/G(5-a/2) t^{4-a/2} + 9/4 G(a+1)
/// + (3/2 t^{a/2} - t^4)^3 - u^{3/2}`, `u(0) = 0`, on `[0, 1]`, with
/// `u = t^8 - 3 t^{4+a/2} + 9/4 t^a`.
pub fn case_linear_singleterm(alpha: f64) -> Result<BenchmarkCase> {
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(FracError::NonPositiveOrder(alpha));
    }
    let c8 = 40320.0 / gamma_fn(9.0 - alpha)?;
    let c4 = 3.0 * gamma_fn(5.0 + alpha / 2.0)? / gamma_fn(5.0 - alpha / 2.0)?;
    let c0 = 2.25 * gamma_fn(alpha + 1.0)?;
    let rhs = move |t: f64, u: &[f64], _: &[f64], du: &mut [f64]| {
        let cube = 1.5 * t.powf(alpha / 2.0) - t.powi(4);
        du[0] = c8 * t.powf(8.0 - alpha) - c4 * t.powf(4.0 - alpha / 2.0) + c0 + cube.powi(3) - u[0].powf(1.5);
    };
    let problem = FodeProblem::new(rhs, vec![alpha], vec![0.0], (0.0, 1.0), vec![])?;
    let exact = move |t: f64| vec![t.powi(8) - 3.0 * t.powf(4.0 + alpha / 2.0) + 2.25 * t.powf(alpha)];
    Ok(BenchmarkCase {
        id: "linear1",
        problem: CaseProblem::Fode(problem),
        exact: Some(Arc::new(exact)),
        default_t: 1.0,
        tags: CaseTags { commensurate: true, ..CaseTags::default() },
    })
}

/// `D^a u = -10 u`, `u(0) = 1`, on `[0, 1]`; `u = E_a(-10 t^a)`.
pub fn case_nonlinear_singleterm(alpha: f64) -> Result<BenchmarkCase> {
    let problem = FodeProblem::new(|_, u, _, du| du[0] = -10.0 * u[0], vec![alpha], vec![1.0], (0.0, 1.0), vec![])?;
    let exact = move |t: f64| vec![ml(alpha, -10.0 * t.powf(alpha)).unwrap_or(f64::NAN)];
    Ok(BenchmarkCase {
        id: "nonlinear1",
        problem: CaseProblem::Fode(problem),
        exact: Some(Arc::new(exact)),
        default_t: 1.0,
        tags: CaseTags { commensurate: true, ..CaseTags::default() },
    })
}

/// Three-component system of orders `[0.5, 0.2, 0.6]` on `[0, 5]` with
/// solution `[t + 1, t^1.2 + 0.5, t^1.8 + 0.3]`.
pub fn case_nonstiff_system() -> Result<BenchmarkCase> {
    let g22 = gamma_fn(2.2)?;
    let g28 = gamma_fn(2.8)?;
    let rhs = move |t: f64, u: &[f64], _: &[f64], du: &mut [f64]| {
        let prod = (u[1] - 0.5) * (u[2] - 0.3);
        // real sixth root, odd extension so small overshoots stay finite
        let root = prod.signum() * prod.abs().powf(1.0 / 6.0);
        du[0] = (root + t.sqrt()) / PI.sqrt();
        du[1] = g22 * (u[0] - 1.0);
        du[2] = g28 / g22 * (u[1] - 0.5);
    };
    let problem = FodeProblem::new(rhs, vec![0.5, 0.2, 0.6], vec![1.0, 0.5, 0.3], (0.0, 5.0), vec![])?;
    let exact = |t: f64| vec![t + 1.0, t.powf(1.2) + 0.5, t.powf(1.8) + 0.3];
    Ok(BenchmarkCase {
        id: "nonstiff3",
        problem: CaseProblem::Fode(problem),
        exact: Some(Arc::new(exact)),
        default_t: 5.0,
        tags: CaseTags::default(),
    })
}

pub const STIFF_A: [[f64; 3]; 3] = [[-10000.0, 0.0, 1.0], [-0.05, -0.08, -0.2], [1.0, 0.0, -1.0]];
pub const STIFF_B: [[f64; 3]; 3] = [[-0.6, 0.0, 0.2], [-0.1, -0.2, 0.0], [0.0, -0.5, -0.8]];
const STIFF_ALPHA: f64 = 0.5;

/// Stiff commensurate system `D^{1/2} u = (A + B) u + g(t)` on `[0, 1]`,
/// `u(0) = (1, 1, 1)`, manufactured so that
/// `u_i = a_{2i-1} G_{2i-1} t^{s_{2i-1}} + a_{2i} G_{2i} t^{s_{2i}} + 1` with
/// `G_k = Gamma(s_k + 1) / Gamma(s_k + 1 - 1/2)`.
pub fn case_stiff_system(a: [f64; 6], sigma: [f64; 6]) -> Result<BenchmarkCase> {
    if let Some(&bad) = sigma.iter().find(|s| !(**s > 0.0)) {
        return Err(FracError::NonPositiveExponent(bad));
    }
    let alpha = STIFF_ALPHA;
    let mut amp = [0.0; 6];
    let mut damp = [0.0; 6];
    for k in 0..6 {
        let gk = gamma_fn(sigma[k] + 1.0)? / gamma_fn(sigma[k] + 1.0 - alpha)?;
        amp[k] = a[k] * gk;
        // D^alpha t^s = G t^{s - alpha}, so the derivative carries G twice
        damp[k] = a[k] * gk * gk;
    }
    let mut m = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            m[i][j] = STIFF_A[i][j] + STIFF_B[i][j];
        }
    }
    let exact = move |t: f64| -> Vec<f64> {
        (0..3)
            .map(|i| amp[2 * i] * t.powf(sigma[2 * i]) + amp[2 * i + 1] * t.powf(sigma[2 * i + 1]) + 1.0)
            .collect()
    };
    let rhs = move |t: f64, u: &[f64], _: &[f64], du: &mut [f64]| {
        let ue = exact(t);
        for i in 0..3 {
            let deriv = (2 * i..2 * i + 2)
                .map(|k| if damp[k] == 0.0 { 0.0 } else { damp[k] * t.powf(sigma[k] - alpha) })
                .sum::<f64>();
            let mut acc = deriv;
            for j in 0..3 {
                acc += m[i][j] * (u[j] - ue[j]);
            }
            du[i] = acc;
        }
    };
    let problem = FodeProblem::new(rhs, vec![alpha; 3], vec![1.0; 3], (0.0, 1.0), vec![])?;
    Ok(BenchmarkCase {
        id: "stiff3",
        problem: CaseProblem::Fode(problem),
        exact: Some(Arc::new(exact)),
        default_t: 1.0,
        tags: CaseTags { stiff: true, commensurate: true, multiterm: false },
    })
}

/// `a_k = 1`, `s_k = k / 2`.
pub fn case_stiff_system_default() -> Result<BenchmarkCase> {
    let sigma = std::array::from_fn(|k| (k + 1) as f64 * STIFF_ALPHA);
    case_stiff_system([1.0; 6], sigma)
}

pub const CHUA_PARAMS: [f64; 5] = [10.725, 10.593, 0.268, -0.1927, -0.7872];

/// Fractional Chua circuit, parameters `p = [a, b, c, m0, m1]`.
pub fn chua_rhs(_t: f64, x: &[f64], p: &[f64], du: &mut [f64]) {
    let (a, b, c, m0, m1) = (p[0], p[1], p[2], p[3], p[4]);
    let nonlinearity = m1 * x[0] + m0 * ((x[0] + 1.0).abs() - (x[0] - 1.0).abs());
    du[0] = a * (x[1] - x[0] - nonlinearity);
    du[1] = x[0] - x[1] + x[2];
    du[2] = -b * x[1] - c * x[2];
}

pub fn case_chua() -> Result<BenchmarkCase> {
    let problem =
        FodeProblem::new(chua_rhs, vec![0.93, 0.99, 0.92], vec![0.2, -0.1, 0.1], (0.0, 100.0), CHUA_PARAMS.to_vec())?;
    Ok(BenchmarkCase {
        id: "chua",
        problem: CaseProblem::Fode(problem),
        exact: None,
        default_t: 100.0,
        tags: CaseTags::default(),
    })
}

/// `y'' + 1/2 D^{3/2} y + 1/2 y = f`, `f = 8` on `[0, 1]` and `0` after.
pub fn case_bagley_torvik() -> Result<BenchmarkCase> {
    let problem = MultiTermProblem::new(
        vec![1.0, 0.5, 0.5],
        vec![2.0, 1.5, 0.0],
        |t, _, _| if t > 1.0 { 0.0 } else { 8.0 },
        vec![0.0, 0.0],
        (0.0, 20.0),
        vec![],
    )?;
    Ok(BenchmarkCase {
        id: "bagley",
        problem: CaseProblem::MultiTerm(problem),
        exact: None,
        default_t: 20.0,
        tags: CaseTags { multiterm: true, ..CaseTags::default() },
    })
}

/// `u''' + D^{5/2} u + u'' + 4 u' + D^{1/2} u + 4 u = 6 cos t` with
/// `u(0) = 1, u'(0) = 1, u''(0) = -1`; `u = sqrt(2) sin(t + pi/4)`.
pub fn case_multiterm_oscillation() -> Result<BenchmarkCase> {
    let problem = MultiTermProblem::new(
        vec![1.0, 1.0, 1.0, 4.0, 1.0, 4.0],
        vec![3.0, 2.5, 2.0, 1.0, 0.5, 0.0],
        |t, _, _| 6.0 * t.cos(),
        vec![1.0, 1.0, -1.0],
        (0.0, 100.0),
        vec![],
    )?;
    Ok(BenchmarkCase {
        id: "mtosc",
        problem: CaseProblem::MultiTerm(problem),
        exact: Some(Arc::new(|t: f64| vec![SQRT_2 * (t + FRAC_PI_4).sin()])),
        default_t: 100.0,
        tags: CaseTags { multiterm: true, ..CaseTags::default() },
    })
}

pub fn case_oscillator(theta: f64, a: f64, b: f64, g: f64) -> Result<BenchmarkCase> {
    Ok(BenchmarkCase {
        id: "oscillator",
        problem: CaseProblem::MultiTerm(oscillator_problem(theta, a, b, g)?),
        exact: None,
        default_t: 80.0,
        tags: CaseTags { multiterm: true, ..CaseTags::default() },
    })
}

/// Fitted rates `[k_c, k_m, k_s, k_p]` of the fractional fermentation model.
pub const FERMENT_PARAMS: [f64; 4] = [0.004265, 0.000499, 0.055166, 0.015805];
pub const FERMENT_ORDERS: [f64; 3] = [0.775347, 0.873674, 0.976698];
/// Placeholder `(B, S, P)` at `t = 0` for smoke runs; not fitted data.
pub const DEFAULT_FERMENT_INIT: [f64; 3] = [0.5, 100.0, 0.0];

/// Biomass `B`, substrate `S`, product `P`:
/// `D B = k_c B S - k_m B`, `D S = -k_s B S`, `D P = k_p B S`, over 48 h.
pub fn case_fermentation(init: [f64; 3]) -> Result<BenchmarkCase> {
    let rhs = |_t: f64, u: &[f64], p: &[f64], du: &mut [f64]| {
        let (b, s) = (u[0], u[1]);
        du[0] = p[0] * b * s - p[1] * b;
        du[1] = -p[2] * b * s;
        du[2] = p[3] * b * s;
    };
    let problem = FodeProblem::new(rhs, FERMENT_ORDERS.to_vec(), init.to_vec(), (0.0, 48.0), FERMENT_PARAMS.to_vec())?;
    Ok(BenchmarkCase {
        id: "ferment",
        problem: CaseProblem::Fode(problem),
        exact: None,
        default_t: 48.0,
        tags: CaseTags::default(),
    })
}

/// Error measure for work-precision sweeps.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ErrorMetric {
    /// `|y_N - u(t_N)|_inf`
    #[default]
    FinalTime,
    /// `max_n |y_n - u(t_n)|_inf`
    SupNorm,
}

impl ErrorMetric {
    pub fn token(self) -> &'static str {
        match self {
            ErrorMetric::FinalTime => "final_time",
            ErrorMetric::SupNorm => "sup_norm",
        }
    }
}

impl FromStr for ErrorMetric {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "final_time" => Ok(ErrorMetric::FinalTime),
            "sup_norm" => Ok(ErrorMetric::SupNorm),
            _ => Err(format!("unknown metric `{s}` (expected final_time or sup_norm)")),
        }
    }
}

/// Distance to the analytical solution. An incomplete or non-finite
/// trajectory has infinite error.
pub fn exact_error(solution: &Solution, case: &BenchmarkCase, metric: ErrorMetric) -> Result<f64> {
    let exact = case.exact.as_ref().ok_or(FracError::NoExactSolution)?;
    if solution.len() < solution.mesh.len() {
        return Ok(f64::INFINITY);
    }
    let row_error = |n: usize| -> f64 {
        let reference = exact(solution.mesh[n]);
        solution
            .state(n)
            .iter()
            .zip(&reference)
            .map(|(y, u)| (y - u).abs())
            .fold(0.0, |m: f64, e| if e.is_nan() { f64::INFINITY } else { m.max(e) })
    };
    Ok(match metric {
        ErrorMetric::FinalTime => row_error(solution.len() - 1),
        ErrorMetric::SupNorm => (0..solution.len()).map(row_error).fold(0.0, f64::max),
    })
}
