use super::newton::{solve_implicit, NewtonError};
use super::{all_finite, history_mode, Recorder};
use crate::error::Result;
use crate::problem::{FodeProblem, Solution, SolverConfig};
use crate::specfun::gamma_fn;
use crate::weights::{pi_coefficients, Halt, HistoryDriver, PiCoefficients};

/// Which implicit product-integration rule to use.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PiVariant {
    /// Piecewise-constant interpolation at the right end of each cell.
    Rect,
    /// Piecewise-linear interpolation.
    Trap,
}

/// Coefficient tables per distinct order and scale factors per component.
struct PiSetup {
    coeffs: Vec<PiCoefficients>,
    group: Vec<usize>,
    /// `h^alpha / Gamma(alpha + 1)`
    rect_scale: Vec<f64>,
    /// `h^alpha / Gamma(alpha + 2)`
    trap_scale: Vec<f64>,
}

impl PiSetup {
    fn new(problem: &FodeProblem, h: f64, steps: usize) -> Result<Self> {
        let (distinct, group) = problem.orders().groups();
        let coeffs = distinct
            .iter()
            .map(|&a| pi_coefficients(a, steps))
            .collect::<Result<Vec<_>>>()?;
        let mut rect_scale = Vec::with_capacity(group.len());
        let mut trap_scale = Vec::with_capacity(group.len());
        for &g in &group {
            let a = distinct[g];
            rect_scale.push(h.powf(a) / gamma_fn(a + 1.0)?);
            trap_scale.push(h.powf(a) / gamma_fn(a + 2.0)?);
        }
        Ok(Self { coeffs, group, rect_scale, trap_scale })
    }

    fn kernels<'a>(&'a self, pick: impl Fn(&'a PiCoefficients) -> &'a [f64]) -> Vec<&'a [f64]> {
        self.group.iter().map(|&g| pick(&self.coeffs[g])).collect()
    }

    fn coeffs(&self, c: usize) -> &PiCoefficients {
        &self.coeffs[self.group[c]]
    }
}

/// Explicit product-integration rectangle rule:
/// `y_n = T(t_n) + h^a/Gamma(a+1) sum_{j<n} b_{n-1-j} f_j`.
pub fn solve_pi_explicit(problem: &FodeProblem, config: &SolverConfig) -> Result<Solution> {
    let mut rec = Recorder::new(problem, config)?;
    let (mesh, dim, steps) = (rec.mesh.clone(), rec.dim, rec.steps());
    let setup = PiSetup::new(problem, config.dt, steps)?;
    let kernels = vec![setup.kernels(|c| &c.b[..])];
    let mut driver = HistoryDriver::new(steps + 1, dim, &kernels, history_mode(config));
    let outcome = driver.march(|n, hist, _, f_out| {
        let t = mesh.t(n);
        if n > 0 {
            let mut y = problem.taylor_initial_part(t);
            for c in 0..dim {
                y[c] += setup.rect_scale[c] * hist[c];
            }
            rec.push(&y);
            if !all_finite(&y) {
                return Err(Halt::Diverged);
            }
        }
        problem.eval(t, rec.row(n), f_out);
        rec.stats.rhs_evals += 1;
        Ok(())
    });
    Ok(rec.finish(outcome))
}

/// Implicit product-integration rules, one Newton solve per step.
///
/// Rect: `y_n = T(t_n) + h^a/Gamma(a+1) sum_{j=1}^{n} b_{n-j} f_j`.
/// Trap: `y_n = T(t_n) + h^a/Gamma(a+2) [a~_n f_0 + sum_{j=1}^{n-1} a_{n-j} f_j + f_n]`.
pub fn solve_pi_implicit(problem: &FodeProblem, config: &SolverConfig, variant: PiVariant) -> Result<Solution> {
    let mut rec = Recorder::new(problem, config)?;
    let (mesh, dim, steps) = (rec.mesh.clone(), rec.dim, rec.steps());
    let setup = PiSetup::new(problem, config.dt, steps)?;
    // kernel K[k] multiplies f_{n-1-k}; the j = 0 term is corrected below
    let kernels = vec![match variant {
        PiVariant::Rect => setup.kernels(|c| &c.b[1..]),
        PiVariant::Trap => setup.kernels(|c| &c.a[1..]),
    }];
    let scale = match variant {
        PiVariant::Rect => setup.rect_scale.clone(),
        PiVariant::Trap => setup.trap_scale.clone(),
    };
    let rhs = |t: f64, y: &[f64], f: &mut [f64]| problem.eval(t, y, f);

    let mut driver = HistoryDriver::new(steps + 1, dim, &kernels, history_mode(config));
    let outcome = driver.march(|n, hist, fcols, f_out| {
        let t = mesh.t(n);
        if n == 0 {
            problem.eval(t, rec.row(0), f_out);
            rec.stats.rhs_evals += 1;
            return Ok(());
        }
        let mut g = problem.taylor_initial_part(t);
        for c in 0..dim {
            let pc = setup.coeffs(c);
            let f0 = fcols[c][0];
            let sum = match variant {
                PiVariant::Rect => hist[c] - pc.b[n] * f0,
                PiVariant::Trap => hist[c] + (pc.a_tilde[n] - pc.a[n]) * f0,
            };
            g[c] += scale[c] * sum;
        }
        let guess = rec.row(n - 1).to_vec();
        implicit_update(&mut rec, &g, &scale, t, &rhs, &guess, config, f_out)
    });
    Ok(rec.finish(outcome))
}

/// Newton solve for one node; records the row and `f_n`.
#[allow(clippy::too_many_arguments)]
pub(super) fn implicit_update<F>(
    rec: &mut Recorder,
    g: &[f64],
    scale: &[f64],
    t: f64,
    rhs: &F,
    guess: &[f64],
    config: &SolverConfig,
    f_out: &mut [f64],
) -> Result<(), Halt>
where
    F: Fn(f64, &[f64], &mut [f64]),
{
    match solve_implicit(g, scale, t, rhs, guess, config.newton_abs_tol, config.newton_max_iters) {
        Ok(sol) => {
            rec.stats.rhs_evals += sol.rhs_evals;
            rec.stats.newton_iters_total += sol.iterations;
            rec.push(&sol.y);
            f_out.copy_from_slice(&sol.f);
            Ok(())
        }
        Err(NewtonError::NonFinite(y)) => {
            rec.push(&y);
            Err(Halt::Diverged)
        }
        Err(_) => Err(Halt::NewtonFailed),
    }
}

/// Predictor-corrector: explicit rectangle predictor, trapezoidal corrector
/// evaluated at the predictor, `corrector_iters` corrections in total.
pub fn solve_pece(problem: &FodeProblem, config: &SolverConfig) -> Result<Solution> {
    let mut rec = Recorder::new(problem, config)?;
    let (mesh, dim, steps) = (rec.mesh.clone(), rec.dim, rec.steps());
    let setup = PiSetup::new(problem, config.dt, steps)?;
    let kernels = vec![setup.kernels(|c| &c.b[..]), setup.kernels(|c| &c.a[1..])];
    let mut driver = HistoryDriver::new(steps + 1, dim, &kernels, history_mode(config));
    let mut f_pred = vec![0.0; dim];
    let outcome = driver.march(|n, hist, fcols, f_out| {
        let t = mesh.t(n);
        if n > 0 {
            let taylor = problem.taylor_initial_part(t);
            let mut y: Vec<f64> = (0..dim).map(|c| taylor[c] + setup.rect_scale[c] * hist[c]).collect();
            let base: Vec<f64> = (0..dim)
                .map(|c| {
                    let pc = setup.coeffs(c);
                    taylor[c] + setup.trap_scale[c] * (hist[dim + c] + (pc.a_tilde[n] - pc.a[n]) * fcols[c][0])
                })
                .collect();
            for _ in 0..config.corrector_iters {
                if !all_finite(&y) {
                    break;
                }
                problem.eval(t, &y, &mut f_pred);
                rec.stats.rhs_evals += 1;
                for c in 0..dim {
                    y[c] = base[c] + setup.trap_scale[c] * f_pred[c];
                }
            }
            rec.push(&y);
            if !all_finite(&y) {
                return Err(Halt::Diverged);
            }
        }
        problem.eval(t, rec.row(n), f_out);
        rec.stats.rhs_evals += 1;
        Ok(())
    });
    Ok(rec.finish(outcome))
}
