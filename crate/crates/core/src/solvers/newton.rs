use nalgebra::{DMatrix, DVector};

use crate::error::{FracError, Result};
use crate::problem::SolverConfig;

#[derive(Debug, Clone, PartialEq)]
pub(crate) enum NewtonError {
    NoConvergence(usize),
    Singular,
    NonFinite(Vec<f64>),
}

/// Result of a converged Newton solve.
#[derive(Debug, Clone, PartialEq)]
pub struct NewtonSolution {
    pub y: Vec<f64>,
    /// Right-hand side at `y`.
    pub f: Vec<f64>,
    /// Newton updates performed.
    pub iterations: usize,
    pub rhs_evals: usize,
}

/// Solves `F(x) = 0` by Newton's method with a forward-difference Jacobian.
///
/// `residual(x, r)` fills `r`; iteration stops once `|r|_inf <= tol`.
/// Returns the root, the number of updates and the number of residual calls.
pub(crate) fn newton_system<R>(
    x0: &[f64],
    mut residual: R,
    tol: f64,
    max_iters: usize,
) -> std::result::Result<(Vec<f64>, usize, usize), NewtonError>
where
    R: FnMut(&[f64], &mut [f64]),
{
    let n = x0.len();
    let mut x = x0.to_vec();
    let mut r = vec![0.0; n];
    let mut rp = vec![0.0; n];
    let mut evals = 0;
    let sqrt_eps = f64::EPSILON.sqrt();
    for iter in 0..=max_iters {
        residual(&x, &mut r);
        evals += 1;
        if r.iter().any(|v| !v.is_finite()) || x.iter().any(|v| !v.is_finite()) {
            return Err(NewtonError::NonFinite(x));
        }
        if r.iter().fold(0.0f64, |m, v| m.max(v.abs())) <= tol {
            return Ok((x, iter, evals));
        }
        if iter == max_iters {
            break;
        }
        let mut jac = DMatrix::zeros(n, n);
        for j in 0..n {
            let step = sqrt_eps * x[j].abs().max(1.0);
            let saved = x[j];
            x[j] = saved + step;
            residual(&x, &mut rp);
            evals += 1;
            x[j] = saved;
            for i in 0..n {
                jac[(i, j)] = (rp[i] - r[i]) / step;
            }
        }
        let delta = jac
            .lu()
            .solve(&DVector::from_column_slice(&r))
            .ok_or(NewtonError::Singular)?;
        for (xi, d) in x.iter_mut().zip(delta.iter()) {
            *xi -= d;
        }
    }
    Err(NewtonError::NoConvergence(max_iters))
}

/// Solves `y = g + c * f(t, y)` componentwise, starting from `y_guess`.
pub(crate) fn solve_implicit<F>(
    g: &[f64],
    c: &[f64],
    t: f64,
    rhs: F,
    y_guess: &[f64],
    tol: f64,
    max_iters: usize,
) -> std::result::Result<NewtonSolution, NewtonError>
where
    F: Fn(f64, &[f64], &mut [f64]),
{
    let mut f_last = vec![0.0; g.len()];
    let (y, iterations, rhs_evals) = newton_system(
        y_guess,
        |y, r| {
            rhs(t, y, &mut f_last);
            for i in 0..y.len() {
                r[i] = y[i] - g[i] - c[i] * f_last[i];
            }
        },
        tol,
        max_iters,
    )?;
    // the last residual call was made at the returned root
    Ok(NewtonSolution { y, f: f_last, iterations, rhs_evals })
}

/// One implicit step `y = g + c ⊙ f(t, y)`.
pub fn newton_step<F>(g: &[f64], c: &[f64], t: f64, rhs: F, y_guess: &[f64], config: &SolverConfig) -> Result<NewtonSolution>
where
    F: Fn(f64, &[f64], &mut [f64]),
{
    if g.len() != c.len() || g.len() != y_guess.len() {
        return Err(FracError::DimensionMismatch(format!(
            "g has {} entries, c {}, guess {}",
            g.len(),
            c.len(),
            y_guess.len()
        )));
    }
    solve_implicit(g, c, t, rhs, y_guess, config.newton_abs_tol, config.newton_max_iters).map_err(|e| match e {
        NewtonError::NoConvergence(k) => FracError::NewtonFailed(k),
        NewtonError::Singular => FracError::SingularJacobian,
        NewtonError::NonFinite(_) => FracError::NewtonFailed(0),
    })
}
