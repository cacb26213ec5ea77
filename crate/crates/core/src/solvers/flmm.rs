use super::newton::{newton_system, NewtonError};
use super::pi::implicit_update;
use super::{history_mode, Recorder};
use crate::error::Result;
use crate::problem::{FodeProblem, Solution, SolverConfig};
use crate::weights::{FlmmMethod, FlmmWeights, Halt, HistoryDriver};

/// Fractional linear multistep method with starting weights:
/// `y_n = T(t_n) + h^a sum_{j<=s} w_{n,j} f_j + h^a sum_{j<=n} omega_{n-j} f_j`.
///
/// Systems with several orders carry one weight set per order. The first
/// `s` nodes are coupled through the starting weights and are solved as one
/// block; every later node is a single implicit step.
pub fn solve_flmm(problem: &FodeProblem, config: &SolverConfig, method: FlmmMethod) -> Result<Solution> {
    let mut rec = Recorder::new(problem, config)?;
    let (mesh, dim, steps) = (rec.mesh.clone(), rec.dim, rec.steps());
    let (distinct, group) = problem.orders().groups();
    let weights = distinct
        .iter()
        .map(|&a| FlmmWeights::new(method, a, steps.max(max_s(&distinct))))
        .collect::<Result<Vec<_>>>()?;
    let w = |c: usize| &weights[group[c]];
    let scale: Vec<f64> = group.iter().map(|&g| config.dt.powf(distinct[g])).collect();
    let block = (0..dim).map(|c| w(c).s()).max().unwrap_or(0);
    let rhs = |t: f64, y: &[f64], f: &mut [f64]| problem.eval(t, y, f);

    // f_0 and the coupled starting block
    let mut f_start = vec![0.0; (block + 1) * dim];
    problem.eval(mesh.t(0), rec.row(0), &mut f_start[..dim]);
    rec.stats.rhs_evals += 1;
    let y0 = rec.row(0).to_vec();
    let mut y_start = y0.clone();
    if block > 0 {
        let taylor: Vec<Vec<f64>> = (1..=block).map(|n| problem.taylor_initial_part(mesh.t(n))).collect();
        let f0 = f_start[..dim].to_vec();
        let mut fbuf = vec![0.0; (block + 1) * dim];
        let guess: Vec<f64> = (0..block).flat_map(|_| y0.iter().copied()).collect();
        let solved = newton_system(
            &guess,
            |x, r| {
                fbuf[..dim].copy_from_slice(&f0);
                for n in 1..=block {
                    let (yrow, frow) = (&x[(n - 1) * dim..n * dim], n * dim);
                    rhs(mesh.t(n), yrow, &mut fbuf[frow..frow + dim]);
                }
                for n in 1..=block {
                    for c in 0..dim {
                        let wc = w(c);
                        let start = wc.starting.row(n);
                        let mut q = 0.0;
                        for (j, wj) in start.iter().enumerate() {
                            q += wj * fbuf[j * dim + c];
                        }
                        for j in 0..=n {
                            q += wc.omega[n - j] * fbuf[j * dim + c];
                        }
                        let i = (n - 1) * dim + c;
                        r[i] = x[i] - taylor[n - 1][c] - scale[c] * q;
                    }
                }
            },
            config.newton_abs_tol,
            config.newton_max_iters,
        );
        match solved {
            Ok((x, iters, evals)) => {
                rec.stats.newton_iters_total += iters;
                rec.stats.rhs_evals += evals * block;
                y_start.extend_from_slice(&x);
                for n in 1..=block {
                    rhs(mesh.t(n), &x[(n - 1) * dim..n * dim], &mut f_start[n * dim..(n + 1) * dim]);
                    rec.stats.rhs_evals += 1;
                }
            }
            Err(NewtonError::NonFinite(x)) => {
                rec.push(&x[..dim]);
                return Ok(rec.finish(Err((1, Halt::Diverged))));
            }
            Err(_) => return Ok(rec.finish(Err((1, Halt::NewtonFailed)))),
        }
    }

    let kernels = vec![(0..dim).map(|c| &w(c).omega[1..]).collect::<Vec<_>>()];
    let implicit_scale: Vec<f64> = (0..dim).map(|c| scale[c] * w(c).omega[0]).collect();
    let mut driver = HistoryDriver::new(steps + 1, dim, &kernels, history_mode(config));
    let outcome = driver.march(|n, hist, fcols, f_out| {
        if n <= block {
            if n > 0 {
                rec.push(&y_start[n * dim..(n + 1) * dim]);
            }
            f_out.copy_from_slice(&f_start[n * dim..(n + 1) * dim]);
            return Ok(());
        }
        let t = mesh.t(n);
        let mut g = problem.taylor_initial_part(t);
        for c in 0..dim {
            let wc = w(c);
            let start = wc.starting.row(n);
            let mut q = hist[c];
            for (j, wj) in start.iter().enumerate() {
                q += wj * fcols[c][j];
            }
            g[c] += scale[c] * q;
        }
        let guess = rec.row(n - 1).to_vec();
        implicit_update(&mut rec, &g, &implicit_scale, t, &rhs, &guess, config, f_out)
    });
    Ok(rec.finish(outcome))
}

fn max_s(orders: &[f64]) -> usize {
    orders.iter().map(|&a| crate::weights::starting_exponents(a).len() - 1).max().unwrap_or(0)
}
