use nalgebra::{DMatrix, DVector};

use super::history::linear_convolution;
use crate::error::{FracError, Result};
use crate::specfun::gamma_fn;

/// Largest moment system we attempt; smaller orders give hopelessly
/// ill-conditioned power-function Vandermonde matrices.
const MAX_NODES: usize = 16;
/// Up to this index the moment convolutions are summed directly.
const DIRECT_LIMIT: usize = 1024;

/// Correction weights `w[n][j]`, `j = 0..=s`, that make an FLMM exact on
/// `t^nu` for every `nu` in `exponents`.
#[derive(Debug, Clone, PartialEq)]
pub struct StartingWeights {
    pub exponents: Vec<f64>,
    pub s: usize,
    /// Row-major `(n_max + 1) x (s + 1)`.
    pub w: Vec<f64>,
}

impl StartingWeights {
    pub fn row(&self, n: usize) -> &[f64] {
        &self.w[n * (self.s + 1)..(n + 1) * (self.s + 1)]
    }
}

/// `{k alpha : k alpha <= 1}`, plus `1` when it is not already present.
pub fn starting_exponents(alpha: f64) -> Vec<f64> {
    let mut out = Vec::new();
    let mut k = 0;
    loop {
        let nu = k as f64 * alpha;
        if nu > 1.0 + 1e-12 {
            break;
        }
        out.push(nu);
        k += 1;
    }
    if (out.last().copied().unwrap_or(0.0) - 1.0).abs() > 1e-12 {
        out.push(1.0);
    }
    out
}

fn pow0(j: f64, nu: f64) -> f64 {
    if nu == 0.0 {
        1.0
    } else {
        j.powf(nu)
    }
}

/// Solves the moment systems
/// `sum_j w[n][j] j^nu = Gamma(nu+1)/Gamma(nu+1+alpha) n^{nu+alpha} - sum_{j<=n} omega_{n-j} j^nu`
/// for `n = 0..=n_max` with one LU factorization of the node matrix.
pub fn starting_weights(omega: &[f64], alpha: f64, n_max: usize) -> Result<StartingWeights> {
    if !(alpha > 0.0) || !alpha.is_finite() {
        return Err(FracError::NonPositiveOrder(alpha));
    }
    if omega.len() < n_max + 1 {
        return Err(FracError::DimensionMismatch(format!(
            "{} convolution weights for {} steps",
            omega.len(),
            n_max
        )));
    }
    let exponents = starting_exponents(alpha);
    let nodes = exponents.len();
    if nodes > MAX_NODES {
        return Err(FracError::SingularMomentSystem { alpha });
    }
    let s = nodes - 1;
    let vander = DMatrix::from_fn(nodes, nodes, |r, c| pow0(c as f64, exponents[r]));
    let lu = vander.lu();
    if !lu.is_invertible() {
        return Err(FracError::SingularMomentSystem { alpha });
    }

    let mut rhs = vec![vec![0.0; n_max + 1]; nodes];
    for (r, &nu) in exponents.iter().enumerate() {
        let ratio = gamma_fn(nu + 1.0)? / gamma_fn(nu + 1.0 + alpha)?;
        let powers: Vec<f64> = (0..=n_max).map(|j| pow0(j as f64, nu)).collect();
        let conv = moment_convolution(&omega[..=n_max], &powers);
        for n in 0..=n_max {
            rhs[r][n] = ratio * pow0(n as f64, nu + alpha) - conv[n];
        }
    }

    let mut w = vec![0.0; (n_max + 1) * nodes];
    for n in 0..=n_max {
        let b = DVector::from_fn(nodes, |r, _| rhs[r][n]);
        let x = lu.solve(&b).ok_or(FracError::SingularMomentSystem { alpha })?;
        if x.iter().any(|v| !v.is_finite()) {
            return Err(FracError::SingularMomentSystem { alpha });
        }
        w[n * nodes..(n + 1) * nodes].copy_from_slice(x.as_slice());
    }
    Ok(StartingWeights { exponents, s, w })
}

/// `sum_{j<=n} omega_{n-j} p_j` for every `n`.
fn moment_convolution(omega: &[f64], powers: &[f64]) -> Vec<f64> {
    let len = omega.len();
    let direct_end = len.min(DIRECT_LIMIT);
    let mut out: Vec<f64> = (0..direct_end)
        .map(|n| (0..=n).map(|j| omega[n - j] * powers[j]).sum())
        .collect();
    if len > direct_end {
        let full = linear_convolution(omega, powers);
        out.extend_from_slice(&full[direct_end..len]);
    }
    out
}
