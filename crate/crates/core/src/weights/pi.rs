use crate::error::{FracError, Result};

/// Product-integration coefficients for one order.
///
/// `b[n] = (n+1)^a - n^a` (rectangle rules), `a[0] = 1` and
/// `a[j] = (j+1)^{a+1} - 2 j^{a+1} + (j-1)^{a+1}` (trapezoidal interior),
/// `a_tilde[n] = (n-1)^{a+1} - n^a (n - a - 1)` (trapezoidal weight of the
/// initial node; `a_tilde[0]` is unused and set to zero).
#[derive(Debug, Clone, PartialEq)]
pub struct PiCoefficients {
    pub alpha: f64,
    pub b: Vec<f64>,
    pub a: Vec<f64>,
    pub a_tilde: Vec<f64>,
}

/// `(n+1)^p - n^p` without cancellation for large `n`.
fn forward_diff(n: f64, p: f64) -> f64 {
    if n < 1.0 {
        return 1.0;
    }
    n.powf(p) * (p * (1.0 / n).ln_1p()).exp_m1()
}

fn second_diff(j: f64, p: f64) -> f64 {
    if j < 2.0 {
        return 2f64.powf(p) - 2.0;
    }
    let inv = 1.0 / j;
    j.powf(p) * ((p * inv.ln_1p()).exp_m1() + (p * (-inv).ln_1p()).exp_m1())
}

fn initial_trap(n: f64, alpha: f64) -> f64 {
    if n < 16.0 {
        return (n - 1.0).powf(alpha + 1.0) - n.powf(alpha) * (n - alpha - 1.0);
    }
    // n^{p} [(1 - 1/n)^p - 1 + p/n] with p = alpha + 1, summed as the binomial tail
    let p = alpha + 1.0;
    let x = -1.0 / n;
    let mut coeff = p * (p - 1.0) / 2.0;
    let mut xk = x * x;
    let mut sum = 0.0;
    for k in 2..200 {
        let term = coeff * xk;
        sum += term;
        if term.abs() <= 1e-17 * sum.abs() {
            break;
        }
        coeff *= (p - k as f64) / (k as f64 + 1.0);
        xk *= x;
    }
    n.powf(p) * sum
}

pub fn pi_coefficients(alpha: f64, n: usize) -> Result<PiCoefficients> {
    if !(alpha > 0.0) || !alpha.is_finite() {
        return Err(FracError::NonPositiveOrder(alpha));
    }
    let b = (0..=n).map(|k| forward_diff(k as f64, alpha)).collect();
    let a = (0..=n)
        .map(|j| if j == 0 { 1.0 } else { second_diff(j as f64, alpha + 1.0) })
        .collect();
    let a_tilde = (0..=n)
        .map(|k| if k == 0 { 0.0 } else { initial_trap(k as f64, alpha) })
        .collect();
    Ok(PiCoefficients { alpha, b, a, a_tilde })
}
