use std::fmt;
use std::str::FromStr;

use crate::error::{FracError, Result};

/// Classical multistep rules lifted to fractional order by convolution
/// quadrature.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FlmmMethod {
    /// `omega(xi) = (3/2 - 2 xi + xi^2 / 2)^{-alpha}`
    Bdf2,
    /// `omega(xi) = ((1 + xi) / (2 (1 - xi)))^alpha`
    Trapezoidal,
    /// `omega(xi) = (1 - xi)^{-alpha} (1 - alpha/2 (1 - xi))`
    NewtonGregory,
}

impl FlmmMethod {
    pub const ALL: [FlmmMethod; 3] = [FlmmMethod::Bdf2, FlmmMethod::Trapezoidal, FlmmMethod::NewtonGregory];

    pub fn token(self) -> &'static str {
        match self {
            FlmmMethod::Bdf2 => "bdf2",
            FlmmMethod::Trapezoidal => "trapezoidal",
            FlmmMethod::NewtonGregory => "newtongregory",
        }
    }
}

impl fmt::Display for FlmmMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.token())
    }
}

impl FromStr for FlmmMethod {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        FlmmMethod::ALL
            .into_iter()
            .find(|m| m.token() == s)
            .ok_or_else(|| format!("unknown multistep method `{s}`"))
    }
}

fn poly_mul(p: &[f64], q: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; p.len() + q.len() - 1];
    for (i, a) in p.iter().enumerate() {
        for (j, b) in q.iter().enumerate() {
            out[i + j] += a * b;
        }
    }
    out
}

fn poly_derivative(p: &[f64]) -> Vec<f64> {
    if p.len() <= 1 {
        return vec![0.0];
    }
    p.iter().enumerate().skip(1).map(|(k, c)| k as f64 * c).collect()
}

/// Taylor coefficients through `xi^n` of `(p(xi) / q(xi))^e` for polynomials
/// with nonzero constant terms.
///
/// With `w = (p/q)^e`, `A = p q` and `B = p' q - p q'`, the series satisfies
/// `A w' = e B w`; matching coefficients gives a recurrence of length
/// `deg A`.
fn rational_power_series(p: &[f64], q: &[f64], e: f64, n: usize) -> Vec<f64> {
    let a = poly_mul(p, q);
    let pq = poly_mul(&poly_derivative(p), q);
    let qp = poly_mul(p, &poly_derivative(q));
    let len = pq.len().max(qp.len());
    let b: Vec<f64> = (0..len)
        .map(|k| pq.get(k).copied().unwrap_or(0.0) - qp.get(k).copied().unwrap_or(0.0))
        .collect();

    let mut w = vec![0.0; n + 1];
    w[0] = (p[0] / q[0]).powf(e);
    for m in 1..=n {
        let mut acc = 0.0;
        for (k, bk) in b.iter().enumerate().take(m) {
            acc += e * bk * w[m - 1 - k];
        }
        for (k, ak) in a.iter().enumerate().skip(1).take(m) {
            acc -= ak * (m - k) as f64 * w[m - k];
        }
        w[m] = acc / (a[0] * m as f64);
    }
    w
}

/// Convolution weights `omega_0..omega_n` of a fractional multistep method.
pub fn flmm_omega(method: FlmmMethod, alpha: f64, n: usize) -> Result<Vec<f64>> {
    if !(alpha > 0.0) || !alpha.is_finite() {
        return Err(FracError::NonPositiveOrder(alpha));
    }
    Ok(match method {
        FlmmMethod::Bdf2 => rational_power_series(&[1.5, -2.0, 0.5], &[1.0], -alpha, n),
        FlmmMethod::Trapezoidal => rational_power_series(&[1.0, 1.0], &[2.0, -2.0], alpha, n),
        FlmmMethod::NewtonGregory => {
            let base = rational_power_series(&[1.0], &[1.0, -1.0], alpha, n);
            let (c0, c1) = (1.0 - 0.5 * alpha, 0.5 * alpha);
            (0..=n).map(|k| c0 * base[k] + if k > 0 { c1 * base[k - 1] } else { 0.0 }).collect()
        }
    })
}
