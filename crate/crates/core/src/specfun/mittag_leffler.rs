//! Three-parameter Mittag-Leffler function
//! `E_{a,b}^g(z) = 1/Gamma(g) sum_k Gamma(g + k) z^k / (k! Gamma(a k + b))`.
//!
//! Small arguments are summed directly. Everywhere else the function is
//! recovered by inverting its Laplace transform
//! `s^{a g - b} / (s^a - z)^g` on an optimal parabolic contour, adding the
//! residues of the poles the contour leaves on its right.

use std::f64::consts::PI;

use num_complex::Complex64;

use super::gamma::rgamma;
use crate::error::{FracError, Result};

const LOG_EPS_MACHINE: f64 = -36.043_653_389_117_15; // ln(f64::EPSILON)
const TARGET_TOL: f64 = 1e-15;
/// Loosest accuracy the contour search may relax to before giving up.
const LOOSEST_TOL: f64 = 1e-10;
const SERIES_MAX_TERMS: usize = 4000;
/// Accepted a-posteriori relative error of the power series.
const SERIES_TOL: f64 = 1e-13;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MittagLefflerParams {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
}

impl MittagLefflerParams {
    pub fn new(alpha: f64, beta: f64, gamma: f64) -> Result<Self> {
        if !(alpha > 0.0) || !alpha.is_finite() {
            return Err(FracError::InvalidParameters(format!("alpha must be positive, got {alpha}")));
        }
        if !(gamma > 0.0) || !gamma.is_finite() {
            return Err(FracError::InvalidParameters(format!("gamma must be positive, got {gamma}")));
        }
        if !beta.is_finite() {
            return Err(FracError::InvalidParameters(format!("beta must be finite, got {beta}")));
        }
        Ok(Self { alpha, beta, gamma })
    }

    pub fn two(alpha: f64, beta: f64) -> Result<Self> {
        Self::new(alpha, beta, 1.0)
    }

    pub fn one(alpha: f64) -> Result<Self> {
        Self::new(alpha, 1.0, 1.0)
    }
}

/// `E_{alpha,beta}^gamma(z)` for complex `z`.
pub fn mittag_leffler(params: MittagLefflerParams, z: Complex64) -> Result<Complex64> {
    let MittagLefflerParams { alpha, beta, gamma } = params;
    if !z.re.is_finite() || !z.im.is_finite() {
        return Err(FracError::NonConvergence(format!("non-finite argument {z}")));
    }
    if z.norm() < 1e-15 {
        return Ok(Complex64::new(rgamma(beta), 0.0));
    }
    if z.norm() <= 5.0 {
        if let Some(v) = power_series(params, z) {
            return Ok(v);
        }
    }

    let has_poles = !poles(alpha, z).is_empty();
    if gamma != 1.0 && (alpha >= 1.0 || has_poles) {
        // branch points instead of poles: no residue formula
        if let Some(v) = power_series(params, z) {
            return Ok(v);
        }
        return Err(FracError::NonConvergence(format!(
            "three-parameter function with gamma = {gamma} needs 0 < alpha < 1 and |arg z| > alpha pi at z = {z}"
        )));
    }
    laplace_inversion(alpha, beta, gamma, z)
}

/// Real-argument evaluation; the imaginary round-off of the contour sum is
/// dropped when it is below `1e-12` (relative to `max(1, |E|)`).
pub fn mittag_leffler_real(params: MittagLefflerParams, x: f64) -> Result<f64> {
    let v = mittag_leffler(params, Complex64::new(x, 0.0))?;
    if v.im.abs() > 1e-12 * v.re.abs().max(1.0) {
        return Err(FracError::NonConvergence(format!("imaginary residue {} at real argument {x}", v.im)));
    }
    if !v.re.is_finite() {
        return Err(FracError::NonConvergence(format!("non-finite value at {x}")));
    }
    Ok(v.re)
}

/// Argument order `mittleff(alpha, beta, gamma, z)`.
pub fn mittleff(alpha: f64, beta: f64, gamma: f64, z: f64) -> Result<f64> {
    mittag_leffler_real(MittagLefflerParams::new(alpha, beta, gamma)?, z)
}

/// One-parameter `E_alpha(z)`.
pub fn ml(alpha: f64, z: f64) -> Result<f64> {
    mittleff(alpha, 1.0, 1.0, z)
}

/// Two-parameter `E_{alpha,beta}(z)`.
pub fn ml2(alpha: f64, beta: f64, z: f64) -> Result<f64> {
    mittleff(alpha, beta, 1.0, z)
}

/// Direct summation; `None` when truncation or cancellation exceeds
/// [`SERIES_TOL`].
fn power_series(params: MittagLefflerParams, z: Complex64) -> Option<Complex64> {
    let MittagLefflerParams { alpha, beta, gamma } = params;
    let mut pochhammer = 1.0; // (gamma)_k / k!
    let mut zk = Complex64::new(1.0, 0.0);
    let mut sum = Complex64::new(0.0, 0.0);
    let mut abs_sum = 0.0;
    let mut small_run = 0;
    for k in 0..SERIES_MAX_TERMS {
        if k > 0 {
            pochhammer *= (gamma + k as f64 - 1.0) / k as f64;
            zk *= z;
        }
        let term = zk * (pochhammer * rgamma(alpha * k as f64 + beta));
        if !term.re.is_finite() || !term.im.is_finite() {
            return None;
        }
        sum += term;
        abs_sum += term.norm();
        // stop once the terms are negligible and the gamma growth has taken over
        let past_peak = alpha * k as f64 + beta > 2.0 && (k as f64) > z.norm();
        if past_peak && term.norm() <= f64::EPSILON * 1e-2 * sum.norm().max(f64::MIN_POSITIVE) {
            small_run += 1;
            if small_run >= 3 {
                let err = 8.0 * f64::EPSILON * abs_sum;
                let scale = sum.norm();
                if err <= SERIES_TOL * scale {
                    return Some(sum);
                }
                return None;
            }
        } else {
            small_run = 0;
        }
    }
    None
}

/// Poles `s* = |z|^{1/a} exp(i (arg z + 2 k pi) / a)` on the principal sheet.
fn poles(alpha: f64, z: Complex64) -> Vec<Complex64> {
    let theta = z.arg();
    let kmin = (-alpha / 2.0 - theta / (2.0 * PI)).ceil() as i64;
    let kmax = (alpha / 2.0 - theta / (2.0 * PI)).floor() as i64;
    let r = z.norm().powf(1.0 / alpha);
    (kmin..=kmax)
        .map(|k| Complex64::from_polar(r, (theta + 2.0 * k as f64 * PI) / alpha))
        .filter(|s| 0.5 * (s.re + s.norm()) > 1e-15)
        .collect()
}

#[derive(Debug, Clone, Copy)]
struct Contour {
    mu: f64,
    h: f64,
    n: f64,
}

fn laplace_inversion(alpha: f64, beta: f64, gamma: f64, z: Complex64) -> Result<Complex64> {
    let t = 1.0;
    let mut s_star: Vec<Complex64> = poles(alpha, z);
    s_star.sort_by(|a, b| phi(*a).total_cmp(&phi(*b)));
    s_star.insert(0, Complex64::new(0.0, 0.0));
    let j1 = s_star.len();

    let mut phi_star: Vec<f64> = s_star.iter().map(|s| phi(*s)).collect();
    phi_star.push(f64::INFINITY);
    let mut p = vec![gamma; j1];
    p[0] = (-2.0 * (alpha * gamma - beta + 1.0)).max(0.0);
    let mut q = vec![gamma; j1];
    q[j1 - 1] = f64::INFINITY;

    let mut log_eps = TARGET_TOL.ln();
    let admissible: Vec<usize> = (0..j1)
        .filter(|&j| phi_star[j] < (log_eps - LOG_EPS_MACHINE) / t && phi_star[j] < phi_star[j + 1])
        .collect();
    if admissible.is_empty() {
        return Err(FracError::NonConvergence(format!("no admissible integration region at z = {z}")));
    }

    let (region, contour) = loop {
        let best = admissible
            .iter()
            .map(|&j| {
                let c = if j + 1 < j1 {
                    optimal_bounded(t, phi_star[j], phi_star[j + 1], p[j], q[j], log_eps)
                } else {
                    optimal_unbounded(t, phi_star[j], p[j], log_eps)
                };
                (j, c)
            })
            .min_by(|a, b| a.1.n.total_cmp(&b.1.n))
            .expect("at least one admissible region");
        if best.1.n <= 200.0 {
            break best;
        }
        log_eps += 10f64.ln();
        if log_eps > LOOSEST_TOL.ln() + 1e-9 {
            return Err(FracError::NonConvergence(format!("contour needs too many nodes at z = {z}")));
        }
    };

    let Contour { mu, h, n } = contour;
    let n = n as i64;
    let mut integral = Complex64::new(0.0, 0.0);
    let i = Complex64::i();
    for k in -n..=n {
        let u = h * k as f64;
        let s = mu * (i * u + 1.0).powi(2);
        let ds = Complex64::new(-2.0 * mu * u, 2.0 * mu);
        let f = s.powf(alpha * gamma - beta) / (s.powf(alpha) - z).powf(gamma) * ds;
        integral += (s * t).exp() * f;
    }
    integral *= h / (2.0 * PI * i);

    // poles to the right of the chosen contour; only reachable with gamma = 1
    let residues: Complex64 = s_star[region + 1..]
        .iter()
        .map(|&s| s.powf(1.0 - beta) * (s * t).exp() / alpha)
        .sum();

    let value = integral + residues;
    if !value.re.is_finite() || !value.im.is_finite() {
        return Err(FracError::NonConvergence(format!("non-finite contour sum at z = {z}")));
    }
    Ok(value)
}

fn phi(s: Complex64) -> f64 {
    0.5 * (s.re + s.norm())
}

/// Contour parameters for a region bounded by two singularities.
fn optimal_bounded(t: f64, phi_j: f64, phi_j1: f64, pj: f64, qj: f64, mut log_eps: f64) -> Contour {
    const FAC: f64 = 1.01;
    let infeasible = Contour { mu: 0.0, h: 0.0, n: f64::INFINITY };
    let f_max = (log_eps - LOG_EPS_MACHINE).exp();
    let sq_phi_j = phi_j.sqrt();
    let threshold = 2.0 * ((log_eps - LOG_EPS_MACHINE) / t).sqrt();
    let sq_phi_j1 = phi_j1.sqrt().min(threshold - sq_phi_j);

    let (sq_bar_j, sq_bar_j1, f_bar) = if pj < 1e-14 && qj < 1e-14 {
        (sq_phi_j, sq_phi_j1, 1.0)
    } else if pj < 1e-14 {
        let f_min = if sq_phi_j > 0.0 { FAC * (sq_phi_j / (sq_phi_j1 - sq_phi_j)).powf(qj) } else { FAC };
        if f_min >= f_max {
            return infeasible;
        }
        let f_bar = f_min + f_min / f_max * (f_max - f_min);
        let fq = f_bar.powf(-1.0 / qj);
        (sq_phi_j, (2.0 * sq_phi_j1 - fq * sq_phi_j) / (2.0 + fq), f_bar)
    } else if qj < 1e-14 {
        let f_min = FAC * (sq_phi_j1 / (sq_phi_j1 - sq_phi_j)).powf(pj);
        if f_min >= f_max {
            return infeasible;
        }
        let f_bar = f_min + f_min / f_max * (f_max - f_min);
        let fp = f_bar.powf(-1.0 / pj);
        ((2.0 * sq_phi_j + fp * sq_phi_j1) / (2.0 - fp), sq_phi_j1, f_bar)
    } else {
        let f_min = FAC * (sq_phi_j + sq_phi_j1) / (sq_phi_j1 - sq_phi_j).powf(pj.max(qj));
        if f_min >= f_max {
            return infeasible;
        }
        let f_min = f_min.max(1.5);
        let f_bar = f_min + f_min / f_max * (f_max - f_min);
        let fp = f_bar.powf(-1.0 / pj);
        let fq = f_bar.powf(-1.0 / qj);
        let w = -phi_j1 * t / log_eps;
        let den = 2.0 + w - (1.0 + w) * fp + fq;
        let a = ((2.0 + w + fq) * sq_phi_j + fp * sq_phi_j1) / den;
        let b = (-(1.0 + w) * fq * sq_phi_j + (2.0 + w - (1.0 + w) * fp) * sq_phi_j1) / den;
        (a, b, f_bar)
    };

    log_eps -= f_bar.ln();
    let w = -sq_bar_j1 * sq_bar_j1 * t / log_eps;
    let mu = (((1.0 + w) * sq_bar_j + sq_bar_j1) / (2.0 + w)).powi(2);
    let h = -2.0 * PI / log_eps * (sq_bar_j1 - sq_bar_j) / ((1.0 + w) * sq_bar_j + sq_bar_j1);
    let n = ((1.0 - log_eps / t / mu).sqrt() / h).ceil();
    if !(h > 0.0) || !n.is_finite() {
        return infeasible;
    }
    Contour { mu, h, n }
}

/// Contour parameters for the unbounded region right of every singularity.
fn optimal_unbounded(t: f64, phi_j: f64, pj: f64, log_eps: f64) -> Contour {
    let sq_phi_j = phi_j.sqrt();
    let mut phibar = if phi_j > 0.0 { phi_j * 1.01 } else { 0.01 };
    let mut sq_phibar = phibar.sqrt();
    let (f_min, f_max, f_tar) = (1.0, 10.0, 5.0_f64);

    let mut n;
    let mut a;
    let mut sq_mu;
    let mut iters = 0;
    loop {
        let phi_t = phibar * t;
        let log_eps_phi_t = log_eps / phi_t;
        n = (phi_t / PI * (1.0 - 1.5 * log_eps_phi_t + (1.0 - 2.0 * log_eps_phi_t).sqrt())).ceil();
        a = PI * n / phi_t;
        sq_mu = sq_phibar * (4.0 - a).abs() / (7.0 - (1.0 + 12.0 * a).sqrt()).abs();
        let fbar = ((sq_phibar - sq_phi_j) / sq_mu).powf(-pj);
        iters += 1;
        if pj < 1e-14 || (f_min < fbar && fbar < f_max) || iters > 100 {
            break;
        }
        sq_phibar = f_tar.powf(-1.0 / pj) * sq_mu + sq_phi_j;
        phibar = sq_phibar * sq_phibar;
    }
    let mut mu = sq_mu * sq_mu;
    let mut h = (-3.0 * a - 2.0 + 2.0 * (1.0 + 12.0 * a).sqrt()) / (4.0 - a) / n;

    // keep exp(mu t) from amplifying round-off beyond the target
    let threshold = (log_eps - LOG_EPS_MACHINE) / t;
    if mu > threshold {
        let q = if pj.abs() < 1e-14 { 0.0 } else { f_tar.powf(-1.0 / pj) * mu.sqrt() };
        let phibar = (q + sq_phi_j).powi(2);
        if phibar < threshold {
            let w = (LOG_EPS_MACHINE / (LOG_EPS_MACHINE - log_eps)).sqrt();
            let u = (-phibar * t / LOG_EPS_MACHINE).sqrt();
            mu = threshold;
            n = (w * log_eps / 2.0 / PI / (u * w - 1.0)).ceil();
            h = w / n;
        } else {
            return Contour { mu: 0.0, h: 0.0, n: f64::INFINITY };
        }
    }
    Contour { mu, h, n }
}
