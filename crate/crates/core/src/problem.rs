//! Problem definitions, solver configuration, meshes and solutions.

use std::fmt;
use std::sync::Arc;

use crate::error::{FracError, Result};

/// Right-hand side `f(t, u, p)` of a FODE system, written into `du`.
pub type RhsFn = dyn Fn(f64, &[f64], &[f64], &mut [f64]) + Send + Sync;

/// Scalar right-hand side `f(t, y, p)` of a multi-term equation.
pub type ScalarRhsFn = dyn Fn(f64, f64, &[f64]) -> f64 + Send + Sync;

/// Two orders closer than this are treated as equal.
pub const ORDER_EPS: f64 = 1e-14;

/// `ceil(alpha)`, robust to representation noise just above an integer.
pub fn ceil_order(alpha: f64) -> usize {
    ((alpha - 1e-12).ceil() as usize).max(1)
}

/// Caputo orders, one per state component.
#[derive(Debug, Clone, PartialEq)]
pub struct FractionalOrderVec(Vec<f64>);

impl FractionalOrderVec {
    pub fn new(orders: Vec<f64>) -> Result<Self> {
        if orders.is_empty() {
            return Err(FracError::DimensionMismatch("no fractional orders given".into()));
        }
        if let Some(&bad) = orders.iter().find(|a| !(**a > 0.0) || !a.is_finite()) {
            return Err(FracError::NonPositiveOrder(bad));
        }
        Ok(Self(orders))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn get(&self, i: usize) -> f64 {
        self.0[i]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn is_commensurate(&self) -> bool {
        let first = self.0[0];
        self.0.iter().all(|a| (a - first).abs() <= ORDER_EPS)
    }

    /// Number of initial conditions `ceil(alpha_i)` of component `i`.
    pub fn m_ceil(&self, i: usize) -> usize {
        ceil_order(self.0[i])
    }

    /// Distinct orders in first-seen order, with the component-to-group map.
    pub fn groups(&self) -> (Vec<f64>, Vec<usize>) {
        let mut distinct: Vec<f64> = Vec::new();
        let mut map = Vec::with_capacity(self.0.len());
        for &a in &self.0 {
            match distinct.iter().position(|b| (a - b).abs() <= ORDER_EPS) {
                Some(g) => map.push(g),
                None => {
                    distinct.push(a);
                    map.push(distinct.len() - 1);
                }
            }
        }
        (distinct, map)
    }
}

/// Initial value problem `D^alpha_i u_i = f_i(t, u, p)` in the Caputo sense.
#[derive(Clone)]
pub struct FodeProblem {
    rhs: Arc<RhsFn>,
    orders: FractionalOrderVec,
    init: Vec<Vec<f64>>,
    tspan: (f64, f64),
    params: Vec<f64>,
}

fn check_tspan(tspan: (f64, f64)) -> Result<()> {
    let (t0, tf) = tspan;
    if !(tf > t0) || !t0.is_finite() || !tf.is_finite() {
        return Err(FracError::EmptyTimeSpan { t0, tf });
    }
    Ok(())
}

impl FodeProblem {
    /// Builds a problem whose components all have `ceil(alpha_i) = 1`, so the
    /// initial data is just `u(t0)`.
    pub fn new<F>(rhs: F, orders: Vec<f64>, u0: Vec<f64>, tspan: (f64, f64), params: Vec<f64>) -> Result<Self>
    where
        F: Fn(f64, &[f64], &[f64], &mut [f64]) + Send + Sync + 'static,
    {
        let rows = u0.into_iter().map(|v| vec![v]).collect();
        Self::with_taylor(rhs, orders, rows, tspan, params)
    }

    /// Builds a problem from per-component Taylor rows
    /// `[y_i(t0), y_i'(t0), ..., y_i^(m_i - 1)(t0)]`.
    pub fn with_taylor<F>(
        rhs: F,
        orders: Vec<f64>,
        init: Vec<Vec<f64>>,
        tspan: (f64, f64),
        params: Vec<f64>,
    ) -> Result<Self>
    where
        F: Fn(f64, &[f64], &[f64], &mut [f64]) + Send + Sync + 'static,
    {
        Self::from_arc(Arc::new(rhs), orders, init, tspan, params)
    }

    pub fn from_arc(
        rhs: Arc<RhsFn>,
        orders: Vec<f64>,
        init: Vec<Vec<f64>>,
        tspan: (f64, f64),
        params: Vec<f64>,
    ) -> Result<Self> {
        let orders = FractionalOrderVec::new(orders)?;
        if init.len() != orders.len() {
            return Err(FracError::DimensionMismatch(format!(
                "{} orders but {} initial-condition rows",
                orders.len(),
                init.len()
            )));
        }
        for (i, row) in init.iter().enumerate() {
            if row.len() != orders.m_ceil(i) {
                return Err(FracError::DimensionMismatch(format!(
                    "component {i} of order {} needs {} initial values, got {}",
                    orders.get(i),
                    orders.m_ceil(i),
                    row.len()
                )));
            }
        }
        check_tspan(tspan)?;
        Ok(Self { rhs, orders, init, tspan, params })
    }

    pub fn dim(&self) -> usize {
        self.orders.len()
    }

    pub fn orders(&self) -> &FractionalOrderVec {
        &self.orders
    }

    pub fn init(&self) -> &[Vec<f64>] {
        &self.init
    }

    /// `u(t0)`.
    pub fn u0(&self) -> Vec<f64> {
        self.init.iter().map(|row| row[0]).collect()
    }

    pub fn tspan(&self) -> (f64, f64) {
        self.tspan
    }

    pub fn params(&self) -> &[f64] {
        &self.params
    }

    pub fn rhs(&self) -> &Arc<RhsFn> {
        &self.rhs
    }

    /// Same problem on a different time span.
    pub fn with_tspan(&self, tspan: (f64, f64)) -> Result<Self> {
        check_tspan(tspan)?;
        Ok(Self { tspan, ..self.clone() })
    }

    /// Same problem with different parameters.
    pub fn with_params(&self, params: Vec<f64>) -> Self {
        Self { params, ..self.clone() }
    }

    pub fn eval(&self, t: f64, u: &[f64], du: &mut [f64]) {
        (self.rhs)(t, u, &self.params, du)
    }

    pub fn taylor_initial_part(&self, t: f64) -> Vec<f64> {
        taylor_initial_part(&self.init, t, self.tspan.0)
    }
}

impl fmt::Debug for FodeProblem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FodeProblem")
            .field("orders", &self.orders)
            .field("init", &self.init)
            .field("tspan", &self.tspan)
            .field("params", &self.params)
            .finish_non_exhaustive()
    }
}

/// `sum_k (t - t0)^k / k! * y0^(k)` for every component.
pub fn taylor_initial_part(init: &[Vec<f64>], t: f64, t0: f64) -> Vec<f64> {
    let dt = t - t0;
    init.iter()
        .map(|row| {
            let mut term = 1.0;
            let mut acc = 0.0;
            for (k, y) in row.iter().enumerate() {
                if k > 0 {
                    term *= dt / k as f64;
                }
                acc += term * y;
            }
            acc
        })
        .collect()
}

/// Linear multi-term equation
/// `sum_k lambda_k D^{alpha_k} y = f(t, y, p)` with ascending orders.
///
/// Terms of order zero are folded into the right-hand side as `-lambda_0 y`,
/// so every stored term has a strictly positive order.
#[derive(Clone)]
pub struct MultiTermProblem {
    lambdas: Vec<f64>,
    orders: Vec<f64>,
    zero_order_coeff: f64,
    rhs: Arc<ScalarRhsFn>,
    init: Vec<f64>,
    tspan: (f64, f64),
    params: Vec<f64>,
}

impl MultiTermProblem {
    pub fn new<F>(
        lambdas: Vec<f64>,
        orders: Vec<f64>,
        rhs: F,
        init: Vec<f64>,
        tspan: (f64, f64),
        params: Vec<f64>,
    ) -> Result<Self>
    where
        F: Fn(f64, f64, &[f64]) -> f64 + Send + Sync + 'static,
    {
        if lambdas.len() != orders.len() {
            return Err(FracError::LengthMismatch { coefficients: lambdas.len(), orders: orders.len() });
        }
        if let Some(&bad) = orders.iter().find(|a| !(**a >= 0.0) || !a.is_finite()) {
            return Err(FracError::NonPositiveOrder(bad));
        }
        let mut terms: Vec<(f64, f64)> = orders.iter().copied().zip(lambdas.iter().copied()).collect();
        terms.sort_by(|a, b| a.0.total_cmp(&b.0));

        let mut zero_order_coeff = 0.0;
        let mut merged: Vec<(f64, f64)> = Vec::new();
        for (alpha, lambda) in terms {
            if alpha.abs() <= ORDER_EPS {
                zero_order_coeff += lambda;
                continue;
            }
            match merged.last_mut() {
                Some(last) if (last.0 - alpha).abs() <= ORDER_EPS => last.1 += lambda,
                _ => merged.push((alpha, lambda)),
            }
        }
        let Some(&(top, lead)) = merged.last() else {
            return Err(FracError::NonPositiveOrder(0.0));
        };
        if lead == 0.0 {
            return Err(FracError::ZeroLeadingCoefficient);
        }
        // cancelled lower terms carry no information
        merged.retain(|&(a, l)| l != 0.0 || a == top);

        let m = ceil_order(top);
        if init.len() != m {
            return Err(FracError::MissingInitialConditions { expected: m, got: init.len() });
        }
        check_tspan(tspan)?;
        Ok(Self {
            orders: merged.iter().map(|t| t.0).collect(),
            lambdas: merged.iter().map(|t| t.1).collect(),
            zero_order_coeff,
            rhs: Arc::new(rhs),
            init,
            tspan,
            params,
        })
    }

    /// Coefficients of the positive-order terms, ascending by order.
    pub fn lambdas(&self) -> &[f64] {
        &self.lambdas
    }

    /// Positive orders, strictly ascending.
    pub fn orders(&self) -> &[f64] {
        &self.orders
    }

    /// Coefficient of the folded order-zero term.
    pub fn zero_order_coeff(&self) -> f64 {
        self.zero_order_coeff
    }

    pub fn highest_order(&self) -> f64 {
        *self.orders.last().expect("at least one positive order")
    }

    pub fn init(&self) -> &[f64] {
        &self.init
    }

    pub fn tspan(&self) -> (f64, f64) {
        self.tspan
    }

    pub fn params(&self) -> &[f64] {
        &self.params
    }

    pub fn with_tspan(&self, tspan: (f64, f64)) -> Result<Self> {
        check_tspan(tspan)?;
        Ok(Self { tspan, ..self.clone() })
    }

    /// User-supplied forcing `f(t, y, p)` without the folded term.
    pub fn forcing(&self, t: f64, y: f64) -> f64 {
        (self.rhs)(t, y, &self.params)
    }

    /// Effective right-hand side `f(t, y, p) - lambda_0 y`.
    pub fn eval(&self, t: f64, y: f64) -> f64 {
        self.forcing(t, y) - self.zero_order_coeff * y
    }
}

impl fmt::Debug for MultiTermProblem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("MultiTermProblem")
            .field("lambdas", &self.lambdas)
            .field("orders", &self.orders)
            .field("zero_order_coeff", &self.zero_order_coeff)
            .field("init", &self.init)
            .field("tspan", &self.tspan)
            .finish_non_exhaustive()
    }
}

/// Step size and inner-solver knobs shared by every method.
#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    pub dt: f64,
    pub newton_abs_tol: f64,
    pub newton_max_iters: usize,
    pub corrector_iters: usize,
    pub use_fft_history: bool,
    pub fft_block_threshold: usize,
}

impl SolverConfig {
    pub fn new(dt: f64) -> Self {
        Self {
            dt,
            newton_abs_tol: 1e-10,
            newton_max_iters: 100,
            corrector_iters: 1,
            use_fft_history: false,
            fft_block_threshold: 128,
        }
    }

    pub fn with_fft(mut self, on: bool) -> Self {
        self.use_fft_history = on;
        self
    }

    pub fn validate(&self, tspan: (f64, f64)) -> Result<()> {
        if !(self.dt > 0.0) || !self.dt.is_finite() {
            return Err(FracError::InvalidStep(self.dt));
        }
        if (tspan.1 - tspan.0) / self.dt < 1.0 - 1e-12 {
            return Err(FracError::InvalidStep(self.dt));
        }
        if self.corrector_iters == 0 || self.fft_block_threshold == 0 {
            return Err(FracError::InvalidStep(self.dt));
        }
        Ok(())
    }
}

/// Uniform grid `t_n = t0 + n dt`, `n = 0..=steps`.
#[derive(Debug, Clone, PartialEq)]
pub struct Mesh {
    pub t0: f64,
    pub dt: f64,
    pub steps: usize,
    /// `|t0 + steps dt - tf| > 1e-9`: the step does not divide the span.
    pub end_mismatch: bool,
}

impl Mesh {
    pub fn t(&self, n: usize) -> f64 {
        self.t0 + n as f64 * self.dt
    }

    pub fn points(&self) -> Vec<f64> {
        (0..=self.steps).map(|n| self.t(n)).collect()
    }
}

pub fn uniform_mesh(tspan: (f64, f64), dt: f64) -> Result<Mesh> {
    check_tspan(tspan)?;
    if !(dt > 0.0) || !dt.is_finite() {
        return Err(FracError::InvalidStep(dt));
    }
    let (t0, tf) = tspan;
    let steps = ((tf - t0) / dt).round();
    if steps < 1.0 {
        return Err(FracError::InvalidStep(dt));
    }
    let steps = steps as usize;
    let end_mismatch = (t0 + steps as f64 * dt - tf).abs() > 1e-9;
    Ok(Mesh { t0, dt, steps, end_mismatch })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RetCode {
    Success,
    NewtonFailed,
    Diverged,
}

impl fmt::Display for RetCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            RetCode::Success => "Success",
            RetCode::NewtonFailed => "NewtonFailed",
            RetCode::Diverged => "Diverged",
        })
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct SolverStats {
    pub rhs_evals: usize,
    pub newton_iters_total: usize,
    /// Seconds.
    pub wall_time: f64,
    pub mesh_end_mismatch: bool,
}

/// Trajectory on a uniform mesh.
///
/// `states` holds the filled rows only: when a march stops early the mesh is
/// still complete but fewer rows than mesh points are present. A diverged
/// march keeps only its finite prefix.
#[derive(Debug, Clone, PartialEq)]
pub struct Solution {
    pub mesh: Vec<f64>,
    pub dim: usize,
    pub states: Vec<f64>,
    pub retcode: RetCode,
    pub stats: SolverStats,
}

impl Solution {
    /// Number of filled rows.
    pub fn len(&self) -> usize {
        self.states.len() / self.dim.max(1)
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn state(&self, n: usize) -> &[f64] {
        &self.states[n * self.dim..(n + 1) * self.dim]
    }

    pub fn rows(&self) -> impl Iterator<Item = (f64, &[f64])> {
        self.mesh.iter().copied().zip(self.states.chunks(self.dim))
    }

    pub fn last_state(&self) -> &[f64] {
        self.state(self.len() - 1)
    }

    pub fn component(&self, i: usize) -> Vec<f64> {
        self.states.chunks(self.dim).map(|row| row[i]).collect()
    }

    pub fn is_success(&self) -> bool {
        self.retcode == RetCode::Success
    }
}
