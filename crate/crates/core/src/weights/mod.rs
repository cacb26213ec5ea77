//! Discrete convolution weights and memory sums.

mod flmm;
mod history;
mod pi;
mod starting;

pub use flmm::{flmm_omega, FlmmMethod};
pub(crate) use history::{Halt, HistoryDriver};
pub use history::{history_sum, linear_convolution, HistoryMode};
pub use pi::{pi_coefficients, PiCoefficients};
pub use starting::{starting_exponents, starting_weights, StartingWeights};

/// Convolution weights and starting weights of one FLMM for one order.
#[derive(Debug, Clone, PartialEq)]
pub struct FlmmWeights {
    pub method: FlmmMethod,
    pub alpha: f64,
    pub omega: Vec<f64>,
    pub starting: StartingWeights,
}

impl FlmmWeights {
    pub fn new(method: FlmmMethod, alpha: f64, n: usize) -> crate::Result<Self> {
        let omega = flmm_omega(method, alpha, n)?;
        let starting = starting_weights(&omega, alpha, n)?;
        Ok(Self { method, alpha, omega, starting })
    }

    pub fn s(&self) -> usize {
        self.starting.s
    }
}
