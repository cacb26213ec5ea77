use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

/// How memory sums `sum_{j<n} K[n-1-j] f_j` are evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HistoryMode {
    Direct,
    /// Divide-and-conquer FFT convolution; blocks at or below `threshold`
    /// points are summed directly.
    FftBlocked { threshold: usize },
}

/// Full linear convolution of two real sequences via FFT.
pub fn linear_convolution(a: &[f64], b: &[f64]) -> Vec<f64> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut planner = FftPlanner::new();
    let mut out = vec![0.0; a.len() + b.len() - 1];
    fft_convolve_into(&mut planner, a, b, 0, &mut out);
    out
}

/// Adds `(a * b)[offset + i]` to `out[i]` for every `i` in range.
fn fft_convolve_into(planner: &mut FftPlanner<f64>, a: &[f64], b: &[f64], offset: usize, out: &mut [f64]) {
    let size = (a.len() + b.len() - 1).next_power_of_two();
    let forward: Arc<dyn Fft<f64>> = planner.plan_fft_forward(size);
    let inverse = planner.plan_fft_inverse(size);
    let mut fa: Vec<Complex64> = pad(a, size);
    let mut fb: Vec<Complex64> = pad(b, size);
    forward.process(&mut fa);
    forward.process(&mut fb);
    for (x, y) in fa.iter_mut().zip(&fb) {
        *x *= y;
    }
    inverse.process(&mut fa);
    let scale = 1.0 / size as f64;
    for (i, o) in out.iter_mut().enumerate() {
        if let Some(v) = fa.get(offset + i) {
            *o += v.re * scale;
        }
    }
}

fn pad(x: &[f64], size: usize) -> Vec<Complex64> {
    let mut v: Vec<Complex64> = x.iter().map(|&r| Complex64::new(r, 0.0)).collect();
    v.resize(size, Complex64::new(0.0, 0.0));
    v
}

/// `sum_{i<n} weights[n-1-i] fvals[i]`, one entry per column of `fvals`.
///
/// Both modes compute the same quantity; the blocked mode exists to check
/// the machinery the solvers use for long marches.
pub fn history_sum(weights: &[f64], fvals: &[Vec<f64>], n: usize, mode: HistoryMode) -> Vec<f64> {
    let dim = fvals.first().map_or(0, Vec::len);
    assert!(n <= fvals.len() && n <= weights.len(), "history longer than the data");
    let mut out = vec![0.0; dim];
    if n == 0 {
        return out;
    }
    match mode {
        HistoryMode::Direct => {
            for (i, row) in fvals[..n].iter().enumerate() {
                let w = weights[n - 1 - i];
                for (o, f) in out.iter_mut().zip(row) {
                    *o += w * f;
                }
            }
        }
        HistoryMode::FftBlocked { .. } => {
            let columns: Vec<Vec<f64>> = (0..dim).map(|c| fvals[..n].iter().map(|r| r[c]).collect()).collect();
            let kernels = vec![vec![weights]; 1];
            let kernels: Vec<Vec<&[f64]>> = kernels.iter().map(|set| vec![set[0]; dim]).collect();
            let mut driver = HistoryDriver::new(n + 1, dim, &kernels, mode);
            let _ = driver.march(|k, hist, _, f_out| {
                if k == n {
                    out.copy_from_slice(hist);
                } else {
                    for (c, v) in f_out.iter_mut().enumerate() {
                        *v = columns[c][k];
                    }
                }
                Ok(())
            });
        }
    }
    out
}

/// Why a march stopped before the end of the mesh.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Halt {
    Diverged,
    NewtonFailed,
}

/// Drives a march over `points` mesh nodes while maintaining the memory sums
/// `H[s][c](n) = sum_{j<n} K[s][c][n-1-j] f_j[c]` for every kernel set `s`
/// and component `c`.
///
/// At node `n` the step callback receives the sums (set-major, `sets * dim`
/// entries), the stored `f` columns for nodes `< n`, and writes `f_n`.
pub(crate) struct HistoryDriver<'k> {
    points: usize,
    dim: usize,
    kernels: &'k [Vec<&'k [f64]>],
    mode: HistoryMode,
    fcols: Vec<Vec<f64>>,
    acc: Vec<Vec<f64>>,
    planner: FftPlanner<f64>,
}

impl<'k> HistoryDriver<'k> {
    pub(crate) fn new(points: usize, dim: usize, kernels: &'k [Vec<&'k [f64]>], mode: HistoryMode) -> Self {
        let sets = kernels.len();
        let blocked = matches!(mode, HistoryMode::FftBlocked { .. });
        Self {
            points,
            dim,
            kernels,
            mode,
            fcols: vec![vec![0.0; points]; dim],
            acc: if blocked { vec![vec![0.0; points]; sets * dim] } else { Vec::new() },
            planner: FftPlanner::new(),
        }
    }

    /// Runs the march; on a halt returns the node index where it happened.
    pub(crate) fn march<F>(&mut self, mut step: F) -> Result<(), (usize, Halt)>
    where
        F: FnMut(usize, &[f64], &[Vec<f64>], &mut [f64]) -> Result<(), Halt>,
    {
        match self.mode {
            HistoryMode::Direct => self.run_direct(0, self.points, &mut step),
            HistoryMode::FftBlocked { threshold } => self.run_blocked(0, self.points, threshold.max(2), &mut step),
        }
    }

    fn run_direct<F>(&mut self, lo: usize, hi: usize, step: &mut F) -> Result<(), (usize, Halt)>
    where
        F: FnMut(usize, &[f64], &[Vec<f64>], &mut [f64]) -> Result<(), Halt>,
    {
        let sets = self.kernels.len();
        let mut hist = vec![0.0; sets * self.dim];
        let mut f_out = vec![0.0; self.dim];
        for n in lo..hi {
            for (s, set) in self.kernels.iter().enumerate() {
                for c in 0..self.dim {
                    let base = if self.acc.is_empty() { 0.0 } else { self.acc[s * self.dim + c][n] };
                    let kernel = set[c];
                    let f = &self.fcols[c];
                    let mut sum = 0.0;
                    for j in lo..n {
                        sum += kernel[n - 1 - j] * f[j];
                    }
                    // blocked mode only sums inside the leaf; direct mode starts at 0
                    hist[s * self.dim + c] = base + sum;
                }
            }
            step(n, &hist, &self.fcols, &mut f_out).map_err(|h| (n, h))?;
            for (c, v) in f_out.iter().enumerate() {
                self.fcols[c][n] = *v;
            }
        }
        Ok(())
    }

    fn run_blocked<F>(&mut self, lo: usize, hi: usize, threshold: usize, step: &mut F) -> Result<(), (usize, Halt)>
    where
        F: FnMut(usize, &[f64], &[Vec<f64>], &mut [f64]) -> Result<(), Halt>,
    {
        if hi - lo <= threshold {
            return self.run_direct(lo, hi, step);
        }
        let mid = lo + (hi - lo) / 2;
        self.run_blocked(lo, mid, threshold, step)?;
        // contributions of f[lo..mid) to H(n) for n in [mid, hi):
        // (f_seg * K[0..hi-lo-1))[r] lands on n = lo + r + 1
        let klen = hi - lo - 1;
        for (s, set) in self.kernels.iter().enumerate() {
            for (c, kern) in set.iter().enumerate().take(self.dim) {
                let seg = &self.fcols[c][lo..mid];
                let kernel = &kern[..klen];
                let target = &mut self.acc[s * self.dim + c][mid..hi];
                fft_convolve_into(&mut self.planner, seg, kernel, mid - lo - 1, target);
            }
        }
        self.run_blocked(mid, hi, threshold, step)
    }
}
