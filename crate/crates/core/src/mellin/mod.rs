//! Partial Mellin transform on the line `Im = 1/2`, realized as a weighted FFT
//! in `u = log t`, and the strip solver built on it.

mod hz;
mod model;

pub use hz::{solve_hz_bvp, HzOperator, HzSolution, RESONANCE_END_TOL};
pub use model::{
    model_residual, solve_model_dirichlet, tau_decay_report, ModelRhs, ModelSolution, ModelSolver, TauDecayReport,
    EXPONENT_MARGIN,
};

use rayon::prelude::*;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::{simpson_weights, trapezoid_weights};
use crate::scalar::{Cplx, Real};

/// Endpoint-to-maximum ratio of the weighted samples below which a field
/// counts as decayed.
pub const DECAY_TOL: f64 = 1e-10;
/// Above this ratio the transform refuses to run.
pub const TRUNCATION_TOL: f64 = 1e-6;

/// Uniform `x` grid on `[-1, 1]` times a periodic `u = log|t|` grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StripGrid<T> {
    pub nx: usize,
    pub u_min: T,
    pub u_max: T,
    pub n_tau: usize,
}

impl Default for StripGrid<f64> {
    fn default() -> Self {
        Self { nx: 513, u_min: -20.0, u_max: 6.0, n_tau: 4096 }
    }
}

impl<T: Real> StripGrid<T> {
    pub fn new(nx: usize, u_min: T, u_max: T, n_tau: usize) -> Result<Self> {
        if nx < 65 {
            return Err(Error::Parameter { name: "nx", reason: format!("need at least 65 x-nodes, got {nx}") });
        }
        if !n_tau.is_power_of_two() || n_tau < 8 {
            return Err(Error::Parameter {
                name: "n_tau", reason: format!("must be a power of two ≥ 8, got {n_tau}")
            });
        }
        if !(u_min.is_finite() && u_max.is_finite() && u_min < u_max) {
            return Err(Error::Parameter {
                name: "u_window",
                reason: format!("invalid log-t window [{u_min}, {u_max}]"),
            });
        }
        Ok(Self { nx, u_min, u_max, n_tau })
    }

    pub fn hx(&self) -> T {
        T::lit(2.0) / T::from_usize_lossy(self.nx - 1)
    }

    pub fn du(&self) -> T {
        (self.u_max - self.u_min) / T::from_usize_lossy(self.n_tau)
    }

    pub fn x(&self, i: usize) -> T {
        -T::one() + self.hx() * T::from_usize_lossy(i)
    }

    pub fn u(&self, k: usize) -> T {
        self.u_min + self.du() * T::from_usize_lossy(k)
    }

    pub fn t(&self, k: usize) -> T {
        self.u(k).exp()
    }

    pub fn x_nodes(&self) -> Vec<T> {
        (0..self.nx).map(|i| self.x(i)).collect()
    }

    pub fn u_nodes(&self) -> Vec<T> {
        (0..self.n_tau).map(|k| self.u(k)).collect()
    }

    pub fn dtau(&self) -> T {
        T::TAU() / (T::from_usize_lossy(self.n_tau) * self.du())
    }

    /// Frequency of bin `j` in FFT order (nonnegative first, then negative).
    pub fn tau(&self, j: usize) -> T {
        let n = self.n_tau;
        let signed = if j < n / 2 { j as f64 } else { j as f64 - n as f64 };
        T::lit(signed) * self.dtau()
    }

    pub fn tau_nodes(&self) -> Vec<T> {
        (0..self.n_tau).map(|j| self.tau(j)).collect()
    }

    /// Quadrature weights in `x` (Simpson for odd node counts).
    pub fn x_weights(&self) -> Vec<T> {
        if self.nx % 2 == 1 {
            simpson_weights(self.nx, self.hx())
        } else {
            trapezoid_weights(self.nx, self.hx())
        }
    }

    pub fn len(&self) -> usize {
        self.nx * self.n_tau
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Half {
    /// `t > 0`
    Positive,
    /// `t < 0`, sampled at `t = -e^u`
    Negative,
}

/// Samples on both half-strips, row-major with `u` fastest.
#[derive(Debug, Clone, PartialEq)]
pub struct StripField<T> {
    pub grid: StripGrid<T>,
    pub pos: Vec<Cplx<T>>,
    pub neg: Vec<Cplx<T>>,
}

impl<T: Real> StripField<T> {
    pub fn zeros(grid: StripGrid<T>) -> Self {
        let n = grid.len();
        Self { grid, pos: vec![Cplx::new(T::zero(), T::zero()); n], neg: vec![Cplx::new(T::zero(), T::zero()); n] }
    }

    /// Samples `f(x, t)` at `t = ±e^u`.
    pub fn from_fn(grid: StripGrid<T>, f: impl Fn(T, T) -> Cplx<T> + Sync) -> Self {
        let sample = |sign: T| -> Vec<Cplx<T>> {
            (0..grid.len())
                .into_par_iter()
                .map(|idx| {
                    let (i, k) = (idx / grid.n_tau, idx % grid.n_tau);
                    f(grid.x(i), sign * grid.t(k))
                })
                .collect()
        };
        Self { grid, pos: sample(T::one()), neg: sample(-T::one()) }
    }

    /// Real samples on `t > 0` only; the negative half is zero.
    pub fn from_positive_fn(grid: StripGrid<T>, f: impl Fn(T, T) -> T + Sync) -> Self {
        Self::from_fn(
            grid,
            |x, t| if t > T::zero() { Cplx::new(f(x, t), T::zero()) } else { Cplx::new(T::zero(), T::zero()) },
        )
    }

    pub fn half(&self, h: Half) -> &[Cplx<T>] {
        match h {
            Half::Positive => &self.pos,
            Half::Negative => &self.neg,
        }
    }

    pub fn half_mut(&mut self, h: Half) -> &mut Vec<Cplx<T>> {
        match h {
            Half::Positive => &mut self.pos,
            Half::Negative => &mut self.neg,
        }
    }

    pub fn at(&self, h: Half, i: usize, k: usize) -> Cplx<T> {
        self.half(h)[i * self.grid.n_tau + k]
    }

    /// `∫∫ |f|² dx dt` over one half, with `dt = e^u du`.
    pub fn half_norm_sq(&self, h: Half) -> T {
        let g = &self.grid;
        let wx = g.x_weights();
        let du = g.du();
        let et: Vec<T> = (0..g.n_tau).map(|k| g.t(k) * du).collect();
        self.half(h)
            .chunks(g.n_tau)
            .zip(&wx)
            .map(|(row, &w)| w * row.iter().zip(&et).map(|(f, &e)| f.norm_sqr() * e).sum::<T>())
            .sum()
    }

    pub fn norm_sq(&self) -> T {
        self.half_norm_sq(Half::Positive) + self.half_norm_sq(Half::Negative)
    }

    /// Largest modulus on the boundary rows `x = ±1`.
    pub fn boundary_trace_max(&self) -> T {
        let g = &self.grid;
        let n = g.n_tau;
        let rows = [0, g.nx - 1];
        [&self.pos, &self.neg]
            .iter()
            .flat_map(|v| rows.iter().flat_map(move |&i| v[i * n..(i + 1) * n].iter()))
            .fold(T::zero(), |m, f| m.max(f.norm()))
    }

    pub fn max_abs(&self) -> T {
        self.pos.iter().chain(&self.neg).fold(T::zero(), |m, f| m.max(f.norm()))
    }

    /// `self + c·other`.
    pub fn axpy(&self, c: Cplx<T>, other: &Self) -> Result<Self> {
        if self.grid != other.grid {
            return Err(Error::Shape("strip fields live on different grids".into()));
        }
        let comb = |a: &[Cplx<T>], b: &[Cplx<T>]| a.iter().zip(b).map(|(x, y)| *x + c * *y).collect();
        Ok(Self { grid: self.grid, pos: comb(&self.pos, &other.pos), neg: comb(&self.neg, &other.neg) })
    }

    /// `max |self - other| / max |other|`.
    pub fn relative_max_diff(&self, other: &Self) -> T {
        let d = self
            .pos
            .iter()
            .chain(&self.neg)
            .zip(other.pos.iter().chain(&other.neg))
            .fold(T::zero(), |m, (a, b)| m.max((*a - *b).norm()));
        d / other.max_abs().max(T::min_positive_value())
    }

    /// Endpoint ratio of the weighted samples `|f| e^{u/2}` on one half.
    pub fn decay_ratio(&self, h: Half) -> T {
        let g = &self.grid;
        let n = g.n_tau;
        let w0 = (g.u(0) / T::lit(2.0)).exp();
        let w1 = (g.u(n - 1) / T::lit(2.0)).exp();
        let mut peak = T::zero();
        let mut ends = T::zero();
        for row in self.half(h).chunks(n) {
            for (k, f) in row.iter().enumerate() {
                peak = peak.max(f.norm() * (g.u(k) / T::lit(2.0)).exp());
            }
            ends = ends.max(row[0].norm() * w0).max(row[n - 1].norm() * w1);
        }
        if peak == T::zero() {
            T::zero()
        } else {
            ends / peak
        }
    }
}

/// Transform values `f̂(x, τ_j + i/2)`, row-major with `τ` fastest (FFT order).
#[derive(Debug, Clone, PartialEq)]
pub struct MellinField<T> {
    pub grid: StripGrid<T>,
    pub half: Half,
    pub values: Vec<Cplx<T>>,
    pub warnings: Vec<String>,
}

impl<T: Real> MellinField<T> {
    pub fn zeros(grid: StripGrid<T>, half: Half) -> Self {
        Self { grid, half, values: vec![Cplx::new(T::zero(), T::zero()); grid.len()], warnings: Vec::new() }
    }

    pub fn at(&self, i: usize, j: usize) -> Cplx<T> {
        self.values[i * self.grid.n_tau + j]
    }

    /// The x-profile at bin `j`.
    pub fn column(&self, j: usize) -> Vec<Cplx<T>> {
        (0..self.grid.nx).map(|i| self.at(i, j)).collect()
    }

    pub fn set_column(&mut self, j: usize, col: &[Cplx<T>]) {
        let n = self.grid.n_tau;
        for (i, v) in col.iter().enumerate() {
            self.values[i * n + j] = *v;
        }
    }

    /// `(1/2π) ∫∫ |f̂|² dτ dx`.
    pub fn norm_sq(&self) -> T {
        let g = &self.grid;
        let wx = g.x_weights();
        let scale = g.dtau() / T::TAU();
        self.values.chunks(g.n_tau).zip(&wx).map(|(row, &w)| w * row.iter().map(|f| f.norm_sqr()).sum::<T>()).sum::<T>()
            * scale
    }

    /// Multiplies bin `j` by `m(τ_j)`.
    pub fn multiply(&self, m: impl Fn(T) -> Cplx<T>) -> Self {
        let taus: Vec<Cplx<T>> = self.grid.tau_nodes().into_iter().map(m).collect();
        let mut out = self.clone();
        for row in out.values.chunks_mut(self.grid.n_tau) {
            for (f, c) in row.iter_mut().zip(&taus) {
                *f = *f * *c;
            }
        }
        out
    }
}

/// `c₀ = 1/2π` in `‖f‖² = c₀ ∬ |f̂|²`.
pub fn plancherel_constant<T: Real>() -> T {
    T::one() / T::TAU()
}

fn phase<T: Real>(grid: &StripGrid<T>, sign: T) -> Vec<Cplx<T>> {
    (0..grid.n_tau).map(|j| Cplx::from_polar(T::one(), sign * grid.tau(j) * grid.u_min)).collect()
}

/// Forward transform of one half-strip.
pub fn mellin_forward<T: Real>(field: &StripField<T>, half: Half) -> Result<MellinField<T>> {
    let ratio = field.decay_ratio(half);
    let mut warnings = Vec::new();
    if ratio >= T::lit(TRUNCATION_TOL) {
        return Err(Error::Truncation { ratio: ratio.as_f64() });
    }
    if ratio >= T::lit(DECAY_TOL) {
        let msg = format!("field does not decay at the log-t window ends (endpoint ratio {:e})", ratio.as_f64());
        log::warn!("{msg}");
        warnings.push(msg);
    }
    let mut out = raw_forward(field, half);
    out.warnings = warnings;
    Ok(out)
}

/// Forward transform without the decay precondition.
pub(crate) fn raw_forward<T: Real>(field: &StripField<T>, half: Half) -> MellinField<T> {
    let g = field.grid;
    let n = g.n_tau;
    let fft = FftPlanner::<T>::new().plan_fft_forward(n);
    let weight: Vec<T> = (0..n).map(|k| (g.u(k) / T::lit(2.0)).exp()).collect();
    let ph = phase(&g, -T::one());
    let du = g.du();
    let mut values = field.half(half).to_vec();
    values.par_chunks_mut(n).for_each(|row| {
        for (f, w) in row.iter_mut().zip(&weight) {
            *f = *f * *w;
        }
        fft.process(row);
        for (f, p) in row.iter_mut().zip(&ph) {
            *f = *f * *p * du;
        }
    });
    MellinField { grid: g, half, values, warnings: Vec::new() }
}

/// Inverse of [`mellin_forward`] on the same half.
pub fn mellin_inverse_values<T: Real>(mf: &MellinField<T>) -> Vec<Cplx<T>> {
    let g = mf.grid;
    let n = g.n_tau;
    let ifft = FftPlanner::<T>::new().plan_fft_inverse(n);
    let weight: Vec<T> = (0..n).map(|k| (-g.u(k) / T::lit(2.0)).exp()).collect();
    let ph = phase(&g, T::one());
    let scale = T::one() / (g.du() * T::from_usize_lossy(n));
    let mut values = mf.values.clone();
    values.par_chunks_mut(n).for_each(|row| {
        for (f, p) in row.iter_mut().zip(&ph) {
            *f = *f * *p;
        }
        ifft.process(row);
        for (f, w) in row.iter_mut().zip(&weight) {
            *f = *f * (*w * scale);
        }
    });
    values
}

/// Strip field carrying the inverse transform on `mf.half` and zero elsewhere.
pub fn mellin_inverse<T: Real>(mf: &MellinField<T>) -> StripField<T> {
    let mut out = StripField::zeros(mf.grid);
    *out.half_mut(mf.half) = mellin_inverse_values(mf);
    out
}
