//! Fourier-multiplier Sobolev norms on the periodic grid.

use std::sync::Arc;

use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};
use crate::scalar::{Cplx, Real};
use crate::torus_spec::{TorusGrid, TorusOperatorSpec};

pub const S_RANGE: (f64, f64) = (-4.0, 8.0);

/// Computes `‖u‖²_{Hˢ} = Σ (1 + ξ² + τ²)^s |û(ξ, τ)|²`, normalized so that
/// `s = 0` is the trapezoid L² norm over the torus.
#[derive(Clone)]
pub struct SobolevNorm<T: Real> {
    grid: TorusGrid,
    xi: Vec<T>,
    tau: Vec<T>,
    cell: T,
    fft_x: Arc<dyn Fft<T>>,
    fft_t: Arc<dyn Fft<T>>,
}

impl<T: Real> std::fmt::Debug for SobolevNorm<T> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SobolevNorm").field("grid", &self.grid).finish()
    }
}

/// Angular frequencies of an `n`-point periodic grid on an interval of
/// length `2·half_period`, in FFT order.
pub fn frequencies<T: Real>(n: usize, half_period: T) -> Vec<T> {
    let scale = T::PI() / half_period;
    (0..n)
        .map(|k| {
            let kk = if k <= n / 2 { k as f64 } else { k as f64 - n as f64 };
            scale * T::lit(kk)
        })
        .collect()
}

impl<T: Real> SobolevNorm<T> {
    pub fn new(spec: &TorusOperatorSpec<T>) -> Self {
        Self::from_periods(spec.grid, spec.period_x, spec.period_t)
    }

    pub fn from_periods(grid: TorusGrid, period_x: T, period_t: T) -> Self {
        let mut planner = FftPlanner::new();
        let hx = T::lit(2.0) * period_x / T::from_usize_lossy(grid.nx);
        let ht = T::lit(2.0) * period_t / T::from_usize_lossy(grid.nt);
        Self {
            grid,
            xi: frequencies(grid.nx, period_x),
            tau: frequencies(grid.nt, period_t),
            cell: hx * ht,
            fft_x: planner.plan_fft_forward(grid.nx),
            fft_t: planner.plan_fft_forward(grid.nt),
        }
    }

    pub fn grid(&self) -> TorusGrid {
        self.grid
    }

    pub fn xi(&self) -> &[T] {
        &self.xi
    }

    pub fn tau(&self) -> &[T] {
        &self.tau
    }

    /// `|û|²` scaled so that its plain sum is the squared L² norm.
    pub fn power(&self, u: &[T]) -> Vec<T> {
        let g = self.grid;
        assert_eq!(u.len(), g.len(), "field does not match the grid");
        let mut buf: Vec<Cplx<T>> = u.iter().map(|&v| Cplx::new(v, T::zero())).collect();
        for row in buf.chunks_mut(g.nt) {
            self.fft_t.process(row);
        }
        let mut col = vec![Cplx::new(T::zero(), T::zero()); g.nx];
        for j in 0..g.nt {
            for i in 0..g.nx {
                col[i] = buf[g.idx(i, j)];
            }
            self.fft_x.process(&mut col);
            for i in 0..g.nx {
                buf[g.idx(i, j)] = col[i];
            }
        }
        let scale = self.cell / T::from_usize_lossy(g.len());
        buf.iter().map(|c| c.norm_sqr() * scale).collect()
    }

    /// Multiplier `(1 + ξ² + τ²)` at flat index `k`.
    pub fn symbol(&self, k: usize) -> T {
        let (i, j) = (k / self.grid.nt, k % self.grid.nt);
        T::one() + self.xi[i] * self.xi[i] + self.tau[j] * self.tau[j]
    }

    pub fn norm_from_power(&self, power: &[T], s: T) -> T {
        let sum: T = if s == T::zero() {
            power.iter().copied().sum()
        } else {
            power.iter().enumerate().map(|(k, &p)| self.symbol(k).powf(s) * p).sum()
        };
        sum.sqrt()
    }

    pub fn norm(&self, u: &[T], s: T) -> Result<T> {
        check_s(s)?;
        Ok(self.norm_from_power(&self.power(u), s))
    }

    /// Several orders from one transform.
    pub fn norms(&self, u: &[T], s: &[T]) -> Result<Vec<T>> {
        for &v in s {
            check_s(v)?;
        }
        let p = self.power(u);
        Ok(s.iter().map(|&v| self.norm_from_power(&p, v)).collect())
    }

    /// Share of the squared L² norm carried by modes with `|(ξ, τ)| > cutoff`.
    pub fn high_frequency_fraction(&self, u: &[T], cutoff: T) -> T {
        let p = self.power(u);
        let total: T = p.iter().copied().sum();
        if total == T::zero() {
            return T::zero();
        }
        let c2 = T::one() + cutoff * cutoff;
        let high: T = p.iter().enumerate().filter(|(k, _)| self.symbol(*k) > c2).map(|(_, &v)| v).sum();
        high / total
    }
}

fn check_s<T: Real>(s: T) -> Result<()> {
    let v = s.as_f64();
    if !(S_RANGE.0..=S_RANGE.1).contains(&v) {
        return Err(Error::Parameter {
            name: "s",
            reason: format!("Sobolev order {v} outside [{}, {}]", S_RANGE.0, S_RANGE.1),
        });
    }
    Ok(())
}
