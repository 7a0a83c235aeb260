//! Homogeneous singular solutions `g(x) T(t) η(t) χ_{t>0}` of the model
//! operator, their Sobolev and Gevrey regularity.

pub mod fourier;
mod higher;
mod scan;

pub use fourier::TimeProfile;
pub use higher::{derivative_ladder, higher_order_singular, DerivativeLadder};
pub use scan::{
    default_cutoffs, gevrey_scan, sobolev_scan, tail_exponent, GevreyFit, GevreyReport, SobolevScan, TAIL_WINDOW,
};

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::mellin::{StripField, StripGrid};
use crate::profile::CoefficientProfile;
use crate::quadrature::Cutoff;
use crate::shooting::{eigenfunction, Eigenfunction};
use crate::spectrum::SpectrumReport;

type Profile = CoefficientProfile<f64>;

#[derive(Debug, Clone)]
pub struct SingularSolution {
    pub j: usize,
    pub w: f64,
    /// `γ_j` (power case) such that `T(t) = t^{γ - 1/2}`.
    pub gamma: f64,
    pub m: u32,
    pub time: TimeProfile,
    pub eigen: Eigenfunction<f64>,
    pub cutoff: Cutoff,
    pub field: StripField<f64>,
}

pub(crate) fn check_cutoff(cut: &Cutoff) -> Result<()> {
    if !(cut.t1 > 0.0 && cut.t1 < cut.t2 && cut.t2.is_finite()) {
        return Err(Error::Parameter {
            name: "cutoff",
            reason: format!("need 0 < t1 < t2, got [{}, {}]", cut.t1, cut.t2),
        });
    }
    Ok(())
}

/// `w_j` for the `j`-th threshold of `report`.
pub(crate) fn threshold_w(report: &SpectrumReport<f64>, j: usize) -> Result<f64> {
    let s = *report.sigma.get(j).ok_or(Error::IndexOutOfRange { index: j, available: report.sigma.len() })?;
    Ok(s * s - 0.25)
}

/// Root of `Σ₀` closest to `w` (undoes the rounding of `s² - 1/4`).
pub(crate) fn sigma0_member(report: &SpectrumReport<f64>, w: f64) -> f64 {
    report.sigma0.iter().copied().min_by(|a, b| (a - w).abs().partial_cmp(&(b - w).abs()).expect("finite")).unwrap_or(w)
}

pub(crate) fn sample_field(
    grid: StripGrid<f64>,
    eigen: &Eigenfunction<f64>,
    time: TimeProfile,
    cut: Cutoff,
) -> StripField<f64> {
    // the Dirichlet trace is imposed; the shooting end value is ≤ 1e-8 anyway
    let gx: Vec<f64> = grid.x_nodes().iter().map(|&x| if x.abs() >= 1.0 { 0.0 } else { eigen.eval(x) }).collect();
    let mut field = StripField::zeros(grid);
    let tk: Vec<f64> = (0..grid.n_tau)
        .map(|k| {
            let t = grid.t(k);
            time.eval(t) * cut.eval(t)
        })
        .collect();
    field.pos.par_chunks_mut(grid.n_tau).zip(&gx).for_each(|(row, &g)| {
        for (v, &h) in row.iter_mut().zip(&tk) {
            v.re = g * h;
        }
    });
    field
}

/// `u = g_j(x) t^{γ_j - 1/2} η(t) χ_{t>0}` sampled on `grid`.
pub fn build_singular(
    profile: &Profile,
    report: &SpectrumReport<f64>,
    j: usize,
    cutoff: Cutoff,
    grid: StripGrid<f64>,
) -> Result<SingularSolution> {
    check_cutoff(&cutoff)?;
    let w = sigma0_member(report, threshold_w(report, j)?);
    let gamma = (w + 0.25).sqrt();
    let eigen = eigenfunction(profile, w)?;
    let time = TimeProfile::Power { b: gamma - 0.5 };
    let field = sample_field(grid, &eigen, time, cutoff);
    Ok(SingularSolution { j, w, gamma, m: 1, time, eigen, cutoff, field })
}

impl SingularSolution {
    /// Same eigenfunction with the exponent moved by `delta`.
    pub fn with_exponent_offset(&self, delta: f64) -> Self {
        let mut out = self.clone();
        match &mut out.time {
            TimeProfile::Power { b } => *b += delta,
            TimeProfile::Exponential { lambda, .. } => *lambda += delta,
        }
        out.gamma += delta;
        out.field = sample_field(self.field.grid, &self.eigen, out.time, self.cutoff);
        out
    }

    /// Same solution with `η(t)` replaced by `η(t/factor)`.
    pub fn with_dilated_cutoff(&self, factor: f64) -> Self {
        let mut out = self.clone();
        out.cutoff = self.cutoff.dilated(factor);
        out.field = sample_field(self.field.grid, &self.eigen, out.time, out.cutoff);
        out
    }

    pub fn g_norm(&self) -> f64 {
        self.eigen.l2_norm()
    }
}

/// Sixth-order central first and second derivative stencils.
pub(crate) const D1: [f64; 7] = [-1.0 / 60.0, 3.0 / 20.0, -3.0 / 4.0, 0.0, 3.0 / 4.0, -3.0 / 20.0, 1.0 / 60.0];
pub(crate) const D2: [f64; 7] = [1.0 / 90.0, -3.0 / 20.0, 1.5, -49.0 / 18.0, 1.5, -3.0 / 20.0, 1.0 / 90.0];

pub(crate) fn stencil(c: &[f64; 7], f: impl Fn(isize) -> f64) -> f64 {
    c.iter().enumerate().map(|(k, ck)| ck * f(k as isize - 3)).sum()
}

/// Relative residuals of `𝓛₀ u` (or its `t^m∂ₜ` analogue).
#[derive(Debug, Clone, PartialEq)]
pub struct ResidualReport {
    /// Largest residual where `η ≡ 1`, relative to `max_x |α² w u|` at the same `t`.
    pub plateau_max: f64,
    /// Same measure on the transition `t₁ < t < t₂`.
    pub transition_max: f64,
    /// Finite-difference check of `(t∂ₜ+1)(t∂ₜ) T = (γ² - 1/4) T` (or `(t^m∂ₜ)² T = w T`).
    pub identity_error: f64,
    pub x_step: f64,
    pub t_samples: usize,
}

/// x-spacing of the residual stencil (every fourth RK4 node).
pub const RESIDUAL_X_STEP: f64 = 1.0 / 512.0;

type TimeMap = Box<dyn Fn(f64) -> f64 + Sync>;

/// Evaluates the operator with sixth-order differences in `x` (spacing
/// [`RESIDUAL_X_STEP`]) and in the time variable `v`, where `v = log t` for
/// `m = 1` and `v = t^{1-m}/(1-m)` otherwise, so that the time part is `∂ᵥ² + ∂ᵥ`
/// or `∂ᵥ²`.
pub fn residual_check(sol: &SingularSolution, profile: &Profile) -> ResidualReport {
    let cut = sol.cutoff;
    let m = sol.m;
    // time variable and its inverse map
    let (v_of_t, t_of_v): (TimeMap, TimeMap) = if m == 1 {
        (Box::new(|t: f64| t.ln()), Box::new(|v: f64| v.exp()))
    } else {
        let a = 1.0 - m as f64;
        (Box::new(move |t: f64| t.powf(a) / a), Box::new(move |v: f64| (v * a).powf(1.0 / a)))
    };
    let (t_lo, nv) = match sol.time {
        TimeProfile::Power { .. } => (sol.field.grid.t(0).max(1e-12), 4000),
        // where exp(-λ t^{1-m}) ≈ 1e-120
        TimeProfile::Exponential { lambda, m } => ((lambda / 276.0).powf(1.0 / (m as f64 - 1.0)), 12000),
    };
    let v_lo = v_of_t(t_lo);
    let v1 = v_of_t(cut.t1);
    let v2 = v_of_t(cut.t2);
    let dv = (v1 - v_lo) / nv as f64;
    let n_trans = ((v2 - v1) / dv).ceil() as usize;
    let stride = (RESIDUAL_X_STEP / sol.eigen.step).round().max(1.0) as usize;
    let hx = sol.eigen.step * stride as f64;
    let xs: Vec<usize> = (3 * stride..sol.eigen.g.len() - 3 * stride).step_by(stride).collect();
    let g = |i: usize| sol.eigen.g[i];
    let time_val = |v: f64| {
        let t = t_of_v(v);
        sol.time.eval(t) * cut.eval(t)
    };
    let d2x: Vec<f64> =
        xs.iter().map(|&i| stencil(&D2, |k| g((i as isize + k * stride as isize) as usize)) / (hx * hx)).collect();
    let a2: Vec<f64> = xs.iter().map(|&i| profile.alpha(sol.eigen.x[i]).powi(2)).collect();
    let bx: Vec<f64> = xs.iter().map(|&i| profile.beta(sol.eigen.x[i])).collect();
    let gx: Vec<f64> = xs.iter().map(|&i| g(i)).collect();
    let scale_x = gx.iter().zip(&a2).map(|(g, a)| (g * a * sol.w).abs()).fold(0.0, f64::max);
    let time_op = |v: f64| -> (f64, f64) {
        let f = |k: isize| time_val(v + k as f64 * dv);
        let d2 = stencil(&D2, f) / (dv * dv);
        let d1 = stencil(&D1, f) / dv;
        let op = if m == 1 { d2 + d1 } else { d2 };
        (f(0), op)
    };
    let eval_rows = |range: std::ops::Range<usize>| -> f64 {
        range
            .into_par_iter()
            .map(|k| {
                let v = v_lo + dv * k as f64;
                let (tv, top) = time_op(v);
                let denom = scale_x * tv.abs();
                if denom == 0.0 {
                    return 0.0;
                }
                (0..xs.len())
                    .map(|i| (-d2x[i] * tv - a2[i] * gx[i] * top + bx[i] * gx[i] * tv).abs())
                    .fold(0.0, f64::max)
                    / denom
            })
            .reduce(|| 0.0, f64::max)
    };
    let plateau_max = eval_rows(3..nv - 3);
    let transition_max = eval_rows(nv + 1..nv + n_trans);
    let target = if m == 1 { sol.gamma * sol.gamma - 0.25 } else { sol.w };
    let identity_error = (3..nv - 3)
        .map(|k| {
            let v = v_lo + dv * k as f64;
            let (tv, top) = time_op(v);
            if tv == 0.0 {
                0.0
            } else {
                (top - target * tv).abs() / (target * tv).abs()
            }
        })
        .fold(0.0, f64::max);
    ResidualReport { plateau_max, transition_max, identity_error, x_step: hx, t_samples: nv }
}
