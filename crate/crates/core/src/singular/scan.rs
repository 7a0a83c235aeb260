use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::fourier::{self, origin_transform, transform, TimeProfile};
use super::SingularSolution;
use crate::error::{Error, Result};
use crate::quadrature::{gauss_legendre, linear_fit};

/// Frequencies over which the Fourier tail exponent is fitted.
pub const TAIL_WINDOW: (f64, f64) = (1e3, 1e5);
const UNIFORM_PANEL: f64 = 2.0;
const UNIFORM_END: f64 = 400.0;
const GEOMETRIC_RATIO: f64 = 1.05;
const ORDER: usize = 16;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SobolevScan {
    pub r_values: Vec<f64>,
    pub cutoffs: Vec<f64>,
    /// `norms[i][k] = ∬_{|τ| ≤ cutoffs[k]} (1+τ²)^{r_i} |û|² dτ dx / 2π`.
    pub norms: Vec<Vec<f64>>,
    /// Relative increment between the last two cutoffs, per `r`.
    pub last_increment: Vec<f64>,
    /// Slope of the norm against `log(cutoff)` over the upper half of cutoffs.
    pub log_growth_slope: Vec<f64>,
    /// Fitted exponent `p` in `‖û(·,τ)‖ ~ τ^p` on [`TAIL_WINDOW`].
    pub tail_exponent: f64,
    /// Estimated threshold `-p - 1/2`.
    pub s_hat: f64,
    /// `‖u‖²_{L²}` by direct quadrature in `t`.
    pub l2_norm_sq: f64,
}

/// Cutoffs `10^{1 + k/4}`, `k = 0..=16`.
pub fn default_cutoffs() -> Vec<f64> {
    (0..=16).map(|k| 10f64.powf(1.0 + k as f64 / 4.0)).collect()
}

fn panel_breaks(top: f64, cutoffs: &[f64]) -> Vec<f64> {
    let mut b = vec![0.0];
    let mut x = 0.0;
    while x < top.min(UNIFORM_END) {
        x = (x + UNIFORM_PANEL).min(UNIFORM_END);
        b.push(x);
    }
    while x < top {
        x *= GEOMETRIC_RATIO;
        b.push(x);
    }
    b.extend_from_slice(cutoffs);
    b.retain(|&v| v <= top);
    b.sort_by(|a, c| a.partial_cmp(c).expect("finite"));
    b.dedup_by(|a, c| (*a - *c).abs() <= 1e-12 * c.abs().max(1.0));
    b
}

pub fn sobolev_scan(sol: &SingularSolution, r_values: &[f64], cutoffs: &[f64]) -> Result<SobolevScan> {
    if cutoffs.is_empty() || cutoffs[0] <= 0.0 || cutoffs.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Parameter { name: "cutoffs", reason: "must be positive and strictly increasing".into() });
    }
    if let TimeProfile::Power { b } = sol.time {
        let gamma = b + 0.5;
        if let Some(r) = r_values.iter().find(|&&r| !(0.0..=gamma + 1.0).contains(&r)) {
            return Err(Error::Parameter {
                name: "r",
                reason: format!("r = {r} outside [0, γ + 1 = {}]", gamma + 1.0),
            });
        }
    }
    let g2 = sol.g_norm().powi(2);
    let top = *cutoffs.last().expect("nonempty");
    let breaks = panel_breaks(top, cutoffs);
    let (x, w) = gauss_legendre(ORDER);
    // |ĥ|² at every node, per panel
    let panels: Vec<Vec<(f64, f64, f64)>> = breaks
        .par_windows(2)
        .map(|p| {
            let (lo, h) = (p[0], p[1] - p[0]);
            x.iter()
                .zip(&w)
                .map(|(xi, wi)| {
                    let tau = lo + 0.5 * h * (xi + 1.0);
                    (tau, 0.5 * h * wi, transform(&sol.time, &sol.cutoff, tau).norm_sqr())
                })
                .collect()
        })
        .collect();
    // both signs of τ: factor 2, with the 1/2π of Plancherel
    let pref = g2 / PI;
    let norms: Vec<Vec<f64>> = r_values
        .par_iter()
        .map(|&r| {
            let mut acc = 0.0;
            let mut out = Vec::with_capacity(cutoffs.len());
            let mut next = 0;
            for (pi, panel) in panels.iter().enumerate() {
                acc += panel.iter().map(|(t, wt, h2)| wt * (1.0 + t * t).powf(r) * h2).sum::<f64>();
                while next < cutoffs.len() && (breaks[pi + 1] - cutoffs[next]).abs() <= 1e-12 * cutoffs[next].max(1.0) {
                    out.push(pref * acc);
                    next += 1;
                }
            }
            out
        })
        .collect();
    let last_increment = norms
        .iter()
        .map(|n| if n.len() < 2 { f64::NAN } else { (n[n.len() - 1] - n[n.len() - 2]) / n[n.len() - 1] })
        .collect();
    let half = cutoffs.len() / 2;
    let log_growth_slope = norms
        .iter()
        .map(|n| {
            let lx: Vec<f64> = cutoffs[half..].iter().map(|c| c.ln()).collect();
            linear_fit(&lx, &n[half..]).0
        })
        .collect();
    let tail_exponent = tail_exponent(&sol.time, &sol.cutoff);
    Ok(SobolevScan {
        r_values: r_values.to_vec(),
        cutoffs: cutoffs.to_vec(),
        norms,
        last_increment,
        log_growth_slope,
        tail_exponent,
        s_hat: -tail_exponent - 0.5,
        l2_norm_sq: g2 * fourier::l2_norm_sq(&sol.time, &sol.cutoff),
    })
}

/// Slope of `log|ĥ|` against `log τ` on [`TAIL_WINDOW`].
pub fn tail_exponent(time: &TimeProfile, cut: &crate::quadrature::Cutoff) -> f64 {
    let (a, b) = TAIL_WINDOW;
    let (lx, ly): (Vec<f64>, Vec<f64>) = (0..=40)
        .map(|k| {
            let tau = a * (b / a).powf(k as f64 / 40.0);
            (tau.ln(), transform(time, cut, tau).norm().ln())
        })
        .unzip();
    linear_fit(&lx, &ly).0
}

/// `-log|F(τ)| ≈ a + d log τ + c τ^κ`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GevreyFit {
    pub kappa: f64,
    /// Fitted Gevrey order `1/κ`.
    pub r_hat: f64,
    pub c: f64,
    pub log_power: f64,
    pub rms: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "class", rename_all = "snake_case")]
pub enum GevreyReport {
    /// Power-law solution; no Gevrey fit is meaningful.
    Algebraic { message: String, tail_exponent: f64 },
    Exponential {
        m: u32,
        predicted_r: f64,
        window: (f64, f64),
        /// Fit of the origin contribution (the transform without the cutoff).
        origin: GevreyFit,
        /// Fit of the full transform including the C³ cutoff.
        full: GevreyFit,
        /// `(τ, |origin|, |full|)`.
        samples: Vec<(f64, f64, f64)>,
    },
}

fn fit_stretched(taus: &[f64], values: &[f64]) -> GevreyFit {
    let y: Vec<f64> = values.iter().map(|v| -v.ln()).collect();
    let n = taus.len();
    let solve = |kappa: f64| -> (f64, [f64; 3]) {
        let a = DMatrix::from_fn(n, 3, |i, j| match j {
            0 => 1.0,
            1 => taus[i].ln(),
            _ => taus[i].powf(kappa),
        });
        let b = DVector::from_column_slice(&y);
        let svd = a.clone().svd(true, true);
        let x = svd.solve(&b, 1e-14).unwrap_or_else(|_| DVector::zeros(3));
        let r = &a * &x - b;
        ((r.norm_squared() / n as f64).sqrt(), [x[0], x[1], x[2]])
    };
    // coarse scan, then golden-section refinement
    let mut best = (f64::INFINITY, 0.0);
    let mut k = 0.05;
    while k <= 1.5 {
        let (rms, _) = solve(k);
        if rms < best.0 {
            best = (rms, k);
        }
        k += 0.005;
    }
    let (mut lo, mut hi) = (best.1 - 0.005, best.1 + 0.005);
    let phi = 0.5 * (5f64.sqrt() - 1.0);
    for _ in 0..60 {
        let m1 = hi - phi * (hi - lo);
        let m2 = lo + phi * (hi - lo);
        if solve(m1).0 < solve(m2).0 {
            hi = m2;
        } else {
            lo = m1;
        }
    }
    let kappa = 0.5 * (lo + hi);
    let (rms, x) = solve(kappa);
    GevreyFit { kappa, r_hat: 1.0 / kappa, c: x[2], log_power: x[1], rms }
}

/// Fits the decay `log‖û(·,τ)‖ ≈ -c τ^{1/r̂}` of an exponential-type solution.
pub fn gevrey_scan(sol: &SingularSolution, window: (f64, f64), samples: usize) -> Result<GevreyReport> {
    let (lambda, m) = match sol.time {
        TimeProfile::Power { .. } => {
            return Ok(GevreyReport::Algebraic {
                message: "not Gevrey-type; algebraic decay".into(),
                tail_exponent: tail_exponent(&sol.time, &sol.cutoff),
            })
        }
        TimeProfile::Exponential { lambda, m } => (lambda, m),
    };
    if !(window.0 > 0.0 && window.1 > window.0) || samples < 4 {
        return Err(Error::Parameter { name: "window", reason: "need 0 < τ_lo < τ_hi and ≥ 4 samples".into() });
    }
    let gn = sol.g_norm();
    let rows: Vec<(f64, f64, f64)> = (0..samples)
        .into_par_iter()
        .map(|k| {
            let tau = window.0 * (window.1 / window.0).powf(k as f64 / (samples - 1) as f64);
            let o = origin_transform(&sol.time, tau).norm() * gn;
            let f = transform(&sol.time, &sol.cutoff, tau).norm() * gn;
            (tau, o, f)
        })
        .collect();
    let taus: Vec<f64> = rows.iter().map(|r| r.0).collect();
    let origin = fit_stretched(&taus, &rows.iter().map(|r| r.1).collect::<Vec<_>>());
    let full = fit_stretched(&taus, &rows.iter().map(|r| r.2).collect::<Vec<_>>());
    let _ = lambda;
    Ok(GevreyReport::Exponential { m, predicted_r: m as f64 / (m as f64 - 1.0), window, origin, full, samples: rows })
}
