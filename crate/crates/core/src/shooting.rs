//! Shooting for `-g'' - w alpha² g + beta g = 0` on `[-1, 1]` with
//! `g(-1) = 0`, `g'(-1) = 1`, and the scan for the Dirichlet set `Σ₀`.

use std::ops::{Add, Div, Mul, Sub};

use num_traits::Zero;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::profile::CoefficientProfile;
use crate::quadrature::simpson_weights;
use crate::scalar::{Cplx, Real};

/// Largest admissible RK4 step.
pub const MAX_STEP: f64 = 1.0 / 128.0;
/// Step used by the root scans.
pub const DEFAULT_STEP: f64 = 1.0 / 2048.0;
/// Bisection stops once `|g_w(1)|` drops below this.
pub const ROOT_VALUE_TOL: f64 = 1e-10;
/// ... or once the bracket is narrower than this.
pub const ROOT_WIDTH_TOL: f64 = 1e-12;
/// Relative scan spacing `0.05 (1 + |w|)`.
pub const SCAN_FRACTION: f64 = 0.05;

/// Amplitude type carried by the integrator: a real scalar or its complex
/// counterpart.
pub trait Amplitude<T: Real>:
    Copy
    + Send
    + Sync
    + Zero
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Mul<T, Output = Self>
{
    fn from_real(x: T) -> Self;
    fn modulus(self) -> T;
    fn finite(self) -> bool;
}

impl<T: Real> Amplitude<T> for T {
    fn from_real(x: T) -> Self {
        x
    }
    fn modulus(self) -> T {
        self.abs()
    }
    fn finite(self) -> bool {
        self.is_finite()
    }
}

impl<T: Real> Amplitude<T> for Cplx<T> {
    fn from_real(x: T) -> Self {
        Cplx::new(x, T::zero())
    }
    fn modulus(self) -> T {
        self.norm()
    }
    fn finite(self) -> bool {
        self.re.is_finite() && self.im.is_finite()
    }
}

/// `alpha²` and `beta` tabulated at every half step of a uniform RK4 grid.
#[derive(Debug, Clone)]
pub struct ShootingGrid<T> {
    pub steps: usize,
    pub step: T,
    alpha_sq: Vec<T>,
    beta: Vec<T>,
}

impl<T: Real> ShootingGrid<T> {
    pub fn new(profile: &CoefficientProfile<T>, step: T) -> Result<Self> {
        if !(step > T::zero()) || step > T::lit(MAX_STEP) {
            return Err(Error::Parameter {
                name: "step",
                reason: format!("RK4 step must lie in (0, 2^-7], got {step}"),
            });
        }
        let steps = (T::lit(2.0) / step).round().to_usize().unwrap_or(0).max(1);
        let step = T::lit(2.0) / T::from_usize_lossy(steps);
        let half = step / T::lit(2.0);
        let (alpha_sq, beta): (Vec<T>, Vec<T>) = (0..=2 * steps)
            .map(|k| {
                let x = -T::one() + half * T::from_usize_lossy(k);
                let a = profile.alpha(x);
                (a * a, profile.beta(x))
            })
            .unzip();
        Ok(Self { steps, step, alpha_sq, beta })
    }

    pub fn nodes(&self) -> Vec<T> {
        (0..=self.steps).map(|i| -T::one() + self.step * T::from_usize_lossy(i)).collect()
    }

    #[inline]
    fn q<F: Amplitude<T>>(&self, k: usize, w: F) -> F {
        F::from_real(self.beta[k]) - w * self.alpha_sq[k]
    }

    /// Integrates to `x = 1`; `record` receives `(value, derivative)` at each node.
    fn integrate<F: Amplitude<T>>(&self, w: F, mut record: impl FnMut(F, F)) -> Result<(F, F)> {
        let h = self.step;
        let h2 = h / T::lit(2.0);
        let h6 = h / T::lit(6.0);
        let mut g = F::zero();
        let mut p = F::from_real(T::one());
        record(g, p);
        for i in 0..self.steps {
            let (q0, qm, q1) = (self.q(2 * i, w), self.q(2 * i + 1, w), self.q(2 * i + 2, w));
            let k1g = p;
            let k1p = q0 * g;
            let g2 = g + k1g * h2;
            let k2g = p + k1p * h2;
            let k2p = qm * g2;
            let g3 = g + k2g * h2;
            let k3g = p + k2p * h2;
            let k3p = qm * g3;
            let g4 = g + k3g * h;
            let k4g = p + k3p * h;
            let k4p = q1 * g4;
            g = g + (k1g + (k2g + k3g) * T::lit(2.0) + k4g) * h6;
            p = p + (k1p + (k2p + k3p) * T::lit(2.0) + k4p) * h6;
            if !g.finite() || !p.finite() {
                let x = -T::one() + h * T::from_usize_lossy(i + 1);
                return Err(Error::Overflow { x: x.as_f64(), w: String::new() });
            }
            record(g, p);
        }
        Ok((g, p))
    }

    /// `g_w(1)` only, without storing samples.
    pub fn end_value<F: Amplitude<T>>(&self, w: F) -> Result<F> {
        self.integrate(w, |_, _| {}).map(|(g, _)| g)
    }

    pub fn solve<F: Amplitude<T>>(&self, w: F) -> Result<ShootingSolution<F, T>> {
        let mut samples = Vec::with_capacity(self.steps + 1);
        let mut slopes = Vec::with_capacity(self.steps + 1);
        let (end_value, end_derivative) = self.integrate(w, |g, p| {
            samples.push(g);
            slopes.push(p);
        })?;
        Ok(ShootingSolution { w, samples, slopes, end_value, end_derivative, step: self.step })
    }
}

/// Samples of `g_w` on the uniform RK4 grid.
#[derive(Debug, Clone)]
pub struct ShootingSolution<F, T> {
    pub w: F,
    pub samples: Vec<F>,
    pub slopes: Vec<F>,
    pub end_value: F,
    pub end_derivative: F,
    pub step: T,
}

impl<T: Real> ShootingSolution<T, T> {
    /// Sign changes of `g` strictly inside `(-1, 1)`.
    pub fn interior_zeros(&self) -> usize {
        let n = self.samples.len();
        let scale = self.samples.iter().fold(T::zero(), |m, g| m.max(g.abs()));
        let tiny = scale * T::lit(1e-9);
        let mut count = 0;
        let mut last = None;
        for g in &self.samples[1..n - 1] {
            if g.abs() <= tiny {
                continue;
            }
            let s = *g > T::zero();
            if let Some(prev) = last {
                if prev != s {
                    count += 1;
                }
            }
            last = Some(s);
        }
        count
    }
}

/// Shoots with complex `w`.
pub fn shoot<T: Real>(profile: &CoefficientProfile<T>, w: Cplx<T>, step: T) -> Result<ShootingSolution<Cplx<T>, T>> {
    ShootingGrid::new(profile, step)?.solve(w).map_err(|e| tag_w(e, w))
}

/// Shoots with real `w`; all samples are real.
pub fn shoot_real<T: Real>(profile: &CoefficientProfile<T>, w: T, step: T) -> Result<ShootingSolution<T, T>> {
    ShootingGrid::new(profile, step)?.solve(w).map_err(|e| tag_w(e, w))
}

fn tag_w<W: std::fmt::Display>(e: Error, w: W) -> Error {
    match e {
        Error::Overflow { x, .. } => Error::Overflow { x, w: w.to_string() },
        other => other,
    }
}

/// Result of a `Σ₀` scan.
#[derive(Debug, Clone)]
pub struct Sigma0Scan<T> {
    /// Sorted ascending.
    pub values: Vec<T>,
    /// Lower end of the scan; no Dirichlet eigenvalue lies below it.
    pub w_min: T,
    pub w_max: T,
    pub truncated: bool,
    pub warnings: Vec<String>,
}

/// Lower scan bound: below `min(beta/alpha²)` the coefficient `beta - w alpha²`
/// is positive, `g_w` is convex while positive and cannot return to zero.
pub fn lower_bound<T: Real>(profile: &CoefficientProfile<T>) -> T {
    let n = crate::profile::VALIDATION_SAMPLES;
    let m = (0..n)
        .map(|k| T::lit(-1.0 + 2.0 * k as f64 / (n - 1) as f64))
        .map(|x| {
            let a = profile.alpha(x);
            profile.beta(x) / (a * a)
        })
        .fold(T::infinity(), T::min);
    m - T::one()
}

/// Locates every `w < w_max` with a nontrivial Dirichlet solution.
pub fn find_sigma0<T: Real>(profile: &CoefficientProfile<T>, w_max: T, max_count: usize) -> Result<Sigma0Scan<T>> {
    find_sigma0_with_step(profile, w_max, max_count, T::lit(DEFAULT_STEP))
}

pub fn find_sigma0_with_step<T: Real>(
    profile: &CoefficientProfile<T>,
    w_max: T,
    max_count: usize,
    step: T,
) -> Result<Sigma0Scan<T>> {
    if !w_max.is_finite() {
        return Err(Error::Parameter { name: "w_max", reason: "must be finite".into() });
    }
    let grid = ShootingGrid::new(profile, step)?;
    let w_min = lower_bound(profile);
    let mut nodes = vec![w_min];
    let mut w = w_min;
    while w < w_max {
        w = (w + T::lit(SCAN_FRACTION) * (T::one() + w.abs())).min(w_max);
        nodes.push(w);
    }
    let values: Vec<T> =
        nodes.par_iter().map(|&w| grid.end_value(w).map_err(|e| tag_w(e, w))).collect::<Result<_>>()?;

    let brackets: Vec<(T, T, T, T)> = nodes
        .windows(2)
        .zip(values.windows(2))
        .filter(|(_, v)| v[0] == T::zero() || (v[0] > T::zero()) != (v[1] > T::zero()))
        .filter(|(_, v)| v[0] != T::zero() || v[1] != T::zero())
        .map(|(w, v)| (w[0], w[1], v[0], v[1]))
        .collect();

    let mut warnings = Vec::new();
    let truncated = brackets.len() > max_count;
    if truncated {
        warnings.push(format!(
            "partial result: more than {max_count} roots below w_max = {w_max}; returning the lowest {max_count}"
        ));
    }
    let mut roots: Vec<T> = brackets
        .par_iter()
        .take(max_count)
        .map(|&(a, b, fa, fb)| bisect(&grid, a, b, fa, fb))
        .collect::<Result<_>>()?;
    roots.sort_by(|a, b| a.partial_cmp(b).expect("finite roots"));
    roots.dedup_by(|a, b| (*a - *b).abs() <= T::lit(ROOT_WIDTH_TOL));
    Ok(Sigma0Scan { values: roots, w_min, w_max, truncated, warnings })
}

fn bisect<T: Real>(grid: &ShootingGrid<T>, mut a: T, mut b: T, mut fa: T, fb: T) -> Result<T> {
    if fa == T::zero() {
        return Ok(a);
    }
    if fb == T::zero() {
        return Ok(b);
    }
    for _ in 0..200 {
        let mid = a + (b - a) / T::lit(2.0);
        let fm = grid.end_value(mid)?;
        if fm.abs() <= T::lit(ROOT_VALUE_TOL) || (b - a) <= T::lit(ROOT_WIDTH_TOL) {
            return Ok(mid);
        }
        if (fm > T::zero()) == (fa > T::zero()) {
            a = mid;
            fa = fm;
        } else {
            b = mid;
        }
    }
    Ok(a + (b - a) / T::lit(2.0))
}

/// L²-normalized Dirichlet eigenfunction on the RK4 grid.
#[derive(Debug, Clone)]
pub struct Eigenfunction<T> {
    pub w: T,
    pub x: Vec<T>,
    pub g: Vec<T>,
    /// Derivative samples, normalized consistently with `g`.
    pub dg: Vec<T>,
    pub step: T,
    /// Factor applied to the raw shooting solution.
    pub scale: T,
}

/// Relative end-value tolerance for accepting `w` as an eigenvalue.
pub const EIGEN_ACCEPT_TOL: f64 = 1e-7;

pub fn eigenfunction<T: Real>(profile: &CoefficientProfile<T>, w: T) -> Result<Eigenfunction<T>> {
    eigenfunction_with_step(profile, w, T::lit(DEFAULT_STEP))
}

pub fn eigenfunction_with_step<T: Real>(profile: &CoefficientProfile<T>, w: T, step: T) -> Result<Eigenfunction<T>> {
    let grid = ShootingGrid::new(profile, step)?;
    let sol = grid.solve(w)?;
    let amp = sol.samples.iter().fold(T::zero(), |m, g| m.max(g.abs()));
    if sol.end_value.abs() > T::lit(EIGEN_ACCEPT_TOL) * amp {
        return Err(Error::NotAnEigenvalue { w: w.as_f64(), end_value: sol.end_value.as_f64() });
    }
    let weights = simpson_weights(sol.samples.len(), grid.step);
    let norm_sq: T = sol.samples.iter().zip(&weights).map(|(g, w)| *g * *g * *w).sum();
    let scale = T::one() / norm_sq.sqrt();
    Ok(Eigenfunction {
        w,
        x: grid.nodes(),
        g: sol.samples.iter().map(|g| *g * scale).collect(),
        dg: sol.slopes.iter().map(|g| *g * scale).collect(),
        step: grid.step,
        scale,
    })
}

impl<T: Real> Eigenfunction<T> {
    pub fn l2_norm(&self) -> T {
        let w = simpson_weights(self.g.len(), self.step);
        self.g.iter().zip(&w).map(|(g, w)| *g * *g * *w).sum::<T>().sqrt()
    }

    /// Linear interpolation onto an arbitrary `x` in `[-1, 1]`.
    pub fn eval(&self, x: T) -> T {
        let n = self.g.len();
        let pos = ((x + T::one()) / self.step).max(T::zero());
        let i = pos.floor().to_usize().unwrap_or(0).min(n - 2);
        let f = pos - T::from_usize_lossy(i);
        // cubic Hermite with the stored derivatives
        let h = self.step;
        let (g0, g1, d0, d1) = (self.g[i], self.g[i + 1], self.dg[i], self.dg[i + 1]);
        let f2 = f * f;
        let f3 = f2 * f;
        let two = T::lit(2.0);
        let three = T::lit(3.0);
        (two * f3 - three * f2 + T::one()) * g0
            + (f3 - two * f2 + f) * h * d0
            + (-two * f3 + three * f2) * g1
            + (f3 - f2) * h * d1
    }

    /// Max-norm residual of `-D²g + (beta - w alpha²) g`, relative to
    /// `max|beta - w alpha²| · max|g|`.
    pub fn second_difference_residual(&self, profile: &CoefficientProfile<T>) -> T {
        let h2 = self.step * self.step;
        let n = self.g.len();
        let mut worst = T::zero();
        let mut qmax = T::zero();
        for i in 1..n - 1 {
            let x = self.x[i];
            let a = profile.alpha(x);
            let q = profile.beta(x) - self.w * a * a;
            qmax = qmax.max(q.abs());
            let d2 = (self.g[i + 1] - T::lit(2.0) * self.g[i] + self.g[i - 1]) / h2;
            worst = worst.max((-d2 + q * self.g[i]).abs());
        }
        let gmax = self.g.iter().fold(T::zero(), |m, g| m.max(g.abs()));
        worst / (qmax.max(T::one()) * gmax)
    }
}
