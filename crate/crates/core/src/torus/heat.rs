//! The heat semigroup `e^{-τL}` by implicit time stepping.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::torus::cg::{pcg, CgOptions};
use crate::torus::operator::{DiscreteOperator, LinearOp, Shifted};
use crate::torus::sobolev::SobolevNorm;
use crate::torus_spec::Variant;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HeatScheme {
    ImplicitEuler,
    CrankNicolson,
}

impl HeatScheme {
    pub fn tag(&self) -> &'static str {
        match self {
            HeatScheme::ImplicitEuler => "implicit_euler",
            HeatScheme::CrankNicolson => "crank_nicolson",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct HeatOptions {
    pub dt: f64,
    pub tau_max: f64,
    pub scheme: HeatScheme,
    pub s_values: Vec<f64>,
    /// Record norms every this many steps (the last step is always kept).
    pub record_every: usize,
    pub keep_snapshots: bool,
    pub cg_tol: f64,
}

impl HeatOptions {
    pub fn new(dt: f64, tau_max: f64, scheme: HeatScheme) -> Self {
        Self { dt, tau_max, scheme, s_values: vec![0.0], record_every: 1, keep_snapshots: false, cg_tol: 1e-12 }
    }
}

/// Default implicit Euler step `0.01 / λ_max`, with `λ_max` the
/// Gershgorin bound.
pub fn default_dt<T: Real>(op: &DiscreteOperator<T>) -> f64 {
    0.01 / op.lambda_max_bound().as_f64()
}

#[derive(Debug, Clone, Serialize)]
pub struct HeatRun<T> {
    pub scheme: HeatScheme,
    pub dt: T,
    pub tau: Vec<T>,
    pub s_values: Vec<T>,
    /// `norms[k][n] = ‖u(τ_n)‖_{H^{s_k}}`.
    pub norms: Vec<Vec<T>>,
    pub mean: Vec<T>,
    pub mean_zero_l2: Vec<T>,
    /// Largest per-step increase of the mean-zero L² norm, relative to its
    /// initial value (zero for an exact contraction).
    pub contraction_defect: T,
    pub cg_iterations: usize,
    #[serde(skip)]
    pub snapshots: Vec<Vec<T>>,
}

fn check_dt(dt: f64, tau_max: f64) -> Result<usize> {
    if !(dt > 0.0) || !dt.is_finite() {
        return Err(Error::Parameter { name: "dt", reason: format!("must be positive, got {dt}") });
    }
    if !(tau_max >= 0.0) {
        return Err(Error::Parameter { name: "tau_max", reason: format!("must be nonnegative, got {tau_max}") });
    }
    Ok((tau_max / dt).round() as usize)
}

/// Advances `u` by one step in place; returns CG iterations.
pub(crate) fn step<T: Real>(
    op: &DiscreteOperator<T>,
    scheme: HeatScheme,
    dt: T,
    u: &mut Vec<T>,
    tol: f64,
) -> Result<usize> {
    let diffusion = op.variant == Variant::Diffusion;
    let mean = op.mean(u);
    if diffusion {
        u.iter_mut().for_each(|v| *v = *v - mean);
    }
    let (scale, rhs) = match scheme {
        HeatScheme::ImplicitEuler => (dt, u.clone()),
        HeatScheme::CrankNicolson => {
            let half = dt * T::lit(0.5);
            let lu = op.apply_vec(u);
            (half, u.iter().zip(&lu).map(|(&a, &b)| a - half * b).collect())
        }
    };
    let sys = Shifted { op, shift: T::one(), scale };
    let out = pcg(&sys, &rhs, Some(u), CgOptions { tol, max_iter: 20_000, mean_zero: diffusion })?;
    *u = out.x;
    if diffusion {
        u.iter_mut().for_each(|v| *v = *v + mean);
    }
    Ok(out.iterations)
}

/// Evolves `(∂τ + L)u = 0, u(0) = f`. For the diffusion variant the
/// constant part is split off and carried exactly.
pub fn heat_evolve<T: Real>(
    op: &DiscreteOperator<T>,
    sobolev: &SobolevNorm<T>,
    f: &[T],
    opts: &HeatOptions,
) -> Result<HeatRun<T>> {
    let steps = check_dt(opts.dt, opts.tau_max)?;
    if f.len() != op.len() {
        return Err(Error::Shape(format!("initial data has {} entries, grid {}", f.len(), op.len())));
    }
    let dt = T::lit(opts.dt);
    let s_values: Vec<T> = opts.s_values.iter().map(|&s| T::lit(s)).collect();
    let record_every = opts.record_every.max(1);
    let mut run = HeatRun {
        scheme: opts.scheme,
        dt,
        tau: Vec::new(),
        s_values: s_values.clone(),
        norms: vec![Vec::new(); s_values.len()],
        mean: Vec::new(),
        mean_zero_l2: Vec::new(),
        contraction_defect: T::zero(),
        cg_iterations: 0,
        snapshots: Vec::new(),
    };
    let record = |run: &mut HeatRun<T>, n: usize, u: &[T]| -> Result<()> {
        run.tau.push(dt * T::from_usize_lossy(n));
        for (series, v) in run.norms.iter_mut().zip(sobolev.norms(u, &s_values)?) {
            series.push(v);
        }
        run.mean.push(op.mean(u));
        run.mean_zero_l2.push(op.mean_zero_norm(u));
        if opts.keep_snapshots {
            run.snapshots.push(u.to_vec());
        }
        Ok(())
    };
    let mut u = f.to_vec();
    record(&mut run, 0, &u)?;
    let initial = op.mean_zero_norm(&u);
    let mut prev = initial;
    for n in 1..=steps {
        run.cg_iterations += step(op, opts.scheme, dt, &mut u, opts.cg_tol)?;
        let now = op.mean_zero_norm(&u);
        if initial > T::zero() {
            run.contraction_defect = run.contraction_defect.max((now - prev) / initial);
        }
        prev = now;
        if n % record_every == 0 || n == steps {
            record(&mut run, n, &u)?;
        }
    }
    Ok(run)
}

#[derive(Debug, Clone, Serialize)]
pub struct GrowthWindow<T> {
    pub start: T,
    pub end: T,
    pub max_slope: T,
}

impl<T: Real> GrowthWindow<T> {
    pub fn length(&self) -> T {
        self.end - self.start
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct GrowthReport<T> {
    pub s: T,
    /// `d/dτ log‖u‖_{Hˢ}` between consecutive records, at the midpoints.
    pub slope_tau: Vec<T>,
    pub slopes: Vec<T>,
    pub max_slope: T,
    pub positive_windows: Vec<GrowthWindow<T>>,
}

impl<T: Real> GrowthReport<T> {
    pub fn longest_window(&self) -> T {
        self.positive_windows.iter().map(|w| w.length()).fold(T::zero(), T::max)
    }
}

/// Slopes below this count as flat.
pub const SLOPE_FLOOR: f64 = 1e-9;

/// Local log-slopes of the `k`-th Sobolev series and the maximal runs where
/// they are positive.
pub fn growth_scan<T: Real>(run: &HeatRun<T>, k: usize) -> Result<GrowthReport<T>> {
    let series = run.norms.get(k).ok_or(Error::IndexOutOfRange { index: k, available: run.norms.len() })?;
    let floor = T::lit(SLOPE_FLOOR);
    let mut slope_tau = Vec::new();
    let mut slopes = Vec::new();
    for n in 1..series.len() {
        let dtau = run.tau[n] - run.tau[n - 1];
        let (a, b) = (series[n - 1], series[n]);
        let s = if a > T::zero() && b > T::zero() { (b.ln() - a.ln()) / dtau } else { T::zero() };
        slope_tau.push((run.tau[n] + run.tau[n - 1]) * T::lit(0.5));
        slopes.push(s);
    }
    let mut windows = Vec::new();
    let mut open: Option<GrowthWindow<T>> = None;
    for (n, &slope) in slopes.iter().enumerate() {
        if slope > floor {
            let w = open.get_or_insert(GrowthWindow { start: run.tau[n], end: run.tau[n + 1], max_slope: slope });
            w.end = run.tau[n + 1];
            w.max_slope = w.max_slope.max(slope);
        } else if let Some(w) = open.take() {
            windows.push(w);
        }
    }
    windows.extend(open);
    let max_slope = slopes.iter().copied().fold(T::neg_infinity(), T::max);
    Ok(GrowthReport { s: run.s_values[k], slope_tau, slopes, max_slope, positive_windows: windows })
}
