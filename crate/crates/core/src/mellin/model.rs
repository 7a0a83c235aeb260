use rayon::prelude::*;

use super::{mellin_forward, mellin_inverse_values, raw_forward, Half, HzOperator, MellinField, StripField, StripGrid};
use crate::error::{Error, Result};
use crate::profile::CoefficientProfile;
use crate::quadrature::linear_fit;
use crate::scalar::{Cplx, Real};
use crate::spectrum::SpectrumReport;

/// Minimum distance from `s` to every threshold.
pub const EXPONENT_MARGIN: f64 = 1e-4;

/// Right-hand side `f₁ + t∂ₜ f₂ + (t∂ₜ)² f₃`.
#[derive(Debug, Clone)]
pub struct ModelRhs<T> {
    pub f1: StripField<T>,
    pub f2: Option<StripField<T>>,
    pub f3: Option<StripField<T>>,
}

impl<T> From<StripField<T>> for ModelRhs<T> {
    fn from(f1: StripField<T>) -> Self {
        Self { f1, f2: None, f3: None }
    }
}

impl<T: Real> ModelRhs<T> {
    fn transforms(&self, half: Half, checked: bool) -> Result<(MellinField<T>, Vec<String>)> {
        let fwd = |f: &StripField<T>| if checked { mellin_forward(f, half) } else { Ok(raw_forward(f, half)) };
        let mut acc = fwd(&self.f1)?;
        let mut warnings = std::mem::take(&mut acc.warnings);
        for (slot, power) in [(&self.f2, 1), (&self.f3, 2)] {
            if let Some(f) = slot {
                let mut m = fwd(f)?;
                warnings.append(&mut m.warnings);
                let m = m.multiply(|tau| {
                    let d = Cplx::new(-T::lit(0.5), tau);
                    if power == 1 {
                        d
                    } else {
                        d * d
                    }
                });
                for (a, b) in acc.values.iter_mut().zip(&m.values) {
                    *a = *a + *b;
                }
            }
        }
        Ok((acc, warnings))
    }
}

#[derive(Debug, Clone)]
pub struct ModelSolution<T> {
    pub u: StripField<T>,
    /// Largest relative per-frequency residual of the discrete system.
    pub residual: T,
    pub warnings: Vec<String>,
}

/// Dirichlet solver for `𝓛ₛ` on a fixed strip grid.
#[derive(Debug, Clone)]
pub struct ModelSolver<T> {
    pub s: T,
    pub grid: StripGrid<T>,
    op: HzOperator<T>,
}

impl<T: Real> ModelSolver<T> {
    pub fn new(profile: &CoefficientProfile<T>, s: T, grid: StripGrid<T>, report: &SpectrumReport<T>) -> Result<Self> {
        if let Some((j, d)) = report.distance_to_sigma(s) {
            if d < T::lit(EXPONENT_MARGIN) {
                return Err(Error::ResonantExponent {
                    s: s.as_f64(),
                    s_j: report.sigma[j].as_f64(),
                    distance: d.as_f64(),
                });
            }
        }
        Ok(Self { s, grid, op: HzOperator::new(profile, grid.nx)? })
    }

    pub fn operator(&self) -> &HzOperator<T> {
        &self.op
    }

    pub fn z(&self, tau: T) -> Cplx<T> {
        Cplx::new(self.s - T::lit(0.5), tau)
    }

    /// Solves every frequency column of `fhat`.
    pub fn solve_mellin(&self, fhat: &MellinField<T>) -> Result<(MellinField<T>, T)> {
        let g = self.grid;
        let cols: Vec<(Vec<Cplx<T>>, T)> = (0..g.n_tau)
            .into_par_iter()
            .map(|j| {
                let sol = self.op.solve(self.z(g.tau(j)), &fhat.column(j))?;
                Ok((sol.g, sol.residual))
            })
            .collect::<Result<_>>()?;
        let mut out = MellinField::zeros(g, fhat.half);
        let mut worst = T::zero();
        for (j, (col, r)) in cols.iter().enumerate() {
            out.set_column(j, col);
            worst = worst.max(*r);
        }
        Ok((out, worst))
    }

    pub fn solve(&self, rhs: &ModelRhs<T>) -> Result<ModelSolution<T>> {
        if rhs.f1.grid != self.grid {
            return Err(Error::Shape("right-hand side lives on a different strip grid".into()));
        }
        let mut u = StripField::zeros(self.grid);
        let mut warnings = Vec::new();
        let mut residual = T::zero();
        // t < 0 reduces to t > 0 under t ↦ -t, which leaves t∂ₜ unchanged
        for half in [Half::Positive, Half::Negative] {
            let (fhat, mut w) = rhs.transforms(half, true)?;
            warnings.append(&mut w);
            let (uhat, r) = self.solve_mellin(&fhat)?;
            residual = residual.max(r);
            *u.half_mut(half) = mellin_inverse_values(&uhat);
        }
        Ok(ModelSolution { u, residual, warnings })
    }
}

/// Solves `𝓛ₛ u = f`, `u(±1, t) = 0` on both half-strips.
pub fn solve_model_dirichlet<T: Real>(
    profile: &CoefficientProfile<T>,
    s: T,
    f: &ModelRhs<T>,
    report: &SpectrumReport<T>,
) -> Result<ModelSolution<T>> {
    ModelSolver::new(profile, s, f.f1.grid, report)?.solve(f)
}

/// Relative L² residual of `𝓛ₛ u - f`, with `t∂ₜ` applied spectrally in `u`
/// and the compact x-operator of the solver.
pub fn model_residual<T: Real>(profile: &CoefficientProfile<T>, s: T, u: &StripField<T>, f: &ModelRhs<T>) -> Result<T> {
    let g = u.grid;
    let op = HzOperator::new(profile, g.nx)?;
    let mut num = T::zero();
    let mut den = T::zero();
    for half in [Half::Positive, Half::Negative] {
        let uhat = raw_forward(u, half);
        let (fhat, _) = f.transforms(half, false)?;
        let parts: Vec<(T, T)> = (0..g.n_tau)
            .into_par_iter()
            .map(|j| {
                let z = Cplx::new(s - T::lit(0.5), g.tau(j));
                let lhs = op.apply(z, &uhat.column(j));
                let br = op.averaged_rhs(&fhat.column(j));
                let n: T = lhs.iter().zip(&br).map(|(a, b)| (*a - *b).norm_sqr()).sum();
                let d: T = br.iter().map(|b| b.norm_sqr()).sum();
                (n, d)
            })
            .collect();
        for (n, d) in parts {
            num = num + n;
            den = den + d;
        }
    }
    Ok(if den == T::zero() { num.sqrt() } else { (num / den).sqrt() })
}

/// `‖ĝ(·,τ)‖ / ‖f̂(·,τ)‖` per frequency with a log-log tail fit.
#[derive(Debug, Clone, PartialEq)]
pub struct TauDecayReport<T> {
    pub tau: Vec<T>,
    pub ratio: Vec<T>,
    /// Slope of `log ratio` against `log ⟨τ⟩` on the tail.
    pub slope: T,
    /// `exp(intercept)` of the tail fit.
    pub fit_constant: T,
    /// `max ratio · ⟨τ⟩²` over all bins.
    pub sup_constant: T,
    pub tail_start: T,
}

fn x_norm<T: Real>(w: &[T], v: &[Cplx<T>]) -> T {
    v.iter().zip(w).map(|(f, w)| f.norm_sqr() * *w).sum::<T>().sqrt()
}

/// Bins with `‖f̂‖` below this fraction of the largest are skipped.
const DECAY_FLOOR: f64 = 1e-12;

pub fn tau_decay_report<T: Real>(op: &HzOperator<T>, s: T, fhat: &MellinField<T>) -> Result<TauDecayReport<T>> {
    let g = fhat.grid;
    let wx = g.x_weights();
    let norms: Vec<T> = (0..g.n_tau).map(|j| x_norm(&wx, &fhat.column(j))).collect();
    let peak = norms.iter().fold(T::zero(), |m, &n| m.max(n));
    let mut bins: Vec<usize> = (0..g.n_tau).filter(|&j| norms[j] > peak * T::lit(DECAY_FLOOR)).collect();
    bins.sort_by(|&a, &b| g.tau(a).partial_cmp(&g.tau(b)).expect("finite"));
    let ratios: Vec<T> = bins
        .par_iter()
        .map(|&j| {
            let z = Cplx::new(s - T::lit(0.5), g.tau(j));
            let sol = op.solve(z, &fhat.column(j))?;
            Ok(x_norm(&wx, &sol.g) / norms[j])
        })
        .collect::<Result<_>>()?;
    let tau: Vec<T> = bins.iter().map(|&j| g.tau(j)).collect();
    let bracket = |t: T| (T::one() + t * t).sqrt();
    let tail_start = g.tau(g.n_tau / 2 - 1) / T::lit(8.0);
    let (lx, ly): (Vec<f64>, Vec<f64>) = tau
        .iter()
        .zip(&ratios)
        .filter(|(t, _)| t.abs() >= tail_start)
        .map(|(t, r)| (bracket(*t).ln().as_f64(), r.ln().as_f64()))
        .unzip();
    let (slope, intercept) = if lx.len() >= 2 { linear_fit(&lx, &ly) } else { (f64::NAN, f64::NAN) };
    let sup_constant = tau.iter().zip(&ratios).fold(T::zero(), |m, (t, r)| m.max(*r * bracket(*t).powi(2)));
    Ok(TauDecayReport {
        tau,
        ratio: ratios,
        slope: T::lit(slope),
        fit_constant: T::lit(intercept.exp()),
        sup_constant,
        tail_start,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectrum::compute_sigma;

    fn flat() -> CoefficientProfile<f64> {
        CoefficientProfile::constant(1.0, 0.0).unwrap()
    }

    fn report() -> SpectrumReport<f64> {
        let pi2 = std::f64::consts::PI.powi(2);
        compute_sigma(&[pi2 / 4.0, pi2, 9.0 * pi2 / 4.0]).unwrap()
    }

    fn small_grid() -> StripGrid<f64> {
        StripGrid::new(129, -15.0, 6.0, 1024).unwrap()
    }

    #[test]
    fn zero_rhs_gives_zero_solution() {
        let f = StripField::zeros(small_grid());
        let sol = solve_model_dirichlet(&flat(), 1.0, &f.into(), &report()).unwrap();
        assert_eq!(sol.u.max_abs(), 0.0);
    }

    #[test]
    fn near_threshold_exponent_is_refused() {
        let r = report();
        let s = r.sigma[0] + 1e-5;
        let f = StripField::zeros(small_grid());
        let e = solve_model_dirichlet(&flat(), s, &f.into(), &r).unwrap_err();
        assert!(matches!(e, Error::ResonantExponent { .. }));
    }

    #[test]
    fn three_slot_rhs_matches_explicit_derivatives() {
        let g = small_grid();
        let bump = |u: f64| (-(u * u)).exp();
        let f2 = StripField::from_positive_fn(g, |x, t| (1.0 - x * x) * bump(t.ln()));
        // t∂ₜ of the same field
        let df2 = StripField::from_positive_fn(g, |x, t| {
            let u = t.ln();
            (1.0 - x * x) * (-2.0 * u) * bump(u)
        });
        let zero = StripField::zeros(g);
        let a = ModelRhs { f1: zero.clone(), f2: Some(f2), f3: None };
        let b: ModelRhs<f64> = df2.into();
        let (ma, _) = a.transforms(Half::Positive, true).unwrap();
        let (mb, _) = b.transforms(Half::Positive, true).unwrap();
        let err = ma.values.iter().zip(&mb.values).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max);
        assert!(err < 1e-10, "{err}");
    }
}
