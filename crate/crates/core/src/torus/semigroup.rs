//! `L⁺f = ∫₀^∞ e^{-τL} f dτ` checked against a direct solve.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::torus::cg::{pcg, CgOptions};
use crate::torus::heat::{step, HeatScheme};
use crate::torus::operator::{DiscreteOperator, LinearOp};
use crate::torus_spec::Variant;

#[derive(Debug, Clone, Serialize)]
pub struct SemigroupCheck<T> {
    pub tau_max: T,
    pub steps: usize,
    /// Relative L² distance between the time integral and the direct solve.
    pub discrepancy: T,
    /// `e^{-λ₁ τ_max}`.
    pub tail_bound: T,
    #[serde(skip)]
    pub integral: Vec<T>,
    #[serde(skip)]
    pub direct: Vec<T>,
}

/// Mean-zero solve `L u = f`, `u ⊥ 1`.
pub fn pseudo_inverse<T: Real>(op: &DiscreteOperator<T>, f: &[T], tol: f64) -> Result<Vec<T>> {
    Ok(pcg(op, f, None, CgOptions { tol, max_iter: 50_000, mean_zero: true })?.x)
}

/// Crank–Nicolson snapshots integrated by the trapezoid rule. With this
/// pairing `L·(quadrature) = f - u(τ_max)` holds exactly, so the only error
/// is the tail `L⁺u(τ_max)`.
pub fn semigroup_inverse_check<T: Real>(
    op: &DiscreteOperator<T>,
    f: &[T],
    lambda1: T,
    tau_max: T,
    steps: usize,
) -> Result<SemigroupCheck<T>> {
    if op.variant != Variant::Diffusion {
        return Err(Error::Parameter { name: "variant", reason: "the semigroup check needs b = 0".into() });
    }
    if f.len() != op.len() {
        return Err(Error::Shape(format!("data has {} entries, grid {}", f.len(), op.len())));
    }
    let scale = f.iter().fold(T::zero(), |m, v| m.max(v.abs()));
    if op.mean(f).abs() > T::lit(1e-12) * scale.max(T::min_positive_value()) {
        return Err(Error::Parameter { name: "f", reason: "must have zero mean".into() });
    }
    if steps == 0 || !(tau_max > T::zero()) {
        return Err(Error::Parameter {
            name: "tau_max",
            reason: "need a positive horizon and at least one step".into(),
        });
    }
    let tail_bound = (-lambda1 * tau_max).exp();
    if scale == T::zero() {
        let z = vec![T::zero(); f.len()];
        return Ok(SemigroupCheck {
            tau_max,
            steps,
            discrepancy: T::zero(),
            tail_bound,
            integral: z.clone(),
            direct: z,
        });
    }
    let dt = tau_max / T::from_usize_lossy(steps);
    let half = dt * T::lit(0.5);
    let mut u = f.to_vec();
    let mut integral: Vec<T> = f.iter().map(|&v| half * v).collect();
    for n in 1..=steps {
        step(op, HeatScheme::CrankNicolson, dt, &mut u, 1e-13)?;
        let w = if n == steps { half } else { dt };
        integral.iter_mut().zip(&u).for_each(|(acc, &v)| *acc = *acc + w * v);
    }
    let direct = pseudo_inverse(op, f, 1e-13)?;
    let diff: Vec<T> = integral.iter().zip(&direct).map(|(&a, &b)| a - b).collect();
    let discrepancy = op.norm(&diff) / op.norm(&direct);
    Ok(SemigroupCheck { tau_max, steps, discrepancy, tail_bound, integral, direct })
}
