//! `L u = f` for the invertible variant.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::quadrature::linear_fit;
use crate::scalar::Real;
use crate::torus::cg::{pcg, CgOptions, DEFAULT_TOL};
use crate::torus::operator::DiscreteOperator;
use crate::torus::sobolev::SobolevNorm;
use crate::torus_spec::Variant;

#[derive(Debug, Clone)]
pub struct EllipticSolution<T> {
    pub u: Vec<T>,
    pub iterations: usize,
    pub relative_residual: T,
}

pub fn solve_elliptic<T: Real>(op: &DiscreteOperator<T>, f: &[T]) -> Result<EllipticSolution<T>> {
    solve_elliptic_tol(op, f, DEFAULT_TOL)
}

pub fn solve_elliptic_tol<T: Real>(op: &DiscreteOperator<T>, f: &[T], tol: f64) -> Result<EllipticSolution<T>> {
    if op.variant != Variant::Invertible {
        return Err(Error::Parameter { name: "variant", reason: "solve_elliptic needs b = 1".into() });
    }
    let out = pcg(op, f, None, CgOptions { tol, ..CgOptions::default() })?;
    Ok(EllipticSolution { u: out.x, iterations: out.iterations, relative_residual: out.relative_residual })
}

#[derive(Debug, Clone, Serialize)]
pub struct SmoothingReport<T> {
    /// Shell centres `|(ξ, τ)|`.
    pub shells: Vec<T>,
    /// Shell energy of `u` over shell energy of `f`.
    pub energy_ratio: Vec<T>,
    /// Fitted `p` in `E_u/E_f ~ ⟨k⟩^p`.
    pub exponent: T,
}

/// Compares the radial Fourier energy of `u` and `f` on logarithmic shells
/// between `k_lo` and `k_hi`.
pub fn smoothing_exponent<T: Real>(
    sobolev: &SobolevNorm<T>,
    f: &[T],
    u: &[T],
    k_lo: f64,
    k_hi: f64,
    shells: usize,
) -> SmoothingReport<T> {
    let pf = sobolev.power(f);
    let pu = sobolev.power(u);
    let ratio = k_hi / k_lo;
    let mut ef = vec![0.0; shells];
    let mut eu = vec![0.0; shells];
    for k in 0..pf.len() {
        let r = (sobolev.symbol(k).as_f64() - 1.0).sqrt();
        if r < k_lo || r >= k_hi {
            continue;
        }
        let b = (((r / k_lo).ln() / ratio.ln()) * shells as f64) as usize;
        let b = b.min(shells - 1);
        ef[b] += pf[k].as_f64();
        eu[b] += pu[k].as_f64();
    }
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    let mut centres = Vec::new();
    let mut ratios = Vec::new();
    for b in 0..shells {
        let c = k_lo * ratio.powf((b as f64 + 0.5) / shells as f64);
        if ef[b] > 0.0 && eu[b] > 0.0 {
            centres.push(T::lit(c));
            ratios.push(T::lit(eu[b] / ef[b]));
            xs.push((1.0 + c * c).sqrt().ln());
            ys.push((eu[b] / ef[b]).ln());
        }
    }
    let exponent = if xs.len() >= 2 { linear_fit(&xs, &ys).0 } else { f64::NAN };
    SmoothingReport { shells: centres, energy_ratio: ratios, exponent: T::lit(exponent) }
}
