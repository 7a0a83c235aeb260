//! Lanczos estimates of extreme eigenvalues and the spectral gap.

use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::torus::cg::{pcg, CgOptions};
use crate::torus::operator::{dot, LinearOp};
use crate::torus::DiscreteOperator;
use crate::torus_spec::Variant;

#[derive(Debug, Clone, Serialize)]
pub struct SpectralGap<T> {
    /// Smallest nonzero eigenvalue.
    pub lambda1: T,
    /// Poincaré constant `1/λ₁`.
    pub constant: T,
    /// Unit (Euclidean) mean-zero Ritz vector for `λ₁`.
    #[serde(skip)]
    pub vector: Vec<T>,
    pub lanczos_steps: usize,
    pub ritz_residual: T,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GapOptions {
    pub max_steps: usize,
    /// Relative Ritz residual target for `1/λ₁`.
    pub tol: f64,
    pub inner_tol: f64,
    pub seed: u64,
}

impl Default for GapOptions {
    fn default() -> Self {
        Self { max_steps: 120, tol: 1e-11, inner_tol: 1e-13, seed: 0x5eed }
    }
}

fn start_vector<T: Real>(n: usize, seed: u64, mean_zero: bool) -> Vec<T> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut v: Vec<T> = (0..n).map(|_| T::lit(rng.random::<f64>() - 0.5_f64)).collect();
    if mean_zero {
        let m = v.iter().copied().sum::<T>() / T::from_usize_lossy(n);
        v.iter_mut().for_each(|x| *x = *x - m);
    }
    let nrm = dot(&v, &v).sqrt();
    v.iter_mut().for_each(|x| *x = *x / nrm);
    v
}

struct Lanczos<T> {
    basis: Vec<Vec<T>>,
    alpha: Vec<f64>,
    beta: Vec<f64>,
}

impl<T: Real> Lanczos<T> {
    fn new(q0: Vec<T>) -> Self {
        Self { basis: vec![q0], alpha: Vec::new(), beta: Vec::new() }
    }

    /// Extends the Krylov basis with `w = B q_k`, fully reorthogonalized.
    /// Returns false once the space is invariant.
    fn push(&mut self, mut w: Vec<T>, mean_zero: bool) -> bool {
        let k = self.basis.len() - 1;
        let a = dot(&w, &self.basis[k]);
        self.alpha.push(a.as_f64());
        for _ in 0..2 {
            for q in &self.basis {
                let c = dot(&w, q);
                w.iter_mut().zip(q).for_each(|(wi, &qi)| *wi = *wi - c * qi);
            }
        }
        if mean_zero {
            let m = w.iter().copied().sum::<T>() / T::from_usize_lossy(w.len());
            w.iter_mut().for_each(|x| *x = *x - m);
        }
        let b = dot(&w, &w).sqrt();
        self.beta.push(b.as_f64());
        if b.as_f64() <= 1e-14 * a.abs().as_f64().max(1e-300) {
            return false;
        }
        w.iter_mut().for_each(|x| *x = *x / b);
        self.basis.push(w);
        true
    }

    fn ritz(&self) -> SymmetricEigen<f64, nalgebra::Dyn> {
        let m = self.alpha.len();
        let mut t = DMatrix::<f64>::zeros(m, m);
        for i in 0..m {
            t[(i, i)] = self.alpha[i];
            if i + 1 < m {
                t[(i, i + 1)] = self.beta[i];
                t[(i + 1, i)] = self.beta[i];
            }
        }
        SymmetricEigen::new(t)
    }

    fn vector(&self, y: &[f64]) -> Vec<T> {
        let n = self.basis[0].len();
        let mut v = vec![T::zero(); n];
        for (q, &c) in self.basis.iter().zip(y) {
            let c = T::lit(c);
            v.iter_mut().zip(q).for_each(|(vi, &qi)| *vi = *vi + c * qi);
        }
        let nrm = dot(&v, &v).sqrt();
        v.iter_mut().for_each(|x| *x = *x / nrm);
        v
    }
}

/// Smallest and largest Ritz values after `steps` plain Lanczos steps.
pub fn ritz_extremes<T: Real, O: LinearOp<T>>(op: &O, steps: usize, seed: u64) -> (T, T) {
    let n = op.len();
    let mut lz = Lanczos::new(start_vector::<T>(n, seed, false));
    let mut w = vec![T::zero(); n];
    for _ in 0..steps.min(n) {
        op.apply(lz.basis.last().expect("basis"), &mut w);
        if !lz.push(w.clone(), false) {
            break;
        }
    }
    let e = lz.ritz();
    let lo = e.eigenvalues.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = e.eigenvalues.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    (T::lit(lo), T::lit(hi))
}

/// Smallest nonzero eigenvalue of a diffusion operator, by Lanczos on its
/// pseudo-inverse restricted to mean-zero functions.
pub fn spectral_gap<T: Real>(op: &DiscreteOperator<T>, opts: GapOptions) -> Result<SpectralGap<T>> {
    if op.variant != Variant::Diffusion {
        return Err(Error::Parameter {
            name: "variant",
            reason: "the spectral gap is defined for the diffusion variant".into(),
        });
    }
    let n = op.len();
    let inner = CgOptions { tol: opts.inner_tol, max_iter: 50_000, mean_zero: true };
    let mut lz = Lanczos::new(start_vector::<T>(n, opts.seed, true));
    let mut last_residual = f64::INFINITY;
    for step in 1..=opts.max_steps.min(n - 1) {
        let q = lz.basis.last().expect("basis").clone();
        let w = pcg(op, &q, None, inner)?.x;
        let grew = lz.push(w, true);
        if step % 4 == 0 || !grew || step == opts.max_steps {
            let e = lz.ritz();
            let (imax, &theta) = e
                .eigenvalues
                .iter()
                .enumerate()
                .max_by(|a, b| a.1.total_cmp(b.1))
                .ok_or_else(|| Error::EigenNonConvergence("empty Krylov space".into()))?;
            let y = e.eigenvectors.column(imax);
            let resid = (lz.beta.last().copied().unwrap_or(0.0) * y[y.len() - 1]).abs() / theta;
            last_residual = resid;
            if resid <= opts.tol || !grew {
                if !(theta > 0.0) {
                    return Err(Error::EigenNonConvergence(format!("nonpositive Ritz value {theta}")));
                }
                let coeffs: Vec<f64> = y.iter().copied().collect();
                let vector = lz.vector(&coeffs);
                let lambda1 = T::lit(1.0 / theta);
                return Ok(SpectralGap {
                    lambda1,
                    constant: T::one() / lambda1,
                    vector,
                    lanczos_steps: step,
                    ritz_residual: T::lit(resid),
                });
            }
        }
    }
    Err(Error::EigenNonConvergence(format!(
        "{} Lanczos steps left relative Ritz residual {last_residual:.3e}",
        opts.max_steps
    )))
}
