//! Diagonally preconditioned conjugate gradients.

use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::torus::operator::{dot, LinearOp};

pub const DEFAULT_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CgOptions {
    /// Relative residual target `‖b - Ax‖ / ‖b‖`.
    pub tol: f64,
    pub max_iter: usize,
    /// Solve on the complement of the constants (for singular `A` with
    /// constant kernel).
    pub mean_zero: bool,
}

impl Default for CgOptions {
    fn default() -> Self {
        Self { tol: DEFAULT_TOL, max_iter: 20_000, mean_zero: false }
    }
}

#[derive(Debug, Clone)]
pub struct CgOutcome<T> {
    pub x: Vec<T>,
    pub iterations: usize,
    pub relative_residual: T,
}

fn remove_mean<T: Real>(v: &mut [T]) {
    let m = v.iter().copied().sum::<T>() / T::from_usize_lossy(v.len());
    for x in v.iter_mut() {
        *x = *x - m;
    }
}

/// Solves `A x = b` from the initial guess `x0` (zero when `None`).
pub fn pcg<T: Real, O: LinearOp<T>>(op: &O, b: &[T], x0: Option<&[T]>, opts: CgOptions) -> Result<CgOutcome<T>> {
    let n = op.len();
    if b.len() != n {
        return Err(Error::Shape(format!("right-hand side has {} entries, operator {}", b.len(), n)));
    }
    let inv_diag: Vec<T> = op.diagonal().into_iter().map(|d| T::one() / d).collect();
    let mut rhs = b.to_vec();
    if opts.mean_zero {
        remove_mean(&mut rhs);
    }
    let bnorm = dot(&rhs, &rhs).sqrt();
    let mut x = match x0 {
        Some(v) => v.to_vec(),
        None => vec![T::zero(); n],
    };
    if opts.mean_zero {
        remove_mean(&mut x);
    }
    if bnorm == T::zero() {
        return Ok(CgOutcome { x: vec![T::zero(); n], iterations: 0, relative_residual: T::zero() });
    }
    let tol = T::lit(opts.tol);
    let mut ax = vec![T::zero(); n];
    op.apply(&x, &mut ax);
    let mut r: Vec<T> = rhs.iter().zip(&ax).map(|(&bi, &ai)| bi - ai).collect();
    if opts.mean_zero {
        remove_mean(&mut r);
    }
    let precondition = |r: &[T], z: &mut [T]| {
        for ((zi, &ri), &di) in z.iter_mut().zip(r).zip(&inv_diag) {
            *zi = ri * di;
        }
        if opts.mean_zero {
            remove_mean(z);
        }
    };
    let mut z = vec![T::zero(); n];
    precondition(&r, &mut z);
    let mut p = z.clone();
    let mut rz = dot(&r, &z);
    let mut ap = vec![T::zero(); n];
    let mut rel = dot(&r, &r).sqrt() / bnorm;
    let mut best = rel;
    let mut since_best = 0usize;
    for it in 0..opts.max_iter {
        if rel <= tol {
            return Ok(CgOutcome { x, iterations: it, relative_residual: rel });
        }
        op.apply(&p, &mut ap);
        let pap = dot(&p, &ap);
        if !(pap > T::zero()) {
            return Err(Error::SolverStagnation { iterations: it, residual: rel.as_f64() });
        }
        let alpha = rz / pap;
        for i in 0..n {
            x[i] = x[i] + alpha * p[i];
            r[i] = r[i] - alpha * ap[i];
        }
        if opts.mean_zero {
            remove_mean(&mut r);
        }
        // Refresh the recursive residual now and then to stop drift.
        if (it + 1) % 200 == 0 {
            op.apply(&x, &mut ax);
            for i in 0..n {
                r[i] = rhs[i] - ax[i];
            }
            if opts.mean_zero {
                remove_mean(&mut r);
            }
        }
        rel = dot(&r, &r).sqrt() / bnorm;
        if rel < best * T::lit(0.999) {
            best = rel;
            since_best = 0;
        } else {
            since_best += 1;
            if since_best > 2000 {
                return Err(Error::SolverStagnation { iterations: it + 1, residual: rel.as_f64() });
            }
        }
        precondition(&r, &mut z);
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
    }
    if rel <= tol {
        return Ok(CgOutcome { x, iterations: opts.max_iter, relative_residual: rel });
    }
    Err(Error::SolverStagnation { iterations: opts.max_iter, residual: rel.as_f64() })
}
