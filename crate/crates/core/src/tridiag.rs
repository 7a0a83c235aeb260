//! Thomas algorithm for tridiagonal systems over real or complex scalars.

use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::shooting::Amplitude;

/// Solves `lower[i] x[i-1] + diag[i] x[i] + upper[i] x[i+1] = rhs[i]`;
/// `lower[0]` and `upper[n-1]` are ignored.
pub fn solve<T: Real, F: Amplitude<T>>(lower: &[F], diag: &[F], upper: &[F], rhs: &[F]) -> Result<Vec<F>> {
    let n = diag.len();
    if lower.len() != n || upper.len() != n || rhs.len() != n {
        return Err(Error::Shape(format!(
            "tridiagonal bands {}/{}/{} and rhs {} disagree",
            lower.len(),
            n,
            upper.len(),
            rhs.len()
        )));
    }
    if n == 0 {
        return Ok(Vec::new());
    }
    let mut c = vec![F::zero(); n];
    let mut d = vec![F::zero(); n];
    let tiny = T::epsilon() * T::epsilon();
    let mut denom = diag[0];
    for i in 0..n {
        if i > 0 {
            denom = diag[i] - lower[i] * c[i - 1];
        }
        if denom.modulus() <= tiny {
            return Err(Error::SolverStagnation { iterations: i, residual: f64::INFINITY });
        }
        c[i] = upper[i] / denom;
        d[i] = if i == 0 { rhs[0] / denom } else { (rhs[i] - lower[i] * d[i - 1]) / denom };
    }
    let mut x = d;
    for i in (0..n - 1).rev() {
        let next = x[i + 1];
        x[i] = x[i] - c[i] * next;
    }
    Ok(x)
}
