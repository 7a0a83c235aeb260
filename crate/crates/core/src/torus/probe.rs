//! Rescaling probe for exact regularity: `f_ε(x, t) = f(x, t/ε)` pushed
//! through `L⁻¹`, with Sobolev norms of input and output.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::quadrature::{cos2_bump, linear_fit};
use crate::scalar::Real;
use crate::torus::operator::DiscreteOperator;
use crate::torus::sobolev::SobolevNorm;
use crate::torus::solve::solve_elliptic;
use crate::torus_spec::{TorusOperatorSpec, Variant};

/// Half-widths of the fixed bump `f`.
pub const BUMP_X: f64 = 0.8;
pub const BUMP_T: f64 = 0.5;
/// Minimum number of t-nodes across the support of the squeezed bump.
pub const MIN_NODES_ACROSS: f64 = 8.0;

/// Probe periods and grid used when nothing else is configured.
pub const DEFAULT_PERIOD_X: f64 = 2.0;
pub const DEFAULT_PERIOD_T: f64 = 0.25;
pub const DEFAULT_NODES: usize = 256;

#[derive(Debug, Clone, Serialize)]
pub struct RegularityProbeReport<T> {
    pub s_values: Vec<T>,
    /// Resolved ε values, decreasing.
    pub eps: Vec<T>,
    /// `[s][ε]`.
    pub input_norms: Vec<Vec<T>>,
    pub output_norms: Vec<Vec<T>>,
    pub ratios: Vec<Vec<T>>,
    /// Fitted `p` in `‖f_ε‖_{Hˢ} ~ ε^p`, per s.
    pub input_exponents: Vec<T>,
    /// Fitted `p` in ratio `~ ε^p`, per s.
    pub ratio_exponents: Vec<T>,
    pub skipped: Vec<T>,
    pub warnings: Vec<String>,
}

impl<T: Real> RegularityProbeReport<T> {
    /// Largest over smallest ratio at the `k`-th s.
    pub fn variation(&self, k: usize) -> T {
        let r = &self.ratios[k];
        let hi = r.iter().copied().fold(T::zero(), T::max);
        let lo = r.iter().copied().fold(T::infinity(), T::min);
        hi / lo
    }

    /// Number of consecutive ε-steps, from the largest ε, over which the
    /// ratio strictly increases.
    pub fn increasing_run(&self, k: usize) -> usize {
        self.ratios[k].windows(2).take_while(|w| w[1] > w[0]).count()
    }
}

/// `f_ε` sampled on the grid.
pub fn squeezed_bump<T: Real>(spec: &TorusOperatorSpec<T>, eps: T) -> Vec<T> {
    let xs = spec.x_nodes();
    let ts = spec.t_nodes();
    let (bx, bt) = (T::lit(BUMP_X), T::lit(BUMP_T));
    let mut f = Vec::with_capacity(spec.grid.len());
    for &x in &xs {
        let fx = cos2_bump(x, bx);
        for &t in &ts {
            f.push(fx * cos2_bump(t / eps, bt));
        }
    }
    f
}

/// Whether the squeezed bump has enough t-nodes across its support.
pub fn resolvable<T: Real>(spec: &TorusOperatorSpec<T>, eps: T) -> bool {
    (T::lit(2.0 * BUMP_T) * eps / spec.ht()).as_f64() >= MIN_NODES_ACROSS
}

pub fn regularity_probe<T: Real>(
    spec: &TorusOperatorSpec<T>,
    s_values: &[T],
    eps_values: &[T],
) -> Result<RegularityProbeReport<T>> {
    if spec.variant != Variant::Invertible {
        return Err(Error::Parameter { name: "variant", reason: "the probe inverts L and needs b = 1".into() });
    }
    if eps_values.windows(2).any(|w| !(w[1] < w[0])) {
        return Err(Error::Parameter { name: "eps", reason: "must be strictly decreasing".into() });
    }
    if eps_values.iter().any(|&e| !(e > T::zero()) || T::lit(BUMP_T) * e > spec.period_t) {
        return Err(Error::Parameter {
            name: "eps",
            reason: format!("each ε must be positive with the squeezed bump inside |t| < {}", spec.period_t),
        });
    }
    if spec.period_x <= T::lit(BUMP_X) {
        return Err(Error::Parameter { name: "period_x", reason: "the bump does not fit in x".into() });
    }
    let op = DiscreteOperator::assemble(spec);
    let sobolev = SobolevNorm::new(spec);
    let mut warnings = Vec::new();
    let mut skipped = Vec::new();
    let mut eps = Vec::new();
    for &e in eps_values {
        if resolvable(spec, e) {
            eps.push(e);
        } else {
            skipped.push(e);
            warnings.push(format!("eps = {e} skipped: fewer than {MIN_NODES_ACROSS} t-nodes across the squeezed bump"));
        }
    }
    let columns: Vec<(Vec<T>, Vec<T>)> = eps
        .par_iter()
        .map(|&e| -> Result<(Vec<T>, Vec<T>)> {
            let f = squeezed_bump(spec, e);
            let u = solve_elliptic(&op, &f)?.u;
            Ok((sobolev.norms(&f, s_values)?, sobolev.norms(&u, s_values)?))
        })
        .collect::<Result<_>>()?;
    let ns = s_values.len();
    let mut input_norms = vec![Vec::with_capacity(eps.len()); ns];
    let mut output_norms = vec![Vec::with_capacity(eps.len()); ns];
    for (fin, fout) in &columns {
        for k in 0..ns {
            input_norms[k].push(fin[k]);
            output_norms[k].push(fout[k]);
        }
    }
    let ratios: Vec<Vec<T>> =
        (0..ns).map(|k| input_norms[k].iter().zip(&output_norms[k]).map(|(&a, &b)| b / a).collect()).collect();
    let log_eps: Vec<f64> = eps.iter().map(|e| e.as_f64().ln()).collect();
    let fit = |series: &[T]| -> T {
        if series.len() < 2 {
            return T::nan();
        }
        let y: Vec<f64> = series.iter().map(|v| v.as_f64().ln()).collect();
        T::lit(linear_fit(&log_eps, &y).0)
    };
    let input_exponents = input_norms.iter().map(|r| fit(r)).collect();
    let ratio_exponents = ratios.iter().map(|r| fit(r)).collect();
    Ok(RegularityProbeReport {
        s_values: s_values.to_vec(),
        eps,
        input_norms,
        output_norms,
        ratios,
        input_exponents,
        ratio_exponents,
        skipped,
        warnings,
    })
}
