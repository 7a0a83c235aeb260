//! Discrete trace inequality at the ends `x = ±1` of the degenerate segment.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::torus_spec::TorusOperatorSpec;

/// Allowed excess of the observed constant over 1.
pub const TRACE_SLACK: f64 = 0.05;

#[derive(Debug, Clone, Serialize)]
pub struct TraceReport<T> {
    pub gamma: T,
    /// `∫|u(±1, t)|² dt`, indexed `[minus, plus]`.
    pub traces: [T; 2],
    /// `∫∫_{1<±x<1+γ} |∂x u|²`.
    pub strip_energy: [T; 2],
    /// `‖∂x u‖²` over the whole torus.
    pub dx_energy: T,
    /// `γ ‖∂x u‖²`, the right-hand side with `C = 1`.
    pub bound: T,
    /// `max_± trace / (γ · strip energy)`; 1 for the extremal profile.
    pub constant: T,
    pub passed: bool,
}

pub fn trace_inequality_check<T: Real>(spec: &TorusOperatorSpec<T>, u: &[T], gamma: T) -> Result<TraceReport<T>> {
    let g = spec.grid;
    if u.len() != g.len() {
        return Err(Error::Shape(format!("field has {} entries, grid {}", u.len(), g.len())));
    }
    if !(gamma > T::zero()) || !(T::one() + gamma < spec.period_x) {
        return Err(Error::Parameter { name: "gamma", reason: format!("need 0 < γ < Px - 1, got {gamma}") });
    }
    let xs = spec.x_nodes();
    let hx = spec.hx();
    let ht = spec.ht();
    let tiny = hx * T::lit(1e-9);
    let scale = u.iter().fold(T::zero(), |m, v| m.max(v.abs()));
    for (i, &x) in xs.iter().enumerate() {
        if x.abs() >= T::one() + gamma + tiny {
            let bad = (0..g.nt).map(|j| u[g.idx(i, j)].abs()).fold(T::zero(), T::max);
            if bad > T::lit(1e-14) * scale {
                return Err(Error::Support(format!("|u| = {bad} at x = {x}, outside |x| < 1 + {gamma}")));
            }
        }
    }
    // Trace by linear interpolation between neighbouring nodes.
    let trace_at = |x0: T| -> T {
        let p = (x0 + spec.period_x) / hx;
        let i0 = p.floor().to_usize().unwrap_or(0) % g.nx;
        let w = p - p.floor();
        let i1 = (i0 + 1) % g.nx;
        (0..g.nt)
            .map(|j| {
                let v = (T::one() - w) * u[g.idx(i0, j)] + w * u[g.idx(i1, j)];
                v * v * ht
            })
            .sum()
    };
    let traces = [trace_at(-T::one()), trace_at(T::one())];
    // Cell energies of forward differences, split by how much of each cell
    // lies inside the strips.
    let mut strip = [T::zero(), T::zero()];
    let mut total = T::zero();
    let overlap = |a: T, b: T, lo: T, hi: T| ((b.min(hi) - a.max(lo)) / (b - a)).max(T::zero());
    for i in 0..g.nx {
        let ip = (i + 1) % g.nx;
        let (a, b) = (xs[i], xs[i] + hx);
        let e: T = (0..g.nt)
            .map(|j| {
                let d = (u[g.idx(ip, j)] - u[g.idx(i, j)]) / hx;
                d * d * hx * ht
            })
            .sum();
        total = total + e;
        strip[1] = strip[1] + e * overlap(a, b, T::one(), T::one() + gamma);
        strip[0] = strip[0] + e * overlap(a, b, -T::one() - gamma, -T::one());
    }
    let bound = gamma * total;
    let ratio = |k: usize| if strip[k] > T::zero() { traces[k] / (gamma * strip[k]) } else { T::zero() };
    let constant = ratio(0).max(ratio(1));
    let passed =
        traces.iter().all(|&tr| tr <= bound * T::lit(1.0 + TRACE_SLACK)) && constant <= T::lit(1.0 + TRACE_SLACK);
    Ok(TraceReport { gamma, traces, strip_energy: strip, dx_energy: total, bound, constant, passed })
}
