use super::{check_cutoff, sample_field, sigma0_member, threshold_w, SingularSolution, TimeProfile};
use crate::error::{Error, Result};
use crate::mellin::StripGrid;
use crate::profile::CoefficientProfile;
use crate::quadrature::Cutoff;
use crate::shooting::eigenfunction;
use crate::spectrum::SpectrumReport;

/// `u = g_j(x) exp(-λ t^{1-m}) η(t) χ_{t>0}` with `λ = √w_j/(m-1)`, which
/// solves `(-∂x² - α² (t^m∂ₜ)² + β) u = 0` where `η ≡ 1`.
pub fn higher_order_singular(
    profile: &CoefficientProfile<f64>,
    report: &SpectrumReport<f64>,
    m: u32,
    j: usize,
    cutoff: Cutoff,
    grid: StripGrid<f64>,
) -> Result<SingularSolution> {
    if m < 2 {
        return Err(Error::Parameter { name: "m", reason: format!("exponential solutions need m ≥ 2, got {m}") });
    }
    check_cutoff(&cutoff)?;
    let w = sigma0_member(report, threshold_w(report, j)?);
    if w <= 0.0 {
        return Err(Error::Parameter {
            name: "w",
            reason: format!("w_{j} = {w} ≤ 0 admits no λ with positive real part"),
        });
    }
    let lambda = w.sqrt() / (m as f64 - 1.0);
    let eigen = eigenfunction(profile, w)?;
    let time = TimeProfile::Exponential { lambda, m };
    let field = sample_field(grid, &eigen, time, cutoff);
    Ok(SingularSolution { j, w, gamma: f64::NAN, m, time, eigen, cutoff, field })
}

/// One-sided derivatives at `0⁺` of `exp(-λ t^{1-m})`, scaled by `max|g|`.
#[derive(Debug, Clone, PartialEq)]
pub struct DerivativeLadder {
    /// `sup_{0 < t ≤ t_max} |∂ₜᵏ u|` from the exact recursion, `k = 0..=order`.
    pub exact_sup: Vec<f64>,
    /// Forward-difference estimates `Δᵏ u(0)/hᵏ`.
    pub fd_estimate: Vec<f64>,
    pub t_max: f64,
    pub fd_step: f64,
}

/// `∂ₜᵏ exp(-λ s^{m-1}) = exp(-λ s^{m-1}) Q_k(s)`, `s = 1/t`, with
/// `Q_{k+1} = λ(m-1) s^m Q_k - s² Q_k'`.
fn ladder_polys(lambda: f64, m: u32, order: usize) -> Vec<Vec<f64>> {
    let mut polys = vec![vec![1.0]];
    let c = lambda * (m as f64 - 1.0);
    for _ in 0..order {
        let q = polys.last().expect("nonempty");
        let mut next = vec![0.0; q.len() + m as usize + 1];
        for (p, &a) in q.iter().enumerate() {
            next[p + m as usize] += c * a;
            if p > 0 {
                next[p + 1] -= p as f64 * a;
            }
        }
        polys.push(next);
    }
    polys
}

pub fn derivative_ladder(sol: &SingularSolution, order: usize, t_max: f64) -> Result<DerivativeLadder> {
    let (lambda, m) = match sol.time {
        TimeProfile::Exponential { lambda, m } => (lambda, m),
        TimeProfile::Power { .. } => {
            return Err(Error::Parameter { name: "solution", reason: "derivative ladder needs m ≥ 2".into() })
        }
    };
    let gmax = sol.eigen.g.iter().fold(0.0f64, |a, g| a.max(g.abs()));
    let polys = ladder_polys(lambda, m, order);
    let ts: Vec<f64> = (0..=400).map(|i| t_max * 10f64.powf(-6.0 * i as f64 / 400.0)).collect();
    let exact_sup = polys
        .iter()
        .map(|q| {
            ts.iter()
                .map(|&t| {
                    let s = 1.0 / t;
                    let qv = q.iter().rev().fold(0.0, |acc, &c| acc * s + c);
                    if qv == 0.0 {
                        return 0.0;
                    }
                    (qv.abs().ln() - lambda * s.powi(m as i32 - 1)).exp()
                })
                .fold(0.0, f64::max)
                * gmax
        })
        .collect();
    let h = t_max / (order.max(1) as f64);
    let f = |t: f64| if t <= 0.0 { 0.0 } else { sol.time.eval(t) };
    let fd_estimate = (0..=order)
        .map(|k| {
            let mut binom = 1.0;
            let mut acc = 0.0;
            for i in 0..=k {
                let sign = if (k - i) % 2 == 0 { 1.0 } else { -1.0 };
                acc += sign * binom * f(i as f64 * h);
                binom = binom * (k - i) as f64 / (i + 1) as f64;
            }
            (acc / h.powi(k as i32)).abs() * gmax
        })
        .collect();
    Ok(DerivativeLadder { exact_sup, fd_estimate, t_max, fd_step: h })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::singular::residual_check;
    use crate::spectrum::compute_sigma;
    use std::f64::consts::PI;

    #[test]
    fn ladder_polynomials_match_finite_differences() {
        let (lambda, m) = (0.7, 3);
        let polys = ladder_polys(lambda, m, 3);
        let f = |t: f64| (-lambda * t.powi(1 - m as i32)).exp();
        let t = 0.9;
        let s = 1.0 / t;
        let h = 1e-3;
        let d2 = (f(t + h) - 2.0 * f(t) + f(t - h)) / (h * h);
        let q2 = polys[2].iter().rev().fold(0.0, |a, &c| a * s + c);
        assert!((d2 - f(t) * q2).abs() < 1e-5 * d2.abs());
    }

    #[test]
    fn lambda_values_and_smoothness() {
        let p = CoefficientProfile::constant(1.0, 0.0).unwrap();
        let r = compute_sigma(&[PI * PI / 4.0, PI * PI]).unwrap();
        let g = StripGrid::<f64>::new(129, -8.0, 3.0, 512).unwrap();
        let s2 = higher_order_singular(&p, &r, 2, 0, Cutoff::default(), g).unwrap();
        match s2.time {
            TimeProfile::Exponential { lambda, .. } => assert!((lambda - std::f64::consts::FRAC_PI_2).abs() < 1e-8),
            _ => unreachable!(),
        }
        let s3 = higher_order_singular(&p, &r, 3, 0, Cutoff::default(), g).unwrap();
        match s3.time {
            TimeProfile::Exponential { lambda, .. } => assert!((lambda - PI / 4.0).abs() < 1e-8),
            _ => unreachable!(),
        }
        for s in [&s2, &s3] {
            let lad = derivative_ladder(s, 6, 0.01).unwrap();
            assert!(lad.exact_sup.iter().all(|&v| v <= 1e-10), "{lad:?}");
            assert!(lad.fd_estimate.iter().all(|&v| v <= 1e-10));
            let res = residual_check(s, &p);
            assert!(res.plateau_max <= 1e-8, "{res:?}");
            assert!(res.identity_error <= 1e-8, "{res:?}");
        }
    }

    #[test]
    fn nonpositive_w_is_refused() {
        let p = CoefficientProfile::constant(1.0, 0.0).unwrap();
        let r = compute_sigma(&[-0.1, 2.0]).unwrap();
        let g = StripGrid::<f64>::new(129, -8.0, 3.0, 512).unwrap();
        let e = higher_order_singular(&p, &r, 2, 0, Cutoff::default(), g).unwrap_err();
        assert!(matches!(e, Error::Parameter { name: "w", .. }));
    }
}
