//! Fourier transforms `ĥ(τ) = ∫ h(t) e^{-iτt} dt` of `h = T(t) η(t) χ_{t>0}`,
//! where `T` is a power `t^b` or `exp(-λ t^{1-m})` and `η` the septic cutoff.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::quadrature::{gauss_legendre, Cutoff};
use crate::special::gamma;

/// The `t`-dependence of a singular solution on `η ≡ 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TimeProfile {
    /// `t^b`, `b > -1`
    Power { b: f64 },
    /// `exp(-λ t^{1-m})`, `m ≥ 2`
    Exponential { lambda: f64, m: u32 },
}

impl TimeProfile {
    pub fn eval(&self, t: f64) -> f64 {
        if t <= 0.0 {
            return 0.0;
        }
        match *self {
            TimeProfile::Power { b } => t.powf(b),
            TimeProfile::Exponential { lambda, m } => (-lambda * t.powi(1 - m as i32)).exp(),
        }
    }

    /// Analytic continuation to `Re t > 0` (principal branch).
    pub fn eval_c(&self, t: Complex64) -> Complex64 {
        match *self {
            TimeProfile::Power { b } => t.powf(b),
            TimeProfile::Exponential { lambda, m } => (-lambda * t.powi(1 - m as i32)).exp(),
        }
    }
}

/// Below this frequency the transform is computed by direct quadrature.
pub const CONTOUR_THRESHOLD: f64 = 40.0;
const ORDER: usize = 20;

fn transition(cut: &Cutoff, t: Complex64) -> Complex64 {
    let y = (t - cut.t1) / (cut.t2 - cut.t1);
    cut.transition_poly().iter().rev().fold(Complex64::new(0.0, 0.0), |acc, &c| acc * y + c)
}

fn rule(breaks: &[f64]) -> Vec<(f64, f64)> {
    let (x, w) = gauss_legendre(ORDER);
    breaks
        .windows(2)
        .flat_map(|p| {
            let (lo, h) = (p[0], p[1] - p[0]);
            x.iter().zip(&w).map(move |(xi, wi)| (lo + 0.5 * h * (xi + 1.0), 0.5 * h * wi)).collect::<Vec<_>>()
        })
        .collect()
}

/// `∫_c^∞ F(t) e^{-iτt} dt` for `τ > 0`, along `t = c - is`:
/// `-i e^{-iτc} ∫₀^∞ F(c - is) e^{-τs} ds`.
pub fn endpoint_integral(c: f64, tau: f64, f: impl Fn(Complex64) -> Complex64) -> Complex64 {
    const BREAKS: [f64; 12] = [0.0, 0.5, 1.0, 2.0, 4.0, 8.0, 12.0, 16.0, 24.0, 32.0, 48.0, 80.0];
    let sum: Complex64 =
        rule(&BREAKS).into_iter().map(|(sigma, w)| f(Complex64::new(c, -sigma / tau)) * (w * (-sigma).exp())).sum();
    Complex64::new(0.0, -1.0) * Complex64::from_polar(1.0, -tau * c) * sum / tau
}

/// `∫₀^∞ T(t) e^{-iτt} dt` (Abel sense), `τ > 0`.
pub fn origin_transform(profile: &TimeProfile, tau: f64) -> Complex64 {
    match *profile {
        TimeProfile::Power { b } => gamma(Complex64::new(b + 1.0, 0.0)) * Complex64::new(0.0, tau).powf(-b - 1.0),
        TimeProfile::Exponential { lambda, m } => ray_integral(lambda, m, tau),
    }
}

/// Integral of `exp(-λ t^{1-m} - iτt)` along the ray `arg t = -π/(2m)`,
/// which passes through the saddle point.
pub fn ray_integral(lambda: f64, m: u32, tau: f64) -> Complex64 {
    let mf = m as f64;
    let theta = -PI / (2.0 * mf);
    let dir = Complex64::from_polar(1.0, theta);
    let saddle = (lambda * (mf - 1.0) / tau).powf(1.0 / mf);
    // geometric panels around the saddle radius
    let mut breaks = vec![0.0];
    let mut r = saddle * 2f64.powi(-30);
    while r < saddle * 2f64.powi(30) {
        breaks.push(r);
        r *= 2f64.sqrt();
    }
    // beyond the last break the integrand is below e^{-τ r sin(π/2m)}
    let tail_end = r + 80.0 / (tau * (PI / (2.0 * mf)).sin());
    breaks.push(r.max(tail_end));
    let phase = |t: Complex64| -lambda * t.powi(1 - m as i32) - Complex64::new(0.0, tau) * t;
    rule(&breaks)
        .into_iter()
        .map(|(rho, w)| {
            if rho == 0.0 {
                return Complex64::new(0.0, 0.0);
            }
            let t = dir * rho;
            phase(t).exp() * dir * w
        })
        .sum()
}

/// `ĥ(τ)` by contour rotation; valid for `τ > 0` away from zero.
pub fn transform_contour(profile: &TimeProfile, cut: &Cutoff, tau: f64) -> Complex64 {
    let main = origin_transform(profile, tau);
    let left = endpoint_integral(cut.t1, tau, |t| profile.eval_c(t) * (transition(cut, t) - 1.0));
    let right = endpoint_integral(cut.t2, tau, |t| profile.eval_c(t) * transition(cut, t));
    main + left - right
}

/// `ĥ(τ)` by composite Gauss–Legendre on `[0, t2]`, geometric toward `t = 0`.
pub fn transform_direct(profile: &TimeProfile, cut: &Cutoff, tau: f64) -> Complex64 {
    let max_width = (1.0 / (1.0 + tau.abs())).min(0.1);
    let mut breaks = Vec::new();
    let levels = 60;
    let eps = cut.t1 * 2f64.powi(-levels);
    breaks.push(eps);
    for k in (0..levels).rev() {
        let lo = cut.t1 * 2f64.powi(-(k + 1));
        let hi = cut.t1 * 2f64.powi(-k);
        let n = ((hi - lo) / max_width).ceil().max(1.0) as usize;
        for i in 1..=n {
            breaks.push(lo + (hi - lo) * i as f64 / n as f64);
        }
    }
    let n = ((cut.t2 - cut.t1) / (0.5 * max_width)).ceil().max(4.0) as usize;
    for i in 1..=n {
        breaks.push(cut.t1 + (cut.t2 - cut.t1) * i as f64 / n as f64);
    }
    let body: Complex64 = rule(&breaks)
        .into_iter()
        .map(|(t, w)| Complex64::from_polar(profile.eval(t) * cut.eval(t) * w, -tau * t))
        .sum();
    // ∫₀^ε t^b e^{-iτt} ≈ ε^{b+1}/(b+1) - iτ ε^{b+2}/(b+2)
    let head = match *profile {
        TimeProfile::Power { b } => Complex64::new(eps.powf(b + 1.0) / (b + 1.0), -tau * eps.powf(b + 2.0) / (b + 2.0)),
        TimeProfile::Exponential { .. } => Complex64::new(0.0, 0.0),
    };
    body + head
}

/// `ĥ(τ)` for any real `τ` (conjugate symmetry for `τ < 0`).
pub fn transform(profile: &TimeProfile, cut: &Cutoff, tau: f64) -> Complex64 {
    if tau < 0.0 {
        return transform(profile, cut, -tau).conj();
    }
    if tau < CONTOUR_THRESHOLD {
        transform_direct(profile, cut, tau)
    } else {
        transform_contour(profile, cut, tau)
    }
}

/// `∫ |h(t)|² dt` by direct quadrature.
pub fn l2_norm_sq(profile: &TimeProfile, cut: &Cutoff) -> f64 {
    let levels = 60;
    let mut breaks: Vec<f64> = (0..=levels).rev().map(|k| cut.t1 * 2f64.powi(-k)).collect();
    breaks.extend((1..=16).map(|i| cut.t1 + (cut.t2 - cut.t1) * i as f64 / 16.0));
    let body: f64 = rule(&breaks).into_iter().map(|(t, w)| (profile.eval(t) * cut.eval(t)).powi(2) * w).sum();
    let eps = breaks[0];
    let head = match *profile {
        TimeProfile::Power { b } => eps.powf(2.0 * b + 1.0) / (2.0 * b + 1.0),
        TimeProfile::Exponential { .. } => 0.0,
    };
    body + head
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn methods_agree_across_the_switch() {
        let cut = Cutoff::default();
        for profile in [
            TimeProfile::Power { b: 1.1484543 },
            TimeProfile::Power { b: 0.5 },
            TimeProfile::Power { b: -0.3 },
            TimeProfile::Exponential { lambda: PI / 2.0, m: 2 },
        ] {
            for tau in [25.0, 40.0, 63.0] {
                let a = transform_contour(&profile, &cut, tau);
                let b = transform_direct(&profile, &cut, tau);
                assert!((a - b).norm() <= 1e-10 * a.norm().max(1e-12), "{profile:?} τ={tau}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn zero_frequency_is_the_integral() {
        let cut = Cutoff::default();
        let p = TimeProfile::Power { b: 0.0 };
        // ∫₀^{1/2} 1 + ∫ of the transition = 1/2 + 1/4
        let v = transform(&p, &cut, 0.0);
        assert!((v.re - 0.75).abs() < 1e-12 && v.im.abs() < 1e-15);
    }

    #[test]
    fn ray_integral_matches_bessel_closed_form() {
        // ∫₀^∞ exp(-λ/t - iτt) dt = 2 √(λ/(iτ)) K₁(2√(iλτ)); compare instead
        // with direct quadrature on a rotated contour of different angle
        let (lambda, tau) = (PI / 2.0, 200.0);
        let a = ray_integral(lambda, 2, tau);
        let dir = Complex64::from_polar(1.0, -PI / 3.0);
        let breaks: Vec<f64> = (0..=400).map(|k| 1e-4 * 1.03f64.powi(k)).collect();
        let b: Complex64 = rule(&breaks)
            .into_iter()
            .map(|(r, w)| {
                let t = dir * r;
                (-lambda / t - Complex64::new(0.0, tau) * t).exp() * dir * w
            })
            .sum();
        assert!((a - b).norm() <= 1e-9 * a.norm(), "{a} vs {b}");
    }
}
