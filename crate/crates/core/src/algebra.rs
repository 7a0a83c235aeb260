//! Exact bivariate polynomials in `(s, τ)` with Gaussian-rational coefficients.

use std::collections::BTreeMap;
use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex;
use num_rational::Ratio;
use num_traits::{One, Zero};

pub type Coeff = Complex<Ratio<i64>>;

/// Sparse polynomial; keys are exponents `(deg_s, deg_tau)`.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Poly2 {
    terms: BTreeMap<(u32, u32), Coeff>,
}

fn rat(n: i64, d: i64) -> Ratio<i64> {
    Ratio::new(n, d)
}

impl Poly2 {
    pub fn constant(c: Coeff) -> Self {
        let mut p = Self::default();
        p.push((0, 0), c);
        p
    }

    pub fn real(n: i64, d: i64) -> Self {
        Self::constant(Complex::new(rat(n, d), Ratio::zero()))
    }

    pub fn imag_unit() -> Self {
        Self::constant(Complex::new(Ratio::zero(), Ratio::one()))
    }

    pub fn s() -> Self {
        Self::monomial(1, 0, Complex::one())
    }

    pub fn tau() -> Self {
        Self::monomial(0, 1, Complex::one())
    }

    pub fn monomial(ds: u32, dt: u32, c: Coeff) -> Self {
        let mut p = Self::default();
        p.push((ds, dt), c);
        p
    }

    fn push(&mut self, key: (u32, u32), c: Coeff) {
        let entry = self.terms.entry(key).or_insert_with(Coeff::zero);
        *entry += c;
        if entry.is_zero() {
            self.terms.remove(&key);
        }
    }

    pub fn terms(&self) -> impl Iterator<Item = (&(u32, u32), &Coeff)> {
        self.terms.iter()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn real_part(&self) -> Self {
        self.map(|c| Complex::new(c.re, Ratio::zero()))
    }

    /// Imaginary part as a polynomial with real coefficients (`s`, `τ` real).
    pub fn imag_part(&self) -> Self {
        self.map(|c| Complex::new(c.im, Ratio::zero()))
    }

    fn map(&self, f: impl Fn(Coeff) -> Coeff) -> Self {
        let mut p = Self::default();
        for (k, c) in &self.terms {
            p.push(*k, f(*c));
        }
        p
    }

    /// `p(σs·s, στ·τ)` for signs `σ ∈ {±1}`.
    pub fn reflect(&self, flip_s: bool, flip_tau: bool) -> Self {
        let mut p = Self::default();
        for (&(ds, dt), c) in &self.terms {
            let odd = (flip_s && ds % 2 == 1) ^ (flip_tau && dt % 2 == 1);
            p.push((ds, dt), if odd { -*c } else { *c });
        }
        p
    }

    pub fn eval(&self, s: f64, tau: f64) -> Complex<f64> {
        let to_f = |r: Ratio<i64>| *r.numer() as f64 / *r.denom() as f64;
        self.terms
            .iter()
            .map(|(&(ds, dt), c)| Complex::new(to_f(c.re), to_f(c.im)) * s.powi(ds as i32) * tau.powi(dt as i32))
            .sum()
    }

    /// If the polynomial is a single monomial `c s^a τ^b`, returns `(a, b)`.
    pub fn single_monomial(&self) -> Option<(u32, u32)> {
        match self.terms.len() {
            1 => self.terms.keys().next().copied(),
            _ => None,
        }
    }
}

impl Add for Poly2 {
    type Output = Poly2;
    fn add(mut self, rhs: Poly2) -> Poly2 {
        for (k, c) in rhs.terms {
            self.push(k, c);
        }
        self
    }
}

impl Neg for Poly2 {
    type Output = Poly2;
    fn neg(self) -> Poly2 {
        self.map(|c| -c)
    }
}

impl Sub for Poly2 {
    type Output = Poly2;
    fn sub(self, rhs: Poly2) -> Poly2 {
        self + (-rhs)
    }
}

impl Mul for &Poly2 {
    type Output = Poly2;
    fn mul(self, rhs: &Poly2) -> Poly2 {
        let mut p = Poly2::default();
        for (&(a1, b1), c1) in &self.terms {
            for (&(a2, b2), c2) in &rhs.terms {
                p.push((a1 + a2, b1 + b2), *c1 * *c2);
            }
        }
        p
    }
}

impl Mul for Poly2 {
    type Output = Poly2;
    fn mul(self, rhs: Poly2) -> Poly2 {
        &self * &rhs
    }
}

/// `z = s - 1/2 + iτ`.
pub fn mellin_z() -> Poly2 {
    Poly2::s() - Poly2::real(1, 2) + Poly2::imag_unit() * Poly2::tau()
}

/// `z (z + 1)`.
pub fn mellin_symbol() -> Poly2 {
    let z = mellin_z();
    &z * &(z.clone() + Poly2::real(1, 1))
}

/// Whether `Im z(z+1) = 0` with `s > 0` forces `τ = 0`: true when the
/// imaginary part is a single monomial with a positive power of `τ`.
pub fn real_line_forces_tau_zero() -> bool {
    matches!(mellin_symbol().imag_part().single_monomial(), Some((_, b)) if b > 0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn symbol_reduces_to_shifted_square() {
        let w = Poly2::s() + Poly2::imag_unit() * Poly2::tau();
        let reduced = &w * &w - Poly2::real(1, 4);
        assert_eq!(mellin_symbol(), reduced);
    }

    #[test]
    fn imaginary_part_is_two_s_tau() {
        let im = mellin_symbol().imag_part();
        assert_eq!(im, Poly2::real(2, 1) * Poly2::s() * Poly2::tau());
        assert!(real_line_forces_tau_zero());
        let re = mellin_symbol().real_part();
        let expect = Poly2::s() * Poly2::s() - Poly2::tau() * Poly2::tau() - Poly2::real(1, 4);
        assert_eq!(re, expect);
    }

    #[test]
    fn joint_reflection_leaves_symbol_invariant() {
        let p = mellin_symbol();
        assert_eq!(p.reflect(true, true), p);
        assert_ne!(p.reflect(true, false), p);
    }

    #[test]
    fn exact_and_float_evaluation_agree() {
        let p = mellin_symbol();
        for (s, t) in [(0.3, -1.2), (2.0, 0.0), (-0.7, 4.5)] {
            let z = Complex::new(s - 0.5, t);
            let direct = z * (z + 1.0);
            assert!((p.eval(s, t) - direct).norm() < 1e-12);
        }
    }
}
