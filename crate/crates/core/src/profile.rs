//! Coefficient profiles `(alpha, beta, m)` on `[-1, 1]`.
//!
//! `alpha` is the first t-derivative of the degenerate coefficient on the
//! segment, `beta` the zeroth-order coefficient there, and `m` the vanishing
//! order of `a` in `t`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Dense sample count for the nonvanishing check.
pub const VALIDATION_SAMPLES: usize = 4097;
/// Minimum node count of a tabulated coefficient.
pub const MIN_TABLE_NODES: usize = 257;

/// Parameters of a profile, independent of the scalar type.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ProfileDescriptor {
    Constant {
        alpha: f64,
        beta: f64,
    },
    /// Ascending monomial coefficients.
    Polynomial {
        alpha: Vec<f64>,
        beta: Vec<f64>,
    },
    /// Values on a uniform grid covering `[-1, 1]` (endpoints included).
    Tabulated {
        alpha: Vec<f64>,
        beta: Vec<f64>,
    },
}

impl ProfileDescriptor {
    pub fn tag(&self) -> &'static str {
        match self {
            Self::Constant { .. } => "constant",
            Self::Polynomial { .. } => "polynomial",
            Self::Tabulated { .. } => "tabulated",
        }
    }
}

/// Cubic spline through uniformly spaced samples on `[-1, 1]`. The end second
/// derivatives are extrapolated linearly from the interior, which keeps the
/// interpolation error fourth order up to the boundary.
#[derive(Debug, Clone, PartialEq)]
pub struct UniformSpline<T> {
    values: Vec<T>,
    second: Vec<T>,
    h: T,
}

impl<T: Real> UniformSpline<T> {
    pub fn new(values: Vec<T>) -> Self {
        let n = values.len();
        let h = T::lit(2.0) / T::from_usize_lossy(n - 1);
        let mut second = vec![T::zero(); n];
        if n > 3 {
            let m = n - 2;
            let six_over_h2 = T::lit(6.0) / (h * h);
            let diag = |i: usize| if i == 0 || i == m - 1 { T::lit(6.0) } else { T::lit(4.0) };
            let lower = |i: usize| if i == m - 1 { T::zero() } else { T::one() };
            let upper = |i: usize| if i == 0 { T::zero() } else { T::one() };
            let mut c = vec![T::zero(); m];
            let mut d = vec![T::zero(); m];
            for i in 0..m {
                let rhs = six_over_h2 * (values[i] - T::lit(2.0) * values[i + 1] + values[i + 2]);
                if i == 0 {
                    c[0] = upper(0) / diag(0);
                    d[0] = rhs / diag(0);
                } else {
                    let denom = diag(i) - lower(i) * c[i - 1];
                    c[i] = upper(i) / denom;
                    d[i] = (rhs - lower(i) * d[i - 1]) / denom;
                }
            }
            second[m] = d[m - 1];
            for i in (0..m - 1).rev() {
                second[i + 1] = d[i] - c[i] * second[i + 2];
            }
            second[0] = T::lit(2.0) * second[1] - second[2];
            second[n - 1] = T::lit(2.0) * second[n - 2] - second[n - 3];
        }
        Self { values, second, h }
    }

    /// Evaluates the spline; arguments outside `[-1, 1]` are clamped.
    pub fn eval(&self, x: T) -> T {
        let n = self.values.len();
        let x = x.max(-T::one()).min(T::one());
        let pos = (x + T::one()) / self.h;
        let mut i = pos.floor().to_usize().unwrap_or(0);
        if i >= n - 1 {
            i = n - 2;
        }
        let a = T::from_usize_lossy(i + 1) - pos;
        let b = T::one() - a;
        let h2 = self.h * self.h / T::lit(6.0);
        a * self.values[i]
            + b * self.values[i + 1]
            + ((a * a * a - a) * self.second[i] + (b * b * b - b) * self.second[i + 1]) * h2
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Coefficient<T> {
    Constant(T),
    Polynomial(Vec<T>),
    Tabulated(UniformSpline<T>),
}

impl<T: Real> Coefficient<T> {
    pub fn eval(&self, x: T) -> T {
        match self {
            Self::Constant(c) => *c,
            Self::Polynomial(p) => p.iter().rev().fold(T::zero(), |acc, &a| acc * x + a),
            Self::Tabulated(s) => s.eval(x),
        }
    }

    /// Whether evaluation outside `[-1, 1]` follows the closed form rather
    /// than clamping.
    pub fn extends_naturally(&self) -> bool {
        !matches!(self, Self::Tabulated(_))
    }
}

/// The pair `(alpha, beta)` on `[-1, 1]` with vanishing order `m`.
#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientProfile<T> {
    pub alpha: Coefficient<T>,
    pub beta: Coefficient<T>,
    pub m: u32,
    pub descriptor: ProfileDescriptor,
}

fn to_t<T: Real>(v: &[f64]) -> Vec<T> {
    v.iter().map(|&x| T::lit(x)).collect()
}

/// Builds and validates a profile. Validation is eager: a vanishing `alpha`
/// or `m < 1` is rejected here rather than at first use.
pub fn make_profile<T: Real>(descriptor: ProfileDescriptor, m: u32) -> Result<CoefficientProfile<T>> {
    if m < 1 {
        return Err(Error::Parameter { name: "m", reason: format!("vanishing order must be >= 1, got {m}") });
    }
    let (alpha, beta) = match &descriptor {
        ProfileDescriptor::Constant { alpha, beta } => {
            (Coefficient::Constant(T::lit(*alpha)), Coefficient::Constant(T::lit(*beta)))
        }
        ProfileDescriptor::Polynomial { alpha, beta } => {
            if alpha.is_empty() {
                return Err(Error::Parameter {
                    name: "alpha",
                    reason: "polynomial needs at least one coefficient".into(),
                });
            }
            let beta = if beta.is_empty() { vec![0.0] } else { beta.clone() };
            (Coefficient::Polynomial(to_t(alpha)), Coefficient::Polynomial(to_t(&beta)))
        }
        ProfileDescriptor::Tabulated { alpha, beta } => {
            for (name, v) in [("alpha", alpha), ("beta", beta)] {
                if v.len() < MIN_TABLE_NODES {
                    return Err(Error::Parameter {
                        name: if name == "alpha" { "alpha" } else { "beta" },
                        reason: format!("tabulated coefficient needs >= {MIN_TABLE_NODES} nodes, got {}", v.len()),
                    });
                }
            }
            (
                Coefficient::Tabulated(UniformSpline::new(to_t(alpha))),
                Coefficient::Tabulated(UniformSpline::new(to_t(beta))),
            )
        }
    };
    let profile = CoefficientProfile { alpha, beta, m, descriptor };
    profile.validate()?;
    Ok(profile)
}

impl<T: Real> CoefficientProfile<T> {
    /// `alpha ≡ a0`, `beta ≡ b0`, `m = 1`.
    pub fn constant(alpha: f64, beta: f64) -> Result<Self> {
        make_profile(ProfileDescriptor::Constant { alpha, beta }, 1)
    }

    pub fn with_order(mut self, m: u32) -> Result<Self> {
        if m < 1 {
            return Err(Error::Parameter { name: "m", reason: format!("vanishing order must be >= 1, got {m}") });
        }
        self.m = m;
        Ok(self)
    }

    #[inline]
    pub fn alpha(&self, x: T) -> T {
        self.alpha.eval(x)
    }

    #[inline]
    pub fn beta(&self, x: T) -> T {
        self.beta.eval(x)
    }

    /// Same `alpha`, `beta` replaced by the constant `b`.
    pub fn with_constant_beta(&self, b: f64) -> Result<Self> {
        let descriptor = match &self.descriptor {
            ProfileDescriptor::Constant { alpha, .. } => ProfileDescriptor::Constant { alpha: *alpha, beta: b },
            ProfileDescriptor::Polynomial { alpha, .. } => {
                ProfileDescriptor::Polynomial { alpha: alpha.clone(), beta: vec![b] }
            }
            ProfileDescriptor::Tabulated { alpha, beta } => {
                ProfileDescriptor::Tabulated { alpha: alpha.clone(), beta: vec![b; beta.len()] }
            }
        };
        make_profile(descriptor, self.m)
    }

    fn samples(&self) -> impl Iterator<Item = T> + '_ {
        let n = VALIDATION_SAMPLES;
        (0..n).map(move |i| T::lit(-1.0 + 2.0 * i as f64 / (n - 1) as f64))
    }

    fn validate(&self) -> Result<()> {
        let mut sign = None;
        for x in self.samples() {
            let a = self.alpha(x);
            let b = self.beta(x);
            if !a.is_finite() || !b.is_finite() {
                return Err(Error::Parameter {
                    name: "alpha/beta",
                    reason: format!("non-finite coefficient at x = {x}"),
                });
            }
            if a == T::zero() {
                return Err(Error::DegenerateProfile { x: x.as_f64() });
            }
            let s = a > T::zero();
            match sign {
                None => sign = Some(s),
                Some(prev) if prev != s => return Err(Error::DegenerateProfile { x: x.as_f64() }),
                _ => {}
            }
        }
        Ok(())
    }

    /// `(min alpha², max alpha²)` over the dense sample grid.
    pub fn alpha_sq_range(&self) -> (T, T) {
        self.samples().fold((T::infinity(), T::zero()), |(lo, hi), x| {
            let a2 = self.alpha(x) * self.alpha(x);
            (lo.min(a2), hi.max(a2))
        })
    }

    pub fn beta_range(&self) -> (T, T) {
        self.samples().fold((T::infinity(), T::neg_infinity()), |(lo, hi), x| {
            let b = self.beta(x);
            (lo.min(b), hi.max(b))
        })
    }

    /// Stable 64-bit FNV-1a fingerprint of the descriptor and order.
    pub fn fingerprint(&self) -> String {
        let text = serde_json::to_string(&(&self.descriptor, self.m)).unwrap_or_default();
        let mut h: u64 = 0xcbf2_9ce4_8422_2325;
        for b in text.bytes() {
            h ^= u64::from(b);
            h = h.wrapping_mul(0x0000_0100_0000_01b3);
        }
        format!("{h:016x}")
    }
}
