//! Extension of a coefficient profile to a degenerate operator
//! `-∂x² - ∂t A ∂t + b` on the torus `[-Px, Px) × [-Pt, Pt)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::profile::CoefficientProfile;
use crate::quadrature::smooth_transition;
use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Variant {
    /// `b ≡ 1`, so `<Lu, u> ≥ |u|²`.
    Invertible,
    /// `b ≡ 0`; constants span the kernel.
    Diffusion,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TorusGrid {
    pub nx: usize,
    pub nt: usize,
}

impl TorusGrid {
    pub fn new(nx: usize, nt: usize) -> Self {
        Self { nx, nt }
    }

    pub fn len(&self) -> usize {
        self.nx * self.nt
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Flat index, `t` fastest.
    #[inline]
    pub fn idx(&self, i: usize, j: usize) -> usize {
        i * self.nt + j
    }
}

/// The squared degenerate coefficient `A = a²`.
#[derive(Debug, Clone, PartialEq)]
pub enum AField<T> {
    /// `μ(x)² sin²(πt/2Pt)(2Pt/π)² + ψ(x)²`.
    Degenerate { profile: CoefficientProfile<T>, natural_extension: bool },
    /// Uniformly elliptic control, `A ≡ const`.
    Constant(T),
}

#[derive(Debug, Clone, PartialEq)]
pub struct TorusOperatorSpec<T> {
    pub period_x: T,
    pub period_t: T,
    pub grid: TorusGrid,
    pub variant: Variant,
    pub afield: AField<T>,
}

/// Minimum number of x-nodes on the degenerate segment `|x| ≤ 1`.
pub const MIN_NODES_ON_J: usize = 8;

fn check_common<T: Real>(period_x: T, period_t: T, grid: TorusGrid) -> Result<()> {
    if !(period_t > T::zero()) {
        return Err(Error::Parameter { name: "period_t", reason: format!("must be positive, got {period_t}") });
    }
    if grid.nx < 16 || grid.nt < 16 {
        return Err(Error::Resolution(format!("grid {}x{} below the 16-node minimum", grid.nx, grid.nt)));
    }
    if !grid.nt.is_multiple_of(2) {
        return Err(Error::Parameter { name: "nt", reason: "must be even so that t = 0 is a node".into() });
    }
    if !(period_x > T::zero()) {
        return Err(Error::Parameter { name: "period_x", reason: format!("must be positive, got {period_x}") });
    }
    Ok(())
}

/// Builds the canonical torus operator from a profile.
pub fn extend_to_torus<T: Real>(
    profile: &CoefficientProfile<T>,
    period_x: T,
    period_t: T,
    grid: TorusGrid,
    variant: Variant,
) -> Result<TorusOperatorSpec<T>> {
    check_common(period_x, period_t, grid)?;
    if !(period_x > T::one()) {
        return Err(Error::Parameter {
            name: "period_x",
            reason: format!("must exceed 1 so the strip around J embeds, got {period_x}"),
        });
    }
    let spec = TorusOperatorSpec {
        period_x,
        period_t,
        grid,
        variant,
        afield: AField::Degenerate { profile: profile.clone(), natural_extension: false },
    };
    let on_j = spec.x_nodes().iter().filter(|x| x.abs() <= T::one()).count();
    if on_j < MIN_NODES_ON_J {
        return Err(Error::Resolution(format!("only {on_j} x-nodes on |x| <= 1, need at least {MIN_NODES_ON_J}")));
    }
    // Use the closed-form extension of alpha where it stays away from zero on
    // the blending region, otherwise clamp.
    let natural = profile.alpha.extends_naturally() && {
        let n = 2001;
        let reach = T::one() + spec.blend_width();
        (0..n).all(|k| {
            let x = reach * T::lit(-1.0 + 2.0 * k as f64 / (n - 1) as f64);
            let a = profile.alpha(x);
            a.is_finite() && a.abs() > T::lit(1e-3)
        })
    };
    Ok(TorusOperatorSpec {
        afield: AField::Degenerate { profile: profile.clone(), natural_extension: natural },
        ..spec
    })
}

impl<T: Real> TorusOperatorSpec<T> {
    /// Uniformly elliptic comparison operator with `A ≡ a0`.
    pub fn elliptic(period_x: T, period_t: T, grid: TorusGrid, a0: T, variant: Variant) -> Result<Self> {
        check_common(period_x, period_t, grid)?;
        if !(a0 > T::zero()) {
            return Err(Error::Parameter { name: "a0", reason: "must be positive".into() });
        }
        Ok(Self { period_x, period_t, grid, variant, afield: AField::Constant(a0) })
    }

    pub fn with_grid(&self, grid: TorusGrid) -> Result<Self> {
        check_common(self.period_x, self.period_t, grid)?;
        Ok(Self { grid, ..self.clone() })
    }

    pub fn hx(&self) -> T {
        T::lit(2.0) * self.period_x / T::from_usize_lossy(self.grid.nx)
    }

    pub fn ht(&self) -> T {
        T::lit(2.0) * self.period_t / T::from_usize_lossy(self.grid.nt)
    }

    pub fn x_nodes(&self) -> Vec<T> {
        let h = self.hx();
        (0..self.grid.nx).map(|i| -self.period_x + h * T::from_usize_lossy(i)).collect()
    }

    pub fn t_nodes(&self) -> Vec<T> {
        let h = self.ht();
        (0..self.grid.nt).map(|j| -self.period_t + h * T::from_usize_lossy(j)).collect()
    }

    pub fn area(&self) -> T {
        T::lit(4.0) * self.period_x * self.period_t
    }

    pub fn b(&self) -> T {
        match self.variant {
            Variant::Invertible => T::one(),
            Variant::Diffusion => T::zero(),
        }
    }

    fn blend_width(&self) -> T {
        ((self.period_x - T::one()) / T::lit(2.0)).min(T::lit(0.5))
    }

    fn wrap_x(&self, x: T) -> T {
        let p = T::lit(2.0) * self.period_x;
        let y = (x + self.period_x) % p;
        let y = if y < T::zero() { y + p } else { y };
        y - self.period_x
    }

    /// Bump vanishing on `|x| ≤ 1`, positive elsewhere on the circle.
    pub fn psi(&self, x: T) -> T {
        let x = self.wrap_x(x);
        smooth_transition((x.abs() - T::one()) / self.blend_width())
    }

    /// Positive periodic extension of `alpha²`.
    pub fn mu_sq(&self, x: T) -> T {
        let AField::Degenerate { profile, natural_extension } = &self.afield else {
            return T::one();
        };
        let x = self.wrap_x(x);
        let xa = if *natural_extension { x } else { x.max(-T::one()).min(T::one()) };
        let a = profile.alpha(xa);
        let chi = T::one() - smooth_transition((x.abs() - T::one() - self.blend_width()) / self.blend_width());
        chi * a * a + (T::one() - chi)
    }

    /// `A(x, t)`.
    pub fn a_field(&self, x: T, t: T) -> T {
        match &self.afield {
            AField::Constant(a0) => *a0,
            AField::Degenerate { .. } => {
                let two_pt = T::lit(2.0) * self.period_t;
                let s = (T::PI() * t / two_pt).sin() * two_pt / T::PI();
                let psi = self.psi(x);
                self.mu_sq(x) * s * s + psi * psi
            }
        }
    }

    /// `b(x, t)`.
    pub fn b_field(&self, _x: T, _t: T) -> T {
        self.b()
    }

    /// Whether a node lies on the degenerate segment `J`.
    pub fn on_degenerate_set(&self, x: T, t: T) -> bool {
        matches!(self.afield, AField::Degenerate { .. }) && x.abs() <= T::one() && t == T::zero()
    }

    /// The model profile seen at `t = 0`: `alpha` of the extension and
    /// `beta = b`.
    pub fn model_profile(&self) -> Option<Result<CoefficientProfile<T>>> {
        match &self.afield {
            AField::Degenerate { profile, .. } => Some(profile.with_constant_beta(self.b().as_f64())),
            AField::Constant(_) => None,
        }
    }
}
