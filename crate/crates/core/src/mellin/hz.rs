use crate::error::{Error, Result};
use crate::profile::CoefficientProfile;
use crate::scalar::{Cplx, Real};
use crate::shooting::{lower_bound, ShootingGrid};
use crate::tridiag;

/// A homogeneous end value below this marks `z` as resonant.
pub const RESONANCE_END_TOL: f64 = 1e-8;
const RESONANCE_STEP: f64 = 1.0 / 1024.0;

/// `H_z = -∂x² - z(z+1) α² + β` on a uniform grid with Dirichlet ends,
/// discretized by the fourth-order compact (Numerov) scheme
/// `-δ²g/h² + B(q g) = B r`, `B = (1, 10, 1)/12`.
#[derive(Debug, Clone)]
pub struct HzOperator<T> {
    pub nx: usize,
    pub h: T,
    alpha_sq: Vec<T>,
    beta: Vec<T>,
    shooting: ShootingGrid<T>,
    /// For `Re w` below this the homogeneous problem has no solution.
    coercive_below: T,
}

#[derive(Debug, Clone)]
pub struct HzSolution<T> {
    pub g: Vec<Cplx<T>>,
    /// Relative max-norm residual of the discrete system on the interior.
    pub residual: T,
}

fn c<T: Real>(x: T) -> Cplx<T> {
    Cplx::new(x, T::zero())
}

impl<T: Real> HzOperator<T> {
    pub fn new(profile: &CoefficientProfile<T>, nx: usize) -> Result<Self> {
        if nx < 5 {
            return Err(Error::Parameter { name: "nx", reason: format!("need at least 5 nodes, got {nx}") });
        }
        let h = T::lit(2.0) / T::from_usize_lossy(nx - 1);
        let xs = (0..nx).map(|i| -T::one() + h * T::from_usize_lossy(i));
        let (alpha_sq, beta) = xs
            .map(|x| {
                let a = profile.alpha(x);
                (a * a, profile.beta(x))
            })
            .unzip();
        Ok(Self {
            nx,
            h,
            alpha_sq,
            beta,
            shooting: ShootingGrid::new(profile, T::lit(RESONANCE_STEP))?,
            coercive_below: lower_bound(profile) + T::one(),
        })
    }

    pub fn symbol(z: Cplx<T>) -> Cplx<T> {
        z * (z + T::one())
    }

    fn q(&self, i: usize, w: Cplx<T>) -> Cplx<T> {
        c(self.beta[i]) - w * self.alpha_sq[i]
    }

    /// Fails when the homogeneous Dirichlet problem at `z` is numerically
    /// solvable, i.e. `|g_w(1)|` is tiny.
    pub fn check_resonance(&self, z: Cplx<T>) -> Result<()> {
        let w = Self::symbol(z);
        if w.re < self.coercive_below {
            return Ok(());
        }
        let end = self.shooting.end_value(w)?;
        if end.norm() < T::lit(RESONANCE_END_TOL) {
            return Err(Error::ResonantFrequency { z: z.to_string(), end_value: end.norm().as_f64() });
        }
        Ok(())
    }

    /// `B r` on interior nodes.
    pub fn averaged_rhs(&self, rhs: &[Cplx<T>]) -> Vec<Cplx<T>> {
        let twelfth = T::one() / T::lit(12.0);
        (1..self.nx - 1).map(|i| (rhs[i - 1] + rhs[i] * T::lit(10.0) + rhs[i + 1]) * twelfth).collect()
    }

    /// Compact left-hand side `-δ²g/h² + B(q g)` on interior nodes.
    pub fn apply(&self, z: Cplx<T>, g: &[Cplx<T>]) -> Vec<Cplx<T>> {
        let w = Self::symbol(z);
        let ih2 = T::one() / (self.h * self.h);
        let twelfth = T::one() / T::lit(12.0);
        (1..self.nx - 1)
            .map(|i| {
                let d2 = (g[i - 1] - g[i] * T::lit(2.0) + g[i + 1]) * ih2;
                let qg =
                    (self.q(i - 1, w) * g[i - 1] + self.q(i, w) * g[i] * T::lit(10.0) + self.q(i + 1, w) * g[i + 1])
                        * twelfth;
                qg - d2
            })
            .collect()
    }

    /// Relative interior residual `‖Ag - Br‖∞ / ‖Br‖∞`.
    pub fn residual(&self, z: Cplx<T>, g: &[Cplx<T>], rhs: &[Cplx<T>]) -> T {
        let lhs = self.apply(z, g);
        let br = self.averaged_rhs(rhs);
        let num = lhs.iter().zip(&br).fold(T::zero(), |m, (a, b)| m.max((*a - *b).norm()));
        let den = br.iter().fold(T::zero(), |m, b| m.max(b.norm()));
        if den == T::zero() {
            num
        } else {
            num / den
        }
    }

    /// Solves without the resonance check; `g(±1) = 0` exactly.
    pub fn solve_unchecked(&self, z: Cplx<T>, rhs: &[Cplx<T>]) -> Result<Vec<Cplx<T>>> {
        if rhs.len() != self.nx {
            return Err(Error::Shape(format!("rhs has {} entries, grid has {}", rhs.len(), self.nx)));
        }
        let w = Self::symbol(z);
        let n = self.nx - 2;
        let ih2 = T::one() / (self.h * self.h);
        let twelfth = T::one() / T::lit(12.0);
        let mut lower = Vec::with_capacity(n);
        let mut diag = Vec::with_capacity(n);
        let mut upper = Vec::with_capacity(n);
        for i in 1..self.nx - 1 {
            lower.push(self.q(i - 1, w) * twelfth - c(ih2));
            diag.push(self.q(i, w) * (T::lit(10.0) * twelfth) + c(T::lit(2.0) * ih2));
            upper.push(self.q(i + 1, w) * twelfth - c(ih2));
        }
        let interior = tridiag::solve::<T, _>(&lower, &diag, &upper, &self.averaged_rhs(rhs))?;
        let mut g = Vec::with_capacity(self.nx);
        g.push(c(T::zero()));
        g.extend(interior);
        g.push(c(T::zero()));
        Ok(g)
    }

    pub fn solve(&self, z: Cplx<T>, rhs: &[Cplx<T>]) -> Result<HzSolution<T>> {
        self.check_resonance(z)?;
        let g = self.solve_unchecked(z, rhs)?;
        let residual = self.residual(z, &g, rhs);
        Ok(HzSolution { g, residual })
    }
}

/// One-shot solve of `H_z g = rhs`, `g(±1) = 0`, on the uniform grid implied
/// by `rhs.len()`.
pub fn solve_hz_bvp<T: Real>(profile: &CoefficientProfile<T>, z: Cplx<T>, rhs: &[Cplx<T>]) -> Result<HzSolution<T>> {
    HzOperator::new(profile, rhs.len())?.solve(z, rhs)
}
