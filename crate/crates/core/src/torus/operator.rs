//! Flux-form five-point discretization of `-∂x² - ∂t A ∂t + b` on a
//! periodic grid.

use rayon::prelude::*;

use crate::scalar::Real;
use crate::torus_spec::{TorusGrid, TorusOperatorSpec, Variant};

/// A symmetric linear map on grid functions.
pub trait LinearOp<T: Real>: Sync {
    fn len(&self) -> usize;
    fn apply(&self, x: &[T], y: &mut [T]);
    fn diagonal(&self) -> Vec<T>;

    fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Matrix-free assembled operator. Entries are stored as the stencil
/// coefficients; the matrix itself is available through [`triplets`].
///
/// [`triplets`]: DiscreteOperator::triplets
#[derive(Debug, Clone)]
pub struct DiscreteOperator<T> {
    pub grid: TorusGrid,
    pub variant: Variant,
    pub hx: T,
    pub ht: T,
    pub b: T,
    /// `A(x_i, t_{j+1/2})`, the average of the two neighbouring nodal values.
    a_half: Vec<T>,
    cx: T,
    diag: Vec<T>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyTerms<T> {
    pub dx: T,
    pub dt: T,
    pub mass: T,
}

impl<T: Real> EnergyTerms<T> {
    pub fn total(&self) -> T {
        self.dx + self.dt + self.mass
    }
}

impl<T: Real> DiscreteOperator<T> {
    pub fn assemble(spec: &TorusOperatorSpec<T>) -> Self {
        let grid = spec.grid;
        let (nx, nt) = (grid.nx, grid.nt);
        let xs = spec.x_nodes();
        let ts = spec.t_nodes();
        let nodal: Vec<T> = (0..grid.len()).into_par_iter().map(|k| spec.a_field(xs[k / nt], ts[k % nt])).collect();
        let half = T::lit(0.5);
        let mut a_half = vec![T::zero(); grid.len()];
        for i in 0..nx {
            for j in 0..nt {
                let jp = (j + 1) % nt;
                a_half[grid.idx(i, j)] = half * (nodal[grid.idx(i, j)] + nodal[grid.idx(i, jp)]);
            }
        }
        let hx = spec.hx();
        let ht = spec.ht();
        let cx = T::one() / (hx * hx);
        let ct = T::one() / (ht * ht);
        let b = spec.b();
        let mut diag = vec![T::zero(); grid.len()];
        for i in 0..nx {
            for j in 0..nt {
                let jm = (j + nt - 1) % nt;
                diag[grid.idx(i, j)] = T::lit(2.0) * cx + ct * (a_half[grid.idx(i, j)] + a_half[grid.idx(i, jm)]) + b;
            }
        }
        // store A/ht² so apply does not rescale
        for a in &mut a_half {
            *a = *a * ct;
        }
        Self { grid, variant: spec.variant, hx, ht, b, a_half, cx, diag }
    }

    /// `A` at the half node `(i, j + 1/2)`.
    pub fn a_half(&self, i: usize, j: usize) -> T {
        self.a_half[self.grid.idx(i, j)] * self.ht * self.ht
    }

    /// Quadrature weight of one grid cell.
    pub fn cell(&self) -> T {
        self.hx * self.ht
    }

    pub fn inner(&self, u: &[T], v: &[T]) -> T {
        self.cell() * dot(u, v)
    }

    pub fn norm(&self, u: &[T]) -> T {
        self.inner(u, u).sqrt()
    }

    pub fn mean(&self, u: &[T]) -> T {
        u.iter().copied().sum::<T>() / T::from_usize_lossy(u.len())
    }

    /// L² norm of `u - mean(u)`.
    pub fn mean_zero_norm(&self, u: &[T]) -> T {
        let m = self.mean(u);
        (self.cell() * u.iter().map(|&v| (v - m) * (v - m)).sum::<T>()).sqrt()
    }

    pub fn apply_vec(&self, u: &[T]) -> Vec<T> {
        let mut out = vec![T::zero(); u.len()];
        self.apply(u, &mut out);
        out
    }

    /// Gershgorin upper bound on the spectrum.
    pub fn lambda_max_bound(&self) -> T {
        self.diag.iter().map(|&d| T::lit(2.0) * d - self.b).fold(T::zero(), T::max)
    }

    /// `(row, col, value)` entries of the assembled matrix, row-major with
    /// duplicates merged (which matters when a dimension is 2).
    pub fn triplets(&self) -> Vec<(usize, usize, T)> {
        let g = self.grid;
        let mut out = Vec::with_capacity(5 * g.len());
        for i in 0..g.nx {
            let ip = (i + 1) % g.nx;
            let im = (i + g.nx - 1) % g.nx;
            for j in 0..g.nt {
                let jp = (j + 1) % g.nt;
                let jm = (j + g.nt - 1) % g.nt;
                let r = g.idx(i, j);
                let mut row = [
                    (r, self.diag[r]),
                    (g.idx(ip, j), -self.cx),
                    (g.idx(im, j), -self.cx),
                    (g.idx(i, jp), -self.a_half[r]),
                    (g.idx(i, jm), -self.a_half[g.idx(i, jm)]),
                ];
                row.sort_by_key(|e| e.0);
                let mut last: Option<(usize, T)> = None;
                for (c, v) in row {
                    match last {
                        Some((lc, lv)) if lc == c => last = Some((lc, lv + v)),
                        Some((lc, lv)) => {
                            out.push((r, lc, lv));
                            last = Some((c, v));
                        }
                        None => last = Some((c, v)),
                    }
                }
                if let Some((lc, lv)) = last {
                    out.push((r, lc, lv));
                }
            }
        }
        out
    }

    /// Largest `|M - Mᵀ|` over the assembled entries.
    pub fn symmetry_defect(&self) -> T {
        let trip = self.triplets();
        let map: std::collections::HashMap<(usize, usize), T> = trip.iter().map(|&(r, c, v)| ((r, c), v)).collect();
        trip.iter().map(|&(r, c, v)| (v - map.get(&(c, r)).copied().unwrap_or(T::zero())).abs()).fold(T::zero(), T::max)
    }

    /// The three terms of `<Lu, u>` after summation by parts.
    pub fn energy_terms(&self, u: &[T]) -> EnergyTerms<T> {
        let g = self.grid;
        let mut dx = T::zero();
        let mut dt = T::zero();
        let mut mass = T::zero();
        for i in 0..g.nx {
            let ip = (i + 1) % g.nx;
            for j in 0..g.nt {
                let jp = (j + 1) % g.nt;
                let k = g.idx(i, j);
                let ex = u[g.idx(ip, j)] - u[k];
                let et = u[g.idx(i, jp)] - u[k];
                dx = dx + self.cx * ex * ex;
                dt = dt + self.a_half[k] * et * et;
                mass = mass + self.b * u[k] * u[k];
            }
        }
        let w = self.cell();
        EnergyTerms { dx: w * dx, dt: w * dt, mass: w * mass }
    }
}

/// Grids smaller than this are applied on the calling thread.
const PAR_THRESHOLD: usize = 1 << 15;

impl<T: Real> DiscreteOperator<T> {
    fn apply_row(&self, i: usize, u: &[T], row: &mut [T]) {
        let g = self.grid;
        let nt = g.nt;
        let ip = (i + 1) % g.nx;
        let im = (i + g.nx - 1) % g.nx;
        let base = i * nt;
        for (j, o) in row.iter_mut().enumerate() {
            let jp = (j + 1) % nt;
            let jm = (j + nt - 1) % nt;
            let k = base + j;
            let c = u[k];
            // flux differences, so constants are annihilated exactly
            *o = self.cx * ((c - u[ip * nt + j]) + (c - u[im * nt + j]))
                + self.a_half[k] * (c - u[base + jp])
                + self.a_half[base + jm] * (c - u[base + jm])
                + self.b * c;
        }
    }
}

impl<T: Real> LinearOp<T> for DiscreteOperator<T> {
    fn len(&self) -> usize {
        self.grid.len()
    }

    fn apply(&self, u: &[T], out: &mut [T]) {
        let nt = self.grid.nt;
        if self.grid.len() >= PAR_THRESHOLD {
            out.par_chunks_mut(nt).enumerate().for_each(|(i, row)| self.apply_row(i, u, row));
        } else {
            out.chunks_mut(nt).enumerate().for_each(|(i, row)| self.apply_row(i, u, row));
        }
    }

    fn diagonal(&self) -> Vec<T> {
        self.diag.clone()
    }
}

/// `shift·I + scale·L`.
pub struct Shifted<'a, T, O> {
    pub op: &'a O,
    pub shift: T,
    pub scale: T,
}

impl<T: Real, O: LinearOp<T>> LinearOp<T> for Shifted<'_, T, O> {
    fn len(&self) -> usize {
        self.op.len()
    }

    fn apply(&self, x: &[T], y: &mut [T]) {
        self.op.apply(x, y);
        for (yi, &xi) in y.iter_mut().zip(x) {
            *yi = self.shift * xi + self.scale * *yi;
        }
    }

    fn diagonal(&self) -> Vec<T> {
        self.op.diagonal().into_iter().map(|d| self.shift + self.scale * d).collect()
    }
}

pub(crate) fn dot<T: Real>(a: &[T], b: &[T]) -> T {
    if a.len() >= 1 << 14 {
        a.par_chunks(4096)
            .zip(b.par_chunks(4096))
            .map(|(x, y)| x.iter().zip(y).map(|(&p, &q)| p * q).sum::<T>())
            .collect::<Vec<T>>()
            .into_iter()
            .sum()
    } else {
        a.iter().zip(b).map(|(&p, &q)| p * q).sum()
    }
}
