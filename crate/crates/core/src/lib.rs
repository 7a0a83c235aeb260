//! Numerics for degenerate elliptic operators of the form
//! `-∂x² - α(x)² (t∂t)² + β(x)` near the hyperplane `t = 0`.

// `!(x > 0.0)` is the idiom used to reject NaN along with nonpositive values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod algebra;
pub mod error;
pub mod io;
pub mod mellin;
pub mod profile;
pub mod quadrature;
pub mod scalar;
pub mod shooting;
pub mod singular;
pub mod special;
pub mod spectrum;
pub mod torus;
pub mod torus_spec;
pub mod tridiag;

pub use error::{Error, Result};
pub use scalar::{Cplx, Real};

/// Double-precision aliases.
pub type Profile = profile::CoefficientProfile<f64>;
pub type TorusSpec = torus_spec::TorusOperatorSpec<f64>;
