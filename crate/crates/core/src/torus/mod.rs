//! Discrete operator on the torus: solves, spectral gap, heat flow and the
//! regularity probes.

pub mod cg;
pub mod eigen;
pub mod heat;
pub mod operator;
pub mod probe;
pub mod semigroup;
pub mod sobolev;
pub mod solve;
pub mod trace;

pub use eigen::{spectral_gap, SpectralGap};
pub use heat::{growth_scan, heat_evolve, GrowthReport, HeatOptions, HeatRun, HeatScheme};
pub use operator::{DiscreteOperator, LinearOp};
pub use probe::{regularity_probe, RegularityProbeReport};
pub use semigroup::{semigroup_inverse_check, SemigroupCheck};
pub use sobolev::SobolevNorm;
pub use solve::solve_elliptic;
pub use trace::{trace_inequality_check, TraceReport};
