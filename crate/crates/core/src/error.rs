use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("degenerate profile: alpha vanishes at x = {x} (the t-derivative of a must not vanish on J)")]
    DegenerateProfile { x: f64 },

    #[error("invalid parameter `{name}`: {reason}")]
    Parameter { name: &'static str, reason: String },

    #[error("grid too coarse: {0}")]
    Resolution(String),

    #[error("non-finite values during shooting at x = {x} (w = {w})")]
    Overflow { x: f64, w: String },

    #[error("w = {w} is not an eigenvalue (|g_w(1)| = {end_value:e})")]
    NotAnEigenvalue { w: f64, end_value: f64 },

    #[error("empty sigma0: the Dirichlet spectrum is nonempty, an empty scan signals a scan bug")]
    EmptySpectrum,

    #[error("resonant frequency: |g_w(1)| = {end_value:e} for z = {z}")]
    ResonantFrequency { z: String, end_value: f64 },

    #[error("resonant exponent: s = {s} lies within {distance:e} of the exceptional value {s_j}")]
    ResonantExponent { s: f64, s_j: f64, distance: f64 },

    #[error("field does not decay at the log-t window ends (relative endpoint magnitude {ratio:e})")]
    Truncation { ratio: f64 },

    #[error("index {index} out of range (have {available})")]
    IndexOutOfRange { index: usize, available: usize },

    #[error("conjugate gradient stagnated after {iterations} iterations (relative residual {residual:e})")]
    SolverStagnation { iterations: usize, residual: f64 },

    #[error("eigensolver did not converge: {0}")]
    EigenNonConvergence(String),

    #[error("support violation: {0}")]
    Support(String),

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("format error: {0}")]
    Format(String),

    #[error("io error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
