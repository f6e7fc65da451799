use thiserror::Error;

/// Errors raised by the discretization, assembly and simulation routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid domain [{start}, {end}]: need finite endpoints with start < end")]
    InvalidDomain { start: f64, end: f64 },

    #[error("a mesh needs at least one element")]
    NoElements,

    #[error("breakpoints must be finite and strictly increasing (violated at index {index})")]
    UnsortedBreakpoints { index: usize },

    #[error("breakpoints must span the domain [{start}, {end}]")]
    EndpointMismatch { start: f64, end: f64 },

    #[error("element {index} has width {width:e}, below the minimum {min:e}")]
    DegenerateElement { index: usize, width: f64, min: f64 },

    #[error("element index {index} out of range 1..={count}")]
    ElementIndex { index: usize, count: usize },

    #[error("invalid element [{a}, {b}]")]
    InvalidElement { a: f64, b: f64 },

    #[error("point {z} lies outside the element [{a}, {b}]")]
    OutsideElement { z: f64, a: f64, b: f64 },

    #[error("dissipation coefficient must be finite and nonnegative, got {0}")]
    InvalidSigma(f64),

    #[error("expected {expected} dissipation coefficients, got {got}")]
    SigmaCount { expected: usize, got: usize },

    #[error("matrix is singular or ill-conditioned (condition estimate {0:e})")]
    IllConditioned(f64),

    #[error("energy density coefficient must be finite and positive, got {0}")]
    InvalidCoefficient(f64),

    #[error("energy density evaluation produced a non-finite value")]
    NonFiniteDensity,

    #[error("quadrature order must be at least 1")]
    InvalidQuadOrder,

    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },

    #[error("implicit stage did not converge: residual {residual:e} after {iterations} iterations")]
    NoConvergence { residual: f64, iterations: usize },

    #[error("invalid scenario: {0}")]
    InvalidScenario(&'static str),
}

pub type Result<T> = core::result::Result<T, Error>;
