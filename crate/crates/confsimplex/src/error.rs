//! Error types shared across the geometry kernels and the functionals.

use thiserror::Error;

/// Rejected constructor input (non-positive or non-finite component).
#[derive(Debug, Clone, PartialEq, Error)]
pub enum InvalidInput {
    #[error("{field} must be strictly positive, got {value}")]
    NonPositive { field: &'static str, value: f64 },
    #[error("{field} must be finite, got {value}")]
    NotFinite { field: &'static str, value: f64 },
}

/// Failure of a geometric computation on otherwise well-formed input.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum GeometryError {
    /// The lengths do not embed as a nondegenerate Euclidean tetrahedron.
    #[error(
        "degenerate simplex: Cayley-Menger determinant {det:.6e} at or below tolerance {tol:.6e}"
    )]
    DegenerateSimplex { det: f64, tol: f64 },

    /// The lengths do not embed as a hyperbolic tetrahedron (Gram signature test).
    #[error("not realizable as a hyperbolic tetrahedron: {reason}")]
    NotRealizable { reason: &'static str },

    /// Adaptive quadrature could not reach the requested tolerance.
    #[error(
        "volume quadrature stalled at depth {depth}: error estimate {error_estimate:.3e} above tolerance {tol:.3e}"
    )]
    QuadratureFailure { error_estimate: f64, tol: f64, depth: u32 },

    /// A finite-difference Hessian came back too far from symmetric.
    #[error("finite-difference Hessian asymmetry {asymmetry:.3e} exceeds {tol:.3e}")]
    NumericalInstability { asymmetry: f64, tol: f64 },
}
