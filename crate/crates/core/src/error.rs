//! Error type shared by all numerical modules.

use thiserror::Error;

/// Errors produced by quadrature, measure construction, and analysis routines.
#[derive(Debug, Error)]
pub enum Error {
    /// Node-doubling stopped at the order cap without two estimates agreeing.
    #[error("quadrature did not converge: last delta {delta:.3e} > tol {tol:.3e} at order {order}; the integrand may be singular on the support")]
    QuadratureNonConvergence { delta: f64, tol: f64, order: usize },

    /// Trapezoidal contour sums failed to stabilise while doubling the point count.
    #[error("contour integral did not converge on circle of radius {radius:.6e}: last delta {delta:.3e} > tol {tol:.3e}; a singularity may lie near the contour")]
    ContourNonConvergence { radius: f64, delta: f64, tol: f64 },

    /// A denominator factor vanishes on the integration range.
    #[error("pole on the support: {0}")]
    PoleOnSupport(String),

    /// Parameters outside the admissible set of the construction.
    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    /// Closed form requested outside its domain (caller should use the companion form).
    #[error("domain error: {0}")]
    Domain(String),

    /// Two Askey-Wilson parameters coincide where the partial fraction form degenerates.
    #[error("coincident parameters: {0}")]
    CoincidentParameters(String),

    /// Time arguments violate the required ordering.
    #[error("time ordering violated: {0}")]
    TimeOrder(String),

    /// The state x cannot carry an atom at the requested time.
    #[error("not an atom state: {0}")]
    NotAtomState(String),

    /// The state lies outside the legitimate state space.
    #[error("invalid state: {0}")]
    InvalidState(String),

    /// An internal consistency check failed (dual-route disagreement, imaginary residue, ...).
    #[error("invariant violation: {0}")]
    InvariantViolation(String),

    /// Requested order is beyond the numerically stable range.
    #[error("ill-conditioned request: {0}")]
    IllConditioned(String),

    /// Finite-difference generator estimates did not settle monotonically.
    #[error("finite-difference extrapolation not converging; raw sequence {0:?}")]
    FdNotConverging(Vec<f64>),

    /// I/O while writing an output file.
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
