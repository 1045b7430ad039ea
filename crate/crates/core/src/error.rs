//! Error type shared by all modules.

use num_complex::Complex64;
use thiserror::Error;

#[derive(Debug, Clone, Error)]
pub enum Error {
    /// The truncated series cannot reach the requested tolerance at this argument.
    #[error("series truncation: tail bound {bound:.3e} exceeds tolerance {tol:.3e} at |z| = {abs_z:.6}")]
    Truncation { bound: f64, tol: f64, abs_z: f64 },

    /// Evaluation point is too close to a lattice point (zero of sigma).
    #[error("pole: |sigma| = {mag:.3e} below floor at z = {z}")]
    Pole { z: Complex64, mag: f64 },

    /// Invariants with non-positive discriminant have no rectangular lattice.
    #[error("degenerate lattice: discriminant {delta:.6e} <= 0")]
    DegenerateLattice { delta: f64 },

    #[error("{context}: no convergence after {iterations} iterations (best residual {best:.3e})")]
    Convergence {
        context: &'static str,
        iterations: usize,
        best: f64,
    },

    /// Argument-principle contour does not enclose exactly one simple zero.
    #[error("contour winding number {winding}, expected 1")]
    Contour { winding: i64 },

    #[error("quadrature did not converge (last correction {last:.3e})")]
    Quadrature { last: f64 },

    #[error("{what} = {value} outside {range}")]
    Range {
        what: &'static str,
        value: f64,
        range: &'static str,
    },

    #[error("root triple not normalized: x1 + x2 + x3 = {sum:.3e}")]
    Normalization { sum: f64 },

    #[error("invalid domain: {reason}")]
    Domain { reason: String },

    /// A logarithm argument landed exactly on the branch cut.
    #[error("branch cut hit: log argument {value}")]
    Branch { value: Complex64 },

    #[error("sample point {point} leaves the region by {excursion:.3e}")]
    Sampling { point: Complex64, excursion: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;
