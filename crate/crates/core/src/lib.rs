//! Conformal mapping of a channel section under a rectangular dam, built on
//! Weierstrass elliptic functions.
//!
//! The region is a horizontal strip with a rectangular notch (the dam) cut
//! into its upper edge. The map from a period rectangle onto the region is
//! assembled from the entire sigma function, evaluated from its Taylor table;
//! the four mapping parameters come from a nonlinear system solved by Newton
//! iteration with analytic Jacobian. The `δ → 0` limit (dam width shrinking
//! to a slit) is handled by closed-form degenerate counterparts, and the
//! `flow` module traces seepage streamlines through a second elliptic
//! parametrization of the complex potential.

pub mod curve;
pub mod degenerate;
pub mod error;
pub mod flow;
pub mod lattice;
pub mod mapping;
pub mod quad;
pub mod region;
pub mod sigma;

pub use error::{Error, Result};
pub use sigma::{Invariants, SeriesTable, SigmaJet};
