//! Exact shadow simplex for polyhedra whose normal fans are wide.

pub mod bounding;
pub mod error;
pub mod feasibility;
pub mod geometry;
pub mod harness;
pub mod io;
pub mod numeric;
pub mod optimize;
pub mod perturbation;
pub mod pivot;
pub mod sampler;

pub use error::{Error, NumericError, Result};
pub use geometry::{Basis, Polyhedron};
pub use numeric::{Matrix, Rational, Vector};
