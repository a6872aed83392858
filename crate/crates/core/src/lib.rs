//! Toric resolution toolkit for singular Kullback distance functions.
//!
//! Exact lattice geometry (Hermite/Smith forms, rational cones, Hilbert
//! bases), Laurent polynomial manipulation, monomial resolution bookkeeping,
//! and extraction of the learning coefficient lambda_1 together with its
//! multiplicity m_1, backed by an independent numeric quadrature check.

pub mod cone;
pub mod error;
pub mod hilbert;
pub mod lattice;
pub mod poly;
pub mod resolution;
pub mod rlct;
pub mod verify;

pub use error::{Error, Result};
pub use lattice::{IntegerMatrix, LatticeVector};
