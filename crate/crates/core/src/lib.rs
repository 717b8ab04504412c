//! Numerical laboratory for weighted power-series Hilbert spaces and the
//! column-row property of multiplier tuples.
//!
//! The crate is organized around a handful of objects: monomial bases
//! ([`basis`]), committee spaces and their weights ([`space`]), truncated
//! multiplication operators with Gram-metric adjoints ([`operator`]), random
//! multiplier models with closed-form expectation diagonals ([`randmult`]),
//! interpolation-node compressions ([`pick`]), and a randomized search for
//! column-row ratio violations ([`search`]).

pub mod basis;
pub mod error;
mod linalg;
pub mod operator;
pub mod pick;
pub mod randmult;
pub mod search;
pub mod space;

pub use error::{Error, Result};

/// Complex scalar used throughout.
pub type C64 = nalgebra::Complex<f64>;
