//! Generalized Gaussian volumes, weighted surface measures and Minkowski-type
//! problems for convex polytopes in dimensions 2 and 3.
//!
//! The density is g(x) = (1/Z)[1 − (q/α)|x|^α]_+^{1/q − n/α − 1}, with the
//! q = 0 member (1/Z)e^{−|x|^α/α}; α = 2, q = 0 is the standard Gaussian.

pub mod density;
pub mod error;
pub mod geometry;
pub mod inequalities;
pub mod isotropic;
pub mod ma2d;
pub mod measures;
pub mod normalized;
pub mod quadrature;
pub mod special;

pub use density::Params;
pub use error::{Error, ErrorKind, Result};
