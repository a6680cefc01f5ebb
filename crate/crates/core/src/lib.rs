//! Numerical experiments on central values of quadratic twists of a
//! full-level Hecke eigenform: coefficient tables, quadratic characters and
//! Gauss sums, approximate-functional-equation evaluation, Euler products for
//! the second-moment constant, and family-wide moment statistics.

pub mod arith;
pub mod bump;
pub mod error;
pub mod eulerprod;
pub mod gamma;
pub mod kernel;
pub mod modform;
pub mod moments;
pub mod quadchar;
pub mod quadrature;
pub mod summation;

pub use error::{Error, Result};
