//! Free (noncommutative) polynomial maps on tuples of complex matrices.
//!
//! The crate is organised bottom-up:
//!
//! - [`ncpoly`]: sparse free polynomials, formal derivatives, composition.
//! - [`parser`]: text syntax for polynomial maps and canonical printing.
//! - [`matrixeval`]: evaluation on matrix tuples, direct sums, similarity,
//!   block jets and seeded samplers.
//! - [`linearization`]: the derivative as an explicit matrix, singularity
//!   certificates and Sylvester equations.
//! - [`invertibility`]: collision and kernel witnesses, series and Newton
//!   inversion, and sampled nonsingularity scans.

pub mod domain;
pub mod error;
pub mod invertibility;
pub mod linalg;
pub mod linearization;
pub mod matrixeval;
pub mod ncpoly;
pub mod parser;

pub use domain::{Constraint, DomainSpec};
pub use error::{Error, ErrorCode};
pub use matrixeval::{MatrixTuple, SampleConfig};
pub use ncpoly::{BiPoly, FreePoly, FreePolyMap, Word};
pub use num_complex::Complex64;
