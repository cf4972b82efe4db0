//! Sums of three nonunit squares, representation numbers of positive ternary
//! quadratic forms, genus averages and the attached cusp forms, and sums of
//! nonzero generalized polygonal numbers.

pub mod arith;
pub mod bitset;
pub mod error;
pub mod exec;
pub mod genus;
pub mod nonunit;
pub mod polygonal;
pub mod sieve;
pub mod squares;
pub mod ternary;
pub mod verify;

pub use error::{Error, Result};
pub use exec::Execution;
pub use sieve::SieveReport;
