//! Vector partition functions and Ehrhart quasi-polynomials by iterated
//! partial-fraction elimination.

pub mod arith;
pub mod engine;
pub mod oracle;
pub mod error;
pub mod par;
pub mod quasipoly;
pub mod univar;

pub use error::{Error, Result};
pub use par::Parallelism;
