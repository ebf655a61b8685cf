//! Light-cone Eisenstein series for the quadratic forms Q_{n,d}.

pub mod arith;
pub mod counting;
pub mod eisenstein;
pub mod error;
pub mod expsums;
pub mod lfunc;
pub mod localzeta;

pub use error::{Error, Result};
pub use num_complex::Complex64;
