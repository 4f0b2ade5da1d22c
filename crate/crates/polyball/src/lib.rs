//! Numerical toolkit for free k-pluriharmonic functions on noncommutative polyballs.

pub mod berezin;
pub mod error;
pub mod fock;
pub mod linalg;
pub mod naimark;
pub mod pluriharm;
pub mod samples;
pub mod toeplitz;
pub mod words;

pub use error::{Error, Result};
