//! Symmetric rank-five two-qutrit states: partial-transpose spectra,
//! 1-distillability witnesses over rank-two projections, product vectors in
//! kernels and principal-minor positivity checks.

pub mod distill;
pub mod error;
pub mod format;
pub mod kernel;
pub mod linalg;
pub mod minors;
pub mod states;

pub use error::{Error, Result};
pub use linalg::{ComplexMatrix, C64};
