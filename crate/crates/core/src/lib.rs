//! Biharmonic heat kernel evaluation, biheat and sphere-valued biharmonic map
//! heat flow solvers, and pre-entropy monotonicity experiments.

pub mod entropy;
pub mod error;
pub mod flow;
pub mod io;
pub mod kernel;
pub mod numerics;

pub use error::{Error, Result};
