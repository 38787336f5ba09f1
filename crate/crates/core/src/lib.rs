//! Explicit a-priori bounds for parabolic problems with power-type boundary
//! conditions, a finite element solver for the problem and its steady state,
//! and a harness that checks the bounds numerically.

pub mod error;
pub mod estimates;
pub mod fem;
pub mod elliptic;
pub mod meshfields;
pub mod parabolic;
pub mod verify;

pub use error::{Error, Result};
