//! Rational quadratic differentials on the sphere and the push/pull operators.

mod rqd;
mod operators;
pub mod quad;
mod transfer;

pub use operators::*;
pub use rqd::*;
pub use transfer::*;
