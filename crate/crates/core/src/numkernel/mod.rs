//! Scalars, polynomials, truncated series and polynomial root finding.

pub mod linalg;
pub mod poly;
pub mod roots;
pub mod scalar;
pub mod series;

pub use poly::Poly;
pub use roots::{find_roots, poly_roots, FoundRoot, Root, RootSet};
pub use scalar::{float_to_decimal, Cx, GaussRat, Scalar};
pub use series::{laurent_reciprocal, LaurentSeries, TruncatedSeries};
