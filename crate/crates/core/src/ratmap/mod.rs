//! Points of the sphere, Mobius transformations and rational maps.

pub mod map;
pub mod mobius;
pub mod sphere;

pub use map::{sylvester_resultant, CriticalPoint, DynMap, Orbit, RationalMap};
pub use mobius::Mobius;
pub use sphere::{chordal64, chordal_distance, cmp_lex, Pt, SpherePoint};
