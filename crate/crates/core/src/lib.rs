//! Numerical dynamics of rational maps of the Riemann sphere.
//!
//! The crate enumerates and classifies periodic cycles, computes formal
//! invariants of parabolic cycles, implements pushforward and pullback of
//! rational quadratic differentials, estimates residues by a flux integral and
//! assembles the Fatou-Shishikura count `gamma(f) <= delta(f) <= 2D - 2`.

pub mod config;
pub mod cycles;
pub mod error;
pub mod fscount;
pub mod numkernel;
pub mod parabolic;
pub mod qd;
pub mod ratmap;
pub mod residues;

pub mod cli;

pub use config::Config;
pub use error::{Error, Result};
pub use numkernel::{Cx, GaussRat, Poly, Scalar};
pub use ratmap::{Mobius, Pt, RationalMap, SpherePoint};

/// Library version embedded in every report.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
