//! Stationary holomorphic discs attached to Levi non-degenerate real
//! hypersurfaces of `C^{n+1}`, and the 2-jet determination experiments built on them.

pub mod acceptance;
pub mod conormal;
pub mod disc;
pub mod error;
pub mod fixtures;
pub mod jetdet;
pub mod quadric;
pub mod scaling;
pub mod solver;

pub use disc::*;
pub use error::{Error, Result};

/// Version of this crate, recorded in run manifests.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
