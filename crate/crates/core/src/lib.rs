//! Numerical verification engine for the extrinsic geometry of parametrized
//! submanifolds of `S^n(c) x R`.
//!
//! The crate evaluates chart-parametrized immersions with exact second-order
//! jets, assembles frames, shape operators, and mean curvature at sample
//! points, and checks curvature identities, biharmonicity conditions, and
//! scalar bounds as numerical residuals with finite-difference refinement.

pub mod ambient;
pub mod biharmonic;
pub mod bounds;
pub mod catalog;
pub mod error;
pub mod exprdsl;
pub mod extrinsic;
pub mod fd;
pub mod identities;
pub mod immersion;
pub mod sample;

pub use error::{Error, Result};

/// Engine version reported in machine-readable output.
pub fn version() -> &'static str {
    env!("CARGO_PKG_VERSION")
}
