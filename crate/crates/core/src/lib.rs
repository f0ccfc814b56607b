//! Numerical toolkit for analytic discs attached to totally real edges,
//! Kobayashi metric estimates on model domains, and boundary regularity
//! measurements for proper holomorphic maps.

pub mod bishop;
pub mod circle;
pub mod distance;
pub mod domains;
pub mod error;
pub mod exec;
pub mod jet;
pub mod kobayashi;
pub mod linalg;
pub mod maps;
pub mod regularity;
pub mod wedge;

pub use error::{Error, Result};
pub use exec::Exec;

/// Crate version, echoed into run manifests.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
