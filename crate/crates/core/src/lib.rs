//! Numerical toolkit for the fixed-energy scattering problem of asymptotically
//! homogeneous electric potentials and magnetic fields: a forward map from the
//! fields to the right symbol of the scattering matrix near its diagonal
//! singularity, and the recursive inverse map recovering every homogeneous
//! coefficient from that data.

pub mod cex2d;
pub mod config;
pub mod error;
pub mod fields;
pub mod geom;
pub mod gridio;
pub mod homog;
pub mod invert;
pub mod quad;
pub mod radon2d;
pub mod sharp;
pub mod special;
pub mod symbol;
pub mod xray;

pub use error::{Error, Result};
