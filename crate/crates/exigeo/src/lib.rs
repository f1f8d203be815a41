//! exigeo: numerics for exterior isoperimetric geometry.
//!
//! The crate computes monotonicity densities and area deficits on
//! discretized exterior hypersurfaces, evaluates a mesoscale flatness
//! criterion with an empirical graphicality certificate, generates and
//! certifies the unduloid half-period family, brackets isoperimetric
//! residues of axisymmetric obstacles, and reproduces the large-volume
//! energy expansion of the exterior isoperimetric problem with constrained
//! solvers and a glued competitor construction.

pub mod error;
pub mod geometry;
pub mod linalg;
pub mod par;
pub mod quad;
pub mod residue;
pub mod solvers;
pub mod unduloid;
pub mod varifold;

pub use error::{ExigeoError, Result};
