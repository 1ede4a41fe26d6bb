//! Conformal tetrahedra in Euclidean and hyperbolic 3-space.
//!
//! A tetrahedron is *conformal* when its edge lengths split as
//! l_ij = r_i + r_j for positive vertex radii — the distance pattern of four
//! pairwise tangent balls. This crate computes the geometry of such
//! simplices and the curvature functionals built on them:
//!
//! - [`euclidean`]: realizability (Cayley-Menger), volume, embedding,
//!   dihedral and solid angles in E^3;
//! - [`hyperbolic`]: Minkowski Gram matrix, hyperboloid embedding, dihedral
//!   angles, and volume in H^3 (scaling-path integral plus a Klein-model
//!   Monte Carlo cross-check);
//! - [`functionals`]: the radii-to-lengths map i, the functionals S and R,
//!   their gradients (solid and dihedral angles) and finite-difference
//!   Hessians;
//! - [`analysis`]: eigen-analysis with rank tolerances, randomized
//!   definiteness sweeps, rank scans along radii paths, and a damped Newton
//!   solver for prescribed solid angles.
//!
//! All operations are pure functions of their inputs and safe to call
//! concurrently; randomized sweeps take explicit seeds and are reproducible
//! regardless of worker-thread count.

pub mod analysis;
pub mod error;
pub mod euclidean;
pub mod functionals;
pub mod hyperbolic;
pub mod pairs;
mod quad;
pub mod types;

pub use error::{GeometryError, InvalidInput};
pub use types::{
    DihedralAngles, EdgeLengths, Geometry, Radii, SolidAngles, SymMatrix, SymMatrix4, SymMatrix6,
};
