//! Exact arithmetic over ℚ(√2) and the geometry of the Peres rays.
//!
//! Rays are kept as unnormalized representatives with components in
//! {0, ±1, ±√2}; every squared overlap divides by the squared norms
//! explicitly, so no square roots are ever taken.

pub mod peres;
pub mod q2;
pub mod vec3;

pub use peres::{enumerate_bases, orthogonal_pairs, peres_rays, Basis, BasisKind, Catalogue, Family};
pub use q2::Q2;
pub use vec3::{cross, dot, squared_overlap, Ray, Vec3};
