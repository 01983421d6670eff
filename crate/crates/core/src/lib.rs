//! Wasserstein spatial depth for distribution-valued data.
//!
//! A population of empirical distributions ([`Cloud`]s) is ranked from the
//! center outward by transporting each query onto every member, normalizing
//! the displacement fields to unit length in `L2(query)` and measuring how
//! much of their average survives.
//!
//! - [`ot`]: exact transport plans, distances and barycentric maps.
//! - [`analytic`]: closed forms for Gaussian and the simulated parametric families.
//! - [`depth`]: the empirical depth and competitor depths.
//! - [`sim`]: seeded two-stage samplers and experiment harnesses.

pub mod analytic;
pub mod cloud;
pub mod depth;
pub mod error;
pub mod numeric;
pub mod ot;
pub mod sim;

pub use cloud::Cloud;
pub use error::{Error, Result};
pub use ot::{barycentric_map, solve_ot, w2, w2_matrix, Coupling, DistanceMatrix, TransportMap};
