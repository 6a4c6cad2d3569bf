//! Numerical laboratory for unilateral free-discontinuity (brittle fracture)
//! problems in two dimensions with p-growth bulk energies.
//!
//! The crate is organised bottom-up:
//!
//! * [`geometry`] holds polygonal domains, polyline cracks, the Hausdorff
//!   metric, component bookkeeping and the joining/extension constructions.
//! * [`energy`] defines admissible densities `f(x, ξ)` and the Griffith
//!   functional `E(u, K) = ∫_{Ω\K} f(x, ∇u) + H¹(K)`.
//! * [`mesh`] and [`solver`] build crack-conforming triangulations and
//!   minimise the bulk energy on `Ω \ K`; [`capacity`] reuses the same
//!   machinery for discrete `(1, r)`-capacities.
//! * [`duality`] integrates the rotated flux into a conjugate potential and
//!   certifies solutions through it.
//! * [`experiments`] generates Hausdorff-converging crack sequences, runs
//!   stability studies and quasi-static unilateral evolutions.
//! * [`acceptance`] bundles the end-to-end checks run by `fraclab selftest`.

pub mod acceptance;
pub mod capacity;
pub mod duality;
pub mod energy;
mod error;
pub mod experiments;
pub mod expr;
pub mod geometry;
mod linalg;
pub mod mesh;
pub mod solver;
pub mod svg;

pub use error::{Error, Result};
pub use geometry::{BoundaryKind, Crack, Domain, Point, Segment};
