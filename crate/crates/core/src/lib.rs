//! Exact, basis-canonical projectivization of smooth complete toric fans.
//!
//! Given a smooth complete simplicial fan and an ordered lattice basis, the
//! engine extracts the primitive wall normals, adapts the fan to each normal
//! in lexicographic order by star subdivisions at sums of two-cone
//! generators, and certifies the result: either an explicit strictly convex
//! support function (ample certificate) or nonnegative wall multipliers
//! proving that none exists (Farkas certificate).
//!
//! All arithmetic is exact.

pub mod basis;
pub mod certificates;
pub mod error;
pub mod exact_arith;
pub mod fan_io;
pub mod fan_model;
pub mod pipeline;
pub mod ratlp;
pub mod registry;
pub mod sign_adapt;
pub mod wall_normals;

pub use error::{Error, Result};
pub use exact_arith::{Covector, LatticeVector, Rational};
pub use fan_model::{FVector, Fan, ValidationReport, Wall, WallRelation};
