//! Torsion-function upper bounds for the lowest magnetic Neumann eigenvalue
//! of convex planar domains.

pub mod bound;
pub mod disk;
pub mod error;
pub mod fem;
pub mod geometry;
pub mod level;
pub mod magnetic;
pub mod mesh;
pub mod quadrature;
pub mod torsion;
pub mod validation;

pub use error::{Error, Result};
pub use geometry::{DomainKind, DomainSpec};
pub use mesh::{triangulate, TriMesh};
pub use torsion::{locate_max, solve_torsion, MaxPoint, ScalarField};
