//! Local discontinuous Galerkin solvers for singularly perturbed
//! convection-diffusion problems on layer-adapted meshes.

pub mod analysis;
pub mod basis;
pub mod error;
pub mod ldg1d;
pub mod ldg2d;
pub mod linalg;
pub mod mesh;
pub mod problem;
pub mod ritz;
pub mod projection;
pub mod space;
pub mod study;
pub mod timestep;

pub use error::{LdgError, Result};
pub use mesh::{MeshKind, MeshSpec};
