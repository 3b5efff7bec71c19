//! High-order virtual element discretizations of convection-diffusion
//! eigenvalue problems on polygonal meshes of the unit square.

pub mod assembly;
pub mod eigensolve;
pub mod error;
pub mod geometry;
pub mod linalg;
pub mod mesh;
pub mod polybasis;
pub mod projection;
pub mod quadrature;
pub mod study;

pub use error::{Error, Result};
pub use geometry::Point2;
pub use mesh::{generate_mesh, MeshFamily, MeshKind, PolygonMesh};
pub use assembly::{ProblemSpec, Scheme};
pub use study::{Case, StudyConfig};
