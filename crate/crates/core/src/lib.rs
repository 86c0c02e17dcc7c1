//! Smooth, integrable orthogonal frame fields on planar triangle meshes.
//!
//! Frames are stored as odeco fourth-order tensors in circular-harmonics
//! coefficients (`OdecoQ`), optimized for integrability through a Lie
//! bracket energy, and integrated into seamless parametrizations.

pub mod energy;
pub mod error;
pub mod lie;
pub mod linalg;
pub mod mesh;
pub mod odeco;
pub mod param;
pub mod pipeline;
pub mod solver;
pub mod verification;

pub use error::{MeshError, OdecoError, ParamError, SolverError};
pub use lie::{LieCoeffs, QGradient};
pub use mesh::{BoundaryCurve, BoundaryEdge, Point, TriMesh};
pub use odeco::{Frame2, OdecoQ, SymTensor4};
