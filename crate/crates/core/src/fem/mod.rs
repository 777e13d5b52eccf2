//! P1 finite elements on triangulations of the unit square (or imported
//! meshes), with sparse symmetric storage and direct/iterative solvers.

pub mod assembly;
pub mod cholesky;
pub mod mesh;
pub mod pcg;
pub mod sparse;

pub use assembly::{
    apply_functional, assemble_mass, assemble_stiffness, load_vector, ritz_projection, triangulate_unit_square, DofVector, Dofs,
    FemSpace, InitialData, QuadratureField, Source,
};
pub use cholesky::{reverse_cuthill_mckee, EnvelopeCholesky, EnvelopeSymbolic};
pub use mesh::TriMesh;
pub use sparse::{Pattern, SparseSymMatrix};
