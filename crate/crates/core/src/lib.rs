//! Discrete exterior calculus on simplicial complexes and the raising-steps
//! solver for the Hodge–Laplace equation `Δu = ω`.

pub mod complex;
pub mod cover;
pub mod csv;
pub mod dec;
pub mod error;
pub mod harmonic;
pub mod linalg;
pub mod par;
pub mod solver;
pub mod sparse;

pub use complex::{
    generate_annulus, generate_disk, generate_torus, icosahedron, load_mesh, load_mesh_file,
    riemannian_double, DomainEmbedding, MeshFormat, SimplicialComplex,
};
pub use cover::{build_cover, commutator, partition_of_unity, Cover};
pub use dec::{Cochain, MetricStar, Operators};
pub use error::{Error, Result};
pub use harmonic::{harmonic_basis, HarmonicBasis};
pub use par::Execution;
pub use solver::{RaisingStepsReport, Solver, SolverConfig};
