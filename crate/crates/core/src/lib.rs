//! Mixed finite elements for the sixth-order problem `−Δ³u = f` on the unit
//! square, with simply supported (`u = Δu = Δ²u = 0`) or clamped
//! (`u = ∂u/∂n = Δu = 0`) boundary conditions.
//!
//! The unknowns are `u`, `φ = Δu`, and a Lagrange multiplier `λ = Δ²u` that
//! enforces `φ = Δu` weakly, so only `H¹`-conforming Lagrange elements are
//! needed. [`saddle::build_simply_supported`] and [`saddle::build_clamped`]
//! assemble the symmetric indefinite systems, and [`convergence::run_study`]
//! drives manufactured-solution refinement studies.

pub mod assembly;
pub mod convergence;
pub mod error;
pub mod lagrange;
pub mod manufactured;
pub mod mesh;
pub mod multiplier;
pub mod quadrature;
pub mod saddle;
pub mod solver;
pub mod sparse;

pub use error::{FemError, Result};
pub use lagrange::FeSpace;
pub use manufactured::{ExampleId, ManufacturedCase, SeparableField, Univariate};
pub use mesh::Mesh;
pub use multiplier::{BcKind, MultiplierSpace};
pub use quadrature::QuadratureRule;
pub use saddle::{BlockSystem, MixedSolution};
pub use sparse::SparseMatrix;
