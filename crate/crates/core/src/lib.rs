//! Coupled 3D–1D electrostatics: mixed finite elements on tetrahedra coupled to
//! P1 elements on an embedded line network.

// `!(x > 0)` also rejects NaN; index loops mirror the element formulas.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod assembly1d;
pub mod assembly3d;
pub mod cases;
pub mod coupling;
pub mod error;
pub mod field;
pub mod geometry;
pub mod graph1d;
pub mod mesh3d;
pub mod postproc;
pub mod problem;
pub mod scalar;
pub mod solver;
pub mod sparse;
pub mod spatial;

pub use error::{Error, Result};
pub use geometry::Vec3;
pub use scalar::Real;

/// Double-precision aliases of the generic types.
pub type Mesh = mesh3d::TetMesh<f64>;
pub type Network = graph1d::Network1D<f64>;
pub type Point = Vec3<f64>;
pub type Csr = sparse::CsrMatrix<f64>;
pub type CoupledProblem = problem::Problem<f64>;
pub type Case = cases::CaseDefinition<f64>;
