//! Sparse linear algebra and iterative solvers.

pub mod amg;
pub mod dense;
pub mod gmres;
pub mod sparse;
pub mod tree;

pub use amg::{AmgHierarchy, AmgOptions};
pub use dense::DenseLu;
pub use gmres::{
    gmres, project_nullspace, remove_mean, GmresOptions, Identity, LinearOperator, Preconditioner, SolveReport,
};
pub use sparse::{axpy, dot, norm2, CsrMatrix, Triplets};
pub use tree::{
    BlockPc, BlockStats, BlockSystem, FluidPc, KspNode, KspType, OuterPc, SchurApprox, SolverTree, TreeReport,
    TreeSolver,
};
