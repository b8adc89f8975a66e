//! Finite element building blocks.

pub mod assembly;
pub mod basis;
pub mod quadrature;
pub mod space;

pub use assembly::{
    assemble_facet_matrix, assemble_facet_vector, assemble_matrix, assemble_vector, integrate, integrate_facets,
    mass_matrix, stiffness_matrix, BilinearKernel, FnKernel, LinearKernel, PointData, Shapes, SpaceOn,
};
pub use basis::CellGeometry;
pub use quadrature::{simplex_rule, QuadratureRule};
pub use space::FunctionSpace;
