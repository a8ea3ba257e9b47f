//! Lagrange finite element spaces on structured simplicial meshes.

pub mod basis;
pub mod quadrature;
mod space;

pub use basis::{basis_eval, LagrangeBasis};
pub use quadrature::{quadrature_rule, CellType, QuadratureRule};
pub use space::{mesh_size_field, node_adjacency, CellMap, FESpace, FacetQuadrature, QuadData};
