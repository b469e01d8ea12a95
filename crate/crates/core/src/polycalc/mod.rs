//! Polynomial calculus on cells and edges.

pub mod basis;
pub mod diffop;
pub mod edge;
pub mod holy;
pub mod monomial;
pub mod quadrature;

pub use basis::{block_diag, stack, CellSpace};
pub use diffop::{DiffOp, FieldKind};
pub use edge::{legendre, EdgeSpace};
pub use holy::{choly_basis, choly_dim, holy_dim, HolyCholySplit};
pub use monomial::{exponents, monomial_index, poly_dim, MonomialSpace};
pub use quadrature::{gauss_legendre, polygon_rule, triangle_rule, EdgeRule, QuadRule};
