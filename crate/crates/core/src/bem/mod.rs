//! Boundary element machinery on single polygonal elements.

pub mod kernels;
pub mod operator;

pub use kernels::{fundamental_solution, Panel};
pub use operator::{element_bem, BemLayout, BemOperator, BemSettings, ElementBem};
