//! Mixed finite element solver for regularized strain-limiting elasticity.

// `!(x > 0.0)` is used on purpose to reject NaN as well.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod diagnostics;
pub mod experiments;
pub mod fem;
pub mod io;
pub mod linalg;
pub mod material;
pub mod mesh;
pub mod problems;
pub mod solver;
pub mod tensor;

pub use material::{builtin_law, MaterialLaw, RegularizationParams};
pub use mesh::{BoundaryTag, CellKind, Mesh};
pub use tensor::SymTensor;
