//! Desk-scale models of complete, algebraically closed non-archimedean
//! fields with value group ℚ.

pub mod arith;
pub mod element;
pub mod poly;
pub mod residue;
pub mod roots;

pub use arith::Q;
pub use element::{Backend, BackendKind, FieldElement};
pub use poly::Poly;
pub use residue::{residue_roots, RPoly, ResidueElement, ResidueField};
pub use roots::{roots, RootCluster, Roots};
