//! Dynamics of rational maps on the Berkovich projective line, computed with
//! exact arithmetic over desk-scale non-archimedean fields.

pub mod berkovich;
pub mod equilibrium;
pub mod error;
pub mod io;
pub mod measures_potentials;
pub mod rational_map;
pub mod skeleton;
pub mod valued_field;

pub use error::{BerkError, Result};
pub use valued_field::{Backend, BackendKind, FieldElement, Poly, Q};
