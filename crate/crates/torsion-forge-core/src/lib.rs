//! Reidemeister torsion of hyperbolic 3-manifolds built from truncated
//! hyperideal tetrahedra (D-blocks) glued along pairs of pants.

pub mod assembly;
pub mod blocks;
pub mod error;
pub mod gram;
pub mod hyptrig;
pub mod linalg;
pub mod par;
pub mod rep;
pub mod sample;
pub mod torsion;

pub use error::{Error, Result};
pub use linalg::{ComplexMatrix, C64};
pub use torsion::TorsionValue;
