//! Verification engine for the third-order Aff(3)-invariant PDE of surfaces
//! in three-space.
pub mod affgeom;
pub mod algebra;
pub mod characteristics;
pub mod compat;
pub mod error;
pub mod invariantpde;
pub mod jetspace;
pub mod linalg;
pub mod sample;
pub mod symmetry;

pub use algebra::{Poly, RatFunc, Scalar, SqrtExt, TaylorMap, Var};
pub use error::{Error, Result};
pub use jetspace::{JetPoint, Region, SymTensorK};
