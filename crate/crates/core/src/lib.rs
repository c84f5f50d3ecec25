//! Pluriclosed (SKT) bracket flow on Lie groups.

pub mod algebra;
pub mod almost_abelian;
pub mod catalog;
pub mod error;
pub mod flow;
pub mod hermitian;
pub mod io;
pub mod linalg;
pub mod nilpotent;
pub mod normality;
pub mod random;

pub use algebra::{InnerProductConvention, LieBracket};
pub use almost_abelian::AlmostAbelianData;
pub use error::{Error, Result};
pub use hermitian::{HermitianFrame, SolitonKind};
