pub mod artinian;
pub mod cartier;
pub mod ehull;
pub mod error;
pub mod field;
pub mod fmodules;
pub mod koszul;
pub mod linalg;
pub mod poly;
pub mod rational;
pub mod resolution;
pub mod semilinear;
pub mod skew;

pub use error::{Error, Result};
pub use field::{FieldElem, Fq};
pub use linalg::{FpMatrix, Solve};
pub use poly::{Monomial, MultiPoly, PolyRing};
