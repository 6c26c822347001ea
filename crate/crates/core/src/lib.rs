//! Mixed finite element methods for the Hodge Laplacian with local
//! coderivatives obtained from vertex quadrature.

pub mod alt;
pub mod assembly;
pub mod error;
pub mod fe;
pub mod harness;
pub mod hodge;
pub mod mesh;
pub mod numeric;
pub mod poly;
pub mod quadrature;
pub mod sparse;

pub use error::{Error, Result};
