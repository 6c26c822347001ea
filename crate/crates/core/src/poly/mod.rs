//! Exact polynomial differential forms and the local spaces built from them.

pub mod checks;
pub mod form;
pub mod linalg;
pub mod polynomial;
pub mod spaces;

pub use form::{AffineFace, FloatPolyForm, PolyForm};
pub use polynomial::{FloatPolynomial, Polynomial, Rational};
pub use spaces::{
    integrate_exact, shape_space, shape_space_on, unisolvency_matrix, Dof, Family, RefFace, ReferenceCell, SpaceBasis,
    UnisolvencyMatrix,
};
