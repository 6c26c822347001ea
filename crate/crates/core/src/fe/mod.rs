//! Global finite element spaces on mesh complexes.

mod geometry;
mod reference;
mod space;

pub use geometry::CellMap;
pub use reference::{reference_element, ReferenceElement, Tabulation};
pub use space::{
    exterior_derivative_matrix, face_integral, pi_h, piecewise_constant_projection, project_piecewise_constant,
    transfer_matrix, DofSite, FeSpace,
};
