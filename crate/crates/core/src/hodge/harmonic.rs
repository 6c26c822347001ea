use serde::Serialize;

use crate::assembly::{coupling_matrix, mass_exact, mass_lumped, stiffness, BlockDiagonalOperator};
use crate::error::{Error, Result};
use crate::fe::FeSpace;
use crate::numeric::{check_cap, col_to_vec, generalized_eigen};
use crate::sparse::{norm, SparseOperator};

/// Relative eigenvalue threshold separating the kernel.
const KERNEL_TOL: f64 = 1e-8;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum HarmonicMode {
    /// Skip the computation when the mesh reports a zero Betti number.
    #[default]
    Auto,
    /// Always extract the kernel densely.
    Dense,
}

/// M-orthonormal basis of the discrete harmonic k-forms.
#[derive(Clone, Debug, Default, Serialize)]
pub struct HarmonicBasis {
    vectors: Vec<Vec<f64>>,
    method: &'static str,
}

impl HarmonicBasis {
    pub fn empty() -> Self {
        HarmonicBasis { vectors: Vec::new(), method: "none" }
    }
    pub fn dim(&self) -> usize {
        self.vectors.len()
    }
    pub fn vectors(&self) -> &[Vec<f64>] {
        &self.vectors
    }
    pub fn method(&self) -> &'static str {
        self.method
    }
}

/// Kernel of S + B M_h⁻¹ Bᵀ, i.e. {q : dq = 0, q ⟂ dV^{k−1}}.
pub(super) fn from_matrices(
    mass: &SparseOperator,
    stiff: &SparseOperator,
    coupling: Option<(&SparseOperator, &BlockDiagonalOperator)>,
    betti: Option<usize>,
    mode: HarmonicMode,
) -> Result<HarmonicBasis> {
    if mode == HarmonicMode::Auto && betti == Some(0) {
        return Ok(HarmonicBasis { vectors: Vec::new(), method: "betti" });
    }
    let n = mass.nrows();
    check_cap(n)?;
    let mut g = stiff.clone();
    if let Some((b, mh)) = coupling {
        let bmb = b.matmul(&mh.inverse_sparse().matmul(&b.transpose())?)?;
        g = g.add_scaled(1.0, &bmb, 1.0)?;
    }
    let (vals, vecs) = generalized_eigen(&g.to_dense(), &mass.to_dense())?;
    let top = vals.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let vectors: Vec<Vec<f64>> =
        vals.iter().enumerate().filter(|(_, v)| v.abs() <= KERNEL_TOL * top.max(1.0)).map(|(j, _)| col_to_vec(&vecs, j)).collect();
    if let Some(b) = betti {
        if b != vectors.len() {
            return Err(Error::Solver(format!("found {} harmonic forms, expected {b}", vectors.len())));
        }
    }
    Ok(HarmonicBasis { vectors, method: "dense" })
}

/// Harmonic forms of V^k; without V^{k−1} (k = 0) only d is imposed.
pub fn harmonic_basis(v_km1: Option<&FeSpace>, v_k: &FeSpace, mode: HarmonicMode) -> Result<HarmonicBasis> {
    let mass = mass_exact(v_k, None)?;
    let stiff = stiffness(v_k)?;
    let betti = v_k.mesh().betti().map(|b| b[v_k.degree()]);
    match v_km1 {
        Some(s) => {
            let b = coupling_matrix(s, v_k)?;
            let mh = mass_lumped(s, None)?;
            from_matrices(&mass, &stiff, Some((&b, &mh)), betti, mode)
        }
        None => from_matrices(&mass, &stiff, None, betti, mode),
    }
}

/// max ‖d q‖ and max ‖Bᵀq‖ over the basis.
pub fn harmonic_defects(basis: &HarmonicBasis, d: Option<&SparseOperator>, coupling: &SparseOperator) -> (f64, f64) {
    basis.vectors().iter().fold((0.0f64, 0.0f64), |(a, b), q| {
        let dq = d.map_or(0.0, |d| norm(&d.matvec(q)));
        (a.max(dq), b.max(norm(&coupling.transpose_matvec(q))))
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{build_grid, Domain, MeshKind};
    use crate::poly::Family;
    use std::sync::Arc;

    #[test]
    fn betti_numbers_from_kernels() {
        let sq = Arc::new(build_grid(Domain::UnitSquare, MeshKind::Simplicial, 2).unwrap());
        let v0 = FeSpace::new(sq.clone(), Family::P1, 0).unwrap();
        let v1 = FeSpace::new(sq.clone(), Family::P1MinusLocal, 1).unwrap();
        assert_eq!(harmonic_basis(Some(&v0), &v1, HarmonicMode::Dense).unwrap().dim(), 0);
        let w0 = FeSpace::new(sq, Family::P1MinusLocal, 0).unwrap();
        assert_eq!(harmonic_basis(None, &w0, HarmonicMode::Dense).unwrap().dim(), 1);

        let hole = Arc::new(build_grid(Domain::SquareWithHole, MeshKind::Simplicial, 1).unwrap());
        let v0 = FeSpace::new(hole.clone(), Family::P1, 0).unwrap();
        let v1 = FeSpace::new(hole.clone(), Family::P1MinusLocal, 1).unwrap();
        let h = harmonic_basis(Some(&v0), &v1, HarmonicMode::Dense).unwrap();
        assert_eq!(h.dim(), 1);
        let v2 = FeSpace::new(hole, Family::P1MinusLocal, 2).unwrap();
        let d = crate::fe::exterior_derivative_matrix(&v1, &v2).unwrap();
        let b = coupling_matrix(&v0, &v1).unwrap();
        let (dq, bq) = harmonic_defects(&h, Some(&d), &b);
        assert!(dq < 1e-10 && bq < 1e-10, "{dq} {bq}");
    }
}
