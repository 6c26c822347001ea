use std::sync::Arc;

use serde::Serialize;

use crate::assembly::CoefficientSpec;
use crate::error::{Error, Result};
use crate::mesh::{build_grid, Domain, MeshKind};
use crate::numeric::{check_cap, generalized_eigenvalues};
use crate::sparse::SparseOperator;

use super::{HarmonicMode, HodgePair, Variant};

#[derive(Clone, Debug, Serialize)]
pub struct InfSupLevel {
    pub level: usize,
    pub h: f64,
    pub dim: usize,
    /// Smallest |λ| of A x = λ G x, G the Gram matrix of the triple norm.
    pub smallest_singular: f64,
    /// max ‖ρ‖_h / ‖dρ‖ over ρ orthogonal to the kernel of d.
    pub poincare: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct InfSupReport {
    pub domain: Domain,
    pub kind: MeshKind,
    pub k: usize,
    pub variant: Variant,
    pub levels: Vec<InfSupLevel>,
    /// Largest relative change of the smallest singular value between levels.
    pub drift: f64,
}

impl InfSupReport {
    pub fn all_positive(&self) -> bool {
        self.levels.iter().all(|l| l.smallest_singular > 0.0 && l.poincare.is_finite())
    }
}

/// Stability constants of one pair.
pub fn infsup_level(pair: &HodgePair, variant: Variant) -> Result<(f64, f64)> {
    let harmonic = pair.harmonic_basis(HarmonicMode::Dense)?;
    let sizes = pair.saddle_sizes(&harmonic);
    check_cap(sizes.iter().sum())?;
    let a = pair.saddle_matrix(variant, &harmonic)?;
    let ms = pair.sigma_mass(variant);
    let m = &pair.matrices();
    let dtmd = m.d_km1.transpose().matmul(&m.mass_k.matmul(&m.d_km1)?)?.symmetrized()?;
    let g_sigma = ms.add_scaled(1.0, &dtmd, 1.0)?;
    let g_u = m.mass_k.add_scaled(1.0, &m.stiffness, 1.0)?;
    let id = SparseOperator::identity(sizes[2]);
    let g = SparseOperator::block(&[vec![Some(&g_sigma), None, None], vec![None, Some(&g_u), None], vec![None, None, Some(&id)]], &sizes, &sizes)?;
    let ev = generalized_eigenvalues(&a.to_dense(), &g.to_dense())?;
    let smallest = ev.iter().fold(f64::INFINITY, |s, v| s.min(v.abs()));
    let pe = generalized_eigenvalues(&dtmd.to_dense(), &ms.to_dense())?;
    let top = pe.iter().fold(0.0f64, |s, v| s.max(*v));
    let lowest = pe.iter().copied().filter(|v| *v > 1e-8 * top).fold(f64::INFINITY, f64::min);
    Ok((smallest, 1.0 / lowest.sqrt()))
}

pub fn infsup_estimate(
    domain: Domain,
    kind: MeshKind,
    k: usize,
    variant: Variant,
    levels: &[usize],
    coefficient: &CoefficientSpec,
) -> Result<InfSupReport> {
    let mut out = Vec::new();
    for &level in levels {
        let run = || -> Result<InfSupLevel> {
            let mesh = Arc::new(build_grid(domain, kind, level)?);
            let field = coefficient.build(&mesh, k - 1)?;
            let pair = HodgePair::new(mesh.clone(), k, field)?;
            let (s, c) = infsup_level(&pair, variant)?;
            let h = pair.harmonic_basis(HarmonicMode::Auto)?;
            Ok(InfSupLevel { level, h: mesh.h(), dim: pair.saddle_sizes(&h).iter().sum(), smallest_singular: s, poincare: c })
        };
        out.push(run().map_err(|e| Error::AtLevel { level, source: Box::new(e) })?);
    }
    let drift = out
        .windows(2)
        .map(|w| ((w[1].smallest_singular - w[0].smallest_singular) / w[0].smallest_singular).abs())
        .fold(0.0, f64::max);
    Ok(InfSupReport { domain, kind, k, variant, levels: out, drift })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn positive_on_small_grids() {
        for kind in [MeshKind::Simplicial, MeshKind::Cubical] {
            let r = infsup_estimate(Domain::UnitSquare, kind, 1, Variant::Lumped, &[1, 2], &CoefficientSpec::Identity).unwrap();
            assert!(r.all_positive(), "{r:?}");
        }
    }
}
