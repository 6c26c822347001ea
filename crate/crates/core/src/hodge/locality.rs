use serde::Serialize;

use crate::error::{Error, Result};

use super::{coderivative_local, CoderivativeSolver, HodgePair, Variant};

#[derive(Clone, Debug, Serialize)]
pub struct LocalityReport {
    pub vertex: usize,
    pub dof: usize,
    pub variant: Variant,
    /// Whether the support of the DOF avoids every cell around the vertex.
    pub far: bool,
    /// max |Δ(d*ₕu)| over the coefficients anchored at the vertex.
    pub max_change: f64,
    pub expected_zero: bool,
}

fn is_far(pair: &HodgePair, vertex: usize, dof: usize) -> Result<bool> {
    let mesh = pair.mesh();
    if vertex >= mesh.num_vertices() || dof >= pair.u_space().dim() {
        return Err(Error::OutOfRange(format!("vertex {vertex} or dof {dof}")));
    }
    let around = mesh.vertex_cells(vertex);
    Ok(pair.u_space().support(dof).iter().all(|c| !around.contains(c)))
}

/// Perturb `dof` of u by 1 and measure the change of d*ₕu at `vertex`.
/// `solver` must match the variant when given (exact variant only).
pub fn locality_probe(
    pair: &HodgePair,
    u: &[f64],
    vertex: usize,
    dof: usize,
    variant: Variant,
    solver: Option<&CoderivativeSolver>,
) -> Result<LocalityReport> {
    let far = is_far(pair, vertex, dof)?;
    let apply = |v: &[f64]| -> Result<Vec<f64>> {
        match variant {
            Variant::Lumped => coderivative_local(pair, v),
            Variant::Exact => match solver {
                Some(s) => s.apply(v),
                None => CoderivativeSolver::new(pair, Variant::Exact)?.apply(v),
            },
        }
    };
    let before = apply(u)?;
    let mut w = u.to_vec();
    w[dof] += 1.0;
    let after = apply(&w)?;
    let max_change = pair
        .sigma_space()
        .anchored_at(vertex)
        .iter()
        .map(|&g| (after[g] - before[g]).abs())
        .fold(0.0, f64::max);
    Ok(LocalityReport { vertex, dof, variant, far, max_change, expected_zero: far && variant == Variant::Lumped })
}

/// Locality certificate for a DOF whose support avoids Ω_x.
pub fn locality_certificate(pair: &HodgePair, u: &[f64], vertex: usize, dof: usize) -> Result<LocalityReport> {
    if !is_far(pair, vertex, dof)? {
        return Err(Error::NotFar { vertex, dof });
    }
    locality_probe(pair, u, vertex, dof, Variant::Lumped, None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{build_grid, Domain, MeshKind};
    use std::sync::Arc;

    #[test]
    fn opposite_corner_is_untouched() {
        for kind in [MeshKind::Simplicial, MeshKind::Cubical] {
            let m = Arc::new(build_grid(Domain::UnitSquare, kind, 3).unwrap());
            let p = HodgePair::new(m.clone(), 1, None).unwrap();
            let u: Vec<f64> = (0..p.u_space().dim()).map(|i| ((i * 7 % 11) as f64) - 5.0).collect();
            let far_dof = p.u_space().dim() - 1;
            let r = locality_certificate(&p, &u, 0, far_dof).unwrap();
            assert_eq!(r.max_change, 0.0);
            assert!(matches!(locality_certificate(&p, &u, 0, 0), Err(Error::NotFar { .. })));
            let near = locality_probe(&p, &u, 0, 0, Variant::Lumped, None).unwrap();
            assert!(near.max_change > 0.0);
            let solver = CoderivativeSolver::new(&p, Variant::Exact).unwrap();
            let nonlocal = (0..p.u_space().dim())
                .filter(|&d| is_far(&p, 0, d).unwrap())
                .filter(|&d| locality_probe(&p, &u, 0, d, Variant::Exact, Some(&solver)).unwrap().max_change > 0.0)
                .count();
            assert!(nonlocal > 0, "{kind:?}");
        }
    }
}
