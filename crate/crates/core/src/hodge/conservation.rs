use serde::Serialize;

use crate::error::{Error, Result};
use crate::fe::{transfer_matrix, FeSpace};
use crate::mesh::MeshKind;
use crate::poly::Family;

use super::HodgePair;

/// ∫_f tr σ_h on every (n−1)-face with its canonical orientation (k = n).
pub fn facet_integrals(pair: &HodgePair, sigma: &[f64]) -> Result<Vec<f64>> {
    let n = pair.mesh().dim();
    if pair.degree() != n {
        return Err(Error::Unsupported(format!("conservation for k = {} on an {n}-dimensional mesh", pair.degree())));
    }
    let family = match pair.mesh().kind() {
        MeshKind::Simplicial => Family::P1MinusLocal,
        MeshKind::Cubical => Family::Q1Minus,
    };
    let whitney = FeSpace::new(pair.mesh().clone(), family, n - 1)?;
    Ok(transfer_matrix(pair.sigma_space(), &whitney)?.matvec(sigma))
}

/// Facet integrals and cell incidences for repeated balance checks.
struct Balance<'a> {
    pair: &'a HodgePair,
    integrals: Vec<f64>,
    /// (facet, sign) per cell.
    cell_facets: Vec<Vec<(usize, f64)>>,
    facet_cells: Vec<Vec<usize>>,
}

impl<'a> Balance<'a> {
    fn new(pair: &'a HodgePair, sigma: &[f64]) -> Result<Self> {
        let mesh = pair.mesh();
        let integrals = facet_integrals(pair, sigma)?;
        let mut cell_facets = vec![Vec::new(); mesh.num_cells()];
        let mut facet_cells = vec![Vec::new(); mesh.num_faces(mesh.dim() - 1)];
        for (f, c, s) in mesh.boundary(mesh.dim()) {
            cell_facets[c].push((f, s as f64));
            facet_cells[f].push(c);
        }
        Ok(Balance { pair, integrals, cell_facets, facet_cells })
    }

    fn residual(&self, load: &[f64], cells: &[usize]) -> Result<f64> {
        let mesh = self.pair.mesh();
        let space = self.pair.u_space();
        let mut list = cells.to_vec();
        list.sort_unstable();
        list.dedup();
        if let Some(c) = list.iter().find(|&&c| c >= mesh.num_cells()) {
            return Err(Error::OutOfRange(format!("cell {c}")));
        }
        let inside = |c: usize| list.binary_search(&c).is_ok();
        let mut source = 0.0;
        let mut flux = 0.0;
        for &c in &list {
            let orientation = space.cell_map(c).det.signum();
            source += orientation * mesh.cell_volume(c) * load[space.cell_dofs(c)[0]];
            for &(f, s) in &self.cell_facets[c] {
                if self.facet_cells[f].iter().all(|&o| o == c || !inside(o)) {
                    flux += orientation * s * self.integrals[f];
                }
            }
        }
        Ok((source - flux).abs())
    }
}

/// |∫_U f − ∫_∂U σ_h·ν| for a union of cells U, with ∫_T f recovered from
/// the load vector (F_T = ⟨f, φ_T⟩ and φ_T = ±vol/|T|).
pub fn balance_residual(pair: &HodgePair, sigma: &[f64], load: &[f64], cells: &[usize]) -> Result<f64> {
    Balance::new(pair, sigma)?.residual(load, cells)
}

#[derive(Clone, Debug, Serialize)]
pub struct ConservationReport {
    pub max_cell_residual: f64,
    pub whole_domain_residual: f64,
    pub union_residuals: Vec<f64>,
}

impl ConservationReport {
    pub fn max(&self) -> f64 {
        self.union_residuals.iter().copied().fold(self.max_cell_residual.max(self.whole_domain_residual), f64::max)
    }

    /// Every cell, the whole mesh and `unions` random connected unions.
    pub fn compute(pair: &HodgePair, sigma: &[f64], load: &[f64], unions: usize, seed: u64) -> Result<Self> {
        use rand::{Rng, SeedableRng};
        let mesh = pair.mesh();
        let balance = Balance::new(pair, sigma)?;
        let mut max_cell: f64 = 0.0;
        for c in 0..mesh.num_cells() {
            max_cell = max_cell.max(balance.residual(load, &[c])?);
        }
        let all: Vec<usize> = (0..mesh.num_cells()).collect();
        let whole = balance.residual(load, &all)?;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let mut union_residuals = Vec::new();
        for _ in 0..unions {
            let size = rng.gen_range(2..=mesh.num_cells().clamp(2, 12));
            let mut set = vec![rng.gen_range(0..mesh.num_cells())];
            while set.len() < size {
                let from = set[rng.gen_range(0..set.len())];
                let v = mesh.cells()[from][rng.gen_range(0..mesh.cells()[from].len())];
                let cand = mesh.vertex_cells(v);
                let c = cand[rng.gen_range(0..cand.len())];
                if !set.contains(&c) {
                    set.push(c);
                }
            }
            union_residuals.push(balance.residual(load, &set)?);
        }
        Ok(ConservationReport { max_cell_residual: max_cell, whole_domain_residual: whole, union_residuals })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::assembly::load_vector;
    use crate::hodge::{HarmonicMode, SolverKind, Variant};
    use crate::mesh::{build_grid, Domain};
    use std::sync::Arc;

    #[test]
    fn local_balance_holds() {
        for (d, kind) in [(Domain::UnitSquare, MeshKind::Simplicial), (Domain::UnitSquare, MeshKind::Cubical), (Domain::UnitCube, MeshKind::Simplicial)] {
            let m = Arc::new(build_grid(d, kind, 2).unwrap());
            let n = m.dim();
            let p = HodgePair::new(m, n, None).unwrap();
            let h = p.harmonic_basis(HarmonicMode::Auto).unwrap();
            let f = load_vector(p.u_space(), |x| vec![1.0 + x[0] * x[1] + (5.0 * x[0]).sin()]);
            let s = p.solve(&f, Variant::Lumped, &h, SolverKind::Auto).unwrap();
            let r = ConservationReport::compute(&p, &s.sigma, &f, 10, 4).unwrap();
            assert!(r.max() < 1e-10, "{kind:?} n={n}: {r:?}");
        }
    }
}
