use crate::alt::{alt_index_set, determinant, invert};
use crate::error::{Error, Result};
use crate::mesh::{MeshComplex, MeshKind};

/// Affine map x = x₀ + A·ŷ from the reference cell onto a mesh cell, with
/// the compound matrices of A⁻¹ used to push forms forward.
#[derive(Clone, Debug)]
pub struct CellMap {
    pub origin: Vec<f64>,
    /// A, columns are the edge vectors of the cell.
    pub jacobian: Vec<Vec<f64>>,
    pub inverse: Vec<Vec<f64>>,
    /// det A (may be negative on simplices listed against the orientation).
    pub det: f64,
    /// compounds[j][τ][σ] = det A⁻¹[τ, σ].
    compounds: Vec<Vec<Vec<f64>>>,
    diagonal: bool,
}

impl CellMap {
    pub fn new(mesh: &MeshComplex, c: usize) -> Result<Self> {
        let n = mesh.dim();
        let local = mesh.cell_local_vertices(c);
        let origin = mesh.vertex(local[0]).to_vec();
        let jacobian: Vec<Vec<f64>> = match mesh.kind() {
            MeshKind::Simplicial => {
                (0..n).map(|i| (1..=n).map(|j| mesh.vertex(local[j])[i] - origin[i]).collect()).collect()
            }
            MeshKind::Cubical => (0..n)
                .map(|i| (0..n).map(|j| if i == j { mesh.vertex(local[1 << i])[i] - origin[i] } else { 0.0 }).collect())
                .collect(),
        };
        let det = determinant(jacobian.clone());
        let inverse = invert(&jacobian).ok_or(Error::DegenerateCell { cell: c, measure: det })?;
        let diagonal = mesh.kind() == MeshKind::Cubical;
        let compounds = (0..=n).map(|j| compound(&inverse, j, diagonal)).collect();
        Ok(CellMap { origin, jacobian, inverse, det, compounds, diagonal })
    }

    pub fn n(&self) -> usize {
        self.origin.len()
    }

    pub fn to_physical(&self, y: &[f64]) -> Vec<f64> {
        (0..self.n()).map(|i| self.origin[i] + (0..self.n()).map(|j| self.jacobian[i][j] * y[j]).sum::<f64>()).collect()
    }

    pub fn to_reference(&self, x: &[f64]) -> Vec<f64> {
        let n = self.n();
        (0..n).map(|i| (0..n).map(|j| self.inverse[i][j] * (x[j] - self.origin[j])).sum()).collect()
    }

    /// |det A|, the ratio of physical to reference measure.
    pub fn jacobian_abs(&self) -> f64 {
        self.det.abs()
    }

    /// Physical coefficients of the push-forward of a reference j-form.
    pub fn push_forward(&self, j: usize, reference: &[f64], out: &mut [f64]) {
        let c = &self.compounds[j];
        if self.diagonal {
            for (s, o) in out.iter_mut().enumerate() {
                *o = reference[s] * c[s][s];
            }
            return;
        }
        for (s, o) in out.iter_mut().enumerate() {
            *o = reference.iter().zip(c).map(|(r, row)| r * row[s]).sum();
        }
    }

    pub fn compound(&self, j: usize) -> &[Vec<f64>] {
        &self.compounds[j]
    }
}

fn compound(m: &[Vec<f64>], j: usize, diagonal: bool) -> Vec<Vec<f64>> {
    let n = m.len();
    let idx = alt_index_set(n, j).expect("valid degree");
    idx.iter()
        .map(|t| {
            let rows = t.axes();
            idx.iter()
                .map(|s| {
                    if diagonal && s != t {
                        return 0.0;
                    }
                    let cols = s.axes();
                    determinant(rows.iter().map(|&r| cols.iter().map(|&c| m[r][c]).collect()).collect())
                })
                .collect()
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{build_grid, Domain};

    #[test]
    fn maps_vertices_and_pushes_forward() {
        let m = build_grid(Domain::UnitSquare, MeshKind::Simplicial, 1).unwrap();
        for c in 0..m.num_cells() {
            let map = CellMap::new(&m, c).unwrap();
            let local = m.cell_local_vertices(c);
            assert_eq!(map.to_physical(&[1.0, 0.0]), m.vertex(local[1]));
            assert!((map.jacobian_abs() / 2.0 - m.cell_volume(c)).abs() < 1e-15);
            let y = map.to_reference(m.vertex(local[2]));
            assert!((y[0]).abs() < 1e-15 && (y[1] - 1.0).abs() < 1e-15);
            // dŷ₁∧dŷ₂ pushes forward to det(A⁻¹) dx₁∧dx₂
            let mut out = [0.0];
            map.push_forward(2, &[1.0], &mut out);
            assert!((out[0] - 1.0 / map.det).abs() < 1e-12);
        }
    }
}
