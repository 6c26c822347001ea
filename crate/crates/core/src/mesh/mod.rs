//! Oriented simplicial and cubical cell complexes.

mod generators;
mod io;
mod refine;

use std::collections::{BTreeSet, HashMap};

use serde::{Deserialize, Serialize};

use crate::alt::{determinant, invert, AltForm};
use crate::error::{Error, Result};
use crate::poly::ReferenceCell;

pub use generators::{build_grid, Domain};
pub use io::MeshFile;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MeshKind {
    Simplicial,
    Cubical,
}

/// A j-dimensional face identified by its sorted global vertex tuple.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct FaceRef {
    pub dim: usize,
    pub id: usize,
    pub vertices: Vec<usize>,
}

#[derive(Clone, Debug)]
pub struct MeshComplex {
    kind: MeshKind,
    n: usize,
    vertices: Vec<Vec<f64>>,
    cells: Vec<Vec<usize>>,
    /// faces[j][id] = sorted vertex tuple, ids in lexicographic order.
    faces: Vec<Vec<Vec<usize>>>,
    face_index: Vec<HashMap<Vec<usize>, usize>>,
    /// cell_faces[j][cell] = global ids in reference-face order.
    cell_faces: Vec<Vec<Vec<usize>>>,
    /// Reference-cell local vertex lists of every j-face.
    local_faces: Vec<Vec<Vec<usize>>>,
    vertex_cells: Vec<Vec<usize>>,
    volumes: Vec<f64>,
    h: f64,
    betti: Option<Vec<usize>>,
}

impl MeshComplex {
    /// Build and validate a complex. Simplicial cells may be listed in any
    /// vertex order with nonzero volume; cubical cells list their 2ⁿ vertices
    /// so that bit i of the local number selects the upper side on axis i.
    pub fn new(kind: MeshKind, n: usize, vertices: Vec<Vec<f64>>, cells: Vec<Vec<usize>>) -> Result<Self> {
        if n == 0 || n > crate::poly::spaces::MAX_SPACE_DIM {
            return Err(Error::InvalidMesh(format!("dimension {n} not supported")));
        }
        if let Some(v) = vertices.iter().position(|p| p.len() != n) {
            return Err(Error::InvalidMesh(format!("vertex {v} does not have {n} coordinates")));
        }
        let per_cell = match kind {
            MeshKind::Simplicial => n + 1,
            MeshKind::Cubical => 1 << n,
        };
        let mut volumes = Vec::with_capacity(cells.len());
        for (c, cell) in cells.iter().enumerate() {
            if cell.len() != per_cell {
                return Err(Error::InvalidMesh(format!("cell {c} has {} vertices, expected {per_cell}", cell.len())));
            }
            if cell.iter().any(|&v| v >= vertices.len()) {
                return Err(Error::InvalidMesh(format!("cell {c} references a missing vertex")));
            }
            let distinct: BTreeSet<_> = cell.iter().collect();
            if distinct.len() != cell.len() {
                return Err(Error::InvalidMesh(format!("cell {c} repeats a vertex")));
            }
            volumes.push(cell_volume(kind, n, &vertices, cell, c)?);
        }
        let reference = match kind {
            MeshKind::Simplicial => ReferenceCell::Simplex(n),
            MeshKind::Cubical => ReferenceCell::Cube(n),
        };
        let local_faces: Vec<Vec<Vec<usize>>> =
            (0..=n).map(|j| reference.faces(j).into_iter().map(|f| f.vertices).collect()).collect();

        let local_order: Vec<Vec<usize>> = cells.iter().map(|c| local_vertex_order(kind, c)).collect();
        let mut faces = Vec::with_capacity(n + 1);
        let mut face_index = Vec::with_capacity(n + 1);
        let mut cell_faces = Vec::with_capacity(n + 1);
        for lf in &local_faces {
            let mut set: BTreeSet<Vec<usize>> = BTreeSet::new();
            let mut per_cell_tuples = Vec::with_capacity(cells.len());
            for order in &local_order {
                let tuples: Vec<Vec<usize>> = lf
                    .iter()
                    .map(|f| {
                        let mut t: Vec<usize> = f.iter().map(|&l| order[l]).collect();
                        t.sort_unstable();
                        t
                    })
                    .collect();
                for t in &tuples {
                    set.insert(t.clone());
                }
                per_cell_tuples.push(tuples);
            }
            let list: Vec<Vec<usize>> = set.into_iter().collect();
            let index: HashMap<Vec<usize>, usize> = list.iter().enumerate().map(|(i, t)| (t.clone(), i)).collect();
            let ids = per_cell_tuples.iter().map(|ts| ts.iter().map(|t| index[t]).collect()).collect();
            faces.push(list);
            face_index.push(index);
            cell_faces.push(ids);
        }
        let mut vertex_cells = vec![Vec::new(); vertices.len()];
        for (c, cell) in cells.iter().enumerate() {
            for &v in cell {
                vertex_cells[v].push(c);
            }
        }
        let mut facet_count = vec![0usize; faces[n - 1].len()];
        for ids in &cell_faces[n - 1] {
            for &f in ids {
                facet_count[f] += 1;
            }
        }
        if let Some(f) = facet_count.iter().position(|&c| c > 2) {
            return Err(Error::InvalidMesh(format!("facet {:?} is shared by more than two cells", faces[n - 1][f])));
        }
        let h = cells
            .iter()
            .map(|cell| {
                let mut d: f64 = 0.0;
                for (a, &p) in cell.iter().enumerate() {
                    for &q in &cell[a + 1..] {
                        d = d.max(distance(&vertices[p], &vertices[q]));
                    }
                }
                d
            })
            .fold(0.0, f64::max);
        Ok(MeshComplex {
            kind,
            n,
            vertices,
            cells,
            faces,
            face_index,
            cell_faces,
            local_faces,
            vertex_cells,
            volumes,
            h,
            betti: None,
        })
    }

    pub(crate) fn with_betti(mut self, betti: Vec<usize>) -> Self {
        self.betti = Some(betti);
        self
    }

    pub fn kind(&self) -> MeshKind {
        self.kind
    }
    pub fn dim(&self) -> usize {
        self.n
    }
    pub fn h(&self) -> f64 {
        self.h
    }
    pub fn vertices(&self) -> &[Vec<f64>] {
        &self.vertices
    }
    pub fn vertex(&self, v: usize) -> &[f64] {
        &self.vertices[v]
    }
    pub fn num_vertices(&self) -> usize {
        self.vertices.len()
    }
    pub fn cells(&self) -> &[Vec<usize>] {
        &self.cells
    }
    pub fn num_cells(&self) -> usize {
        self.cells.len()
    }
    pub fn cell_volume(&self, c: usize) -> f64 {
        self.volumes[c]
    }
    /// Betti numbers when known from the generator.
    pub fn betti(&self) -> Option<&[usize]> {
        self.betti.as_deref()
    }

    pub fn reference_cell(&self) -> ReferenceCell {
        match self.kind {
            MeshKind::Simplicial => ReferenceCell::Simplex(self.n),
            MeshKind::Cubical => ReferenceCell::Cube(self.n),
        }
    }

    /// Global vertex ids in the reference-cell numbering of the cell: sorted
    /// ids for simplices, stored bit order for boxes.
    pub fn cell_local_vertices(&self, c: usize) -> Vec<usize> {
        local_vertex_order(self.kind, &self.cells[c])
    }

    pub fn num_faces(&self, j: usize) -> usize {
        self.faces[j].len()
    }
    pub fn faces(&self, j: usize) -> &[Vec<usize>] {
        &self.faces[j]
    }
    pub fn face(&self, j: usize, id: usize) -> FaceRef {
        FaceRef { dim: j, id, vertices: self.faces[j][id].clone() }
    }
    /// Global j-face ids of a cell, in reference-face order.
    pub fn cell_faces(&self, j: usize, c: usize) -> &[usize] {
        &self.cell_faces[j][c]
    }
    /// Local vertex lists of the reference j-faces.
    pub fn local_faces(&self, j: usize) -> &[Vec<usize>] {
        &self.local_faces[j]
    }
    pub fn vertex_cells(&self, v: usize) -> &[usize] {
        &self.vertex_cells[v]
    }

    /// Look up a face by its vertices in any order.
    pub fn find_face(&self, vertices: &[usize]) -> Result<FaceRef> {
        let mut key = vertices.to_vec();
        key.sort_unstable();
        let dim = match self.kind {
            MeshKind::Simplicial => key.len().checked_sub(1),
            MeshKind::Cubical => key.len().is_power_of_two().then(|| key.len().trailing_zeros() as usize),
        };
        let unknown = || Error::UnknownFace { dim: dim.unwrap_or(0), vertices: key.clone() };
        let d = dim.filter(|&d| d <= self.n).ok_or_else(unknown)?;
        let id = *self.face_index[d].get(&key).ok_or_else(unknown)?;
        Ok(FaceRef { dim: d, id, vertices: key })
    }

    pub fn validate_face(&self, f: &FaceRef) -> Result<()> {
        match self.faces.get(f.dim).and_then(|fs| fs.get(f.id)) {
            Some(v) if *v == f.vertices => Ok(()),
            _ => Err(Error::UnknownFace { dim: f.dim, vertices: f.vertices.clone() }),
        }
    }

    /// Ω_f: all cells having f as a face, in increasing order.
    pub fn macroelement(&self, f: &FaceRef) -> Result<Vec<usize>> {
        self.validate_face(f)?;
        let first = &self.vertex_cells[f.vertices[0]];
        Ok(first
            .iter()
            .copied()
            .filter(|&c| f.vertices.iter().all(|v| self.cells[c].contains(v)))
            .collect())
    }

    /// Free axes of a cubical face, increasing.
    pub fn face_axes(&self, f: &[usize]) -> Vec<usize> {
        (0..self.n)
            .filter(|&a| f.iter().any(|&v| (self.vertices[v][a] - self.vertices[f[0]][a]).abs() > 0.0))
            .collect()
    }

    /// Signed incidence between j-faces and (j−1)-faces as (row, col, sign)
    /// triplets with rows indexing Δ_{j−1} and columns Δ_j.
    pub fn boundary(&self, j: usize) -> Vec<(usize, usize, i8)> {
        assert!(j >= 1 && j <= self.n);
        let mut out = Vec::new();
        for (id, f) in self.faces[j].iter().enumerate() {
            match self.kind {
                MeshKind::Simplicial => {
                    for i in 0..f.len() {
                        let mut g = f.clone();
                        g.remove(i);
                        let s = if i % 2 == 0 { 1 } else { -1 };
                        out.push((self.face_index[j - 1][&g], id, s));
                    }
                }
                MeshKind::Cubical => {
                    let axes = self.face_axes(f);
                    for (i, &a) in axes.iter().enumerate() {
                        let lo = f.iter().map(|&v| self.vertices[v][a]).fold(f64::INFINITY, f64::min);
                        for high in [false, true] {
                            let g: Vec<usize> =
                                f.iter().copied().filter(|&v| (self.vertices[v][a] == lo) != high).collect();
                            let s = if i % 2 == 0 { 1 } else { -1 } * if high { 1 } else { -1 };
                            out.push((self.face_index[j - 1][&g], id, s));
                        }
                    }
                }
            }
        }
        out.sort_unstable();
        out
    }

    /// V − E + F − … of the complex.
    pub fn euler_characteristic(&self) -> i64 {
        (0..=self.n).map(|j| if j % 2 == 0 { 1 } else { -1 } * self.faces[j].len() as i64).sum()
    }

    /// Barycentric coordinates of x with respect to the stored vertex order of
    /// a simplicial cell, and the constant differentials dλ_i.
    pub fn barycentric(&self, c: usize, x: &[f64]) -> Result<(Vec<f64>, Vec<AltForm<f64>>)> {
        if self.kind != MeshKind::Simplicial {
            return Err(Error::Unsupported("barycentric coordinates on a cubical mesh".into()));
        }
        let cell = &self.cells[c];
        let n = self.n;
        let x0 = &self.vertices[cell[0]];
        let a: Vec<Vec<f64>> =
            (0..n).map(|i| (1..=n).map(|j| self.vertices[cell[j]][i] - x0[i]).collect()).collect();
        let inv = invert(&a).ok_or(Error::DegenerateCell { cell: c, measure: self.volumes[c] })?;
        let mut lam = vec![0.0; n + 1];
        let mut dlam = vec![AltForm::zero(n, 1); n + 1];
        let mut sum = 0.0;
        for j in 0..n {
            let l: f64 = (0..n).map(|i| inv[j][i] * (x[i] - x0[i])).sum();
            lam[j + 1] = l;
            sum += l;
            dlam[j + 1] = AltForm::from_coeffs(n, 1, inv[j].clone())?;
        }
        lam[0] = 1.0 - sum;
        let d0: Vec<f64> = (0..n).map(|i| -(0..n).map(|j| inv[j][i]).sum::<f64>()).collect();
        dlam[0] = AltForm::from_coeffs(n, 1, d0)?;
        Ok((lam, dlam))
    }

    /// Centroid of a cell.
    pub fn cell_center(&self, c: usize) -> Vec<f64> {
        let cell = &self.cells[c];
        let mut x = vec![0.0; self.n];
        for &v in cell {
            for (xi, vi) in x.iter_mut().zip(&self.vertices[v]) {
                *xi += vi;
            }
        }
        x.iter_mut().for_each(|xi| *xi /= cell.len() as f64);
        x
    }
}

fn local_vertex_order(kind: MeshKind, cell: &[usize]) -> Vec<usize> {
    match kind {
        MeshKind::Simplicial => {
            let mut v = cell.to_vec();
            v.sort_unstable();
            v
        }
        MeshKind::Cubical => cell.to_vec(),
    }
}

fn distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

fn cell_volume(kind: MeshKind, n: usize, vertices: &[Vec<f64>], cell: &[usize], c: usize) -> Result<f64> {
    let x0 = &vertices[cell[0]];
    match kind {
        MeshKind::Simplicial => {
            let a: Vec<Vec<f64>> = (0..n).map(|i| (1..=n).map(|j| vertices[cell[j]][i] - x0[i]).collect()).collect();
            let scale: f64 = (1..=n).map(|j| distance(&vertices[cell[j]], x0)).product();
            let fact: f64 = (1..=n).product::<usize>() as f64;
            let vol = determinant(a).abs() / fact;
            if !(vol > 1e-12 * scale / fact) {
                return Err(Error::DegenerateCell { cell: c, measure: vol });
            }
            Ok(vol)
        }
        MeshKind::Cubical => {
            let lengths: Vec<f64> = (0..n).map(|i| vertices[cell[1 << i]][i] - x0[i]).collect();
            let vol: f64 = lengths.iter().product();
            if lengths.iter().any(|&l| !(l > 0.0)) {
                return Err(Error::DegenerateCell { cell: c, measure: vol });
            }
            for (v, &id) in cell.iter().enumerate() {
                for i in 0..n {
                    let want = x0[i] + if (v >> i) & 1 == 1 { lengths[i] } else { 0.0 };
                    if (vertices[id][i] - want).abs() > 1e-12 * lengths[i].max(1.0) {
                        return Err(Error::InvalidMesh(format!("cell {c} is not an axis-aligned box in bit order")));
                    }
                }
            }
            Ok(vol)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn face_counts_per_cell() {
        for (kind, n) in [(MeshKind::Simplicial, 2), (MeshKind::Simplicial, 3), (MeshKind::Cubical, 2), (MeshKind::Cubical, 3)] {
            let m = build_grid(if n == 2 { Domain::UnitSquare } else { Domain::UnitCube }, kind, 1).unwrap();
            for j in 0..=n {
                let want = match kind {
                    MeshKind::Simplicial => crate::alt::binomial(n + 1, j + 1),
                    MeshKind::Cubical => crate::alt::binomial(n, j) << (n - j),
                };
                for c in 0..m.num_cells() {
                    assert_eq!(m.cell_faces(j, c).len(), want);
                }
            }
        }
    }

    #[test]
    fn boundary_of_boundary_vanishes() {
        for (kind, d) in [(MeshKind::Simplicial, Domain::UnitCube), (MeshKind::Cubical, Domain::UnitCube), (MeshKind::Simplicial, Domain::SquareWithHole)] {
            let m = build_grid(d, kind, 1).unwrap();
            for j in 2..=m.dim() {
                let hi = m.boundary(j);
                let lo = m.boundary(j - 1);
                let mut acc: HashMap<(usize, usize), i64> = HashMap::new();
                for &(r, c, s) in &hi {
                    for &(r2, c2, s2) in &lo {
                        if c2 == r {
                            *acc.entry((r2, c)).or_default() += (s as i64) * (s2 as i64);
                        }
                    }
                }
                assert!(acc.values().all(|&v| v == 0), "{kind:?} j={j}");
            }
        }
    }

    #[test]
    fn macroelements() {
        let m = build_grid(Domain::UnitSquare, MeshKind::Simplicial, 2).unwrap();
        let centre = m.find_face(&[12]).unwrap();
        assert_eq!(m.vertex(12), &[0.5, 0.5]);
        assert_eq!(m.macroelement(&centre).unwrap().len(), 6);
        let boundary_edge = m.find_face(&[0, 1]).unwrap();
        assert_eq!(m.macroelement(&boundary_edge).unwrap().len(), 1);
        let interior_edge = m.find_face(&[6, 12]).unwrap();
        assert_eq!(m.macroelement(&interior_edge).unwrap().len(), 2);
        assert!(m.find_face(&[0, 24]).is_err());
        let bogus = FaceRef { dim: 1, id: 0, vertices: vec![3, 9] };
        assert!(m.macroelement(&bogus).is_err());
    }

    #[test]
    fn macroelement_is_intersection_over_vertices() {
        let m = build_grid(Domain::UnitCube, MeshKind::Simplicial, 1).unwrap();
        for j in 0..=3 {
            for id in 0..m.num_faces(j) {
                let f = m.face(j, id);
                let omega = m.macroelement(&f).unwrap();
                let mut inter: BTreeSet<usize> = m.vertex_cells(f.vertices[0]).iter().copied().collect();
                for v in &f.vertices[1..] {
                    let s: BTreeSet<usize> = m.vertex_cells(*v).iter().copied().collect();
                    inter = inter.intersection(&s).copied().collect();
                }
                assert_eq!(omega, inter.into_iter().collect::<Vec<_>>());
            }
        }
    }

    #[test]
    fn barycentric_coordinates() {
        let m = MeshComplex::new(
            MeshKind::Simplicial,
            2,
            vec![vec![0.0, 0.0], vec![1.0, 0.0], vec![0.0, 1.0]],
            vec![vec![0, 1, 2]],
        )
        .unwrap();
        let (lam, dlam) = m.barycentric(0, &[0.0, 0.0]).unwrap();
        assert_eq!(lam, vec![1.0, 0.0, 0.0]);
        assert_eq!(dlam[1].coeffs(), &[1.0, 0.0]);
        // dλ_j(x_j − x_i) = 1 on the edge [v_i, v_j]
        assert_eq!(dlam[1].apply(&[vec![1.0, 0.0]]).unwrap(), 1.0);
        let (lam, _) = m.barycentric(0, &[0.25, 0.5]).unwrap();
        assert!((lam.iter().sum::<f64>() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn rejects_degenerate_and_malformed_cells() {
        let v = vec![vec![0.0, 0.0], vec![1.0, 1.0], vec![2.0, 2.0]];
        assert!(matches!(
            MeshComplex::new(MeshKind::Simplicial, 2, v, vec![vec![0, 1, 2]]),
            Err(Error::DegenerateCell { .. })
        ));
        let v = vec![vec![0.0, 0.0], vec![1.0, 0.0], vec![0.0, 1.0], vec![1.0, 1.0]];
        assert!(MeshComplex::new(MeshKind::Cubical, 2, v.clone(), vec![vec![0, 1, 3, 2]]).is_err());
        assert!(MeshComplex::new(MeshKind::Cubical, 2, v.clone(), vec![vec![0, 1, 2]]).is_err());
        assert!(MeshComplex::new(MeshKind::Cubical, 2, v, vec![vec![0, 1, 2, 3]]).is_ok());
    }
}
