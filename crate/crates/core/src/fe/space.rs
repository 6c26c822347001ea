use std::sync::Arc;

use crate::alt::{alt_index_set, binomial, determinant, AltForm};
use crate::error::{Error, Result};
use crate::mesh::{MeshComplex, MeshKind};
use crate::poly::{Dof, Family};
use crate::quadrature::{box_rule, cell_rule, simplex_rule, Rule};
use crate::sparse::{Merge, SparseOperator};

use super::geometry::CellMap;
use super::reference::{reference_element, ReferenceElement};

/// Points per direction of the Gauss rules used for face integrals.
const FACE_POINTS: usize = 3;
/// Points per direction for cell means of fields.
const CELL_POINTS: usize = 4;
const INSIDE_TOL: f64 = 1e-12;

/// Where a global DOF lives.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum DofSite {
    /// Attached to a k-face, optionally anchored at one of its vertices.
    Face { face: usize, anchor: Option<usize> },
    /// Component σ of a piecewise constant form on a cell.
    Cell { cell: usize, component: usize },
}

/// A global finite element space of k-forms.
#[derive(Clone, Debug)]
pub struct FeSpace {
    mesh: Arc<MeshComplex>,
    family: Family,
    k: usize,
    reference: Arc<ReferenceElement>,
    maps: Arc<Vec<CellMap>>,
    cell_dofs: Vec<Vec<usize>>,
    sites: Vec<DofSite>,
    vertex_dofs: Vec<Vec<usize>>,
}

fn compatible(kind: MeshKind, family: Family) -> bool {
    match kind {
        MeshKind::Simplicial => matches!(family, Family::P1 | Family::P1MinusLocal | Family::P0),
        MeshKind::Cubical => matches!(family, Family::Q1Minus | Family::S1Plus | Family::P0),
    }
}

impl FeSpace {
    pub fn new(mesh: Arc<MeshComplex>, family: Family, k: usize) -> Result<Self> {
        let n = mesh.dim();
        if k > n {
            return Err(Error::OutOfRange(format!("form degree {k} on a {n}-dimensional mesh")));
        }
        if !compatible(mesh.kind(), family) {
            return Err(Error::Unsupported(format!("{family} on a {} mesh", mesh.kind())));
        }
        let reference = reference_element(family, mesh.reference_cell(), k)?;
        let maps: Vec<CellMap> = (0..mesh.num_cells()).map(|c| CellMap::new(&mesh, c)).collect::<Result<_>>()?;
        let per_face = match mesh.kind() {
            MeshKind::Simplicial => k + 1,
            MeshKind::Cubical => 1 << k,
        };
        let ncomp = binomial(n, k);
        let dim = match family {
            Family::P1 | Family::S1Plus => per_face * mesh.num_faces(k),
            Family::P0 => ncomp * mesh.num_cells(),
            _ => mesh.num_faces(k),
        };
        let mut cell_dofs = Vec::with_capacity(mesh.num_cells());
        for c in 0..mesh.num_cells() {
            let lf = mesh.cell_faces(k, c);
            let local = mesh.cell_local_vertices(c);
            let ids = reference
                .dofs
                .iter()
                .map(|d| match d {
                    Dof::VertexValue { face, anchor } => {
                        let gf = lf[*face];
                        let gv = local[*anchor];
                        let pos = mesh.faces(k)[gf].iter().position(|&v| v == gv).expect("anchor in face");
                        Ok(gf * per_face + pos)
                    }
                    Dof::FaceIntegral { face } => Ok(lf[*face]),
                    Dof::CellMean { index } => Ok(c * ncomp + index),
                    Dof::FaceMoment { .. } => Err(Error::Unsupported("moment degrees of freedom in a global space".into())),
                })
                .collect::<Result<Vec<usize>>>()?;
            cell_dofs.push(ids);
        }
        let sites: Vec<DofSite> = (0..dim)
            .map(|g| match family {
                Family::P1 | Family::S1Plus => {
                    let f = g / per_face;
                    DofSite::Face { face: f, anchor: Some(mesh.faces(k)[f][g % per_face]) }
                }
                Family::P0 => DofSite::Cell { cell: g / ncomp, component: g % ncomp },
                _ => DofSite::Face { face: g, anchor: None },
            })
            .collect();
        let mut vertex_dofs = vec![Vec::new(); mesh.num_vertices()];
        for (g, s) in sites.iter().enumerate() {
            if let DofSite::Face { anchor: Some(v), .. } = s {
                vertex_dofs[*v].push(g);
            }
        }
        Ok(FeSpace { mesh, family, k, reference, maps: Arc::new(maps), cell_dofs, sites, vertex_dofs })
    }

    pub fn mesh(&self) -> &Arc<MeshComplex> {
        &self.mesh
    }
    pub fn family(&self) -> Family {
        self.family
    }
    pub fn degree(&self) -> usize {
        self.k
    }
    pub fn dim(&self) -> usize {
        self.sites.len()
    }
    pub fn reference(&self) -> &ReferenceElement {
        &self.reference
    }
    pub fn cell_map(&self, c: usize) -> &CellMap {
        &self.maps[c]
    }
    /// Global ids of the local basis functions of a cell.
    pub fn cell_dofs(&self, c: usize) -> &[usize] {
        &self.cell_dofs[c]
    }
    pub fn site(&self, g: usize) -> &DofSite {
        &self.sites[g]
    }
    pub fn is_anchored(&self) -> bool {
        matches!(self.family, Family::P1 | Family::S1Plus)
    }
    /// DOFs anchored at a vertex, increasing.
    pub fn anchored_at(&self, v: usize) -> &[usize] {
        &self.vertex_dofs[v]
    }
    /// Number of Alt components of a value.
    pub fn components(&self) -> usize {
        binomial(self.mesh.dim(), self.k)
    }

    /// Cells on which ψ_g may be nonzero.
    pub fn support(&self, g: usize) -> Vec<usize> {
        match &self.sites[g] {
            DofSite::Face { face, .. } => {
                self.mesh.macroelement(&self.mesh.face(self.k, *face)).expect("face of this mesh")
            }
            DofSite::Cell { cell, .. } => vec![*cell],
        }
    }

    fn check_cell(&self, c: usize) -> Result<()> {
        if c >= self.mesh.num_cells() {
            return Err(Error::OutOfRange(format!("cell {c}")));
        }
        Ok(())
    }

    /// Reference coordinates of x, checked against the cell.
    pub fn locate(&self, c: usize, x: &[f64]) -> Result<Vec<f64>> {
        self.check_cell(c)?;
        if x.len() != self.mesh.dim() {
            return Err(Error::DimensionMismatch(format!("point with {} coordinates", x.len())));
        }
        let y = self.maps[c].to_reference(x);
        let inside = match self.mesh.kind() {
            MeshKind::Simplicial => y.iter().all(|&t| t >= -INSIDE_TOL) && y.iter().sum::<f64>() <= 1.0 + INSIDE_TOL,
            MeshKind::Cubical => y.iter().all(|&t| (-INSIDE_TOL..=1.0 + INSIDE_TOL).contains(&t)),
        };
        if !inside {
            return Err(Error::OutsideCell { cell: c, point: x.to_vec() });
        }
        Ok(y)
    }

    /// Values of the local basis functions of cell c at x, in local order.
    pub fn eval_basis(&self, c: usize, x: &[f64]) -> Result<Vec<AltForm<f64>>> {
        let y = self.locate(c, x)?;
        let n = self.mesh.dim();
        (0..self.reference.dim())
            .map(|j| {
                let mut out = vec![0.0; self.components()];
                self.maps[c].push_forward(self.k, &self.reference.eval(j, &y), &mut out);
                AltForm::from_coeffs(n, self.k, out)
            })
            .collect()
    }

    fn check_coeffs(&self, u: &[f64]) -> Result<()> {
        if u.len() != self.dim() {
            return Err(Error::DimensionMismatch(format!("{} coefficients for a space of dimension {}", u.len(), self.dim())));
        }
        Ok(())
    }

    /// Value of Σ u_g ψ_g at x ∈ cell c.
    pub fn eval(&self, u: &[f64], c: usize, x: &[f64]) -> Result<AltForm<f64>> {
        self.check_coeffs(u)?;
        let y = self.locate(c, x)?;
        let mut r = vec![0.0; self.components()];
        for (j, &g) in self.cell_dofs[c].iter().enumerate() {
            for (a, b) in r.iter_mut().zip(self.reference.eval(j, &y)) {
                *a += u[g] * b;
            }
        }
        let mut out = vec![0.0; r.len()];
        self.maps[c].push_forward(self.k, &r, &mut out);
        AltForm::from_coeffs(self.mesh.dim(), self.k, out)
    }

    /// Value of d(Σ u_g ψ_g) at x ∈ cell c.
    pub fn eval_d(&self, u: &[f64], c: usize, x: &[f64]) -> Result<AltForm<f64>> {
        self.check_coeffs(u)?;
        let n = self.mesh.dim();
        if self.k == n {
            return Ok(AltForm::zero(n, n.min(self.k + 1)));
        }
        let y = self.locate(c, x)?;
        let mut r = vec![0.0; binomial(n, self.k + 1)];
        for (j, &g) in self.cell_dofs[c].iter().enumerate() {
            for (a, b) in r.iter_mut().zip(self.reference.eval_d(j, &y)) {
                *a += u[g] * b;
            }
        }
        let mut out = vec![0.0; r.len()];
        self.maps[c].push_forward(self.k + 1, &r, &mut out);
        AltForm::from_coeffs(n, self.k + 1, out)
    }

    /// Edge vectors leaving `anchor` inside face f (sorted vertex order for
    /// simplices, axis neighbours by increasing axis for boxes).
    pub fn anchor_vectors(&self, face: usize, anchor: usize) -> Vec<Vec<f64>> {
        let m = &self.mesh;
        let f = &m.faces(self.k)[face];
        let xa = m.vertex(anchor);
        let diff = |v: usize| -> Vec<f64> { m.vertex(v).iter().zip(xa).map(|(p, q)| p - q).collect() };
        match m.kind() {
            MeshKind::Simplicial => f.iter().filter(|&&v| v != anchor).map(|&v| diff(v)).collect(),
            MeshKind::Cubical => m
                .face_axes(f)
                .into_iter()
                .map(|a| {
                    let w = f
                        .iter()
                        .copied()
                        .find(|&w| (0..m.dim()).all(|i| (i == a) != (m.vertex(w)[i] == xa[i])))
                        .expect("axis neighbour in face");
                    diff(w)
                })
                .collect(),
        }
    }

    /// Apply every DOF functional to a field given by its Alt coefficients.
    pub fn interpolate<F: Fn(&[f64]) -> Vec<f64>>(&self, field: F) -> Vec<f64> {
        let n = self.mesh.dim();
        let cell_q = cell_rule(self.mesh.reference_cell(), CELL_POINTS);
        let face_q = match self.mesh.kind() {
            MeshKind::Simplicial => simplex_rule(self.k, FACE_POINTS),
            MeshKind::Cubical => box_rule(self.k, FACE_POINTS),
        };
        self.sites
            .iter()
            .map(|s| match s {
                DofSite::Face { face, anchor: Some(a) } => {
                    let vecs = self.anchor_vectors(*face, *a);
                    contract_with(&field(self.mesh.vertex(*a)), &minors(n, &vecs))
                }
                DofSite::Face { face, anchor: None } => face_integral(&self.mesh, self.k, *face, &face_q, &field),
                DofSite::Cell { cell, component } => {
                    let map = &self.maps[*cell];
                    let vol_ref: f64 = cell_q.weights.iter().sum();
                    let acc: f64 = cell_q
                        .points
                        .iter()
                        .zip(&cell_q.weights)
                        .map(|(y, w)| w * field(&map.to_physical(y))[*component])
                        .sum();
                    acc / vol_ref
                }
            })
            .collect()
    }
}

/// det V[σ, :] for every σ ∈ Σ(k), V the n×k matrix of column vectors.
fn minors(n: usize, vecs: &[Vec<f64>]) -> Vec<f64> {
    alt_index_set(n, vecs.len())
        .expect("valid degree")
        .iter()
        .map(|s| determinant(s.axes().iter().map(|&a| vecs.iter().map(|v| v[a]).collect()).collect()))
        .collect()
}

fn contract_with(u: &[f64], m: &[f64]) -> f64 {
    u.iter().zip(m).map(|(a, b)| a * b).sum()
}

/// ∫_f tr_f u over a global k-face with its sorted-vertex / increasing-axis
/// orientation.
pub fn face_integral<F: Fn(&[f64]) -> Vec<f64>>(mesh: &MeshComplex, k: usize, face: usize, rule: &Rule, field: &F) -> f64 {
    let n = mesh.dim();
    let f = &mesh.faces(k)[face];
    let (origin, vecs): (Vec<f64>, Vec<Vec<f64>>) = match mesh.kind() {
        MeshKind::Simplicial => {
            let o = mesh.vertex(f[0]).to_vec();
            let v = f[1..].iter().map(|&w| mesh.vertex(w).iter().zip(&o).map(|(p, q)| p - q).collect()).collect();
            (o, v)
        }
        MeshKind::Cubical => {
            let o: Vec<f64> =
                (0..n).map(|i| f.iter().map(|&w| mesh.vertex(w)[i]).fold(f64::INFINITY, f64::min)).collect();
            let v = mesh
                .face_axes(f)
                .into_iter()
                .map(|a| {
                    let hi = f.iter().map(|&w| mesh.vertex(w)[a]).fold(f64::NEG_INFINITY, f64::max);
                    (0..n).map(|i| if i == a { hi - o[a] } else { 0.0 }).collect()
                })
                .collect();
            (o, v)
        }
    };
    let m = minors(n, &vecs);
    rule.points
        .iter()
        .zip(&rule.weights)
        .map(|(t, w)| {
            let x: Vec<f64> = (0..n).map(|i| origin[i] + vecs.iter().zip(t).map(|(v, ti)| v[i] * ti).sum::<f64>()).collect();
            w * contract_with(&field(&x), &m)
        })
        .sum()
}

fn same_mesh(a: &FeSpace, b: &FeSpace) -> Result<()> {
    if !Arc::ptr_eq(&a.mesh, &b.mesh) {
        return Err(Error::DimensionMismatch("spaces live on different meshes".into()));
    }
    Ok(())
}

/// Global matrix of dst DOFs applied to (d of) the src basis, assembled from
/// one reference matrix. Shared entries must agree across cells.
fn global_transfer(src: &FeSpace, dst: &FeSpace, derivative: bool) -> Result<SparseOperator> {
    let local = src.reference.transfer_to(&dst.reference, derivative)?;
    let mut trips = Vec::new();
    for c in 0..src.mesh.num_cells() {
        for (i, &gi) in dst.cell_dofs[c].iter().enumerate() {
            for (j, &gj) in src.cell_dofs[c].iter().enumerate() {
                if local[i][j] != 0.0 {
                    trips.push((gi, gj, local[i][j]));
                }
            }
        }
    }
    let mut sorted = trips.clone();
    sorted.sort_by_key(|&(r, c, _)| (r, c));
    for w in sorted.windows(2) {
        if w[0].0 == w[1].0 && w[0].1 == w[1].1 && (w[0].2 - w[1].2).abs() > 1e-12 {
            return Err(Error::IllegalPair(format!("inconsistent shared entry at ({}, {})", w[0].0, w[0].1)));
        }
    }
    SparseOperator::from_triplets(dst.dim(), src.dim(), trips, Merge::KeepFirst)
}

/// Matrix of d: src → dst in the DOF bases.
pub fn exterior_derivative_matrix(src: &FeSpace, dst: &FeSpace) -> Result<SparseOperator> {
    same_mesh(src, dst)?;
    let legal = matches!(
        (src.family, dst.family),
        (Family::P1, Family::P1MinusLocal)
            | (Family::P1MinusLocal, Family::P1MinusLocal)
            | (Family::Q1Minus, Family::Q1Minus)
            | (Family::S1Plus, Family::Q1Minus)
    );
    if !legal || dst.k != src.k + 1 {
        return Err(Error::IllegalPair(format!("d: {}Λ{} → {}Λ{}", src.family, src.k, dst.family, dst.k)));
    }
    global_transfer(src, dst, true)
}

/// Canonical interpolation of src functions into dst (same degree).
pub fn transfer_matrix(src: &FeSpace, dst: &FeSpace) -> Result<SparseOperator> {
    same_mesh(src, dst)?;
    let legal = matches!(
        (src.family, dst.family),
        (Family::S1Plus, Family::Q1Minus)
            | (Family::Q1Minus, Family::S1Plus)
            | (Family::P1, Family::P1MinusLocal)
            | (Family::P1MinusLocal, Family::P1)
    );
    if !legal || src.k != dst.k {
        return Err(Error::IllegalPair(format!("{}Λ{} → {}Λ{}", src.family, src.k, dst.family, dst.k)));
    }
    global_transfer(src, dst, false)
}

/// Π_h: S1⁺Λᵏ → Q₁⁻Λᵏ matching face integrals.
pub fn pi_h(s1: &FeSpace, q1: &FeSpace, u: &[f64]) -> Result<Vec<f64>> {
    if s1.family != Family::S1Plus || q1.family != Family::Q1Minus {
        return Err(Error::IllegalPair("Π_h maps S1plus to Q1minus".into()));
    }
    s1.check_coeffs(u)?;
    Ok(transfer_matrix(s1, q1)?.matvec(u))
}

/// Matrix of the cellwise mean onto W_hᵏ (piecewise constants).
pub fn piecewise_constant_projection(space: &FeSpace, w: &FeSpace) -> Result<SparseOperator> {
    same_mesh(space, w)?;
    if w.family != Family::P0 || w.k != space.k {
        return Err(Error::IllegalPair("projection target must be P0 of the same degree".into()));
    }
    let rule = cell_rule(space.mesh.reference_cell(), 3);
    let tab = space.reference.tabulate(&rule.points);
    let vol_ref: f64 = rule.weights.iter().sum();
    let nc = space.components();
    let mut means = vec![vec![0.0; nc]; space.reference.dim()];
    for (j, m) in means.iter_mut().enumerate() {
        for (q, w) in rule.weights.iter().enumerate() {
            for (s, v) in m.iter_mut().enumerate() {
                *v += w * tab.get(q, j)[s] / vol_ref;
            }
        }
    }
    let mut trips = Vec::new();
    let mut phys = vec![0.0; nc];
    for c in 0..space.mesh.num_cells() {
        for (j, &g) in space.cell_dofs[c].iter().enumerate() {
            space.maps[c].push_forward(space.k, &means[j], &mut phys);
            for (s, &v) in phys.iter().enumerate() {
                if v != 0.0 {
                    trips.push((c * nc + s, g, v));
                }
            }
        }
    }
    SparseOperator::from_triplets(w.dim(), space.dim(), trips, Merge::Sum)
}

/// P_{W_h} of a finite element function.
pub fn project_piecewise_constant(space: &FeSpace, u: &[f64]) -> Result<Vec<f64>> {
    space.check_coeffs(u)?;
    let w = FeSpace::new(space.mesh.clone(), Family::P0, space.k)?;
    Ok(piecewise_constant_projection(space, &w)?.matvec(u))
}
