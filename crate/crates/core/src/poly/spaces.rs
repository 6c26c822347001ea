//! Reference cells, local polynomial spaces and their degrees of freedom.

use std::fmt;

use itertools::Itertools;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use super::form::{AffineFace, PolyForm};
use super::linalg;
use super::polynomial::{Polynomial, Rational};
use crate::alt::{alt_index_set, binomial, rat, AltForm, AltIndex};
use crate::error::{Error, Result};

/// Largest dimension handled by the exact space constructions.
pub const MAX_SPACE_DIM: usize = 4;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Family {
    P1,
    P1MinusLocal,
    P0,
    Q1,
    Q1Minus,
    BLambda,
    S1Plus,
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Family::P1 => "P1",
            Family::P1MinusLocal => "P1minus",
            Family::P0 => "P0",
            Family::Q1 => "Q1",
            Family::Q1Minus => "Q1minus",
            Family::BLambda => "BLambda",
            Family::S1Plus => "S1plus",
        };
        f.write_str(s)
    }
}

impl Family {
    /// Dimension of the local space on one cell.
    pub fn local_dim(self, n: usize, k: usize) -> usize {
        let c = binomial(n, k);
        match self {
            Family::P1 => (k + 1) * binomial(n + 1, k + 1),
            Family::P1MinusLocal => binomial(n + 1, k + 1),
            Family::P0 => c,
            Family::Q1 | Family::S1Plus => (1 << n) * c,
            Family::Q1Minus => (1 << (n - k)) * c,
            Family::BLambda => c * (1 << (n - k)) * ((1 << k) - 1),
        }
    }

    pub fn is_simplicial(self) -> bool {
        matches!(self, Family::P1 | Family::P1MinusLocal)
    }
}

/// Unit simplex {x ≥ 0, Σx ≤ 1} or unit cube [0,1]ⁿ.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ReferenceCell {
    Simplex(usize),
    Cube(usize),
}

/// A j-face of a reference cell.
#[derive(Clone, Debug)]
pub struct RefFace {
    /// Local vertex numbers, increasing.
    pub vertices: Vec<usize>,
    pub chart: AffineFace,
}

impl ReferenceCell {
    pub fn dim(self) -> usize {
        match self {
            ReferenceCell::Simplex(n) | ReferenceCell::Cube(n) => n,
        }
    }

    pub fn num_vertices(self) -> usize {
        match self {
            ReferenceCell::Simplex(n) => n + 1,
            ReferenceCell::Cube(n) => 1 << n,
        }
    }

    /// Simplex: origin then unit vectors. Cube: vertex v has coordinate
    /// bit i of v on axis i.
    pub fn vertex(self, v: usize) -> Vec<Rational> {
        match self {
            ReferenceCell::Simplex(n) => (0..n).map(|i| if v == i + 1 { Rational::one() } else { Rational::zero() }).collect(),
            ReferenceCell::Cube(n) => (0..n).map(|i| rat(((v >> i) & 1) as i64, 1)).collect(),
        }
    }

    pub fn vertices(self) -> Vec<Vec<Rational>> {
        (0..self.num_vertices()).map(|v| self.vertex(v)).collect()
    }

    pub fn volume(self) -> Rational {
        match self {
            ReferenceCell::Simplex(n) => Rational::new(1.into(), (1..=n).product::<usize>().into()),
            ReferenceCell::Cube(_) => Rational::one(),
        }
    }

    /// All j-faces, ordered by their local vertex tuples.
    pub fn faces(self, j: usize) -> Vec<RefFace> {
        let n = self.dim();
        assert!(j <= n);
        match self {
            ReferenceCell::Simplex(_) => (0..=n)
                .combinations(j + 1)
                .map(|vs| {
                    let pts: Vec<_> = vs.iter().map(|&v| self.vertex(v)).collect();
                    RefFace { chart: AffineFace::simplex(&pts).expect("reference simplex face"), vertices: vs }
                })
                .collect(),
            ReferenceCell::Cube(_) => {
                let mut out: Vec<RefFace> = Vec::new();
                for free in (0..n).combinations(j) {
                    let free_mask: usize = free.iter().map(|a| 1 << a).sum();
                    let fixed_axes: Vec<usize> = (0..n).filter(|a| free_mask & (1 << a) == 0).collect();
                    for bits in 0..(1usize << fixed_axes.len()) {
                        let base: usize =
                            fixed_axes.iter().enumerate().filter(|(t, _)| bits & (1 << t) != 0).map(|(_, a)| 1 << a).sum();
                        let vertices: Vec<usize> = (0..1usize << n).filter(|v| v & !free_mask == base).collect();
                        let fixed = fixed_axes.iter().map(|&a| (a, rat(((base >> a) & 1) as i64, 1))).collect();
                        out.push(RefFace { vertices, chart: AffineFace::box_face(n, fixed).expect("reference cube face") });
                    }
                }
                out.sort_by(|a, b| a.vertices.cmp(&b.vertices));
                out
            }
        }
    }

    /// Exact integral of a polynomial over the cell.
    pub fn integrate(self, p: &Polynomial) -> Rational {
        match self {
            ReferenceCell::Simplex(_) => p.integrate_unit_simplex(),
            ReferenceCell::Cube(_) => p.integrate_unit_box(),
        }
    }

    /// Edge vectors leaving `anchor` inside the face: other vertices in
    /// order for simplices, axis neighbours by increasing axis for cubes.
    pub fn anchor_vectors(self, face: &RefFace, anchor: usize) -> Vec<Vec<Rational>> {
        let a = self.vertex(anchor);
        match self {
            ReferenceCell::Simplex(_) => face
                .vertices
                .iter()
                .filter(|&&v| v != anchor)
                .map(|&v| self.vertex(v).iter().zip(&a).map(|(x, y)| x - y).collect())
                .collect(),
            ReferenceCell::Cube(n) => {
                let free: usize = face.vertices.iter().fold(0, |m, &v| m | (v ^ face.vertices[0]));
                (0..n)
                    .filter(|ax| free & (1 << ax) != 0)
                    .map(|ax| {
                        let s = if (anchor >> ax) & 1 == 0 { 1 } else { -1 };
                        (0..n).map(|i| if i == ax { rat(s, 1) } else { Rational::zero() }).collect()
                    })
                    .collect()
            }
        }
    }
}

/// A linear functional on local k-forms.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Dof {
    /// u at a vertex of a k-face applied to the edge vectors leaving it.
    VertexValue { face: usize, anchor: usize },
    /// ∫_f tr_f u.
    FaceIntegral { face: usize },
    /// ∫_f tr_f u ∧ y^β, β ∈ {0,1}^k in intrinsic coordinates.
    FaceMoment { face: usize, exponents: Vec<u8> },
    /// Cell mean of the coefficient of dx_σ.
    CellMean { index: usize },
}

impl Dof {
    pub fn face(&self) -> Option<usize> {
        match self {
            Dof::VertexValue { face, .. } | Dof::FaceIntegral { face } | Dof::FaceMoment { face, .. } => Some(*face),
            Dof::CellMean { .. } => None,
        }
    }

    pub fn anchor(&self) -> Option<usize> {
        match self {
            Dof::VertexValue { anchor, .. } => Some(*anchor),
            _ => None,
        }
    }

    pub fn apply(&self, cell: ReferenceCell, faces: &[RefFace], u: &PolyForm) -> Result<Rational> {
        let k = u.degree();
        match self {
            Dof::VertexValue { face, anchor } => {
                let f = &faces[*face];
                let vecs = cell.anchor_vectors(f, *anchor);
                u.eval(&cell.vertex(*anchor)).apply(&vecs)
            }
            Dof::FaceIntegral { face } => face_moment(cell, &faces[*face], u, &vec![0; k]),
            Dof::FaceMoment { face, exponents } => face_moment(cell, &faces[*face], u, exponents),
            Dof::CellMean { index } => Ok(cell.integrate(&u.coeffs()[*index]) / cell.volume()),
        }
    }
}

fn face_moment(cell: ReferenceCell, face: &RefFace, u: &PolyForm, exps: &[u8]) -> Result<Rational> {
    let t = u.trace(&face.chart)?;
    let m = face.chart.dim();
    if t.degree() != m {
        return Err(Error::DimensionMismatch(format!("{}-form integrated over a {m}-face", t.degree())));
    }
    let weight = Polynomial::monomial(m, exps.to_vec(), Rational::one());
    let p = t.coeffs()[0].mul(&weight);
    Ok(match cell {
        ReferenceCell::Simplex(_) => p.integrate_unit_simplex(),
        ReferenceCell::Cube(_) => p.integrate_unit_box(),
    })
}

/// Shape functions of a family on its reference cell, with natural DOFs.
#[derive(Clone, Debug)]
pub struct SpaceBasis {
    pub family: Family,
    pub n: usize,
    pub k: usize,
    pub cell: ReferenceCell,
    pub functions: Vec<PolyForm>,
    pub dofs: Vec<Dof>,
}

impl SpaceBasis {
    pub fn dim(&self) -> usize {
        self.functions.len()
    }

    pub fn faces(&self) -> Vec<RefFace> {
        self.cell.faces(self.k)
    }

    pub fn refs(&self) -> Vec<&PolyForm> {
        self.functions.iter().collect()
    }
}

fn barycentric(n: usize) -> (Vec<Polynomial>, Vec<AltForm<Rational>>) {
    let mut lam = vec![Polynomial::one(n)];
    let mut dlam = vec![AltForm::zero(n, 1)];
    for i in 0..n {
        lam[0] = lam[0].sub(&Polynomial::var(n, i));
        dlam[0] = dlam[0].sub(&AltForm::dx(n, i)).expect("same degree");
        lam.push(Polynomial::var(n, i));
        dlam.push(AltForm::dx(n, i));
    }
    (lam, dlam)
}

fn wedge_all(n: usize, forms: &[&AltForm<Rational>]) -> AltForm<Rational> {
    let mut acc = AltForm::<Rational>::basis(AltIndex::from_axes(n, &[]).expect("empty index"));
    for f in forms {
        acc = acc.wedge(f).expect("degrees fit");
    }
    acc
}

/// λ_a dλ_{f∖a} in face vertex order.
fn p1_function(n: usize, face: &[usize], anchor: usize) -> PolyForm {
    let (lam, dlam) = barycentric(n);
    let rest: Vec<&AltForm<Rational>> = face.iter().filter(|&&v| v != anchor).map(|&v| &dlam[v]).collect();
    PolyForm::from_alt(&lam[anchor], &wedge_all(n, &rest))
}

fn whitney_function(n: usize, face: &[usize]) -> PolyForm {
    let k = face.len() - 1;
    let kfact = Rational::from_integer((1..=k).product::<usize>().into());
    let mut acc = PolyForm::zero(n, k);
    for (i, &a) in face.iter().enumerate() {
        let term = p1_function(n, face, a);
        acc = if i % 2 == 0 { acc.add(&term) } else { acc.sub(&term) }.expect("same degree");
    }
    acc.scale(&kfact)
}

/// x^bits over the given axes.
fn axis_monomial(n: usize, axes: &[usize], bits: usize) -> Polynomial {
    let mut e = vec![0u8; n];
    for (t, &a) in axes.iter().enumerate() {
        if bits & (1 << t) != 0 {
            e[a] = 1;
        }
    }
    Polynomial::monomial(n, e, Rational::one())
}

fn q1minus_functions(n: usize, k: usize) -> Vec<PolyForm> {
    let mut out = Vec::new();
    for sigma in alt_index_set(n, k).expect("valid degree") {
        let comp = sigma.complement().axes();
        for beta in 0..1usize << comp.len() {
            out.push(PolyForm::monomial(sigma, axis_monomial(n, &comp, beta)));
        }
    }
    out
}

fn q1_functions(n: usize, k: usize) -> Vec<PolyForm> {
    let all: Vec<usize> = (0..n).collect();
    let mut out = Vec::new();
    for sigma in alt_index_set(n, k).expect("valid degree") {
        for alpha in 0..1usize << n {
            out.push(PolyForm::monomial(sigma, axis_monomial(n, &all, alpha)));
        }
    }
    out
}

/// The ℬ basis ordered by (σ, α, β) with α ≠ 0 over σ and β over σ*.
pub fn b_lambda_functions(n: usize, k: usize) -> Vec<PolyForm> {
    let mut out = Vec::new();
    for sigma in alt_index_set(n, k).expect("valid degree") {
        let own = sigma.axes();
        let comp = sigma.complement().axes();
        for alpha in 1..1usize << own.len() {
            for beta in 0..1usize << comp.len() {
                let p = axis_monomial(n, &own, alpha).mul(&axis_monomial(n, &comp, beta));
                out.push(PolyForm::monomial(sigma, p));
            }
        }
    }
    out
}

fn vertex_dofs(cell: ReferenceCell, k: usize) -> Vec<Dof> {
    cell.faces(k)
        .iter()
        .enumerate()
        .flat_map(|(fi, f)| f.vertices.iter().map(move |&a| Dof::VertexValue { face: fi, anchor: a }))
        .collect()
}

fn integral_dofs(cell: ReferenceCell, k: usize) -> Vec<Dof> {
    (0..cell.faces(k).len()).map(|face| Dof::FaceIntegral { face }).collect()
}

/// Face moments against Q₁ on each k-face of the cube.
pub fn s1plus_moment_dofs(n: usize, k: usize) -> Vec<Dof> {
    let faces = ReferenceCell::Cube(n).faces(k).len();
    (0..faces)
        .flat_map(|face| {
            (0..1usize << k).map(move |b| Dof::FaceMoment { face, exponents: (0..k).map(|t| ((b >> t) & 1) as u8).collect() })
        })
        .collect()
}

/// Build the reference basis of a family.
pub fn shape_space(family: Family, n: usize, k: usize) -> Result<SpaceBasis> {
    if k > n || n > MAX_SPACE_DIM {
        return Err(Error::OutOfRange(format!("shape space {family} with n={n}, k={k}")));
    }
    let cell = if family.is_simplicial() { ReferenceCell::Simplex(n) } else { ReferenceCell::Cube(n) };
    shape_space_on(family, cell, k)
}

/// As [`shape_space`] with an explicit reference cell (only P0 accepts both).
pub fn shape_space_on(family: Family, cell: ReferenceCell, k: usize) -> Result<SpaceBasis> {
    let n = cell.dim();
    if k > n || n > MAX_SPACE_DIM {
        return Err(Error::OutOfRange(format!("shape space {family} with n={n}, k={k}")));
    }
    let simplex = matches!(cell, ReferenceCell::Simplex(_));
    if family != Family::P0 && family.is_simplicial() != simplex {
        return Err(Error::Unsupported(format!("{family} on {cell:?}")));
    }
    let (functions, dofs) = match family {
        Family::P1 => {
            let mut fs = Vec::new();
            for f in cell.faces(k) {
                for &a in &f.vertices {
                    fs.push(p1_function(n, &f.vertices, a));
                }
            }
            (fs, vertex_dofs(cell, k))
        }
        Family::P1MinusLocal => {
            (cell.faces(k).iter().map(|f| whitney_function(n, &f.vertices)).collect(), integral_dofs(cell, k))
        }
        Family::P0 => {
            let idx = alt_index_set(n, k)?;
            (
                idx.iter().map(|&s| PolyForm::monomial(s, Polynomial::one(n))).collect(),
                (0..idx.len()).map(|index| Dof::CellMean { index }).collect(),
            )
        }
        Family::Q1 => (q1_functions(n, k), vertex_dofs(cell, k)),
        Family::Q1Minus => (q1minus_functions(n, k), integral_dofs(cell, k)),
        Family::BLambda => (b_lambda_functions(n, k), Vec::new()),
        Family::S1Plus => {
            let mut fs = q1minus_functions(n, k);
            if k > 0 {
                for b in b_lambda_functions(n, k) {
                    fs.push(b.koszul(None)?.d());
                }
            }
            let rows = linalg::coordinate_rows(&fs.iter().collect::<Vec<_>>());
            let keep = linalg::independent_rows(&rows);
            let fs = keep.into_iter().map(|i| fs[i].clone()).collect();
            (fs, vertex_dofs(cell, k))
        }
    };
    Ok(SpaceBasis { family, n, k, cell, functions, dofs })
}

/// Matrix with entry (i, j) = dof_i(function_j).
pub fn dof_matrix(basis: &SpaceBasis, dofs: &[Dof]) -> Result<Vec<Vec<Rational>>> {
    let faces = basis.faces();
    dofs.iter().map(|d| basis.functions.iter().map(|u| d.apply(basis.cell, &faces, u)).collect()).collect()
}

#[derive(Clone, Debug)]
pub struct UnisolvencyMatrix {
    pub matrix: Vec<Vec<Rational>>,
    pub determinant: Rational,
}

/// DOF matrix of the basis against the given DOFs (natural DOFs by default).
pub fn unisolvency_matrix(basis: &SpaceBasis, dofs: Option<&[Dof]>) -> Result<UnisolvencyMatrix> {
    let dofs = dofs.unwrap_or(&basis.dofs);
    if dofs.len() != basis.dim() {
        return Err(Error::DimensionMismatch(format!(
            "{} degrees of freedom for a {}-dimensional {} space",
            dofs.len(),
            basis.dim(),
            basis.family
        )));
    }
    let matrix = dof_matrix(basis, dofs)?;
    let determinant = linalg::determinant(&matrix)?;
    Ok(UnisolvencyMatrix { matrix, determinant })
}

/// ∫_cell ⟨u, v⟩ computed exactly.
pub fn integrate_exact(u: &PolyForm, v: &PolyForm, cell: ReferenceCell) -> Result<Rational> {
    if u.n() != v.n() || u.degree() != v.degree() || u.n() != cell.dim() {
        return Err(Error::DimensionMismatch("integrate_exact operands".into()));
    }
    let mut acc = Rational::zero();
    for (a, b) in u.coeffs().iter().zip(v.coeffs()) {
        if !a.is_zero() && !b.is_zero() {
            acc += cell.integrate(&a.mul(b));
        }
    }
    Ok(acc)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dimensions_match_formulas() {
        for n in 1..=3 {
            for k in 0..=n {
                for fam in [Family::P1, Family::P1MinusLocal, Family::Q1, Family::Q1Minus, Family::BLambda, Family::S1Plus] {
                    let b = shape_space(fam, n, k).unwrap();
                    assert_eq!(b.dim(), fam.local_dim(n, k), "{fam} n={n} k={k}");
                    assert_eq!(linalg::span_rank(&b.refs()), b.dim(), "{fam} n={n} k={k}");
                }
            }
        }
        assert_eq!(Family::Q1Minus.local_dim(3, 1), 12);
        assert_eq!(Family::BLambda.local_dim(2, 1), 4);
        assert_eq!(Family::S1Plus.local_dim(3, 2), 24);
        assert!(shape_space(Family::P1, 5, 1).is_err());
        assert!(shape_space_on(Family::Q1, ReferenceCell::Simplex(2), 1).is_err());
    }

    #[test]
    fn cube_faces_are_counted() {
        for n in 1..=4 {
            for j in 0..=n {
                let faces = ReferenceCell::Cube(n).faces(j);
                assert_eq!(faces.len(), binomial(n, j) << (n - j));
                assert!(faces.iter().all(|f| f.vertices.len() == 1 << j));
            }
        }
    }

    #[test]
    fn simplicial_bases_are_dual() {
        for n in 1..=3 {
            for k in 0..=n {
                for fam in [Family::P1, Family::P1MinusLocal] {
                    let b = shape_space(fam, n, k).unwrap();
                    let m = dof_matrix(&b, &b.dofs).unwrap();
                    for (i, row) in m.iter().enumerate() {
                        for (j, v) in row.iter().enumerate() {
                            let want = if i == j { Rational::one() } else { Rational::zero() };
                            assert_eq!(v, &want, "{fam} n={n} k={k} ({i},{j})");
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn s1plus_edge_space_in_two_dimensions() {
        let b = shape_space(Family::S1Plus, 2, 1).unwrap();
        let u = unisolvency_matrix(&b, None).unwrap();
        assert_eq!(u.matrix.len(), 8);
        assert!(!u.determinant.is_zero());
        let m = unisolvency_matrix(&b, Some(&s1plus_moment_dofs(2, 1))).unwrap();
        assert!(!m.determinant.is_zero());
    }

    #[test]
    fn exact_integrals_on_reference_cells() {
        let x1 = PolyForm::monomial(AltIndex::from_axes(2, &[]).unwrap(), Polynomial::var(2, 0));
        let one = PolyForm::monomial(AltIndex::from_axes(2, &[]).unwrap(), Polynomial::one(2));
        assert_eq!(integrate_exact(&x1, &one, ReferenceCell::Simplex(2)).unwrap(), rat(1, 6));
        let dx1 = PolyForm::monomial(AltIndex::from_axes(2, &[0]).unwrap(), Polynomial::one(2));
        assert_eq!(integrate_exact(&dx1, &dx1, ReferenceCell::Cube(2)).unwrap(), rat(1, 1));
    }
}
