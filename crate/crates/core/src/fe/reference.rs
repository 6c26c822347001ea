use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use num_traits::Zero;

use crate::alt::{binomial, Scalar};
use crate::error::Result;
use crate::poly::spaces::dof_matrix;
use crate::poly::{linalg, shape_space_on, Dof, Family, FloatPolyForm, PolyForm, RefFace, ReferenceCell};

/// Local space on a reference cell with its exact dual basis.
#[derive(Debug)]
pub struct ReferenceElement {
    pub family: Family,
    pub cell: ReferenceCell,
    pub k: usize,
    pub dofs: Vec<Dof>,
    pub faces: Vec<RefFace>,
    /// ψ̂_j with dofs[i](ψ̂_j) = δ_ij.
    pub dual: Vec<PolyForm>,
    /// dψ̂_j (empty when k = n).
    pub dual_d: Vec<PolyForm>,
    float: Vec<FloatPolyForm>,
    float_d: Vec<FloatPolyForm>,
}

/// Basis values at a set of reference points, laid out as [point][function][σ].
#[derive(Clone, Debug)]
pub struct Tabulation {
    pub points: usize,
    pub functions: usize,
    pub components: usize,
    data: Vec<f64>,
}

impl Tabulation {
    pub fn get(&self, q: usize, j: usize) -> &[f64] {
        let s = (q * self.functions + j) * self.components;
        &self.data[s..s + self.components]
    }
}

type Key = (Family, ReferenceCell, usize);

fn cache() -> &'static Mutex<HashMap<Key, Arc<ReferenceElement>>> {
    static CACHE: OnceLock<Mutex<HashMap<Key, Arc<ReferenceElement>>>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

/// Cached reference element of a family.
pub fn reference_element(family: Family, cell: ReferenceCell, k: usize) -> Result<Arc<ReferenceElement>> {
    let mut guard = cache().lock().unwrap_or_else(|e| e.into_inner());
    if let Some(e) = guard.get(&(family, cell, k)) {
        return Ok(e.clone());
    }
    let e = Arc::new(ReferenceElement::build(family, cell, k)?);
    guard.insert((family, cell, k), e.clone());
    Ok(e)
}

impl ReferenceElement {
    fn build(family: Family, cell: ReferenceCell, k: usize) -> Result<Self> {
        let basis = shape_space_on(family, cell, k)?;
        let matrix = dof_matrix(&basis, &basis.dofs)?;
        let inv = linalg::inverse(&matrix)?;
        let n = cell.dim();
        let dual: Vec<PolyForm> = (0..basis.dim())
            .map(|j| {
                let mut acc = PolyForm::zero(n, k);
                for (l, f) in basis.functions.iter().enumerate() {
                    if !inv[l][j].is_zero() {
                        acc = acc.add(&f.scale(&inv[l][j])).expect("same degree");
                    }
                }
                acc
            })
            .collect();
        let dual_d: Vec<PolyForm> = if k < n { dual.iter().map(PolyForm::d).collect() } else { Vec::new() };
        Ok(ReferenceElement {
            family,
            cell,
            k,
            faces: cell.faces(k),
            dofs: basis.dofs,
            float: dual.iter().map(PolyForm::to_float).collect(),
            float_d: dual_d.iter().map(PolyForm::to_float).collect(),
            dual,
            dual_d,
        })
    }

    pub fn dim(&self) -> usize {
        self.dual.len()
    }

    pub fn n(&self) -> usize {
        self.cell.dim()
    }

    /// Reference face and local anchor vertex of local DOF j.
    pub fn dof_site(&self, j: usize) -> (Option<usize>, Option<usize>) {
        (self.dofs[j].face(), self.dofs[j].anchor())
    }

    pub fn tabulate(&self, points: &[Vec<f64>]) -> Tabulation {
        tabulate(&self.float, binomial(self.n(), self.k), points)
    }

    /// Tabulation of dψ̂ (requires k < n).
    pub fn tabulate_d(&self, points: &[Vec<f64>]) -> Tabulation {
        tabulate(&self.float_d, binomial(self.n(), self.k + 1), points)
    }

    pub fn eval(&self, j: usize, y: &[f64]) -> Vec<f64> {
        self.float[j].eval(y)
    }

    pub fn eval_d(&self, j: usize, y: &[f64]) -> Vec<f64> {
        self.float_d[j].eval(y)
    }

    /// Matrix T[i][j] = dst.dofs[i](ψ̂_j) or, with `derivative`, of dψ̂_j.
    pub fn transfer_to(&self, dst: &ReferenceElement, derivative: bool) -> Result<Vec<Vec<f64>>> {
        let src = if derivative { &self.dual_d } else { &self.dual };
        dst.dofs
            .iter()
            .map(|d| src.iter().map(|u| d.apply(dst.cell, &dst.faces, u).map(|r| Scalar::to_f64(&r))).collect())
            .collect()
    }
}

fn tabulate(forms: &[FloatPolyForm], components: usize, points: &[Vec<f64>]) -> Tabulation {
    let mut data = vec![0.0; points.len() * forms.len() * components];
    for (q, y) in points.iter().enumerate() {
        for (j, f) in forms.iter().enumerate() {
            let s = (q * forms.len() + j) * components;
            f.eval_into(y, &mut data[s..s + components]);
        }
    }
    Tabulation { points: points.len(), functions: forms.len(), components, data }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::alt::rat;

    #[test]
    fn dual_basis_is_dual() {
        for (fam, cell, k) in [
            (Family::P1, ReferenceCell::Simplex(2), 1),
            (Family::P1MinusLocal, ReferenceCell::Simplex(3), 2),
            (Family::S1Plus, ReferenceCell::Cube(2), 1),
            (Family::Q1Minus, ReferenceCell::Cube(3), 1),
            (Family::P0, ReferenceCell::Cube(2), 1),
        ] {
            let e = reference_element(fam, cell, k).unwrap();
            for (i, d) in e.dofs.iter().enumerate() {
                for (j, u) in e.dual.iter().enumerate() {
                    let v = d.apply(cell, &e.faces, u).unwrap();
                    assert_eq!(v, rat((i == j) as i64, 1), "{fam} {i} {j}");
                }
            }
        }
    }

    #[test]
    fn p1_dual_is_barycentric_basis() {
        // λ₀dλ₁ at v₀ equals dx₁ on the unit triangle.
        let e = reference_element(Family::P1, ReferenceCell::Simplex(2), 1).unwrap();
        assert_eq!(e.eval(0, &[0.0, 0.0]), vec![1.0, 0.0]);
    }
}
