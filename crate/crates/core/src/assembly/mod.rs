//! Mass, coupling and stiffness matrices, vertex-quadrature lumping and the
//! numerical checks of the stability and consistency conditions.

mod blocks;
mod coefficient;
mod conditions;
mod norms;

use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::alt::{binomial, Scalar};
use crate::error::{Error, Result};
use crate::fe::{exterior_derivative_matrix, FeSpace};
use crate::mesh::{MeshComplex, MeshKind};
use crate::poly::Family;
use crate::quadrature::{cell_rule, Rule};
use crate::sparse::{Merge, SparseOperator};

pub use blocks::{BlockDiagonalOperator, VertexBlock};
pub use coefficient::{anisotropic_matrix, CoefficientField};
pub use conditions::{
    condition_a_extremes, verify_condition_a, verify_condition_b, ConditionALevel, ConditionAReport, ConditionBReport,
};
pub use norms::{l2_error, l2_error_d, l2_norm_of_field};

/// Gauss points per direction for exact mass matrices.
pub const MASS_POINTS: usize = 3;
/// Gauss points per direction for load vectors and error norms.
pub const LOAD_POINTS: usize = 4;

fn default_blocks() -> usize {
    2
}

/// How to build a coefficient field on a given mesh.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "type")]
pub enum CoefficientSpec {
    /// Unweighted products.
    #[default]
    Identity,
    Scalar { value: f64 },
    /// Random SPD matrices with eigenvalues in [1, ratio], constant on each
    /// box of a `blocks`-per-axis background grid.
    RandomAnisotropic {
        ratio: f64,
        seed: u64,
        #[serde(default = "default_blocks")]
        blocks: usize,
    },
    /// One SPD matrix on every cell.
    Constant { matrix: Vec<Vec<f64>> },
    /// One random rotation of diag(1, …, ratio) on every cell.
    ConstantAnisotropic { ratio: f64, seed: u64 },
    /// JSON file {"k", "cells"} matching the mesh.
    File { path: PathBuf },
}

impl CoefficientSpec {
    /// `None` for the unweighted path.
    pub fn build(&self, mesh: &MeshComplex, k: usize) -> Result<Option<CoefficientField>> {
        let field = match self {
            CoefficientSpec::Identity => return Ok(None),
            CoefficientSpec::Scalar { value } => {
                if !(*value > 0.0) {
                    return Err(Error::NotSpd { cell: 0, reason: format!("scalar coefficient {value}") });
                }
                CoefficientField::scalar(mesh, k, *value)
            }
            CoefficientSpec::RandomAnisotropic { ratio, seed, blocks } => {
                CoefficientField::random_anisotropic(mesh, k, *ratio, *seed, *blocks)?
            }
            CoefficientSpec::Constant { matrix } => CoefficientField::constant(mesh, k, matrix.clone())?,
            CoefficientSpec::ConstantAnisotropic { ratio, seed } => {
                CoefficientField::constant(mesh, k, anisotropic_matrix(binomial(mesh.dim(), k), *ratio, *seed))?
            }
            CoefficientSpec::File { path } => CoefficientField::from_json_file(mesh.dim(), path)?,
        };
        field.check_for(mesh, k)?;
        Ok(Some(field))
    }

    /// The matrix of a spatially constant field on forms with `size`
    /// components; `None` for the identity.
    pub fn constant_matrix(&self, size: usize) -> Result<Option<Vec<Vec<f64>>>> {
        let m = match self {
            CoefficientSpec::Identity => return Ok(None),
            CoefficientSpec::Scalar { value } => {
                (0..size).map(|i| (0..size).map(|j| if i == j { *value } else { 0.0 }).collect()).collect()
            }
            CoefficientSpec::Constant { matrix } => matrix.clone(),
            CoefficientSpec::ConstantAnisotropic { ratio, seed } => anisotropic_matrix(size, *ratio, *seed),
            other => return Err(Error::Unsupported(format!("closed-form solutions need a constant coefficient, got {other:?}"))),
        };
        Ok(Some(m))
    }
}

/// ⟨K⁻¹a, b⟩ on Alt coefficients.
#[inline]
pub(crate) fn weighted_dot(kinv: Option<&[Vec<f64>]>, a: &[f64], b: &[f64]) -> f64 {
    match kinv {
        None => a.iter().zip(b).map(|(x, y)| x * y).sum(),
        Some(m) => m.iter().zip(b).map(|(row, y)| row.iter().zip(a).map(|(r, x)| r * x).sum::<f64>() * y).sum(),
    }
}

fn check_pair(row: &FeSpace, col: &FeSpace, k: Option<&CoefficientField>) -> Result<()> {
    if !std::sync::Arc::ptr_eq(row.mesh(), col.mesh()) {
        return Err(Error::DimensionMismatch("spaces live on different meshes".into()));
    }
    if row.degree() != col.degree() {
        return Err(Error::DimensionMismatch(format!("forms of degree {} and {}", row.degree(), col.degree())));
    }
    if let Some(k) = k {
        k.check_for(row.mesh(), row.degree())?;
    }
    Ok(())
}

/// Physical values of all local basis functions of a cell at one point.
fn pushed(space: &FeSpace, c: usize, tab: &crate::fe::Tabulation, q: usize) -> Vec<Vec<f64>> {
    let map = space.cell_map(c);
    (0..tab.functions)
        .map(|j| {
            let mut out = vec![0.0; tab.components];
            map.push_forward(space.degree(), tab.get(q, j), &mut out);
            out
        })
        .collect()
}

/// Σ_T Σ_q w_q(T) ⟨K⁻¹ψ_j, ψ_i⟩ for a per-cell rule.
fn assemble_cross(
    row: &FeSpace,
    col: &FeSpace,
    k: Option<&CoefficientField>,
    points: &[Vec<f64>],
    weight: impl Fn(usize, usize) -> f64,
) -> Result<SparseOperator> {
    check_pair(row, col, k)?;
    let mesh = row.mesh();
    let tr = row.reference().tabulate(points);
    let tc = col.reference().tabulate(points);
    let mut trips = Vec::new();
    for c in 0..mesh.num_cells() {
        let kinv = k.map(|f| f.inverse(c));
        let (rd, cd) = (row.cell_dofs(c), col.cell_dofs(c));
        let mut local = vec![vec![0.0; cd.len()]; rd.len()];
        for q in 0..points.len() {
            let w = weight(c, q);
            let vr = pushed(row, c, &tr, q);
            let vc = pushed(col, c, &tc, q);
            for (i, a) in vr.iter().enumerate() {
                for (j, b) in vc.iter().enumerate() {
                    local[i][j] += w * weighted_dot(kinv, b, a);
                }
            }
        }
        for (i, &gi) in rd.iter().enumerate() {
            for (j, &gj) in cd.iter().enumerate() {
                if local[i][j] != 0.0 {
                    trips.push((gi, gj, local[i][j]));
                }
            }
        }
    }
    SparseOperator::from_triplets(row.dim(), col.dim(), trips, Merge::Sum)
}

/// Exact ∫⟨K⁻¹ψ_j, ψ_i⟩ between two spaces of the same degree.
pub fn cross_mass_exact(row: &FeSpace, col: &FeSpace, k: Option<&CoefficientField>) -> Result<SparseOperator> {
    let rule = cell_rule(row.mesh().reference_cell(), MASS_POINTS);
    assemble_cross(row, col, k, &rule.points, |c, q| rule.weights[q] * row.cell_map(c).jacobian_abs())
}

/// Exact L² mass matrix (weighted by K⁻¹ when given).
pub fn mass_exact(space: &FeSpace, k: Option<&CoefficientField>) -> Result<SparseOperator> {
    cross_mass_exact(space, space, k)?.mark_symmetric()
}

/// Reference vertices and the vertex-rule weight factor w_T / |T|.
fn vertex_rule(mesh: &MeshComplex) -> (Vec<Vec<f64>>, f64) {
    let cell = mesh.reference_cell();
    let pts = cell.vertices().iter().map(|v| v.iter().map(Scalar::to_f64).collect()).collect();
    let n = mesh.dim();
    let factor = match mesh.kind() {
        MeshKind::Simplicial => 1.0 / (n + 1) as f64,
        MeshKind::Cubical => 0.5f64.powi(n as i32),
    };
    (pts, factor)
}

/// ⟨ψ_j, ψ_i⟩_h from the vertex rule, for arbitrary spaces of one degree.
pub fn cross_mass_vertex(row: &FeSpace, col: &FeSpace, k: Option<&CoefficientField>) -> Result<SparseOperator> {
    let mesh = row.mesh().clone();
    let (pts, factor) = vertex_rule(&mesh);
    assemble_cross(row, col, k, &pts, |c, _| factor * mesh.cell_volume(c))
}

/// Lumped mass assembled directly into per-vertex blocks.
pub fn mass_lumped(space: &FeSpace, k: Option<&CoefficientField>) -> Result<BlockDiagonalOperator> {
    if !matches!(space.family(), Family::P1 | Family::S1Plus) {
        return Err(Error::Unsupported(format!("vertex lumping of {}", space.family())));
    }
    check_pair(space, space, k)?;
    let mesh = space.mesh();
    let (pts, factor) = vertex_rule(mesh);
    let tab = space.reference().tabulate(&pts);
    let reference = space.reference();
    let mut blocks: Vec<Vec<Vec<f64>>> =
        (0..mesh.num_vertices()).map(|v| vec![vec![0.0; space.anchored_at(v).len()]; space.anchored_at(v).len()]).collect();
    let mut position = vec![0usize; space.dim()];
    for v in 0..mesh.num_vertices() {
        for (p, &g) in space.anchored_at(v).iter().enumerate() {
            position[g] = p;
        }
    }
    for c in 0..mesh.num_cells() {
        let w = factor * mesh.cell_volume(c);
        let kinv = k.map(|f| f.inverse(c));
        let local = mesh.cell_local_vertices(c);
        let dofs = space.cell_dofs(c);
        for (a, &v) in local.iter().enumerate() {
            let at: Vec<usize> = (0..reference.dim()).filter(|&j| reference.dof_site(j).1 == Some(a)).collect();
            let vals = pushed(space, c, &tab, a);
            let block = &mut blocks[v];
            for &i in &at {
                for &j in &at {
                    block[position[dofs[i]]][position[dofs[j]]] += w * weighted_dot(kinv, &vals[j], &vals[i]);
                }
            }
        }
    }
    let list = blocks
        .into_iter()
        .enumerate()
        .map(|(v, m)| VertexBlock::new(v, space.anchored_at(v).to_vec(), m))
        .collect::<Result<Vec<_>>>()?;
    BlockDiagonalOperator::new(space.dim(), list)
}

/// ∫⟨f, ψ_i⟩ for a field given by its Alt coefficients.
pub fn load_vector<F: Fn(&[f64]) -> Vec<f64>>(space: &FeSpace, f: F) -> Vec<f64> {
    let mesh = space.mesh();
    let rule: Rule = cell_rule(mesh.reference_cell(), LOAD_POINTS);
    let tab = space.reference().tabulate(&rule.points);
    let mut out = vec![0.0; space.dim()];
    for c in 0..mesh.num_cells() {
        let map = space.cell_map(c);
        let jac = map.jacobian_abs();
        let dofs = space.cell_dofs(c);
        for (q, y) in rule.points.iter().enumerate() {
            let fx = f(&map.to_physical(y));
            let vals = pushed(space, c, &tab, q);
            for (j, v) in vals.iter().enumerate() {
                out[dofs[j]] += rule.weights[q] * jac * weighted_dot(None, &fx, v);
            }
        }
    }
    out
}

/// B_ij = ∫⟨dψ_j, φ_i⟩ assembled cell by cell, so entries exist only where
/// supports share a cell.
pub fn coupling_matrix(v_km1: &FeSpace, v_k: &FeSpace) -> Result<SparseOperator> {
    if !std::sync::Arc::ptr_eq(v_km1.mesh(), v_k.mesh()) || v_km1.degree() + 1 != v_k.degree() {
        return Err(Error::IllegalPair(format!("coupling {}Λ{} with {}Λ{}", v_km1.family(), v_km1.degree(), v_k.family(), v_k.degree())));
    }
    let mesh = v_k.mesh();
    let rule = cell_rule(mesh.reference_cell(), MASS_POINTS);
    let tr = v_k.reference().tabulate(&rule.points);
    let tc = v_km1.reference().tabulate_d(&rule.points);
    let mut trips = Vec::new();
    for c in 0..mesh.num_cells() {
        let jac = v_k.cell_map(c).jacobian_abs();
        let (rd, cd) = (v_k.cell_dofs(c), v_km1.cell_dofs(c));
        let mut local = vec![vec![0.0; cd.len()]; rd.len()];
        for (q, wq) in rule.weights.iter().enumerate() {
            let vr = pushed(v_k, c, &tr, q);
            let vc = pushed(v_k, c, &tc, q);
            for (i, a) in vr.iter().enumerate() {
                for (j, b) in vc.iter().enumerate() {
                    local[i][j] += wq * jac * weighted_dot(None, b, a);
                }
            }
        }
        for (i, &gi) in rd.iter().enumerate() {
            for (j, &gj) in cd.iter().enumerate() {
                if local[i][j] != 0.0 {
                    trips.push((gi, gj, local[i][j]));
                }
            }
        }
    }
    SparseOperator::from_triplets(v_k.dim(), v_km1.dim(), trips, Merge::Sum)
}

/// Matrices of the mixed formulation for V^{k−1} × V^k.
#[derive(Clone, Debug)]
pub struct MixedMatrices {
    /// d: V^{k−1} → V^k.
    pub d_km1: SparseOperator,
    /// d: V^k → V^{k+1} (absent when k = n).
    pub d_k: Option<SparseOperator>,
    pub mass_k: SparseOperator,
    pub mass_kp1: Option<SparseOperator>,
    /// B_ij = ⟨dψ_j, φ_i⟩, rows in V^k.
    pub coupling: SparseOperator,
    /// S = D_kᵀ M_{k+1} D_k.
    pub stiffness: SparseOperator,
}

/// The Whitney-type space V^{k+1} receiving d of V^k.
pub fn next_space(v_k: &FeSpace) -> Result<Option<FeSpace>> {
    if v_k.degree() == v_k.mesh().dim() {
        return Ok(None);
    }
    let family = match v_k.mesh().kind() {
        MeshKind::Simplicial => Family::P1MinusLocal,
        MeshKind::Cubical => Family::Q1Minus,
    };
    Ok(Some(FeSpace::new(v_k.mesh().clone(), family, v_k.degree() + 1)?))
}

pub fn mixed_matrices(v_km1: &FeSpace, v_k: &FeSpace) -> Result<MixedMatrices> {
    let d_km1 = exterior_derivative_matrix(v_km1, v_k)?;
    let mass_k = mass_exact(v_k, None)?;
    let coupling = coupling_matrix(v_km1, v_k)?;
    let (d_k, mass_kp1, stiffness) = stiffness_parts(v_k)?;
    Ok(MixedMatrices { d_km1, d_k, mass_k, mass_kp1, coupling, stiffness })
}

type StiffnessParts = (Option<SparseOperator>, Option<SparseOperator>, SparseOperator);

fn stiffness_parts(v_k: &FeSpace) -> Result<StiffnessParts> {
    Ok(match next_space(v_k)? {
        Some(v_kp1) => {
            let d = exterior_derivative_matrix(v_k, &v_kp1)?;
            let m = mass_exact(&v_kp1, None)?;
            let s = d.transpose().matmul(&m.matmul(&d)?)?.symmetrized()?;
            (Some(d), Some(m), s)
        }
        None => (None, None, SparseOperator::zeros(v_k.dim(), v_k.dim()).mark_symmetric()?),
    })
}

/// ⟨dψ_j, dψ_i⟩ on V^k (zero when k = n).
pub fn stiffness(v_k: &FeSpace) -> Result<SparseOperator> {
    Ok(stiffness_parts(v_k)?.2)
}
