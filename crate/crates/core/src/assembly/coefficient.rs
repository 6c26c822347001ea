use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::alt::{binomial, invert};
use crate::error::{Error, Result};
use crate::mesh::MeshComplex;
use crate::numeric::{sym_eigenvalues, to_mat};

/// Piecewise constant symmetric positive definite map on Altᵏ coefficients.
#[derive(Clone, Debug, PartialEq)]
pub struct CoefficientField {
    k: usize,
    size: usize,
    cells: Vec<Vec<Vec<f64>>>,
    inverses: Vec<Vec<Vec<f64>>>,
}

#[derive(Serialize, Deserialize)]
struct CoefficientFile {
    k: usize,
    cells: Vec<Vec<Vec<f64>>>,
}

impl CoefficientField {
    /// Validate symmetry and positive definiteness of every cell matrix.
    pub fn new(n: usize, k: usize, cells: Vec<Vec<Vec<f64>>>) -> Result<Self> {
        let size = binomial(n, k);
        let mut inverses = Vec::with_capacity(cells.len());
        for (c, m) in cells.iter().enumerate() {
            if m.len() != size || m.iter().any(|r| r.len() != size) {
                return Err(Error::NotSpd { cell: c, reason: format!("expected a {size}x{size} matrix") });
            }
            let scale = m.iter().flatten().fold(0.0f64, |a, v| a.max(v.abs()));
            for i in 0..size {
                for j in 0..i {
                    if (m[i][j] - m[j][i]).abs() > 1e-12 * scale {
                        return Err(Error::NotSpd { cell: c, reason: "not symmetric".into() });
                    }
                }
            }
            let ev = sym_eigenvalues(&to_mat(m))?;
            if !(ev[0] > 0.0) {
                return Err(Error::NotSpd { cell: c, reason: format!("minimum eigenvalue {:e}", ev[0]) });
            }
            inverses.push(invert(m).ok_or(Error::NotSpd { cell: c, reason: "singular".into() })?);
        }
        Ok(CoefficientField { k, size, cells, inverses })
    }

    pub fn identity(mesh: &MeshComplex, k: usize) -> Self {
        Self::scalar(mesh, k, 1.0)
    }

    pub fn scalar(mesh: &MeshComplex, k: usize, value: f64) -> Self {
        let size = binomial(mesh.dim(), k);
        let m: Vec<Vec<f64>> = (0..size).map(|i| (0..size).map(|j| if i == j { value } else { 0.0 }).collect()).collect();
        let inv: Vec<Vec<f64>> =
            (0..size).map(|i| (0..size).map(|j| if i == j { 1.0 / value } else { 0.0 }).collect()).collect();
        CoefficientField { k, size, cells: vec![m; mesh.num_cells()], inverses: vec![inv; mesh.num_cells()] }
    }

    /// Piecewise constant on a background grid of `blocks` boxes per axis
    /// over the bounding box of the mesh: each box gets a random rotation of
    /// diag(1, …, ratio), or 1 or `ratio` for scalar forms. Cells take the
    /// value of the box containing their center, so nested refinements of an
    /// aligned mesh see the same coefficient.
    pub fn random_anisotropic(mesh: &MeshComplex, k: usize, ratio: f64, seed: u64, blocks: usize) -> Result<Self> {
        if blocks == 0 {
            return Err(Error::OutOfRange("zero coefficient blocks".into()));
        }
        let n = mesh.dim();
        let size = binomial(n, k);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let values: Vec<Vec<Vec<f64>>> = (0..blocks.pow(n as u32))
            .map(|_| {
                if size == 1 {
                    return vec![vec![if rng.gen_bool(0.5) { ratio } else { 1.0 }]];
                }
                let q = random_orthogonal(&mut rng, size);
                let eig: Vec<f64> =
                    (0..size).map(|i| if i == 0 { 1.0 } else if i == size - 1 { ratio } else { rng.gen_range(1.0..ratio) }).collect();
                (0..size)
                    .map(|i| (0..size).map(|j| (0..size).map(|l| q[i][l] * eig[l] * q[j][l]).sum()).collect())
                    .collect()
            })
            .collect();
        let lo: Vec<f64> = (0..n).map(|a| mesh.vertices().iter().map(|v| v[a]).fold(f64::INFINITY, f64::min)).collect();
        let hi: Vec<f64> = (0..n).map(|a| mesh.vertices().iter().map(|v| v[a]).fold(f64::NEG_INFINITY, f64::max)).collect();
        let cells = (0..mesh.num_cells())
            .map(|c| {
                let x = mesh.cell_center(c);
                let index = (0..n).rev().fold(0, |acc, a| {
                    let t = ((x[a] - lo[a]) / (hi[a] - lo[a]) * blocks as f64).floor() as usize;
                    acc * blocks + t.min(blocks - 1)
                });
                values[index].clone()
            })
            .collect();
        Self::new(n, k, symmetrized(cells))
    }

    /// The same matrix on every cell.
    pub fn constant(mesh: &MeshComplex, k: usize, matrix: Vec<Vec<f64>>) -> Result<Self> {
        Self::new(mesh.dim(), k, vec![matrix; mesh.num_cells()])
    }

    pub fn from_json_str(n: usize, s: &str) -> Result<Self> {
        let f: CoefficientFile = serde_json::from_str(s)?;
        Self::new(n, f.k, f.cells)
    }

    pub fn from_json_file(n: usize, path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json_str(n, &std::fs::read_to_string(path)?)
    }

    pub fn to_json_string(&self) -> Result<String> {
        Ok(serde_json::to_string(&CoefficientFile { k: self.k, cells: self.cells.clone() })?)
    }

    pub fn degree(&self) -> usize {
        self.k
    }
    pub fn size(&self) -> usize {
        self.size
    }
    pub fn num_cells(&self) -> usize {
        self.cells.len()
    }
    pub fn cell(&self, c: usize) -> &[Vec<f64>] {
        &self.cells[c]
    }
    pub fn inverse(&self, c: usize) -> &[Vec<f64>] {
        &self.inverses[c]
    }

    /// Ratio of the largest to the smallest eigenvalue over all cells.
    pub fn anisotropy(&self) -> Result<f64> {
        let mut lo = f64::INFINITY;
        let mut hi: f64 = 0.0;
        for m in &self.cells {
            let ev = sym_eigenvalues(&to_mat(m))?;
            lo = lo.min(ev[0]);
            hi = hi.max(ev[ev.len() - 1]);
        }
        Ok(hi / lo)
    }

    pub fn check_for(&self, mesh: &MeshComplex, k: usize) -> Result<()> {
        if self.k != k || self.cells.len() != mesh.num_cells() || self.size != binomial(mesh.dim(), k) {
            return Err(Error::DimensionMismatch(format!(
                "coefficient field of degree {} on {} cells used for degree {k} on {} cells",
                self.k,
                self.cells.len(),
                mesh.num_cells()
            )));
        }
        Ok(())
    }
}

/// A random rotation of diag(1, …, ratio), or `[[ratio]]` when size = 1.
pub fn anisotropic_matrix(size: usize, ratio: f64, seed: u64) -> Vec<Vec<f64>> {
    if size == 1 {
        return vec![vec![ratio]];
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let q = random_orthogonal(&mut rng, size);
    let eig: Vec<f64> = (0..size).map(|i| 1.0 + (ratio - 1.0) * i as f64 / (size - 1) as f64).collect();
    let m = (0..size).map(|i| (0..size).map(|j| (0..size).map(|l| q[i][l] * eig[l] * q[j][l]).sum()).collect()).collect();
    symmetrized(vec![m]).remove(0)
}

fn symmetrized(cells: Vec<Vec<Vec<f64>>>) -> Vec<Vec<Vec<f64>>> {
    cells
        .into_iter()
        .map(|m| {
            let s = m.len();
            (0..s).map(|i| (0..s).map(|j| 0.5 * (m[i][j] + m[j][i])).collect()).collect()
        })
        .collect()
}

/// Gram–Schmidt orthonormalization of a random matrix.
fn random_orthogonal(rng: &mut ChaCha8Rng, n: usize) -> Vec<Vec<f64>> {
    let mut cols: Vec<Vec<f64>> = Vec::with_capacity(n);
    while cols.len() < n {
        let mut v: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        for c in &cols {
            let p: f64 = v.iter().zip(c).map(|(a, b)| a * b).sum();
            v.iter_mut().zip(c).for_each(|(a, b)| *a -= p * b);
        }
        let nv = v.iter().map(|a| a * a).sum::<f64>().sqrt();
        if nv > 1e-6 {
            cols.push(v.into_iter().map(|a| a / nv).collect());
        }
    }
    (0..n).map(|i| (0..n).map(|j| cols[j][i]).collect()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{build_grid, Domain, MeshKind};

    #[test]
    fn validation_and_json() {
        let m = build_grid(Domain::UnitSquare, MeshKind::Cubical, 1).unwrap();
        let k = CoefficientField::random_anisotropic(&m, 1, 100.0, 5, 2).unwrap();
        assert!((k.anisotropy().unwrap() - 100.0).abs() < 1e-9);
        let back = CoefficientField::from_json_str(2, &k.to_json_string().unwrap()).unwrap();
        assert_eq!(back.num_cells(), 4);
        let bad = r#"{"k": 1, "cells": [[[1.0, 2.0], [2.0, 1.0]]]}"#;
        assert!(matches!(CoefficientField::from_json_str(2, bad), Err(Error::NotSpd { .. })));
        let asym = r#"{"k": 1, "cells": [[[1.0, 0.5], [0.0, 1.0]]]}"#;
        assert!(CoefficientField::from_json_str(2, asym).is_err());
    }

    #[test]
    fn blockwise_field_is_stable_under_refinement() {
        let coarse = build_grid(Domain::UnitSquare, MeshKind::Simplicial, 1).unwrap();
        let fine = build_grid(Domain::UnitSquare, MeshKind::Simplicial, 3).unwrap();
        let a = CoefficientField::random_anisotropic(&coarse, 1, 100.0, 7, 2).unwrap();
        let b = CoefficientField::random_anisotropic(&fine, 1, 100.0, 7, 2).unwrap();
        let block = |m: &MeshComplex, c: usize| {
            let x = m.cell_center(c);
            (x[0] > 0.5, x[1] > 0.5)
        };
        for cf in 0..fine.num_cells() {
            let cc = (0..coarse.num_cells()).find(|&c| block(&coarse, c) == block(&fine, cf)).unwrap();
            assert_eq!(a.cell(cc), b.cell(cf));
        }
        let distinct: std::collections::BTreeSet<String> = (0..fine.num_cells()).map(|c| format!("{:?}", b.cell(c))).collect();
        assert_eq!(distinct.len(), 4);
    }
}
