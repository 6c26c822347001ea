use faer::Side;

use crate::error::{Error, Result};
use crate::numeric::to_mat;
use crate::sparse::{Merge, SparseOperator};

/// Dense SPD block over the DOFs anchored at one vertex.
#[derive(Clone, Debug, PartialEq)]
pub struct VertexBlock {
    pub vertex: usize,
    pub dofs: Vec<usize>,
    pub matrix: Vec<Vec<f64>>,
    /// Lower Cholesky factor.
    factor: Vec<Vec<f64>>,
}

impl VertexBlock {
    pub fn new(vertex: usize, dofs: Vec<usize>, matrix: Vec<Vec<f64>>) -> Result<Self> {
        let m = dofs.len();
        if matrix.len() != m || matrix.iter().any(|r| r.len() != m) {
            return Err(Error::DimensionMismatch(format!("block at vertex {vertex}")));
        }
        let factor = if m == 0 {
            Vec::new()
        } else {
            let llt = to_mat(&matrix)
                .llt(Side::Lower)
                .map_err(|_| Error::Solver(format!("block at vertex {vertex} is not positive definite")))?;
            let l = llt.L();
            (0..m).map(|i| (0..m).map(|j| if j <= i { l[(i, j)] } else { 0.0 }).collect()).collect()
        };
        Ok(VertexBlock { vertex, dofs, matrix, factor })
    }

    /// Solve the block system for a right-hand side in block ordering.
    pub fn solve(&self, rhs: &[f64]) -> Vec<f64> {
        let l = &self.factor;
        let m = rhs.len();
        let mut y = rhs.to_vec();
        for i in 0..m {
            let s: f64 = (0..i).map(|j| l[i][j] * y[j]).sum();
            y[i] = (y[i] - s) / l[i][i];
        }
        for i in (0..m).rev() {
            let s: f64 = (i + 1..m).map(|j| l[j][i] * y[j]).sum();
            y[i] = (y[i] - s) / l[i][i];
        }
        y
    }
}

/// Block diagonal operator indexed by vertices.
#[derive(Clone, Debug, PartialEq)]
pub struct BlockDiagonalOperator {
    dim: usize,
    blocks: Vec<VertexBlock>,
    /// (block, position) of every DOF.
    owner: Vec<(usize, usize)>,
}

impl BlockDiagonalOperator {
    /// Blocks must partition 0..dim.
    pub fn new(dim: usize, blocks: Vec<VertexBlock>) -> Result<Self> {
        let mut owner = vec![(usize::MAX, 0); dim];
        for (b, blk) in blocks.iter().enumerate() {
            for (p, &g) in blk.dofs.iter().enumerate() {
                if g >= dim || owner[g].0 != usize::MAX {
                    return Err(Error::DimensionMismatch(format!("dof {g} listed twice or out of range")));
                }
                owner[g] = (b, p);
            }
        }
        if let Some(g) = owner.iter().position(|o| o.0 == usize::MAX) {
            return Err(Error::DimensionMismatch(format!("dof {g} belongs to no block")));
        }
        Ok(BlockDiagonalOperator { dim, blocks, owner })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn blocks(&self) -> &[VertexBlock] {
        &self.blocks
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let (bi, pi) = self.owner[i];
        let (bj, pj) = self.owner[j];
        if bi == bj {
            self.blocks[bi].matrix[pi][pj]
        } else {
            0.0
        }
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.dim];
        for b in &self.blocks {
            for (i, &gi) in b.dofs.iter().enumerate() {
                y[gi] = b.matrix[i].iter().zip(&b.dofs).map(|(a, &gj)| a * x[gj]).sum();
            }
        }
        y
    }

    /// Independent per-block solves.
    pub fn solve(&self, rhs: &[f64]) -> Vec<f64> {
        let mut x = vec![0.0; self.dim];
        for b in &self.blocks {
            let local: Vec<f64> = b.dofs.iter().map(|&g| rhs[g]).collect();
            for (&g, v) in b.dofs.iter().zip(b.solve(&local)) {
                x[g] = v;
            }
        }
        x
    }

    pub fn to_sparse(&self) -> SparseOperator {
        self.assemble(|b| b.matrix.clone())
    }

    /// Block-diagonal inverse as a sparse matrix.
    pub fn inverse_sparse(&self) -> SparseOperator {
        self.assemble(|b| {
            let m = b.dofs.len();
            let cols: Vec<Vec<f64>> =
                (0..m).map(|j| b.solve(&(0..m).map(|i| if i == j { 1.0 } else { 0.0 }).collect::<Vec<_>>())).collect();
            (0..m).map(|i| (0..m).map(|j| 0.5 * (cols[j][i] + cols[i][j])).collect()).collect()
        })
    }

    fn assemble(&self, dense: impl Fn(&VertexBlock) -> Vec<Vec<f64>>) -> SparseOperator {
        let mut trips = Vec::new();
        for b in &self.blocks {
            let m = dense(b);
            for (i, &gi) in b.dofs.iter().enumerate() {
                for (j, &gj) in b.dofs.iter().enumerate() {
                    trips.push((gi, gj, m[i][j]));
                }
            }
        }
        SparseOperator::from_triplets(self.dim, self.dim, trips, Merge::Sum)
            .and_then(|s| s.mark_symmetric())
            .expect("blocks are symmetric and in range")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn block_solve_inverts_apply() {
        let b0 = VertexBlock::new(0, vec![2, 0], vec![vec![4.0, 1.0], vec![1.0, 3.0]]).unwrap();
        let b1 = VertexBlock::new(1, vec![1], vec![vec![2.0]]).unwrap();
        let op = BlockDiagonalOperator::new(3, vec![b0, b1]).unwrap();
        let x = vec![1.0, -2.0, 0.5];
        let back = op.solve(&op.apply(&x));
        assert!(back.iter().zip(&x).all(|(a, b)| (a - b).abs() < 1e-14));
        assert_eq!(op.get(2, 0), 1.0);
        assert_eq!(op.get(1, 0), 0.0);
        assert!(VertexBlock::new(0, vec![0], vec![vec![-1.0]]).is_err());
        assert!(BlockDiagonalOperator::new(4, vec![]).is_err());
    }
}
