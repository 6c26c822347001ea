//! Compressed sparse row matrices with deterministic assembly.

use faer::sparse::{SparseColMat, Triplet};
use faer::Mat;

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct SparseOperator {
    nrows: usize,
    ncols: usize,
    indptr: Vec<usize>,
    indices: Vec<usize>,
    data: Vec<f64>,
    symmetric: bool,
}

/// How repeated (row, col) entries are combined.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Merge {
    Sum,
    KeepFirst,
}

impl SparseOperator {
    pub fn zeros(nrows: usize, ncols: usize) -> Self {
        SparseOperator { nrows, ncols, indptr: vec![0; nrows + 1], indices: Vec::new(), data: Vec::new(), symmetric: false }
    }

    pub fn identity(n: usize) -> Self {
        SparseOperator {
            nrows: n,
            ncols: n,
            indptr: (0..=n).collect(),
            indices: (0..n).collect(),
            data: vec![1.0; n],
            symmetric: true,
        }
    }

    /// Build from (row, col, value) triplets. Duplicates are merged in input
    /// order after a stable sort, so the result is bit-reproducible.
    pub fn from_triplets(nrows: usize, ncols: usize, triplets: Vec<(usize, usize, f64)>, merge: Merge) -> Result<Self> {
        if let Some(&(r, c, _)) = triplets.iter().find(|(r, c, _)| *r >= nrows || *c >= ncols) {
            return Err(Error::OutOfRange(format!("entry ({r}, {c}) in a {nrows}x{ncols} matrix")));
        }
        let mut t = triplets;
        t.sort_by_key(|&(r, c, _)| (r, c));
        let mut indptr = vec![0usize; nrows + 1];
        let mut indices = Vec::with_capacity(t.len());
        let mut data: Vec<f64> = Vec::with_capacity(t.len());
        let mut last: Option<(usize, usize)> = None;
        for (r, c, v) in t {
            if last == Some((r, c)) {
                if merge == Merge::Sum {
                    *data.last_mut().expect("entry present") += v;
                }
                continue;
            }
            indices.push(c);
            data.push(v);
            indptr[r + 1] += 1;
            last = Some((r, c));
        }
        for r in 0..nrows {
            indptr[r + 1] += indptr[r];
        }
        Ok(SparseOperator { nrows, ncols, indptr, indices, data, symmetric: false })
    }

    pub fn from_dense(a: &[Vec<f64>]) -> Self {
        let ncols = a.first().map_or(0, |r| r.len());
        let trips = a
            .iter()
            .enumerate()
            .flat_map(|(i, row)| row.iter().enumerate().filter(|(_, v)| **v != 0.0).map(move |(j, &v)| (i, j, v)))
            .collect();
        Self::from_triplets(a.len(), ncols, trips, Merge::Sum).expect("indices in range")
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }
    pub fn ncols(&self) -> usize {
        self.ncols
    }
    pub fn nnz(&self) -> usize {
        self.data.len()
    }
    pub fn is_marked_symmetric(&self) -> bool {
        self.symmetric
    }

    /// Column indices and values of row i.
    pub fn row(&self, i: usize) -> (&[usize], &[f64]) {
        let (a, b) = (self.indptr[i], self.indptr[i + 1]);
        (&self.indices[a..b], &self.data[a..b])
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let (cols, vals) = self.row(i);
        cols.binary_search(&j).map_or(0.0, |p| vals[p])
    }

    pub fn triplets(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.nrows).flat_map(move |i| {
            let (c, v) = self.row(i);
            c.iter().zip(v).map(move |(&j, &x)| (i, j, x))
        })
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.ncols, "matvec dimension");
        (0..self.nrows)
            .map(|i| {
                let (c, v) = self.row(i);
                c.iter().zip(v).map(|(&j, &a)| a * x[j]).sum()
            })
            .collect()
    }

    pub fn transpose(&self) -> Self {
        let mut counts = vec![0usize; self.ncols + 1];
        for &j in &self.indices {
            counts[j + 1] += 1;
        }
        for j in 0..self.ncols {
            counts[j + 1] += counts[j];
        }
        let mut next = counts.clone();
        let mut indices = vec![0usize; self.nnz()];
        let mut data = vec![0.0; self.nnz()];
        for i in 0..self.nrows {
            let (c, v) = self.row(i);
            for (&j, &a) in c.iter().zip(v) {
                indices[next[j]] = i;
                data[next[j]] = a;
                next[j] += 1;
            }
        }
        SparseOperator { nrows: self.ncols, ncols: self.nrows, indptr: counts, indices, data, symmetric: self.symmetric }
    }

    pub fn transpose_matvec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.nrows, "transpose matvec dimension");
        let mut y = vec![0.0; self.ncols];
        for (i, xi) in x.iter().enumerate() {
            let (c, v) = self.row(i);
            for (&j, &a) in c.iter().zip(v) {
                y[j] += a * xi;
            }
        }
        y
    }

    /// Sparse product self · other.
    pub fn matmul(&self, other: &SparseOperator) -> Result<Self> {
        if self.ncols != other.nrows {
            return Err(Error::DimensionMismatch(format!(
                "product of {}x{} and {}x{}",
                self.nrows, self.ncols, other.nrows, other.ncols
            )));
        }
        let mut acc = vec![0.0; other.ncols];
        let mut mark = vec![usize::MAX; other.ncols];
        let mut indptr = vec![0usize; self.nrows + 1];
        let mut indices = Vec::new();
        let mut data = Vec::new();
        let mut touched: Vec<usize> = Vec::new();
        for i in 0..self.nrows {
            touched.clear();
            let (c, v) = self.row(i);
            for (&k, &a) in c.iter().zip(v) {
                let (c2, v2) = other.row(k);
                for (&j, &b) in c2.iter().zip(v2) {
                    if mark[j] != i {
                        mark[j] = i;
                        acc[j] = 0.0;
                        touched.push(j);
                    }
                    acc[j] += a * b;
                }
            }
            touched.sort_unstable();
            for &j in &touched {
                indices.push(j);
                data.push(acc[j]);
            }
            indptr[i + 1] = indices.len();
        }
        Ok(SparseOperator { nrows: self.nrows, ncols: other.ncols, indptr, indices, data, symmetric: false })
    }

    /// α·self + β·other.
    pub fn add_scaled(&self, alpha: f64, other: &SparseOperator, beta: f64) -> Result<Self> {
        if self.nrows != other.nrows || self.ncols != other.ncols {
            return Err(Error::DimensionMismatch("sum of differently shaped matrices".into()));
        }
        let trips = self
            .triplets()
            .map(|(i, j, v)| (i, j, alpha * v))
            .chain(other.triplets().map(|(i, j, v)| (i, j, beta * v)))
            .collect();
        let mut out = Self::from_triplets(self.nrows, self.ncols, trips, Merge::Sum)?;
        out.symmetric = self.symmetric && other.symmetric;
        Ok(out)
    }

    pub fn scale(&self, s: f64) -> Self {
        let mut out = self.clone();
        out.data.iter_mut().for_each(|v| *v *= s);
        out
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// max |A − Aᵀ| relative to max |A|.
    pub fn asymmetry(&self) -> f64 {
        if self.nrows != self.ncols {
            return f64::INFINITY;
        }
        let t = self.transpose();
        let diff = self.add_scaled(1.0, &t, -1.0).expect("square");
        let scale = self.max_abs();
        if scale == 0.0 {
            0.0
        } else {
            diff.max_abs() / scale
        }
    }

    /// Verify symmetry to 1e−12 relative and set the flag.
    pub fn mark_symmetric(mut self) -> Result<Self> {
        let a = self.asymmetry();
        if a > 1e-12 {
            return Err(Error::Solver(format!("matrix is not symmetric: relative asymmetry {a:e}")));
        }
        self.symmetric = true;
        Ok(self)
    }

    /// ½(A + Aᵀ), marked symmetric after the asymmetry check.
    pub fn symmetrized(&self) -> Result<Self> {
        let a = self.asymmetry();
        if a > 1e-12 {
            return Err(Error::Solver(format!("matrix is not symmetric: relative asymmetry {a:e}")));
        }
        let mut out = self.add_scaled(0.5, &self.transpose(), 0.5)?;
        out.symmetric = true;
        Ok(out)
    }

    pub fn submatrix(&self, rows: &[usize], cols: &[usize]) -> Vec<Vec<f64>> {
        rows.iter().map(|&i| cols.iter().map(|&j| self.get(i, j)).collect()).collect()
    }

    pub fn to_dense(&self) -> Mat<f64> {
        let mut m = Mat::zeros(self.nrows, self.ncols);
        for (i, j, v) in self.triplets() {
            m[(i, j)] += v;
        }
        m
    }

    pub fn to_faer(&self) -> Result<SparseColMat<usize, f64>> {
        let trips: Vec<Triplet<usize, usize, f64>> = self.triplets().map(|(i, j, v)| Triplet::new(i, j, v)).collect();
        SparseColMat::try_new_from_triplets(self.nrows, self.ncols, &trips)
            .map_err(|e| Error::Solver(format!("sparse conversion: {e:?}")))
    }

    /// Stack blocks [[A, B], [C, D]] given as a grid of optional operators.
    pub fn block(grid: &[Vec<Option<&SparseOperator>>], row_sizes: &[usize], col_sizes: &[usize]) -> Result<Self> {
        let roff: Vec<usize> = std::iter::once(0).chain(row_sizes.iter().scan(0, |s, &x| { *s += x; Some(*s) })).collect();
        let coff: Vec<usize> = std::iter::once(0).chain(col_sizes.iter().scan(0, |s, &x| { *s += x; Some(*s) })).collect();
        let mut trips = Vec::new();
        for (bi, row) in grid.iter().enumerate() {
            for (bj, blk) in row.iter().enumerate() {
                if let Some(b) = blk {
                    if b.nrows != row_sizes[bi] || b.ncols != col_sizes[bj] {
                        return Err(Error::DimensionMismatch(format!("block ({bi}, {bj})")));
                    }
                    trips.extend(b.triplets().map(|(i, j, v)| (i + roff[bi], j + coff[bj], v)));
                }
            }
        }
        Self::from_triplets(roff[row_sizes.len()], coff[col_sizes.len()], trips, Merge::Sum)
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn triplet_merge_and_products() {
        let a = SparseOperator::from_triplets(2, 3, vec![(0, 1, 1.0), (1, 2, 2.0), (0, 1, 0.5), (1, 0, -1.0)], Merge::Sum).unwrap();
        assert_eq!(a.get(0, 1), 1.5);
        assert_eq!(a.nnz(), 3);
        let k = SparseOperator::from_triplets(1, 1, vec![(0, 0, 1.0), (0, 0, 7.0)], Merge::KeepFirst).unwrap();
        assert_eq!(k.get(0, 0), 1.0);
        let at = a.transpose();
        assert_eq!(at.get(2, 1), 2.0);
        let ata = at.matmul(&a).unwrap();
        assert_eq!(ata.get(0, 0), 1.0);
        assert_eq!(ata.get(1, 1), 2.25);
        assert_eq!(ata.get(0, 2), -2.0);
        assert!(ata.asymmetry() == 0.0);
        assert_eq!(a.matvec(&[1.0, 1.0, 1.0]), vec![1.5, 1.0]);
        assert_eq!(a.transpose_matvec(&[1.0, 1.0]), at.matvec(&[1.0, 1.0]));
        let blk = SparseOperator::block(&[vec![Some(&a), None], vec![None, Some(&at)]], &[2, 3], &[3, 2]).unwrap();
        assert_eq!(blk.get(4, 4), 2.0);
        assert_eq!((blk.nrows(), blk.ncols()), (5, 5));
    }
}
