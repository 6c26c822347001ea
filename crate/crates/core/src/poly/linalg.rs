//! Exact rational linear algebra used by the space constructions.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Zero};

use super::form::PolyForm;
use super::polynomial::Rational;
use crate::error::{Error, Result};

/// Incremental row echelon form over the rationals.
#[derive(Clone, Debug, Default)]
pub struct Echelon {
    rows: Vec<(usize, Vec<Rational>)>,
}

impl Echelon {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    /// Reduce `v` against the stored rows.
    pub fn reduce(&self, mut v: Vec<Rational>) -> Vec<Rational> {
        for (p, row) in &self.rows {
            if v.len() <= *p || v[*p].is_zero() {
                continue;
            }
            let f = v[*p].clone();
            for (vi, ri) in v.iter_mut().zip(row) {
                if !ri.is_zero() {
                    *vi -= &f * ri;
                }
            }
        }
        v
    }

    /// Insert `v`; returns true when it enlarged the span.
    pub fn insert(&mut self, v: Vec<Rational>) -> bool {
        let mut r = self.reduce(v);
        let Some(p) = r.iter().position(|c| !c.is_zero()) else {
            return false;
        };
        let inv = r[p].recip();
        for c in r.iter_mut() {
            *c *= &inv;
        }
        for (_, row) in self.rows.iter_mut() {
            if row.len() > p && !row[p].is_zero() {
                let f = row[p].clone();
                for (a, b) in row.iter_mut().zip(&r) {
                    if !b.is_zero() {
                        *a -= &f * b;
                    }
                }
            }
        }
        self.rows.push((p, r));
        true
    }

    pub fn contains(&self, v: Vec<Rational>) -> bool {
        self.reduce(v).iter().all(Zero::is_zero)
    }
}

pub fn rank(rows: &[Vec<Rational>]) -> usize {
    let mut e = Echelon::new();
    rows.iter().filter(|r| e.insert((*r).clone())).count()
}

/// Indices of a maximal independent subset, chosen greedily in order.
pub fn independent_rows(rows: &[Vec<Rational>]) -> Vec<usize> {
    let mut e = Echelon::new();
    rows.iter().enumerate().filter(|(_, r)| e.insert((*r).clone())).map(|(i, _)| i).collect()
}

/// Determinant by fraction-free (Bareiss) elimination on an integer matrix
/// obtained by clearing row denominators.
pub fn determinant(m: &[Vec<Rational>]) -> Result<Rational> {
    let n = m.len();
    if m.iter().any(|r| r.len() != n) {
        return Err(Error::DimensionMismatch(format!("determinant of a non-square {}-row matrix", n)));
    }
    if n == 0 {
        return Ok(Rational::one());
    }
    let mut scale = BigInt::one();
    let mut a: Vec<Vec<BigInt>> = m
        .iter()
        .map(|row| {
            let l = row.iter().fold(BigInt::one(), |acc, c| acc.lcm(c.denom()));
            scale *= &l;
            row.iter().map(|c| (c * Rational::from_integer(l.clone())).to_integer()).collect()
        })
        .collect();
    let mut sign = BigInt::one();
    let mut prev = BigInt::one();
    for k in 0..n {
        if a[k][k].is_zero() {
            match (k + 1..n).find(|&r| !a[r][k].is_zero()) {
                Some(r) => {
                    a.swap(k, r);
                    sign = -sign;
                }
                None => return Ok(Rational::zero()),
            }
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let v = &a[i][j] * &a[k][k] - &a[i][k] * &a[k][j];
                a[i][j] = v / &prev;
            }
        }
        prev = a[k][k].clone();
    }
    Ok(Rational::new(sign * &a[n - 1][n - 1], scale))
}

/// Inverse by Gauss–Jordan elimination.
pub fn inverse(m: &[Vec<Rational>]) -> Result<Vec<Vec<Rational>>> {
    let n = m.len();
    if m.iter().any(|r| r.len() != n) {
        return Err(Error::DimensionMismatch("inverse of a non-square matrix".into()));
    }
    let mut a: Vec<Vec<Rational>> = m
        .iter()
        .enumerate()
        .map(|(i, r)| {
            let mut row = r.clone();
            row.extend((0..n).map(|j| if i == j { Rational::one() } else { Rational::zero() }));
            row
        })
        .collect();
    for c in 0..n {
        let p = (c..n).find(|&r| !a[r][c].is_zero()).ok_or_else(|| Error::Singular("matrix is singular".into()))?;
        a.swap(p, c);
        let inv = a[c][c].recip();
        for v in a[c].iter_mut() {
            *v *= &inv;
        }
        let pivot = a[c].clone();
        for (r, row) in a.iter_mut().enumerate() {
            if r == c || row[c].is_zero() {
                continue;
            }
            let f = row[c].clone();
            for (x, y) in row.iter_mut().zip(&pivot) {
                if !y.is_zero() {
                    *x -= &f * y;
                }
            }
        }
    }
    Ok(a.into_iter().map(|r| r[n..].to_vec()).collect())
}

/// Coordinates of polynomial forms over the union of their monomial supports.
pub fn coordinate_rows(forms: &[&PolyForm]) -> Vec<Vec<Rational>> {
    let mut cols: BTreeMap<(usize, Vec<u8>), usize> = BTreeMap::new();
    for f in forms {
        for (r, e, _) in f.monomial_terms() {
            let len = cols.len();
            cols.entry((r, e.clone())).or_insert(len);
        }
    }
    forms
        .iter()
        .map(|f| {
            let mut row = vec![Rational::zero(); cols.len()];
            for (r, e, c) in f.monomial_terms() {
                row[cols[&(r, e.clone())]] = c.clone();
            }
            row
        })
        .collect()
}

pub fn span_rank(forms: &[&PolyForm]) -> usize {
    rank(&coordinate_rows(forms))
}

/// True when every form in `small` lies in the span of `big`.
pub fn span_contains(big: &[&PolyForm], small: &[&PolyForm]) -> bool {
    let all: Vec<&PolyForm> = big.iter().chain(small.iter()).copied().collect();
    let rows = coordinate_rows(&all);
    rank(&rows[..big.len()]) == rank(&rows)
}

pub fn span_equal(a: &[&PolyForm], b: &[&PolyForm]) -> bool {
    span_contains(a, b) && span_contains(b, a)
}

pub fn mat_mul(a: &[Vec<Rational>], b: &[Vec<Rational>]) -> Vec<Vec<Rational>> {
    let m = b.first().map_or(0, |r| r.len());
    a.iter()
        .map(|row| {
            (0..m)
                .map(|j| {
                    row.iter().zip(b).fold(Rational::zero(), |acc, (x, br)| if x.is_zero() { acc } else { acc + x * &br[j] })
                })
                .collect()
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::alt::rat;

    fn m(v: &[&[i64]]) -> Vec<Vec<Rational>> {
        v.iter().map(|r| r.iter().map(|&x| rat(x, 1)).collect()).collect()
    }

    #[test]
    fn bareiss_matches_cofactor_values() {
        assert_eq!(determinant(&m(&[&[2, 1], &[1, 3]])).unwrap(), rat(5, 1));
        assert_eq!(determinant(&m(&[&[0, 1, 0], &[1, 0, 0], &[0, 0, 1]])).unwrap(), rat(-1, 1));
        assert_eq!(determinant(&m(&[&[1, 2], &[2, 4]])).unwrap(), rat(0, 1));
        let h = vec![vec![rat(1, 2), rat(1, 3)], vec![rat(1, 3), rat(1, 4)]];
        assert_eq!(determinant(&h).unwrap(), rat(1, 72));
        assert!(determinant(&m(&[&[1, 2]])).is_err());
    }

    #[test]
    fn inverse_and_rank() {
        let a = m(&[&[2, 1, 0], &[1, 2, 1], &[0, 1, 2]]);
        let inv = inverse(&a).unwrap();
        assert_eq!(mat_mul(&a, &inv), m(&[&[1, 0, 0], &[0, 1, 0], &[0, 0, 1]]));
        assert_eq!(rank(&m(&[&[1, 2, 3], &[2, 4, 6], &[0, 1, 0]])), 2);
        assert_eq!(independent_rows(&m(&[&[1, 2], &[2, 4], &[0, 1]])), vec![0, 2]);
        assert!(inverse(&m(&[&[1, 2], &[2, 4]])).is_err());
    }
}
