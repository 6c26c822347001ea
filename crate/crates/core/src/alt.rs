//! Constant alternating forms on ℝⁿ.
//!
//! Coefficients are stored densely over the increasing index sets Σ(k) in
//! lexicographic order. Every module in the crate shares this layout, so a
//! coefficient vector produced here can be indexed with [`AltIndex::rank`].

use std::fmt;
use std::ops::Neg;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Num, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Largest ambient dimension supported by the index machinery.
pub const MAX_DIM: usize = 8;

/// Scalar field used by the algebra: exact rationals or binary64.
pub trait Scalar: Clone + PartialEq + fmt::Debug + Num + Neg<Output = Self> {
    fn from_i64(v: i64) -> Self;
    /// Pivot magnitude used by elimination routines.
    fn magnitude(&self) -> f64;
    fn to_f64(&self) -> f64;
}

impl Scalar for f64 {
    fn from_i64(v: i64) -> Self {
        v as f64
    }
    fn magnitude(&self) -> f64 {
        self.abs()
    }
    fn to_f64(&self) -> f64 {
        *self
    }
}

impl Scalar for BigRational {
    fn from_i64(v: i64) -> Self {
        BigRational::from_integer(BigInt::from(v))
    }
    fn magnitude(&self) -> f64 {
        if self.is_zero() {
            0.0
        } else {
            1.0
        }
    }
    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }
}

/// Shorthand for an exact rational.
pub fn rat(num: i64, den: i64) -> BigRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

pub fn binomial(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc = 1usize;
    for i in 0..k {
        acc = acc * (n - i) / (i + 1);
    }
    acc
}

/// An increasing index sequence σ₁ < … < σ_k drawn from the axes of ℝⁿ.
///
/// Axes are stored 0-based; [`AltIndex::one_based`] gives the conventional
/// 1-based entries.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct AltIndex {
    n: u8,
    mask: u16,
}

impl AltIndex {
    pub fn from_axes(n: usize, axes: &[usize]) -> Result<Self> {
        if n > MAX_DIM {
            return Err(Error::OutOfRange(format!("ambient dimension {n} > {MAX_DIM}")));
        }
        let mut mask = 0u16;
        let mut prev: Option<usize> = None;
        for &a in axes {
            if a >= n || prev.is_some_and(|p| p >= a) {
                return Err(Error::OutOfRange(format!(
                    "index entries {axes:?} not strictly increasing in 0..{n}"
                )));
            }
            mask |= 1 << a;
            prev = Some(a);
        }
        Ok(AltIndex { n: n as u8, mask })
    }

    pub(crate) fn from_mask(n: usize, mask: u16) -> Self {
        debug_assert!(n <= MAX_DIM && (mask as u32) < (1u32 << n));
        AltIndex { n: n as u8, mask }
    }

    pub fn n(&self) -> usize {
        self.n as usize
    }

    pub fn degree(&self) -> usize {
        self.mask.count_ones() as usize
    }

    pub fn mask(&self) -> u16 {
        self.mask
    }

    pub fn contains(&self, axis: usize) -> bool {
        self.mask & (1 << axis) != 0
    }

    /// 0-based axes in increasing order.
    pub fn axes(&self) -> Vec<usize> {
        (0..self.n()).filter(|&a| self.contains(a)).collect()
    }

    pub fn one_based(&self) -> Vec<usize> {
        self.axes().into_iter().map(|a| a + 1).collect()
    }

    /// The complementary sequence σ*.
    pub fn complement(&self) -> AltIndex {
        let full = ((1u32 << self.n) - 1) as u16;
        AltIndex { n: self.n, mask: full & !self.mask }
    }

    /// Position of this index in the lexicographic ordering of Σ(k).
    pub fn rank(&self) -> usize {
        let n = self.n();
        let k = self.degree();
        let mut r = 0;
        let mut start = 0;
        for (i, c) in self.axes().into_iter().enumerate() {
            for j in start..c {
                r += binomial(n - 1 - j, k - 1 - i);
            }
            start = c + 1;
        }
        r
    }
}

impl fmt::Debug for AltIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "dx{:?}", self.one_based())
    }
}

/// Σ(k) for ℝⁿ in lexicographic order.
pub fn alt_index_set(n: usize, k: usize) -> Result<Vec<AltIndex>> {
    if n > MAX_DIM || k > n {
        return Err(Error::OutOfRange(format!("alt_index_set(n={n}, k={k})")));
    }
    Ok(itertools::Itertools::combinations(0..n, k)
        .map(|c| AltIndex::from_axes(n, &c).expect("combinations are increasing"))
        .collect())
}

/// Sign of the permutation sorting the concatenation of two disjoint index sets.
pub(crate) fn merge_sign(a: u16, b: u16) -> i64 {
    let mut inversions = 0u32;
    let mut bb = b;
    while bb != 0 {
        let j = bb.trailing_zeros();
        inversions += (a >> (j + 1)).count_ones();
        bb &= bb - 1;
    }
    if inversions % 2 == 0 {
        1
    } else {
        -1
    }
}

/// Determinant by elimination with magnitude pivoting.
pub fn determinant<S: Scalar>(mut m: Vec<Vec<S>>) -> S {
    let n = m.len();
    let mut det = S::one();
    for col in 0..n {
        let pivot = (col..n)
            .filter(|&r| !m[r][col].is_zero())
            .max_by(|&a, &b| m[a][col].magnitude().total_cmp(&m[b][col].magnitude()));
        let Some(p) = pivot else {
            return S::zero();
        };
        if p != col {
            m.swap(p, col);
            det = -det;
        }
        let pv = m[col][col].clone();
        det = det * pv.clone();
        for r in col + 1..n {
            if m[r][col].is_zero() {
                continue;
            }
            let factor = m[r][col].clone() / pv.clone();
            for c in col..n {
                let delta = factor.clone() * m[col][c].clone();
                m[r][c] = m[r][c].clone() - delta;
            }
        }
    }
    det
}

/// Inverse by Gauss–Jordan elimination with magnitude pivoting; `None` when
/// a pivot vanishes.
pub fn invert<S: Scalar>(m: &[Vec<S>]) -> Option<Vec<Vec<S>>> {
    let n = m.len();
    let mut a: Vec<Vec<S>> = m
        .iter()
        .enumerate()
        .map(|(i, r)| {
            let mut row = r.clone();
            row.extend((0..n).map(|j| if i == j { S::one() } else { S::zero() }));
            row
        })
        .collect();
    for c in 0..n {
        let p = (c..n)
            .filter(|&r| !a[r][c].is_zero())
            .max_by(|&x, &y| a[x][c].magnitude().total_cmp(&a[y][c].magnitude()))?;
        a.swap(p, c);
        let pv = a[c][c].clone();
        for v in a[c].iter_mut() {
            *v = v.clone() / pv.clone();
        }
        for r in 0..n {
            if r == c || a[r][c].is_zero() {
                continue;
            }
            let f = a[r][c].clone();
            for j in 0..2 * n {
                let delta = f.clone() * a[c][j].clone();
                a[r][j] = a[r][j].clone() - delta;
            }
        }
    }
    Some(a.into_iter().map(|r| r[n..].to_vec()).collect())
}

/// A constant alternating k-form on ℝⁿ.
#[derive(Clone, PartialEq, Debug)]
pub struct AltForm<S> {
    n: usize,
    k: usize,
    coeffs: Vec<S>,
}

impl<S: Scalar> AltForm<S> {
    pub fn zero(n: usize, k: usize) -> Self {
        assert!(k <= n && n <= MAX_DIM, "invalid degree {k} for dimension {n}");
        AltForm { n, k, coeffs: vec![S::zero(); binomial(n, k)] }
    }

    pub fn from_coeffs(n: usize, k: usize, coeffs: Vec<S>) -> Result<Self> {
        if k > n || n > MAX_DIM || coeffs.len() != binomial(n, k) {
            return Err(Error::DimensionMismatch(format!(
                "{} coefficients for Alt^{k}(R^{n})",
                coeffs.len()
            )));
        }
        Ok(AltForm { n, k, coeffs })
    }

    /// The basis form dx_σ.
    pub fn basis(index: AltIndex) -> Self {
        let mut f = Self::zero(index.n(), index.degree());
        f.coeffs[index.rank()] = S::one();
        f
    }

    /// dx_axis as a 1-form.
    pub fn dx(n: usize, axis: usize) -> Self {
        Self::basis(AltIndex::from_mask(n, 1 << axis))
    }

    pub fn n(&self) -> usize {
        self.n
    }
    pub fn degree(&self) -> usize {
        self.k
    }
    pub fn coeffs(&self) -> &[S] {
        &self.coeffs
    }
    pub fn into_coeffs(self) -> Vec<S> {
        self.coeffs
    }
    pub fn coeff(&self, index: AltIndex) -> &S {
        &self.coeffs[index.rank()]
    }
    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_zero())
    }

    /// (index, coefficient) pairs with nonzero coefficient.
    pub fn terms(&self) -> impl Iterator<Item = (AltIndex, &S)> + '_ {
        let idx = alt_index_set(self.n, self.k).expect("valid degree");
        idx.into_iter().zip(self.coeffs.iter()).filter(|(_, c)| !c.is_zero())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_same(other)?;
        let coeffs = self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a.clone() + b.clone()).collect();
        Ok(AltForm { n: self.n, k: self.k, coeffs })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.check_same(other)?;
        let coeffs = self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a.clone() - b.clone()).collect();
        Ok(AltForm { n: self.n, k: self.k, coeffs })
    }

    pub fn scale(&self, s: &S) -> Self {
        AltForm { n: self.n, k: self.k, coeffs: self.coeffs.iter().map(|c| c.clone() * s.clone()).collect() }
    }

    fn check_same(&self, other: &Self) -> Result<()> {
        if self.n != other.n || self.k != other.k {
            return Err(Error::DimensionMismatch(format!(
                "Alt^{}(R^{}) vs Alt^{}(R^{})",
                self.k, self.n, other.k, other.n
            )));
        }
        Ok(())
    }

    pub fn wedge(&self, other: &Self) -> Result<Self> {
        if self.n != other.n || self.k + other.k > self.n {
            return Err(Error::DimensionMismatch(format!(
                "wedge of degrees {} and {} in R^{} / R^{}",
                self.k, other.k, self.n, other.n
            )));
        }
        let mut out = Self::zero(self.n, self.k + other.k);
        for (a, ca) in self.terms() {
            for (b, cb) in other.terms() {
                if a.mask() & b.mask() != 0 {
                    continue;
                }
                let idx = AltIndex::from_mask(self.n, a.mask() | b.mask());
                let s = S::from_i64(merge_sign(a.mask(), b.mask()));
                let r = idx.rank();
                out.coeffs[r] = out.coeffs[r].clone() + s * ca.clone() * cb.clone();
            }
        }
        Ok(out)
    }

    /// ⟨a, b⟩ over the orthonormal basis {dx_σ}.
    pub fn inner(&self, other: &Self) -> Result<S> {
        self.check_same(other)?;
        Ok(self
            .coeffs
            .iter()
            .zip(&other.coeffs)
            .fold(S::zero(), |acc, (a, b)| acc + a.clone() * b.clone()))
    }

    /// Interior product a ⌟ v (insert v into the first slot).
    pub fn contract(&self, v: &[S]) -> Result<Self> {
        if self.k == 0 {
            return Err(Error::DegreeZero("contraction"));
        }
        if v.len() != self.n {
            return Err(Error::DimensionMismatch(format!("vector of length {} in R^{}", v.len(), self.n)));
        }
        let mut out = Self::zero(self.n, self.k - 1);
        for (idx, c) in self.terms() {
            for (pos, axis) in idx.axes().into_iter().enumerate() {
                if v[axis].is_zero() {
                    continue;
                }
                let rest = AltIndex::from_mask(self.n, idx.mask() & !(1 << axis));
                let term = c.clone() * v[axis].clone();
                let r = rest.rank();
                out.coeffs[r] = if pos % 2 == 0 {
                    out.coeffs[r].clone() + term
                } else {
                    out.coeffs[r].clone() - term
                };
            }
        }
        Ok(out)
    }

    /// Evaluate the form on k vectors.
    pub fn apply(&self, vectors: &[Vec<S>]) -> Result<S> {
        if vectors.len() != self.k || vectors.iter().any(|v| v.len() != self.n) {
            return Err(Error::DimensionMismatch(format!(
                "{} vectors applied to a {}-form on R^{}",
                vectors.len(),
                self.k,
                self.n
            )));
        }
        let mut acc = S::zero();
        for (idx, c) in self.terms() {
            let axes = idx.axes();
            let m: Vec<Vec<S>> = axes.iter().map(|&a| vectors.iter().map(|v| v[a].clone()).collect()).collect();
            acc = acc + c.clone() * determinant(m);
        }
        Ok(acc)
    }

    /// Pullback under a linear map L: ℝᵐ → ℝⁿ given as an n×m row-major
    /// matrix: (L*a)(t₁,…) = a(Lt₁,…).
    pub fn pullback(&self, map: &[Vec<S>]) -> Result<Self> {
        if map.len() != self.n {
            return Err(Error::DimensionMismatch(format!("pullback matrix with {} rows for R^{}", map.len(), self.n)));
        }
        let m = map.first().map_or(0, |r| r.len());
        if self.k > m {
            return Err(Error::DimensionMismatch(format!("pullback of a {}-form to R^{m}", self.k)));
        }
        let targets = alt_index_set(m, self.k)?;
        let mut out = Self::zero(m, self.k);
        for (idx, c) in self.terms() {
            let rows = idx.axes();
            for (r, t) in targets.iter().enumerate() {
                let cols = t.axes();
                let minor: Vec<Vec<S>> =
                    rows.iter().map(|&i| cols.iter().map(|&j| map[i][j].clone()).collect()).collect();
                let d = determinant(minor);
                if !d.is_zero() {
                    out.coeffs[r] = out.coeffs[r].clone() + c.clone() * d;
                }
            }
        }
        Ok(out)
    }
}

impl AltForm<f64> {
    pub fn max_abs(&self) -> f64 {
        self.coeffs.iter().fold(0.0, |m, c| m.max(c.abs()))
    }

    /// Inner product weighted by a symmetric matrix acting on coefficients.
    pub fn weighted_inner(&self, weight: &[Vec<f64>], other: &Self) -> f64 {
        let mut acc = 0.0;
        for (i, a) in self.coeffs.iter().enumerate() {
            let mut wb = 0.0;
            for (j, b) in other.coeffs.iter().enumerate() {
                wb += weight[i][j] * b;
            }
            acc += a * wb;
        }
        acc
    }
}

impl AltForm<BigRational> {
    pub fn to_f64(&self) -> AltForm<f64> {
        AltForm { n: self.n, k: self.k, coeffs: self.coeffs.iter().map(Scalar::to_f64).collect() }
    }
}
