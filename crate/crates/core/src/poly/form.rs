use num_traits::{One, Zero};

use super::linalg;
use super::polynomial::{FloatPolynomial, Polynomial, Rational};
use crate::alt::{alt_index_set, binomial, AltForm, AltIndex, MAX_DIM};
use crate::error::{Error, Result};

/// A differential k-form on ℝⁿ with polynomial coefficients, stored densely
/// over Σ(k).
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct PolyForm {
    n: usize,
    k: usize,
    coeffs: Vec<Polynomial>,
}

impl PolyForm {
    pub fn zero(n: usize, k: usize) -> Self {
        assert!(k <= n && n <= MAX_DIM, "invalid degree {k} for dimension {n}");
        PolyForm { n, k, coeffs: vec![Polynomial::zero(n); binomial(n, k)] }
    }

    /// p·dx_σ
    pub fn monomial(index: AltIndex, p: Polynomial) -> Self {
        let mut f = Self::zero(index.n(), index.degree());
        assert_eq!(p.nvars(), index.n());
        f.coeffs[index.rank()] = p;
        f
    }

    /// p·a for a constant form a.
    pub fn from_alt(p: &Polynomial, a: &AltForm<Rational>) -> Self {
        let coeffs = a.coeffs().iter().map(|c| p.scale(c)).collect();
        PolyForm { n: a.n(), k: a.degree(), coeffs }
    }

    pub fn from_coeffs(n: usize, k: usize, coeffs: Vec<Polynomial>) -> Result<Self> {
        if k > n || coeffs.len() != binomial(n, k) || coeffs.iter().any(|p| p.nvars() != n) {
            return Err(Error::DimensionMismatch(format!("{} coefficients for a {k}-form on R^{n}", coeffs.len())));
        }
        Ok(PolyForm { n, k, coeffs })
    }

    pub fn n(&self) -> usize {
        self.n
    }
    pub fn degree(&self) -> usize {
        self.k
    }
    pub fn coeffs(&self) -> &[Polynomial] {
        &self.coeffs
    }
    pub fn coeff(&self, index: AltIndex) -> &Polynomial {
        &self.coeffs[index.rank()]
    }
    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(Polynomial::is_zero)
    }

    fn check_same(&self, other: &Self) -> Result<()> {
        if self.n != other.n || self.k != other.k {
            return Err(Error::DimensionMismatch(format!(
                "{}-form on R^{} vs {}-form on R^{}",
                self.k, self.n, other.k, other.n
            )));
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_same(other)?;
        let coeffs = self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a.add(b)).collect();
        Ok(PolyForm { n: self.n, k: self.k, coeffs })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.check_same(other)?;
        let coeffs = self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a.sub(b)).collect();
        Ok(PolyForm { n: self.n, k: self.k, coeffs })
    }

    pub fn scale(&self, s: &Rational) -> Self {
        PolyForm { n: self.n, k: self.k, coeffs: self.coeffs.iter().map(|p| p.scale(s)).collect() }
    }

    pub fn mul_poly(&self, p: &Polynomial) -> Self {
        PolyForm { n: self.n, k: self.k, coeffs: self.coeffs.iter().map(|c| c.mul(p)).collect() }
    }

    /// du = Σ_σ Σ_i ∂_i u_σ dx_i ∧ dx_σ; zero of degree n when k = n.
    pub fn d(&self) -> Self {
        if self.k == self.n {
            return Self::zero(self.n, self.k);
        }
        let mut out = Self::zero(self.n, self.k + 1);
        let idx = alt_index_set(self.n, self.k).expect("valid degree");
        for (sigma, p) in idx.iter().zip(&self.coeffs) {
            if p.is_zero() {
                continue;
            }
            for i in 0..self.n {
                if sigma.contains(i) {
                    continue;
                }
                let dp = p.derivative(i);
                if dp.is_zero() {
                    continue;
                }
                let bit = 1u16 << i;
                let target = AltIndex::from_mask(self.n, sigma.mask() | bit);
                let sign = crate::alt::merge_sign(bit, sigma.mask());
                let r = target.rank();
                out.coeffs[r] = if sign > 0 { out.coeffs[r].add(&dp) } else { out.coeffs[r].sub(&dp) };
            }
        }
        out
    }

    /// Koszul operator: contraction with x − base (base defaults to the origin).
    pub fn koszul(&self, base: Option<&[Rational]>) -> Result<Self> {
        if self.k == 0 {
            return Err(Error::DegreeZero("the Koszul operator"));
        }
        if let Some(b) = base {
            if b.len() != self.n {
                return Err(Error::DimensionMismatch(format!("base point of length {} in R^{}", b.len(), self.n)));
            }
        }
        let position: Vec<Polynomial> = (0..self.n)
            .map(|i| {
                let x = Polynomial::var(self.n, i);
                match base {
                    Some(b) => x.sub(&Polynomial::constant(self.n, b[i].clone())),
                    None => x,
                }
            })
            .collect();
        Ok(self.contract_field(&position))
    }

    /// Contraction with a polynomial vector field.
    fn contract_field(&self, v: &[Polynomial]) -> Self {
        let mut out = Self::zero(self.n, self.k - 1);
        let idx = alt_index_set(self.n, self.k).expect("valid degree");
        for (sigma, p) in idx.iter().zip(&self.coeffs) {
            if p.is_zero() {
                continue;
            }
            for (pos, axis) in sigma.axes().into_iter().enumerate() {
                if v[axis].is_zero() {
                    continue;
                }
                let rest = AltIndex::from_mask(self.n, sigma.mask() & !(1 << axis));
                let term = p.mul(&v[axis]);
                let r = rest.rank();
                out.coeffs[r] = if pos % 2 == 0 { out.coeffs[r].add(&term) } else { out.coeffs[r].sub(&term) };
            }
        }
        out
    }

    /// Contraction u ⌟ v with a constant vector.
    pub fn contract_const(&self, v: &[Rational]) -> Result<Self> {
        if self.k == 0 {
            return Err(Error::DegreeZero("contraction"));
        }
        if v.len() != self.n {
            return Err(Error::DimensionMismatch(format!("vector of length {} in R^{}", v.len(), self.n)));
        }
        let field: Vec<Polynomial> = v.iter().map(|c| Polynomial::constant(self.n, c.clone())).collect();
        Ok(self.contract_field(&field))
    }

    /// Pullback under φ(y) = A·y + b with A an n×m matrix.
    pub fn pullback(&self, a: &[Vec<Rational>], b: &[Rational]) -> Result<Self> {
        if a.len() != self.n || b.len() != self.n {
            return Err(Error::DimensionMismatch(format!("affine map with {} rows for R^{}", a.len(), self.n)));
        }
        let m = a.first().map_or(0, |r| r.len());
        if a.iter().any(|r| r.len() != m) {
            return Err(Error::DimensionMismatch("ragged affine map".into()));
        }
        if self.k > m {
            return Err(Error::DimensionMismatch(format!("pullback of a {}-form to R^{m}", self.k)));
        }
        let map: Vec<(Vec<Rational>, Rational)> = a.iter().cloned().zip(b.iter().cloned()).collect();
        let mut out = Self::zero(m, self.k);
        let idx = alt_index_set(self.n, self.k)?;
        for (sigma, p) in idx.iter().zip(&self.coeffs) {
            if p.is_zero() {
                continue;
            }
            let alt = AltForm::<Rational>::basis(*sigma).pullback(a)?;
            if alt.is_zero() {
                continue;
            }
            let q = p.compose_affine(&map, m);
            for (r, c) in alt.coeffs().iter().enumerate() {
                if !c.is_zero() {
                    out.coeffs[r] = out.coeffs[r].add(&q.scale(c));
                }
            }
        }
        Ok(out)
    }

    /// φ*u for φ(x) = D·x + b with D diagonal.
    pub fn pullback_affine(&self, diag: &[Rational], b: &[Rational]) -> Result<Self> {
        if diag.len() != self.n {
            return Err(Error::DimensionMismatch(format!("diagonal of length {} in R^{}", diag.len(), self.n)));
        }
        if diag.iter().any(Zero::is_zero) {
            return Err(Error::Singular("diagonal scaling has a zero entry".into()));
        }
        let a: Vec<Vec<Rational>> = (0..self.n)
            .map(|i| (0..self.n).map(|j| if i == j { diag[i].clone() } else { Rational::zero() }).collect())
            .collect();
        self.pullback(&a, b)
    }

    /// Trace on a face, expressed in the face's intrinsic coordinates.
    pub fn trace(&self, face: &AffineFace) -> Result<Self> {
        if face.n != self.n {
            return Err(Error::DimensionMismatch(format!("face in R^{} for a form on R^{}", face.n, self.n)));
        }
        if self.k > face.dim() {
            return Err(Error::OutOfRange(format!("trace of a {}-form on a {}-face", self.k, face.dim())));
        }
        self.pullback(&face.linear_part(), &face.origin)
    }

    pub fn eval(&self, x: &[Rational]) -> AltForm<Rational> {
        let c = self.coeffs.iter().map(|p| p.eval(x)).collect();
        AltForm::from_coeffs(self.n, self.k, c).expect("consistent layout")
    }

    /// Largest per-variable exponent over all coefficients.
    pub fn max_variable_degree(&self) -> u8 {
        self.coeffs.iter().flat_map(|p| (0..self.n).map(move |i| p.degree_in(i))).max().unwrap_or(0)
    }

    pub fn to_float(&self) -> FloatPolyForm {
        FloatPolyForm { n: self.n, k: self.k, coeffs: self.coeffs.iter().map(FloatPolynomial::from).collect() }
    }

    /// Flattened (σ rank, exponents, coefficient) triples.
    pub fn monomial_terms(&self) -> impl Iterator<Item = (usize, &Vec<u8>, &Rational)> + '_ {
        self.coeffs.iter().enumerate().flat_map(|(r, p)| p.terms().map(move |(e, c)| (r, e, c)))
    }
}

/// Binary64 copy of a [`PolyForm`] for pointwise evaluation.
#[derive(Clone, Debug)]
pub struct FloatPolyForm {
    n: usize,
    k: usize,
    coeffs: Vec<FloatPolynomial>,
}

impl FloatPolyForm {
    pub fn n(&self) -> usize {
        self.n
    }
    pub fn degree(&self) -> usize {
        self.k
    }
    pub fn eval_into(&self, x: &[f64], out: &mut [f64]) {
        for (o, p) in out.iter_mut().zip(&self.coeffs) {
            *o = p.eval(x);
        }
    }
    pub fn eval(&self, x: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.coeffs.len()];
        self.eval_into(x, &mut out);
        out
    }
}

/// An affine face embedded in ℝⁿ: x = origin + Σ_j y_j·frame_j.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct AffineFace {
    n: usize,
    origin: Vec<Rational>,
    frame: Vec<Vec<Rational>>,
    fixed: Option<Vec<(usize, Rational)>>,
}

impl AffineFace {
    /// Axis-aligned face obtained by fixing coordinates; free axes become the
    /// intrinsic coordinates in increasing order.
    pub fn box_face(n: usize, fixed: Vec<(usize, Rational)>) -> Result<Self> {
        let mut seen = vec![false; n];
        for (a, _) in &fixed {
            if *a >= n || seen[*a] {
                return Err(Error::OutOfRange(format!("fixed axis {a} in R^{n}")));
            }
            seen[*a] = true;
        }
        let mut origin = vec![Rational::zero(); n];
        for (a, v) in &fixed {
            origin[*a] = v.clone();
        }
        let frame = (0..n)
            .filter(|&a| !seen[a])
            .map(|a| (0..n).map(|i| if i == a { Rational::one() } else { Rational::zero() }).collect())
            .collect();
        let mut fixed = fixed;
        fixed.sort_by_key(|(a, _)| *a);
        Ok(AffineFace { n, origin, frame, fixed: Some(fixed) })
    }

    /// General chart with a base point and a tangent frame of full rank.
    pub fn chart(origin: Vec<Rational>, frame: Vec<Vec<Rational>>) -> Result<Self> {
        let n = origin.len();
        if frame.iter().any(|v| v.len() != n) || frame.len() > n {
            return Err(Error::DimensionMismatch(format!("frame of {} vectors in R^{n}", frame.len())));
        }
        if linalg::rank(&frame) != frame.len() {
            return Err(Error::Singular("tangent frame is rank deficient".into()));
        }
        Ok(AffineFace { n, origin, frame, fixed: None })
    }

    /// Chart of the simplex spanned by the given points, ordered as given.
    pub fn simplex(points: &[Vec<Rational>]) -> Result<Self> {
        let origin = points.first().cloned().ok_or_else(|| Error::InvalidMesh("empty simplex".into()))?;
        let frame = points[1..].iter().map(|p| p.iter().zip(&origin).map(|(a, b)| a - b).collect()).collect();
        Self::chart(origin, frame)
    }

    pub fn ambient_dim(&self) -> usize {
        self.n
    }
    pub fn dim(&self) -> usize {
        self.frame.len()
    }
    /// The point x^f corresponding to intrinsic coordinate 0.
    pub fn origin(&self) -> &[Rational] {
        &self.origin
    }
    pub fn frame(&self) -> &[Vec<Rational>] {
        &self.frame
    }
    pub fn fixed(&self) -> Option<&[(usize, Rational)]> {
        self.fixed.as_deref()
    }

    /// n×m matrix whose columns are the frame vectors.
    pub fn linear_part(&self) -> Vec<Vec<Rational>> {
        (0..self.n).map(|i| self.frame.iter().map(|v| v[i].clone()).collect()).collect()
    }

    pub fn point(&self, y: &[Rational]) -> Vec<Rational> {
        let mut x = self.origin.clone();
        for (yj, v) in y.iter().zip(&self.frame) {
            for (xi, vi) in x.iter_mut().zip(v) {
                *xi += yj * vi;
            }
        }
        x
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::alt::rat;

    fn x(n: usize, i: usize) -> Polynomial {
        Polynomial::var(n, i)
    }
    fn idx(n: usize, axes: &[usize]) -> AltIndex {
        AltIndex::from_axes(n, axes).unwrap()
    }

    #[test]
    fn derivative_examples() {
        let u = PolyForm::monomial(idx(2, &[]), x(2, 0).mul(&x(2, 1)));
        let du = u.d();
        assert_eq!(du.coeff(idx(2, &[0])), &x(2, 1));
        assert_eq!(du.coeff(idx(2, &[1])), &x(2, 0));
        let v = PolyForm::monomial(idx(2, &[1]), x(2, 0));
        assert_eq!(v.d().coeff(idx(2, &[0, 1])), &Polynomial::one(2));
        assert!(du.d().is_zero());
    }

    #[test]
    fn koszul_examples() {
        let e12 = PolyForm::monomial(idx(2, &[0, 1]), Polynomial::one(2));
        let k = e12.koszul(None).unwrap();
        assert_eq!(k.coeff(idx(2, &[1])), &x(2, 0));
        assert_eq!(k.coeff(idx(2, &[0])), &x(2, 1).scale(&rat(-1, 1)));
        let v = PolyForm::monomial(idx(2, &[1]), x(2, 0));
        let h = v.d().koszul(None).unwrap().add(&v.koszul(None).unwrap().d()).unwrap();
        assert_eq!(h, v.scale(&rat(2, 1)));
        assert!(PolyForm::zero(2, 0).koszul(None).is_err());
    }

    #[test]
    fn trace_examples() {
        let f = AffineFace::box_face(2, vec![(0, rat(1, 1))]).unwrap();
        let dx1 = PolyForm::monomial(idx(2, &[0]), Polynomial::one(2));
        assert!(dx1.trace(&f).unwrap().is_zero());
        let v = PolyForm::monomial(idx(2, &[1]), x(2, 0));
        let t = v.trace(&f).unwrap();
        assert_eq!(t, PolyForm::monomial(idx(1, &[0]), Polynomial::one(1)));
        let e12 = PolyForm::monomial(idx(2, &[0, 1]), Polynomial::one(2));
        assert!(e12.trace(&f).is_err());
    }

    #[test]
    fn pullback_examples() {
        let v = PolyForm::monomial(idx(2, &[1]), x(2, 0).mul(&x(2, 1)));
        let same = v.pullback_affine(&[rat(1, 1), rat(1, 1)], &[rat(0, 1), rat(0, 1)]).unwrap();
        assert_eq!(same, v);
        let d = [rat(2, 1), rat(1, 3)];
        let b = [rat(1, 2), rat(-1, 1)];
        assert_eq!(v.d().pullback_affine(&d, &b).unwrap(), v.pullback_affine(&d, &b).unwrap().d());
        assert!(v.pullback_affine(&[rat(0, 1), rat(1, 1)], &b).is_err());
    }

    #[test]
    fn simplex_chart_rejects_degenerate_frames() {
        let p = vec![vec![rat(0, 1), rat(0, 1)], vec![rat(1, 1), rat(1, 1)], vec![rat(2, 1), rat(2, 1)]];
        assert!(AffineFace::simplex(&p).is_err());
    }
}
