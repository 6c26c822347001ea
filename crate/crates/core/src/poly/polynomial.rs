use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::alt::Scalar;

pub type Rational = BigRational;
pub type Exponents = Vec<u8>;

/// Multivariate polynomial with exact rational coefficients.
#[derive(Clone, PartialEq, Eq)]
pub struct Polynomial {
    n: usize,
    terms: BTreeMap<Exponents, Rational>,
}

fn factorial(m: usize) -> BigInt {
    (1..=m).fold(BigInt::one(), |acc, i| acc * BigInt::from(i))
}

impl Polynomial {
    pub fn zero(n: usize) -> Self {
        Polynomial { n, terms: BTreeMap::new() }
    }

    pub fn constant(n: usize, c: Rational) -> Self {
        Self::monomial(n, vec![0; n], c)
    }

    pub fn one(n: usize) -> Self {
        Self::constant(n, Rational::one())
    }

    /// The coordinate function x_i.
    pub fn var(n: usize, i: usize) -> Self {
        let mut e = vec![0; n];
        e[i] = 1;
        Self::monomial(n, e, Rational::one())
    }

    pub fn monomial(n: usize, exps: Exponents, c: Rational) -> Self {
        assert_eq!(exps.len(), n);
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(exps, c);
        }
        Polynomial { n, terms }
    }

    pub fn nvars(&self) -> usize {
        self.n
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Exponents, &Rational)> {
        self.terms.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn coeff(&self, exps: &[u8]) -> Rational {
        self.terms.get(exps).cloned().unwrap_or_else(Rational::zero)
    }

    fn add_term(&mut self, exps: Exponents, c: Rational) {
        if c.is_zero() {
            return;
        }
        match self.terms.get_mut(&exps) {
            Some(v) => {
                *v += c;
                if v.is_zero() {
                    self.terms.remove(&exps);
                }
            }
            None => {
                self.terms.insert(exps, c);
            }
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.n, other.n);
        let mut out = self.clone();
        for (e, c) in &other.terms {
            out.add_term(e.clone(), c.clone());
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(&-Rational::one()))
    }

    pub fn scale(&self, s: &Rational) -> Self {
        if s.is_zero() {
            return Self::zero(self.n);
        }
        Polynomial { n: self.n, terms: self.terms.iter().map(|(e, c)| (e.clone(), c * s)).collect() }
    }

    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.n, other.n);
        let mut out = Self::zero(self.n);
        for (ea, ca) in &self.terms {
            for (eb, cb) in &other.terms {
                let e: Exponents = ea.iter().zip(eb).map(|(a, b)| a + b).collect();
                out.add_term(e, ca * cb);
            }
        }
        out
    }

    pub fn pow(&self, p: u32) -> Self {
        (0..p).fold(Self::one(self.n), |acc, _| acc.mul(self))
    }

    /// ∂/∂x_i
    pub fn derivative(&self, i: usize) -> Self {
        let mut out = Self::zero(self.n);
        for (e, c) in &self.terms {
            if e[i] == 0 {
                continue;
            }
            let mut d = e.clone();
            d[i] -= 1;
            out.add_term(d, c * Rational::from_integer(BigInt::from(e[i])));
        }
        out
    }

    /// Largest exponent of x_i.
    pub fn degree_in(&self, i: usize) -> u8 {
        self.terms.keys().map(|e| e[i]).max().unwrap_or(0)
    }

    pub fn total_degree(&self) -> u32 {
        self.terms.keys().map(|e| e.iter().map(|&a| a as u32).sum()).max().unwrap_or(0)
    }

    /// True when every variable appears with exponent at most one.
    pub fn is_multilinear(&self) -> bool {
        self.terms.keys().all(|e| e.iter().all(|&a| a <= 1))
    }

    pub fn is_homogeneous(&self, degree: u32) -> bool {
        self.terms.keys().all(|e| e.iter().map(|&a| a as u32).sum::<u32>() == degree)
    }

    pub fn eval(&self, x: &[Rational]) -> Rational {
        assert_eq!(x.len(), self.n);
        let mut acc = Rational::zero();
        for (e, c) in &self.terms {
            let mut t = c.clone();
            for (xi, &a) in x.iter().zip(e) {
                for _ in 0..a {
                    t *= xi;
                }
            }
            acc += t;
        }
        acc
    }

    pub fn eval_f64(&self, x: &[f64]) -> f64 {
        self.terms
            .iter()
            .map(|(e, c)| {
                Scalar::to_f64(c) * x.iter().zip(e).map(|(xi, &a)| xi.powi(a as i32)).product::<f64>()
            })
            .sum()
    }

    /// Substitute x_i = Σ_j map[i].0[j]·y_j + map[i].1, giving a polynomial in
    /// the m variables y.
    pub fn compose_affine(&self, map: &[(Vec<Rational>, Rational)], m: usize) -> Self {
        assert_eq!(map.len(), self.n);
        let lin: Vec<Polynomial> = map
            .iter()
            .map(|(a, b)| {
                let mut p = Self::constant(m, b.clone());
                for (j, aj) in a.iter().enumerate() {
                    if !aj.is_zero() {
                        p = p.add(&Self::var(m, j).scale(aj));
                    }
                }
                p
            })
            .collect();
        let mut powers: Vec<Vec<Polynomial>> = lin.iter().map(|l| vec![Self::one(m), l.clone()]).collect();
        let mut out = Self::zero(m);
        for (e, c) in &self.terms {
            let mut t = Self::constant(m, c.clone());
            for (i, &a) in e.iter().enumerate() {
                while powers[i].len() <= a as usize {
                    let next = powers[i].last().unwrap().mul(&lin[i]);
                    powers[i].push(next);
                }
                if a > 0 {
                    t = t.mul(&powers[i][a as usize]);
                }
            }
            out = out.add(&t);
        }
        out
    }

    /// ∫ over [0,1]ⁿ.
    pub fn integrate_unit_box(&self) -> Rational {
        let mut acc = Rational::zero();
        for (e, c) in &self.terms {
            let den: BigInt = e.iter().map(|&a| BigInt::from(a as u32 + 1)).product();
            acc += c / Rational::from_integer(den);
        }
        acc
    }

    /// ∫ over the unit simplex {x ≥ 0, Σx ≤ 1}: Π αᵢ! / (|α| + n)!.
    pub fn integrate_unit_simplex(&self) -> Rational {
        let mut acc = Rational::zero();
        for (e, c) in &self.terms {
            let num: BigInt = e.iter().map(|&a| factorial(a as usize)).product();
            let total: usize = e.iter().map(|&a| a as usize).sum::<usize>() + self.n;
            acc += c * Rational::new(num, factorial(total));
        }
        acc
    }
}

impl fmt::Debug for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (e, c) in &self.terms {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            write!(f, "{c}")?;
            for (i, &a) in e.iter().enumerate() {
                match a {
                    0 => {}
                    1 => write!(f, "·x{}", i + 1)?,
                    _ => write!(f, "·x{}^{a}", i + 1)?,
                }
            }
        }
        Ok(())
    }
}

/// Compact binary64 copy of a polynomial for fast evaluation.
#[derive(Clone, Debug, Default)]
pub struct FloatPolynomial {
    terms: Vec<(Exponents, f64)>,
}

impl FloatPolynomial {
    pub fn eval(&self, x: &[f64]) -> f64 {
        let mut acc = 0.0;
        for (e, c) in &self.terms {
            let mut t = *c;
            for (xi, &a) in x.iter().zip(e) {
                for _ in 0..a {
                    t *= xi;
                }
            }
            acc += t;
        }
        acc
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }
}

impl From<&Polynomial> for FloatPolynomial {
    fn from(p: &Polynomial) -> Self {
        FloatPolynomial { terms: p.terms.iter().map(|(e, c)| (e.clone(), Scalar::to_f64(c))).collect() }
    }
}

/// Absolute value helper for reports.
pub fn abs_rational(x: &Rational) -> Rational {
    x.abs()
}
