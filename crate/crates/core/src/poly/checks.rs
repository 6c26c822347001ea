//! Exact verification suites for the form algebra and the S1⁺ construction.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::form::{AffineFace, PolyForm};
use super::linalg::{span_contains, span_equal, span_rank};
use super::polynomial::{Polynomial, Rational};
use super::spaces::{b_lambda_functions, s1plus_moment_dofs, shape_space, unisolvency_matrix, Family, ReferenceCell};
use crate::alt::{binomial, rat, AltForm};
use crate::error::Result;

#[derive(Clone, Debug, Serialize)]
pub struct CheckResult {
    pub name: String,
    pub n: usize,
    pub k: usize,
    pub passed: bool,
    pub detail: String,
}

impl CheckResult {
    fn new(name: &str, n: usize, k: usize, passed: bool, detail: impl Into<String>) -> Self {
        CheckResult { name: name.to_string(), n, k, passed, detail: detail.into() }
    }
}

fn small_rational(rng: &mut ChaCha8Rng) -> Rational {
    rat(rng.gen_range(-5..=5), rng.gen_range(1..=3))
}

/// Random polynomial with total degree ≤ `degree` (or exactly `degree` when
/// `homogeneous`).
pub fn random_polynomial(rng: &mut ChaCha8Rng, n: usize, degree: u32, homogeneous: bool, terms: usize) -> Polynomial {
    let mut p = Polynomial::zero(n);
    for _ in 0..terms {
        let target = if homogeneous { degree } else { rng.gen_range(0..=degree) };
        let mut e = vec![0u8; n];
        if n > 0 {
            for _ in 0..target {
                e[rng.gen_range(0..n)] += 1;
            }
        } else if target > 0 {
            continue;
        }
        p = p.add(&Polynomial::monomial(n, e, small_rational(rng)));
    }
    p
}

pub fn random_form(rng: &mut ChaCha8Rng, n: usize, k: usize, degree: u32, homogeneous: bool) -> PolyForm {
    let coeffs = (0..binomial(n, k)).map(|_| random_polynomial(rng, n, degree, homogeneous, 3)).collect();
    PolyForm::from_coeffs(n, k, coeffs).expect("consistent layout")
}

fn random_alt(rng: &mut ChaCha8Rng, n: usize, k: usize) -> AltForm<Rational> {
    AltForm::from_coeffs(n, k, (0..binomial(n, k)).map(|_| small_rational(rng)).collect()).expect("layout")
}

/// d∘d = 0, κ∘κ = 0, the homotopy formula and the antiderivation law on
/// `samples` random forms per (n, k), n ≤ n_max.
pub fn algebra_suite(n_max: usize, samples: usize, seed: u64) -> Result<Vec<CheckResult>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::new();
    for n in 1..=n_max {
        for k in 0..=n {
            let mut dd = 0;
            let mut kk = 0;
            let mut homotopy = 0;
            let mut anti = 0;
            for s in 0..samples {
                let u = random_form(&mut rng, n, k, 3, false);
                if u.d().d().is_zero() {
                    dd += 1;
                }
                if k < 2 || u.koszul(None)?.koszul(None)?.is_zero() {
                    kk += 1;
                }
                let r = (s % 4) as u32;
                let h = random_form(&mut rng, n, k, r, true);
                let mut lhs = PolyForm::zero(n, k);
                if k < n {
                    lhs = lhs.add(&h.d().koszul(None)?)?;
                }
                if k > 0 {
                    lhs = lhs.add(&h.koszul(None)?.d())?;
                }
                if lhs == h.scale(&rat((r + k as u32) as i64, 1)) {
                    homotopy += 1;
                }
                // (a∧b)⌟v = (a⌟v)∧b + (−1)^j a∧(b⌟v)
                let j = rng.gen_range(0..=k);
                let a = random_alt(&mut rng, n, j);
                let b = random_alt(&mut rng, n, k - j);
                let v: Vec<Rational> = (0..n).map(|_| small_rational(&mut rng)).collect();
                if k == 0 || antiderivation_residual_is_zero(&a, &b, &v)? {
                    anti += 1;
                }
            }
            let total = samples;
            out.push(CheckResult::new("d∘d = 0", n, k, dd == total, format!("{dd}/{total}")));
            out.push(CheckResult::new("κ∘κ = 0", n, k, kk == total, format!("{kk}/{total}")));
            out.push(CheckResult::new("(κd + dκ)u = (r + k)u", n, k, homotopy == total, format!("{homotopy}/{total}")));
            out.push(CheckResult::new("antiderivation", n, k, anti == total, format!("{anti}/{total}")));
        }
    }
    Ok(out)
}

fn antiderivation_residual_is_zero(a: &AltForm<Rational>, b: &AltForm<Rational>, v: &[Rational]) -> Result<bool> {
    let n = a.n();
    let j = a.degree();
    let lhs = a.wedge(b)?.contract(v)?;
    let mut rhs = AltForm::zero(n, lhs.degree());
    if j > 0 {
        rhs = rhs.add(&a.contract(v)?.wedge(b)?)?;
    }
    if b.degree() > 0 {
        let t = a.wedge(&b.contract(v)?)?;
        rhs = if j % 2 == 0 { rhs.add(&t)? } else { rhs.sub(&t)? };
    }
    Ok(lhs.sub(&rhs)?.is_zero())
}

/// Form monomial degree profile: per-variable degree ≤ 2 with at most one
/// quadratic variable.
fn at_most_one_quadratic(u: &PolyForm) -> bool {
    u.monomial_terms().all(|(_, e, _)| e.iter().all(|&a| a <= 2) && e.iter().filter(|&&a| a == 2).count() <= 1)
}

/// Random positive diagonal dilation and translation.
fn random_dilation(rng: &mut ChaCha8Rng, n: usize) -> (Vec<Rational>, Vec<Rational>) {
    let d = (0..n).map(|_| rat(rng.gen_range(1..=4) * if rng.gen_bool(0.2) { -1 } else { 1 }, rng.gen_range(1..=3))).collect();
    let b = (0..n).map(|_| small_rational(rng)).collect();
    (d, b)
}

/// Every statement about S1⁺Λᵏ for 1 ≤ n ≤ n_max, 0 ≤ k ≤ n.
pub fn s1plus_suite(n_max: usize, seed: u64) -> Result<Vec<CheckResult>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::new();
    for n in 1..=n_max {
        for k in 0..=n {
            s1plus_checks(n, k, &mut rng, &mut out)?;
        }
    }
    Ok(out)
}

fn s1plus_checks(n: usize, k: usize, rng: &mut ChaCha8Rng, out: &mut Vec<CheckResult>) -> Result<()> {
    let s1 = shape_space(Family::S1Plus, n, k)?;
    let q1m = shape_space(Family::Q1Minus, n, k)?;
    let q1 = shape_space(Family::Q1, n, k)?;
    let blam = b_lambda_functions(n, k);
    let dkb: Vec<PolyForm> =
        if k == 0 { Vec::new() } else { blam.iter().map(|b| b.koszul(None).map(|f| f.d())).collect::<Result<_>>()? };
    let want = (1usize << n) * binomial(n, k);

    let raw: Vec<&PolyForm> = q1m.functions.iter().chain(dkb.iter()).collect();
    let raw_rank = span_rank(&raw);
    out.push(CheckResult::new(
        "dim S1+ = 2^n C(n,k)",
        n,
        k,
        s1.dim() == want && raw_rank == want && raw.len() == want,
        format!("dim {} (raw rank {raw_rank}, expected {want})", s1.dim()),
    ));

    let vertex = unisolvency_matrix(&s1, None)?;
    let moments = unisolvency_matrix(&s1, Some(&s1plus_moment_dofs(n, k)))?;
    out.push(CheckResult::new(
        "unisolvency (vertex DOFs)",
        n,
        k,
        !num_traits::Zero::is_zero(&vertex.determinant),
        format!("{0}x{0}, det = {1}", vertex.matrix.len(), vertex.determinant),
    ));
    out.push(CheckResult::new(
        "unisolvency (face moments)",
        n,
        k,
        !num_traits::Zero::is_zero(&moments.determinant),
        format!("{0}x{0}, det = {1}", moments.matrix.len(), moments.determinant),
    ));

    let direct = {
        let all: Vec<&PolyForm> = q1m.functions.iter().chain(blam.iter()).collect();
        span_rank(&all) == want && q1m.dim() + blam.len() == want && span_equal(&all, &q1.refs())
    };
    out.push(CheckResult::new("Q1 = Q1- ⊕ B", n, k, direct, format!("{} + {} = {want}", q1m.dim(), blam.len())));

    let lemma_b = dkb.iter().all(at_most_one_quadratic);
    out.push(CheckResult::new("dκB: at most one quadratic factor", n, k, lemma_b, format!("{} forms", dkb.len())));

    let faces = ReferenceCell::Cube(n).faces(k);
    let mut lemma_c = true;
    for u in &dkb {
        for f in &faces {
            let t = u.trace(&f.chart)?;
            lemma_c &= t.coeffs().iter().all(Polynomial::is_multilinear);
        }
    }
    out.push(CheckResult::new("dκB: k-face traces in Q1", n, k, lemma_c, format!("{} faces", faces.len())));

    let lemma_d = span_rank(&dkb.iter().collect::<Vec<_>>()) == blam.len();
    out.push(CheckResult::new("dκ injective on B", n, k, lemma_d, format!("rank {}", blam.len())));

    if k < n {
        let db: Vec<PolyForm> = blam.iter().map(PolyForm::d).collect();
        let b_next = b_lambda_functions(n, k + 1);
        let dkb_next: Vec<PolyForm> = b_next.iter().map(|b| b.koszul(None).map(|f| f.d())).collect::<Result<_>>()?;
        let db_refs: Vec<&PolyForm> = db.iter().collect();
        let ok = span_contains(&b_next.iter().collect::<Vec<_>>(), &db_refs)
            && span_contains(&dkb_next.iter().collect::<Vec<_>>(), &db_refs);
        out.push(CheckResult::new("dB ⊆ B ∩ dκB", n, k, ok, ""));
    }

    let mut pullback_ok = true;
    for _ in 0..2 {
        let (d, b) = random_dilation(rng, n);
        let pulled: Vec<PolyForm> = s1.functions.iter().map(|u| u.pullback_affine(&d, &b)).collect::<Result<_>>()?;
        pullback_ok &= span_contains(&s1.refs(), &pulled.iter().collect::<Vec<_>>());
    }
    out.push(CheckResult::new("pullback invariance", n, k, pullback_ok, "2 random dilation+translation maps"));

    if k < n {
        let facet_space = shape_space(Family::S1Plus, n - 1, k)?;
        let mut ok = true;
        for f in ReferenceCell::Cube(n).faces(n - 1) {
            let traces: Vec<PolyForm> = s1.functions.iter().map(|u| u.trace(&f.chart)).collect::<Result<_>>()?;
            ok &= span_contains(&facet_space.refs(), &traces.iter().collect::<Vec<_>>());
        }
        out.push(CheckResult::new("trace on facets ⊆ S1+(f)", n, k, ok, ""));
    }

    let kq1 = shape_space(Family::Q1, k, k)?;
    let mut ktrace_ok = true;
    for f in &faces {
        let traces: Vec<PolyForm> = s1.functions.iter().map(|u| u.trace(&f.chart)).collect::<Result<_>>()?;
        ktrace_ok &= span_equal(&traces.iter().collect::<Vec<_>>(), &kq1.refs());
    }
    out.push(CheckResult::new("trace on k-faces = Q1(f)", n, k, ktrace_ok, ""));

    if k < n {
        let ds: Vec<PolyForm> = s1.functions.iter().map(PolyForm::d).collect();
        let dq: Vec<PolyForm> = q1m.functions.iter().map(PolyForm::d).collect();
        let ok = span_equal(&ds.iter().collect::<Vec<_>>(), &dq.iter().collect::<Vec<_>>());
        out.push(CheckResult::new("d S1+ = d Q1-", n, k, ok, ""));
    }

    if k == n || k == 0 {
        let same = span_equal(&s1.refs(), &q1.refs());
        let q1mat = unisolvency_matrix(&q1, Some(&s1.dofs))?;
        let ok = same && !num_traits::Zero::is_zero(&q1mat.determinant);
        out.push(CheckResult::new("S1+ = Q1 (k = 0 or n)", n, k, ok, format!("Q1 vertex det = {}", q1mat.determinant)));
    }
    Ok(())
}

/// Koszul trace identity tr κu = κ_f tr u + tr(u ⌟ x^f) on random forms and
/// random box faces.
pub fn koszul_trace_identity(n: usize, k: usize, samples: usize, seed: u64) -> Result<bool> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..samples {
        let u = random_form(&mut rng, n, k, 2, false);
        let m = rng.gen_range(k.max(1) - 1..n);
        let fixed_axes = rand::seq::index::sample(&mut rng, n, n - m).into_vec();
        let f = AffineFace::box_face(n, fixed_axes.into_iter().map(|a| (a, small_rational(&mut rng))).collect())?;
        if k == 0 || k - 1 > f.dim() {
            continue;
        }
        let lhs = u.koszul(None)?.trace(&f)?;
        let mut rhs = u.contract_const(f.origin())?.trace(&f)?;
        if k <= f.dim() {
            let t = u.trace(&f)?;
            rhs = rhs.add(&t.koszul(None)?)?;
        }
        if lhs != rhs {
            return Ok(false);
        }
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn algebra_suite_small() {
        for r in algebra_suite(3, 10, 7).unwrap() {
            assert!(r.passed, "{r:?}");
        }
    }

    #[test]
    fn s1plus_suite_low_dimensions() {
        for r in s1plus_suite(2, 3).unwrap() {
            assert!(r.passed, "{r:?}");
        }
    }

    #[test]
    fn koszul_trace() {
        for n in 1..=3 {
            for k in 1..=n {
                assert!(koszul_trace_identity(n, k, 20, 11).unwrap(), "n={n} k={k}");
            }
        }
    }
}
