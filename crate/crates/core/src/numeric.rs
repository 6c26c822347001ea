//! Dense and sparse floating-point linear algebra on top of faer.

use faer::linalg::solvers::Solve;
use faer::sparse::linalg::solvers::{Llt, Lu};
use faer::{Mat, Side};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::sparse::{dot, norm, SparseOperator};

/// Largest dense eigenproblem handled directly.
pub const DENSE_CAP: usize = 5000;

pub fn to_mat(rows: &[Vec<f64>]) -> Mat<f64> {
    let ncols = rows.first().map_or(0, |r| r.len());
    Mat::from_fn(rows.len(), ncols, |i, j| rows[i][j])
}

pub fn col_to_vec(m: &Mat<f64>, j: usize) -> Vec<f64> {
    (0..m.nrows()).map(|i| m[(i, j)]).collect()
}

fn symmetrize(a: &mut Mat<f64>) {
    for i in 0..a.nrows() {
        for j in 0..i {
            let v = 0.5 * (a[(i, j)] + a[(j, i)]);
            a[(i, j)] = v;
            a[(j, i)] = v;
        }
    }
}

/// Eigenvalues (nondecreasing) of a symmetric matrix.
pub fn sym_eigenvalues(a: &Mat<f64>) -> Result<Vec<f64>> {
    a.self_adjoint_eigenvalues(Side::Lower).map_err(|e| Error::Solver(format!("eigenvalues: {e:?}")))
}

/// Eigenvalues and eigenvectors (columns) of a symmetric matrix.
pub fn sym_eigen(a: &Mat<f64>) -> Result<(Vec<f64>, Mat<f64>)> {
    let e = a.self_adjoint_eigen(Side::Lower).map_err(|e| Error::Solver(format!("eigendecomposition: {e:?}")))?;
    let s = e.S();
    let vals = (0..a.nrows()).map(|i| s[i]).collect();
    Ok((vals, e.U().to_owned()))
}

/// L⁻¹ A L⁻ᵀ for B = LLᵀ.
fn congruence(a: &Mat<f64>, b: &Mat<f64>) -> Result<(Mat<f64>, Mat<f64>)> {
    let llt = b.llt(Side::Lower).map_err(|e| Error::Solver(format!("Cholesky of the reference matrix: {e:?}")))?;
    let l = llt.L().to_owned();
    let mut x = a.clone();
    l.solve_lower_triangular_in_place(x.as_mut());
    let mut c = x.transpose().to_owned();
    l.solve_lower_triangular_in_place(c.as_mut());
    symmetrize(&mut c);
    Ok((c, l))
}

/// Eigenvalues λ of A x = λ B x with B symmetric positive definite.
pub fn generalized_eigenvalues(a: &Mat<f64>, b: &Mat<f64>) -> Result<Vec<f64>> {
    check_cap(a.nrows())?;
    let (c, _) = congruence(a, b)?;
    sym_eigenvalues(&c)
}

/// Generalized eigenpairs with B-orthonormal eigenvectors.
pub fn generalized_eigen(a: &Mat<f64>, b: &Mat<f64>) -> Result<(Vec<f64>, Mat<f64>)> {
    check_cap(a.nrows())?;
    let (c, l) = congruence(a, b)?;
    let (vals, mut vecs) = sym_eigen(&c)?;
    l.transpose().solve_upper_triangular_in_place(vecs.as_mut());
    Ok((vals, vecs))
}

pub fn check_cap(size: usize) -> Result<()> {
    if size > DENSE_CAP {
        return Err(Error::DimensionCap { size, cap: DENSE_CAP });
    }
    Ok(())
}

/// Sparse LU factorization with partial pivoting.
pub struct SparseLu {
    lu: Lu<usize, f64>,
    n: usize,
}

impl SparseLu {
    pub fn new(a: &SparseOperator) -> Result<Self> {
        let lu = a.to_faer()?.sp_lu().map_err(|e| Error::Solver(format!("sparse LU: {e:?}")))?;
        Ok(SparseLu { lu, n: a.nrows() })
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let mut x = Mat::from_fn(self.n, 1, |i, _| b[i]);
        self.lu.solve_in_place(x.as_mut());
        col_to_vec(&x, 0)
    }
}

/// Sparse Cholesky factorization of a symmetric positive definite matrix.
pub struct SparseCholesky {
    llt: Llt<usize, f64>,
    n: usize,
}

impl SparseCholesky {
    pub fn new(a: &SparseOperator) -> Result<Self> {
        let llt = a.to_faer()?.sp_cholesky(Side::Lower).map_err(|e| Error::Solver(format!("sparse Cholesky: {e:?}")))?;
        Ok(SparseCholesky { llt, n: a.nrows() })
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let mut x = Mat::from_fn(self.n, 1, |i, _| b[i]);
        self.llt.solve_in_place(x.as_mut());
        col_to_vec(&x, 0)
    }
}

/// Outcome of an iterative solve.
#[derive(Clone, Debug)]
pub struct IterativeResult {
    pub x: Vec<f64>,
    pub iterations: usize,
    pub relative_residual: f64,
    pub converged: bool,
}

/// MINRES for symmetric (possibly indefinite) systems.
pub fn minres(apply: impl Fn(&[f64]) -> Vec<f64>, b: &[f64], tol: f64, max_iter: usize) -> IterativeResult {
    let n = b.len();
    let bnorm = norm(b);
    let mut x = vec![0.0; n];
    if bnorm == 0.0 {
        return IterativeResult { x, iterations: 0, relative_residual: 0.0, converged: true };
    }
    let mut v_old = vec![0.0; n];
    let mut v = b.iter().map(|bi| bi / bnorm).collect::<Vec<_>>();
    let (mut c_old, mut s_old, mut c, mut s) = (1.0, 0.0, 1.0, 0.0);
    let mut w_old = vec![0.0; n];
    let mut w = vec![0.0; n];
    let mut eta = bnorm;
    let mut beta_cur = 0.0;
    let mut res = 1.0;
    for it in 1..=max_iter {
        let mut av = apply(&v);
        let alpha = dot(&av, &v);
        for i in 0..n {
            av[i] -= alpha * v[i] + beta_cur * v_old[i];
        }
        let beta_next = norm(&av);
        let r0 = c * alpha - c_old * s * beta_cur;
        let r1 = (r0 * r0 + beta_next * beta_next).sqrt();
        let r2 = s * alpha + c_old * c * beta_cur;
        let r3 = s_old * beta_cur;
        let c_new = r0 / r1;
        let s_new = beta_next / r1;
        let w_new: Vec<f64> = (0..n).map(|i| (v[i] - r3 * w_old[i] - r2 * w[i]) / r1).collect();
        for i in 0..n {
            x[i] += c_new * eta * w_new[i];
        }
        eta *= -s_new;
        res = eta.abs() / bnorm;
        w_old = std::mem::replace(&mut w, w_new);
        v_old = std::mem::replace(&mut v, av.iter().map(|a| a / beta_next.max(f64::MIN_POSITIVE)).collect());
        beta_cur = beta_next;
        c_old = c;
        s_old = s;
        c = c_new;
        s = s_new;
        if res <= tol || beta_next == 0.0 {
            return IterativeResult { x, iterations: it, relative_residual: res, converged: res <= tol || beta_next == 0.0 };
        }
    }
    IterativeResult { x, iterations: max_iter, relative_residual: res, converged: false }
}

/// Preconditioned conjugate gradients for symmetric positive definite systems.
pub fn pcg(
    apply: impl Fn(&[f64]) -> Vec<f64>,
    precondition: impl Fn(&[f64]) -> Vec<f64>,
    b: &[f64],
    tol: f64,
    max_iter: usize,
) -> IterativeResult {
    let n = b.len();
    let bnorm = norm(b);
    let mut x = vec![0.0; n];
    if bnorm == 0.0 {
        return IterativeResult { x, iterations: 0, relative_residual: 0.0, converged: true };
    }
    let mut r = b.to_vec();
    let mut z = precondition(&r);
    let mut p = z.clone();
    let mut rz = dot(&r, &z);
    let mut res = 1.0;
    for it in 1..=max_iter {
        let ap = apply(&p);
        let alpha = rz / dot(&p, &ap);
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        res = norm(&r) / bnorm;
        if res <= tol {
            return IterativeResult { x, iterations: it, relative_residual: res, converged: true };
        }
        z = precondition(&r);
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
    }
    IterativeResult { x, iterations: max_iter, relative_residual: res, converged: false }
}

/// Extreme eigenvalues of a self-adjoint operator T in the inner product
/// ⟨x, y⟩ = xᵀGy, by Lanczos with full reorthogonalization.
pub fn lanczos_extremes(
    n: usize,
    apply_t: impl Fn(&[f64]) -> Vec<f64>,
    apply_g: impl Fn(&[f64]) -> Vec<f64>,
    steps: usize,
    seed: u64,
) -> Result<(f64, f64)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let g_norm = |x: &[f64]| dot(x, &apply_g(x)).sqrt();
    let mut q: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let s = g_norm(&q);
    q.iter_mut().for_each(|x| *x /= s);
    let mut basis: Vec<Vec<f64>> = Vec::new();
    let mut g_basis: Vec<Vec<f64>> = Vec::new();
    let mut alphas = Vec::new();
    let mut betas: Vec<f64> = Vec::new();
    let m = steps.min(n);
    for _ in 0..m {
        let gq = apply_g(&q);
        let mut r = apply_t(&q);
        let alpha = dot(&r, &gq);
        basis.push(q.clone());
        g_basis.push(gq);
        alphas.push(alpha);
        for _ in 0..2 {
            for (b, gb) in basis.iter().zip(&g_basis) {
                let c = dot(&r, gb);
                for i in 0..n {
                    r[i] -= c * b[i];
                }
            }
        }
        let beta = g_norm(&r);
        if !(beta > 1e-13 * alpha.abs().max(1e-300)) || basis.len() == m {
            break;
        }
        betas.push(beta);
        q = r.iter().map(|x| x / beta).collect();
    }
    let k = alphas.len();
    let t = Mat::from_fn(k, k, |i, j| {
        if i == j {
            alphas[i]
        } else if i + 1 == j {
            betas[i]
        } else if j + 1 == i {
            betas[j]
        } else {
            0.0
        }
    });
    let ev = sym_eigenvalues(&t)?;
    Ok((ev[0], ev[k - 1]))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sparse::Merge;

    #[test]
    fn generalized_eigen_of_diagonal_pencil() {
        let a = to_mat(&[vec![2.0, 0.0], vec![0.0, 6.0]]);
        let b = to_mat(&[vec![1.0, 0.0], vec![0.0, 2.0]]);
        let ev = generalized_eigenvalues(&a, &b).unwrap();
        assert!((ev[0] - 2.0).abs() < 1e-14 && (ev[1] - 3.0).abs() < 1e-14);
        let (_, v) = generalized_eigen(&a, &b).unwrap();
        let vbv: f64 = (0..2).map(|i| v[(i, 1)] * b[(i, i)] * v[(i, 1)]).sum();
        assert!((vbv - 1.0).abs() < 1e-14);
    }

    #[test]
    fn sparse_solvers_and_minres_agree() {
        let n = 30;
        let mut t = Vec::new();
        for i in 0..n {
            t.push((i, i, if i % 2 == 0 { 4.0 } else { -3.0 }));
            if i + 1 < n {
                t.push((i, i + 1, 1.0));
                t.push((i + 1, i, 1.0));
            }
        }
        let a = SparseOperator::from_triplets(n, n, t, Merge::Sum).unwrap();
        let b: Vec<f64> = (0..n).map(|i| (i as f64).sin()).collect();
        let x = SparseLu::new(&a).unwrap().solve(&b);
        let r = minres(|v| a.matvec(v), &b, 1e-12, 500);
        assert!(r.converged);
        for (p, q) in x.iter().zip(&r.x) {
            assert!((p - q).abs() < 1e-9);
        }
        let spd = a.matmul(&a).unwrap();
        let y = SparseCholesky::new(&spd).unwrap().solve(&b);
        let back = spd.matvec(&y);
        assert!(back.iter().zip(&b).all(|(p, q)| (p - q).abs() < 1e-10));
        let c = pcg(|v| spd.matvec(v), |v| v.to_vec(), &b, 1e-13, 1000);
        assert!(c.converged && c.x.iter().zip(&y).all(|(p, q)| (p - q).abs() < 1e-9));
    }

    #[test]
    fn lanczos_finds_extremes() {
        let n = 200;
        let diag: Vec<f64> = (0..n).map(|i| 1.0 + i as f64 / n as f64).collect();
        let (lo, hi) = lanczos_extremes(n, |x| x.iter().zip(&diag).map(|(a, d)| a * d).collect(), |x| x.to_vec(), 120, 1).unwrap();
        assert!((lo - 1.0).abs() < 1e-3 && (hi - diag[n - 1]).abs() < 1e-3);
    }
}
