use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::alt::binomial;
use crate::error::{Error, Result};

/// Closed-form test problems for the mixed Hodge Laplacian.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolutionId {
    /// `volume_poisson` for k = n, `gradient` for k = 1.
    #[default]
    Auto,
    /// k = n: u = Π sin(πxᵢ) vol.
    VolumePoisson,
    /// k = 1: u = grad p with p = Π cos(πxᵢ).
    Gradient,
}

/// σ = K d*u, f = dσ + d*du for a constant SPD K acting on (k−1)-forms.
///
/// All fields are returned as Alt coefficients in lexicographic order.
#[derive(Clone, Debug)]
pub struct ManufacturedSolution {
    id: SolutionId,
    n: usize,
    k: usize,
    kmat: Vec<Vec<f64>>,
}

impl ManufacturedSolution {
    pub fn new(id: SolutionId, n: usize, k: usize, kmat: Option<Vec<Vec<f64>>>) -> Result<Self> {
        let id = match (id, k) {
            (SolutionId::Auto, k) if k == n => SolutionId::VolumePoisson,
            (SolutionId::Auto, 1) => SolutionId::Gradient,
            (SolutionId::Auto, _) => {
                return Err(Error::Unsupported(format!("no default manufactured solution for k = {k}, n = {n}")))
            }
            (SolutionId::VolumePoisson, k) if k != n => {
                return Err(Error::Config(format!("volume_poisson needs k = n, got k = {k}, n = {n}")))
            }
            (SolutionId::Gradient, k) if k != 1 => return Err(Error::Config(format!("gradient needs k = 1, got {k}"))),
            (id, _) => id,
        };
        let size = binomial(n, k - 1);
        let kmat = kmat.unwrap_or_else(|| (0..size).map(|i| (0..size).map(|j| f64::from(u8::from(i == j))).collect()).collect());
        if kmat.len() != size || kmat.iter().any(|r| r.len() != size) {
            return Err(Error::DimensionMismatch(format!("coefficient matrix must be {size}×{size}")));
        }
        if id == SolutionId::Gradient && size != 1 {
            return Err(Error::DimensionMismatch("gradient case takes a 1×1 coefficient".into()));
        }
        Ok(ManufacturedSolution { id, n, k, kmat })
    }

    pub fn id(&self) -> SolutionId {
        self.id
    }

    /// Boundary conditions satisfied by the closed form.
    pub fn statement(&self) -> &'static str {
        match self.id {
            SolutionId::VolumePoisson => {
                "u = prod sin(pi x_i) vol vanishes on the boundary, matching the natural condition tr u = 0 for k = n"
            }
            _ => "u = grad prod cos(pi x_i): u.nu = 0 and rot u = 0 on the boundary, so tr *u = 0 and tr *du = 0 hold naturally",
        }
    }

    fn sines(&self, x: &[f64]) -> (Vec<f64>, Vec<f64>) {
        (x.iter().map(|t| (PI * t).sin()).collect(), x.iter().map(|t| (PI * t).cos()).collect())
    }

    /// φ = Π sin(πxᵢ), its gradient and Hessian.
    fn phi(&self, x: &[f64]) -> (f64, Vec<f64>, Vec<Vec<f64>>) {
        let (s, c) = self.sines(x);
        let n = self.n;
        let prod = |skip: &[usize]| (0..n).filter(|i| !skip.contains(i)).map(|i| s[i]).product::<f64>();
        let phi = prod(&[]);
        let grad = (0..n).map(|a| PI * c[a] * prod(&[a])).collect();
        let hess = (0..n)
            .map(|a| (0..n).map(|b| if a == b { -PI * PI * phi } else { PI * PI * c[a] * c[b] * prod(&[a, b]) }).collect())
            .collect();
        (phi, grad, hess)
    }

    /// p = Π cos(πxᵢ) and its gradient.
    fn p(&self, x: &[f64]) -> (f64, Vec<f64>) {
        let (s, c) = self.sines(x);
        let n = self.n;
        let p = c.iter().product();
        let grad = (0..n).map(|a| -PI * s[a] * (0..n).filter(|&i| i != a).map(|i| c[i]).product::<f64>()).collect();
        (p, grad)
    }

    fn sign(a: usize) -> f64 {
        if a % 2 == 0 {
            1.0
        } else {
            -1.0
        }
    }

    fn apply_k(&self, g: &[f64]) -> Vec<f64> {
        self.kmat.iter().map(|row| row.iter().zip(g).map(|(a, b)| a * b).sum()).collect()
    }

    /// d*u before K is applied.
    fn dstar_u(&self, x: &[f64]) -> Vec<f64> {
        let n = self.n;
        match self.id {
            SolutionId::VolumePoisson => {
                // u = φ vol: component n−1−a of d*u is (−1)^{a+1} ∂ₐφ.
                let (_, grad, _) = self.phi(x);
                let mut g = vec![0.0; n];
                for a in 0..n {
                    g[n - 1 - a] = -Self::sign(a) * grad[a];
                }
                g
            }
            _ => vec![n as f64 * PI * PI * self.p(x).0],
        }
    }

    pub fn sigma(&self, x: &[f64]) -> Vec<f64> {
        self.apply_k(&self.dstar_u(x))
    }

    pub fn dsigma(&self, x: &[f64]) -> Vec<f64> {
        let n = self.n;
        match self.id {
            SolutionId::VolumePoisson => {
                let (_, _, hess) = self.phi(x);
                // ∂ₐ g_{n−1−b} = (−1)^{b+1} ∂ₐ∂_b φ and dσ = Σₐ (−1)ᵃ ∂ₐ σ_{n−1−a}.
                let mut total = 0.0;
                for a in 0..n {
                    let dg: Vec<f64> = (0..n)
                        .map(|q| {
                            let b = n - 1 - q;
                            -Self::sign(b) * hess[a][b]
                        })
                        .collect();
                    total += Self::sign(a) * self.apply_k(&dg)[n - 1 - a];
                }
                vec![total]
            }
            _ => {
                let c = self.kmat[0][0] * n as f64 * PI * PI;
                self.p(x).1.into_iter().map(|g| c * g).collect()
            }
        }
    }

    pub fn u(&self, x: &[f64]) -> Vec<f64> {
        match self.id {
            SolutionId::VolumePoisson => vec![self.phi(x).0],
            _ => self.p(x).1,
        }
    }

    /// du, zero in both cases (k = n, or u exact).
    pub fn du(&self, _x: &[f64]) -> Vec<f64> {
        vec![0.0; binomial(self.n, self.k + 1)]
    }

    pub fn f(&self, x: &[f64]) -> Vec<f64> {
        self.dsigma(x)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const H: f64 = 1e-5;

    fn partial(f: impl Fn(&[f64]) -> Vec<f64>, x: &[f64], a: usize) -> Vec<f64> {
        let mut p = x.to_vec();
        let mut m = x.to_vec();
        p[a] += H;
        m[a] -= H;
        f(&p).iter().zip(f(&m)).map(|(u, v)| (u - v) / (2.0 * H)).collect()
    }

    fn close(a: &[f64], b: &[f64]) {
        for (x, y) in a.iter().zip(b) {
            assert!((x - y).abs() < 1e-5 * (1.0 + y.abs()), "{a:?} vs {b:?}");
        }
    }

    #[test]
    fn volume_case_matches_finite_differences() {
        let x = [0.23, 0.61, 0.37];
        for n in [2, 3] {
            let kmat: Vec<Vec<f64>> =
                (0..n).map(|i| (0..n).map(|j| if i == j { 2.0 + i as f64 } else { 0.3 }).collect()).collect();
            let m = ManufacturedSolution::new(SolutionId::Auto, n, n, Some(kmat.clone())).unwrap();
            let x = &x[..n];
            // d*(φ vol) = −Σₐ (−1)ᵃ ∂ₐφ dx_{comp a} by integrating ⟨u, dτ⟩ by parts.
            let mut g = vec![0.0; n];
            for a in 0..n {
                g[n - 1 - a] = -ManufacturedSolution::sign(a) * partial(|y| m.u(y), x, a)[0];
            }
            let sigma: Vec<f64> = kmat.iter().map(|r| r.iter().zip(&g).map(|(p, q)| p * q).sum()).collect();
            close(&m.sigma(x), &sigma);
            let div: f64 = (0..n).map(|a| ManufacturedSolution::sign(a) * partial(|y| m.sigma(y), x, a)[n - 1 - a]).sum();
            close(&m.dsigma(x), &[div]);
            let iso = ManufacturedSolution::new(SolutionId::Auto, n, n, None).unwrap();
            close(&iso.f(x), &[n as f64 * PI * PI * iso.u(x)[0]]);
        }
    }

    #[test]
    fn gradient_case_matches_finite_differences() {
        let x = [0.31, 0.77, 0.12];
        for n in [2, 3] {
            let m = ManufacturedSolution::new(SolutionId::Auto, n, 1, Some(vec![vec![1.5]])).unwrap();
            let x = &x[..n];
            // σ = K d*u = −K div u = −K Δp.
            let div: f64 = (0..n).map(|a| partial(|y| m.u(y), x, a)[a]).sum();
            close(&m.sigma(x), &[-1.5 * div]);
            let grad: Vec<f64> = (0..n).map(|a| partial(|y| m.sigma(y), x, a)[0]).collect();
            close(&m.dsigma(x), &grad);
            // du = 0: ∂ₐu_b = ∂_b uₐ.
            for a in 0..n {
                for b in 0..n {
                    let ab = partial(|y| m.u(y), x, a)[b];
                    let ba = partial(|y| m.u(y), x, b)[a];
                    assert!((ab - ba).abs() < 1e-5);
                }
            }
            // u·ν = 0 on x₀ = 0 and x₀ = 1.
            for edge in [0.0, 1.0] {
                let mut y = x.to_vec();
                y[0] = edge;
                assert!(m.u(&y)[0].abs() < 1e-12);
            }
        }
    }

    #[test]
    fn rejects_mismatched_ids() {
        assert!(ManufacturedSolution::new(SolutionId::VolumePoisson, 3, 1, None).is_err());
        assert!(ManufacturedSolution::new(SolutionId::Gradient, 3, 2, None).is_err());
        assert!(ManufacturedSolution::new(SolutionId::Auto, 3, 2, None).is_err());
    }
}
