//! Mixed Hodge Laplacian: harmonic forms, saddle-point solves, the local
//! coderivative and stability diagnostics.

mod coderivative;
mod conservation;
mod harmonic;
mod infsup;
mod locality;

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::assembly::{mass_exact, mass_lumped, mixed_matrices, BlockDiagonalOperator, CoefficientField, MixedMatrices};
use crate::error::{Error, Result};
use crate::fe::FeSpace;
use crate::mesh::{MeshComplex, MeshKind};
use crate::numeric::{minres, pcg, SparseCholesky, SparseLu};
use crate::poly::Family;
use crate::sparse::{norm, Merge, SparseOperator};

pub use coderivative::{adjoint_residual, coderivative_global, coderivative_local, CoderivativeSolver};
pub use conservation::{balance_residual, facet_integrals, ConservationReport};
pub use harmonic::{harmonic_basis, harmonic_defects, HarmonicBasis, HarmonicMode};
pub use infsup::{infsup_estimate, infsup_level, InfSupLevel, InfSupReport};
pub use locality::{locality_certificate, locality_probe, LocalityReport};

/// Saddle systems up to this size are factorized directly by default.
pub const DIRECT_CAP: usize = 80_000;
const ITERATIVE_TOL: f64 = 1e-12;

/// Which inner product is used on V^{k−1}.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Variant {
    Exact,
    Lumped,
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Variant::Exact => "exact",
            Variant::Lumped => "lumped",
        })
    }
}

impl FromStr for Variant {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "exact" => Ok(Variant::Exact),
            "lumped" => Ok(Variant::Lumped),
            _ => Err(Error::Config(format!("unknown variant {s:?}"))),
        }
    }
}

/// Linear solver for the saddle system.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SolverKind {
    /// Direct factorization up to `DIRECT_CAP`, Schur complement beyond.
    #[default]
    Auto,
    /// Sparse LU of the full saddle matrix, MINRES on failure.
    Direct,
    /// Eliminate σ: Cholesky (lumped) or PCG with the lumped Schur
    /// complement as preconditioner (exact). Requires no harmonic forms.
    Schur,
    /// Unpreconditioned MINRES on the full saddle matrix.
    Minres,
}

/// The pair V^{k−1} × V^k with all matrices of the mixed formulation.
#[derive(Clone, Debug)]
pub struct HodgePair {
    mesh: Arc<MeshComplex>,
    k: usize,
    v_km1: FeSpace,
    v_k: FeSpace,
    matrices: MixedMatrices,
    coefficient: Option<CoefficientField>,
    lumped: BlockDiagonalOperator,
    exact: SparseOperator,
}

impl HodgePair {
    /// Simplicial (P₁Λ^{k−1}, P₁⁻Λᵏ) or cubical (S1⁺Λ^{k−1}, Q₁⁻Λᵏ); K acts
    /// on V^{k−1}.
    pub fn new(mesh: Arc<MeshComplex>, k: usize, coefficient: Option<CoefficientField>) -> Result<Self> {
        if k == 0 || k > mesh.dim() {
            return Err(Error::OutOfRange(format!("pair degree {k} on a {}-dimensional mesh", mesh.dim())));
        }
        let (a, b) = match mesh.kind() {
            MeshKind::Simplicial => (Family::P1, Family::P1MinusLocal),
            MeshKind::Cubical => (Family::S1Plus, Family::Q1Minus),
        };
        let v_km1 = FeSpace::new(mesh.clone(), a, k - 1)?;
        let v_k = FeSpace::new(mesh.clone(), b, k)?;
        if let Some(c) = &coefficient {
            c.check_for(&mesh, k - 1)?;
        }
        let matrices = mixed_matrices(&v_km1, &v_k)?;
        let lumped = mass_lumped(&v_km1, coefficient.as_ref())?;
        let exact = mass_exact(&v_km1, coefficient.as_ref())?;
        Ok(HodgePair { mesh, k, v_km1, v_k, matrices, coefficient, lumped, exact })
    }

    pub fn mesh(&self) -> &Arc<MeshComplex> {
        &self.mesh
    }
    pub fn degree(&self) -> usize {
        self.k
    }
    pub fn sigma_space(&self) -> &FeSpace {
        &self.v_km1
    }
    pub fn u_space(&self) -> &FeSpace {
        &self.v_k
    }
    pub fn matrices(&self) -> &MixedMatrices {
        &self.matrices
    }
    pub fn coefficient(&self) -> Option<&CoefficientField> {
        self.coefficient.as_ref()
    }
    pub fn lumped_mass(&self) -> &BlockDiagonalOperator {
        &self.lumped
    }
    pub fn exact_sigma_mass(&self) -> &SparseOperator {
        &self.exact
    }

    pub fn sigma_mass(&self, variant: Variant) -> SparseOperator {
        match variant {
            Variant::Exact => self.exact.clone(),
            Variant::Lumped => self.lumped.to_sparse(),
        }
    }

    /// Harmonic forms of V^k for this pair.
    pub fn harmonic_basis(&self, mode: HarmonicMode) -> Result<HarmonicBasis> {
        harmonic::from_matrices(
            &self.matrices.mass_k,
            &self.matrices.stiffness,
            Some((&self.matrices.coupling, &self.lumped)),
            self.mesh.betti().map(|b| b[self.k]),
            mode,
        )
    }

    /// Block sizes (σ, u, p) of the saddle system.
    pub fn saddle_sizes(&self, harmonic: &HarmonicBasis) -> [usize; 3] {
        [self.v_km1.dim(), self.v_k.dim(), harmonic.dim()]
    }

    /// [[M_σ, −Bᵀ, 0], [−B, −S, −MH], [0, −HᵀM, 0]].
    pub fn saddle_matrix(&self, variant: Variant, harmonic: &HarmonicBasis) -> Result<SparseOperator> {
        let sizes = self.saddle_sizes(harmonic);
        let ms = self.sigma_mass(variant);
        let b = &self.matrices.coupling;
        let mbt = b.transpose().scale(-1.0);
        let mb = b.scale(-1.0);
        let ms_neg = self.matrices.stiffness.scale(-1.0);
        let mut mh = Vec::new();
        for (j, q) in harmonic.vectors().iter().enumerate() {
            for (i, v) in self.matrices.mass_k.matvec(q).into_iter().enumerate() {
                if v != 0.0 {
                    mh.push((i, j, -v));
                }
            }
        }
        let mh = SparseOperator::from_triplets(sizes[1], sizes[2], mh, Merge::Sum)?;
        let mht = mh.transpose();
        let grid = vec![
            vec![Some(&ms), Some(&mbt), None],
            vec![Some(&mb), Some(&ms_neg), Some(&mh)],
            vec![None, Some(&mht), None],
        ];
        SparseOperator::block(&grid, &sizes, &sizes)?.symmetrized()
    }

    /// Solve for a load vector F_i = ⟨f, φ_i⟩ on V^k.
    pub fn solve(&self, load: &[f64], variant: Variant, harmonic: &HarmonicBasis, solver: SolverKind) -> Result<HodgeSolution> {
        if load.len() != self.v_k.dim() {
            return Err(Error::DimensionMismatch(format!("load of length {} for {} unknowns", load.len(), self.v_k.dim())));
        }
        let sizes = self.saddle_sizes(harmonic);
        let total: usize = sizes.iter().sum();
        let harmonic_load =
            harmonic.vectors().iter().map(|q| crate::sparse::dot(q, load).abs()).fold(0.0f64, f64::max);
        let a = self.saddle_matrix(variant, harmonic)?;
        let mut rhs = vec![0.0; total];
        for (i, f) in load.iter().enumerate() {
            rhs[sizes[0] + i] = -f;
        }
        let choice = match solver {
            SolverKind::Auto if total > DIRECT_CAP && harmonic.dim() == 0 => SolverKind::Schur,
            SolverKind::Auto => SolverKind::Direct,
            s => s,
        };
        if choice == SolverKind::Schur && harmonic.dim() > 0 {
            return Err(Error::Unsupported("Schur complement solve with harmonic forms present".into()));
        }
        let (x, name, iterations) = match choice {
            SolverKind::Direct => {
                let direct = SparseLu::new(&a).map(|lu| lu.solve(&rhs));
                match direct {
                    Ok(x) if relative_residual(&a, &x, &rhs) <= 1e-10 => (x, "sparse-lu", 0),
                    _ => {
                        let r = minres(|v| a.matvec(v), &rhs, ITERATIVE_TOL, 10 * total);
                        (r.x, "minres", r.iterations)
                    }
                }
            }
            SolverKind::Minres => {
                let r = minres(|v| a.matvec(v), &rhs, ITERATIVE_TOL, 10 * total);
                (r.x, "minres", r.iterations)
            }
            SolverKind::Schur => self.solve_schur(load, variant)?,
            SolverKind::Auto => unreachable!("resolved above"),
        };
        let residual = relative_residual(&a, &x, &rhs);
        if !(residual <= 1e-8) {
            return Err(Error::Solver(format!("saddle residual {residual:e} with {name}")));
        }
        let sigma = x[..sizes[0]].to_vec();
        let u = x[sizes[0]..sizes[0] + sizes[1]].to_vec();
        let p = x[sizes[0] + sizes[1]..].to_vec();
        let mut p_field = vec![0.0; sizes[1]];
        for (c, q) in p.iter().zip(harmonic.vectors()) {
            for (a, b) in p_field.iter_mut().zip(q) {
                *a += c * b;
            }
        }
        Ok(HodgeSolution {
            sigma,
            u,
            p,
            p_field,
            variant,
            residual,
            harmonic_dim: harmonic.dim(),
            harmonic_load,
            solver: name,
            iterations,
        })
    }

    fn solve_schur(&self, load: &[f64], variant: Variant) -> Result<(Vec<f64>, &'static str, usize)> {
        let b = &self.matrices.coupling;
        let bt = b.transpose();
        let lumped_schur = b
            .matmul(&self.lumped.inverse_sparse().matmul(&bt)?)?
            .add_scaled(1.0, &self.matrices.stiffness, 1.0)?
            .symmetrized()?;
        let lumped_chol = SparseCholesky::new(&lumped_schur)?;
        let (u, sigma, name, its) = match variant {
            Variant::Lumped => {
                let u = lumped_chol.solve(load);
                let sigma = self.lumped.solve(&bt.matvec(&u));
                (u, sigma, "schur-cholesky", 0)
            }
            Variant::Exact => {
                let m = SparseCholesky::new(&self.exact)?;
                let apply = |v: &[f64]| {
                    let mut y = b.matvec(&m.solve(&bt.matvec(v)));
                    for (a, s) in y.iter_mut().zip(self.matrices.stiffness.matvec(v)) {
                        *a += s;
                    }
                    y
                };
                let r = pcg(apply, |v| lumped_chol.solve(v), load, ITERATIVE_TOL, 1000);
                if !r.converged {
                    return Err(Error::Solver(format!("Schur PCG stalled at {:e}", r.relative_residual)));
                }
                let sigma = m.solve(&bt.matvec(&r.x));
                (r.x, sigma, "schur-pcg", r.iterations)
            }
        };
        Ok((sigma.into_iter().chain(u).collect(), name, its))
    }
}

fn relative_residual(a: &SparseOperator, x: &[f64], b: &[f64]) -> f64 {
    let ax = a.matvec(x);
    let r: Vec<f64> = ax.iter().zip(b).map(|(p, q)| p - q).collect();
    let bn = norm(b);
    if bn == 0.0 {
        norm(&r)
    } else {
        norm(&r) / bn
    }
}

/// Discrete solution (σ_h, u_h, p_h) with solve diagnostics.
#[derive(Clone, Debug, Serialize)]
pub struct HodgeSolution {
    pub sigma: Vec<f64>,
    pub u: Vec<f64>,
    /// Coefficients of p_h in the harmonic basis.
    pub p: Vec<f64>,
    /// p_h in V^k coefficients.
    pub p_field: Vec<f64>,
    pub variant: Variant,
    /// ‖Ax − b‖ / ‖b‖ of the full saddle system.
    pub residual: f64,
    pub harmonic_dim: usize,
    /// max |⟨f, q⟩| over the harmonic basis.
    pub harmonic_load: f64,
    pub solver: &'static str,
    pub iterations: usize,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::assembly::load_vector;
    use crate::mesh::{build_grid, Domain};

    fn pair(d: Domain, kind: MeshKind, level: usize, k: usize) -> HodgePair {
        HodgePair::new(Arc::new(build_grid(d, kind, level).unwrap()), k, None).unwrap()
    }

    #[test]
    fn zero_load_gives_zero_solution() {
        let p = pair(Domain::UnitSquare, MeshKind::Simplicial, 2, 1);
        let h = p.harmonic_basis(HarmonicMode::Auto).unwrap();
        let s = p.solve(&vec![0.0; p.u_space().dim()], Variant::Lumped, &h, SolverKind::Auto).unwrap();
        assert!(s.sigma.iter().chain(&s.u).all(|x| *x == 0.0));
    }

    #[test]
    fn solvers_agree() {
        for kind in [MeshKind::Simplicial, MeshKind::Cubical] {
            for k in 1..=2 {
                let p = pair(Domain::UnitSquare, kind, 3, k);
                let h = p.harmonic_basis(HarmonicMode::Auto).unwrap();
                let f = load_vector(p.u_space(), |x| vec![(3.0 * x[0]).sin() + x[1]; if k == 1 { 2 } else { 1 }]);
                for variant in [Variant::Lumped, Variant::Exact] {
                    let a = p.solve(&f, variant, &h, SolverKind::Direct).unwrap();
                    let b = p.solve(&f, variant, &h, SolverKind::Schur).unwrap();
                    assert!(a.residual < 1e-10, "{}", a.residual);
                    let diff = a.sigma.iter().chain(&a.u).zip(b.sigma.iter().chain(&b.u)).fold(0.0f64, |m, (x, y)| m.max((x - y).abs()));
                    let scale = a.u.iter().fold(0.0f64, |m, x| m.max(x.abs()));
                    assert!(diff < 1e-8 * scale.max(1.0), "{kind:?} k={k} {variant}: {diff}");
                }
            }
        }
    }

    #[test]
    fn annulus_has_one_harmonic_one_form() {
        let p = pair(Domain::SquareWithHole, MeshKind::Simplicial, 1, 1);
        let h = p.harmonic_basis(HarmonicMode::Dense).unwrap();
        assert_eq!(h.dim(), 1);
        let f = load_vector(p.u_space(), |x| vec![1.0 + x[1], x[0] * x[0]]);
        let s = p.solve(&f, Variant::Lumped, &h, SolverKind::Auto).unwrap();
        assert!(s.residual < 1e-10);
        let mu = p.matrices().mass_k.matvec(&s.u);
        assert!(crate::sparse::dot(&mu, &h.vectors()[0]).abs() < 1e-10);
    }
}
