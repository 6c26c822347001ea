use crate::error::{Error, Result};
use crate::numeric::SparseCholesky;

use super::{HodgePair, Variant};

/// d*ₕu by independent per-vertex block solves of the lumped product.
pub fn coderivative_local(pair: &HodgePair, u: &[f64]) -> Result<Vec<f64>> {
    check_len(pair, u)?;
    Ok(pair.lumped_mass().solve(&pair.matrices().coupling.transpose_matvec(u)))
}

/// d*ₕu from one global sparse solve of the chosen σ-mass.
pub fn coderivative_global(pair: &HodgePair, u: &[f64], variant: Variant) -> Result<Vec<f64>> {
    CoderivativeSolver::new(pair, variant)?.apply(u)
}

fn check_len(pair: &HodgePair, u: &[f64]) -> Result<()> {
    if u.len() != pair.u_space().dim() {
        return Err(Error::DimensionMismatch(format!("{} coefficients for V^k of dimension {}", u.len(), pair.u_space().dim())));
    }
    Ok(())
}

/// Factorized global mass for repeated coderivatives.
pub struct CoderivativeSolver<'a> {
    pair: &'a HodgePair,
    factor: SparseCholesky,
}

impl<'a> CoderivativeSolver<'a> {
    pub fn new(pair: &'a HodgePair, variant: Variant) -> Result<Self> {
        Ok(CoderivativeSolver { pair, factor: SparseCholesky::new(&pair.sigma_mass(variant))? })
    }

    pub fn apply(&self, u: &[f64]) -> Result<Vec<f64>> {
        check_len(self.pair, u)?;
        Ok(self.factor.solve(&self.pair.matrices().coupling.transpose_matvec(u)))
    }
}

/// max_τ |⟨d*ₕu, τ⟩_h − ⟨u, dτ⟩| relative to max_τ |⟨u, dτ⟩|.
pub fn adjoint_residual(pair: &HodgePair, u: &[f64], dstar: &[f64]) -> Result<f64> {
    check_len(pair, u)?;
    let lhs = pair.lumped_mass().apply(dstar);
    let rhs = pair.matrices().coupling.transpose_matvec(u);
    let scale = rhs.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let diff = lhs.iter().zip(&rhs).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
    Ok(if scale == 0.0 { diff } else { diff / scale })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::assembly::CoefficientField;
    use crate::mesh::{build_grid, Domain, MeshKind};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::sync::Arc;

    #[test]
    fn interval_hand_values() {
        let m = Arc::new(build_grid(Domain::UnitInterval, MeshKind::Simplicial, 1).unwrap());
        let p = HodgePair::new(m, 1, None).unwrap();
        let u = p.u_space().interpolate(|_| vec![1.0]);
        let d = coderivative_local(&p, &u).unwrap();
        for (a, b) in d.iter().zip([-4.0, 0.0, 4.0]) {
            assert!((a - b).abs() < 1e-13, "{d:?}");
        }
    }

    #[test]
    fn local_equals_global_and_scales_with_k() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for kind in [MeshKind::Simplicial, MeshKind::Cubical] {
            let m = Arc::new(build_grid(Domain::UnitSquare, kind, 3).unwrap());
            for k in 1..=2 {
                let p = HodgePair::new(m.clone(), k, None).unwrap();
                let u: Vec<f64> = (0..p.u_space().dim()).map(|_| rng.gen_range(-1.0..1.0)).collect();
                let a = coderivative_local(&p, &u).unwrap();
                let b = coderivative_global(&p, &u, Variant::Lumped).unwrap();
                let scale = a.iter().fold(0.0f64, |s, x| s.max(x.abs()));
                assert!(a.iter().zip(&b).all(|(x, y)| (x - y).abs() <= 1e-12 * scale));
                assert!(adjoint_residual(&p, &u, &a).unwrap() < 1e-12);
                let c = CoefficientField::scalar(&m, k - 1, 3.0);
                let pc = HodgePair::new(m.clone(), k, Some(c)).unwrap();
                let ac = coderivative_local(&pc, &u).unwrap();
                assert!(ac.iter().zip(&a).all(|(x, y)| (x - 3.0 * y).abs() <= 1e-12 * scale));
            }
        }
    }
}
