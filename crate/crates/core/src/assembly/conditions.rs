use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::fe::{exterior_derivative_matrix, pi_h, FeSpace};
use crate::mesh::{build_grid, Domain, MeshComplex, MeshKind};
use crate::numeric::{generalized_eigenvalues, lanczos_extremes, DENSE_CAP};
use crate::poly::Family;
use crate::sparse::SparseOperator;

use super::{cross_mass_exact, cross_mass_vertex, mass_exact, mass_lumped, CoefficientField, CoefficientSpec};

const LANCZOS_STEPS: usize = 200;

#[derive(Clone, Debug, Serialize)]
pub struct ConditionALevel {
    pub level: usize,
    pub h: f64,
    pub dim: usize,
    /// Extreme eigenvalues of M_h x = λ M x.
    pub min: f64,
    pub max: f64,
    pub method: &'static str,
}

#[derive(Clone, Debug, Serialize)]
pub struct ConditionAReport {
    pub domain: Domain,
    pub kind: MeshKind,
    pub k: usize,
    pub levels: Vec<ConditionALevel>,
    /// Largest relative change of either extreme between consecutive levels.
    pub max_drift: f64,
}

impl ConditionAReport {
    pub fn all_positive(&self) -> bool {
        self.levels.iter().all(|l| l.min > 0.0)
    }
}

/// Lumped family of a mesh kind.
pub(crate) fn lumped_family(kind: MeshKind) -> Family {
    match kind {
        MeshKind::Simplicial => Family::P1,
        MeshKind::Cubical => Family::S1Plus,
    }
}

/// Extreme generalized eigenvalues of (M_h, M): dense up to the cap, Lanczos
/// on M_h⁻¹M in the M_h inner product beyond it.
pub fn condition_a_extremes(space: &FeSpace, k: Option<&CoefficientField>) -> Result<(f64, f64, &'static str)> {
    let mh = mass_lumped(space, k)?;
    let m = mass_exact(space, k)?;
    if space.dim() <= DENSE_CAP {
        let ev = generalized_eigenvalues(&mh.to_sparse().to_dense(), &m.to_dense())?;
        return Ok((ev[0], ev[ev.len() - 1], "dense"));
    }
    let (mu_min, mu_max) =
        lanczos_extremes(space.dim(), |x| mh.solve(&m.matvec(x)), |x| mh.apply(x), LANCZOS_STEPS, 17)?;
    Ok((1.0 / mu_max, 1.0 / mu_min, "lanczos"))
}

pub fn verify_condition_a(
    domain: Domain,
    kind: MeshKind,
    k: usize,
    levels: &[usize],
    coefficient: &CoefficientSpec,
) -> Result<ConditionAReport> {
    let mut out = Vec::new();
    for &level in levels {
        let run = || -> Result<ConditionALevel> {
            let mesh = Arc::new(build_grid(domain, kind, level)?);
            let field = coefficient.build(&mesh, k)?;
            let space = FeSpace::new(mesh.clone(), lumped_family(kind), k)?;
            let (min, max, method) = condition_a_extremes(&space, field.as_ref())?;
            Ok(ConditionALevel { level, h: mesh.h(), dim: space.dim(), min, max, method })
        };
        out.push(run().map_err(|e| Error::AtLevel { level, source: Box::new(e) })?);
    }
    let max_drift = out
        .windows(2)
        .map(|w| ((w[1].min - w[0].min) / w[0].min).abs().max(((w[1].max - w[0].max) / w[0].max).abs()))
        .fold(0.0, f64::max);
    Ok(ConditionAReport { domain, kind, k, levels: out, max_drift })
}

#[derive(Clone, Debug, Serialize)]
pub struct ConditionBReport {
    pub kind: MeshKind,
    pub k: usize,
    /// max |⟨ũ,w⟩_h − ⟨ũ,w⟩| relative to max |⟨ũ,w⟩|, ũ ∈ P₁Λᵏ or Q₁⁻Λᵏ.
    pub exactness_residual: f64,
    /// Cubical: max |⟨Π_h u,w⟩_h − ⟨u,w⟩_h| relative, u ∈ S1⁺Λᵏ.
    pub pi_h_residual: Option<f64>,
    /// Cubical, k < n: max |dΠ_h u − du| relative.
    pub d_pi_h_residual: Option<f64>,
    /// Cubical: relative gap ⟨u,w⟩_h − ⟨u,w⟩ for raw S1⁺ u (expected nonzero).
    pub raw_s1plus_gap: Option<f64>,
}

fn relative_gap(a: &[f64], b: &[f64]) -> f64 {
    let scale = b.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let diff = a.iter().zip(b).fold(0.0f64, |m, (x, y)| m.max((x - y).abs()));
    if scale == 0.0 {
        diff
    } else {
        diff / scale
    }
}

fn random_vec(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect()
}

/// Exactness of the lumped product against piecewise constants over random
/// trial functions (worst case over `trials`).
pub fn verify_condition_b(
    mesh: &Arc<MeshComplex>,
    k: usize,
    trials: usize,
    seed: u64,
    coefficient: Option<&CoefficientField>,
) -> Result<ConditionBReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let w = FeSpace::new(mesh.clone(), Family::P0, k)?;
    let worst = |acc: &mut f64, v: f64| *acc = acc.max(v);
    match mesh.kind() {
        MeshKind::Simplicial => {
            let s = FeSpace::new(mesh.clone(), Family::P1, k)?;
            let lumped = cross_mass_vertex(&w, &s, coefficient)?;
            let exact = cross_mass_exact(&w, &s, coefficient)?;
            let mut r = 0.0;
            for _ in 0..trials {
                let u = random_vec(&mut rng, s.dim());
                worst(&mut r, relative_gap(&lumped.matvec(&u), &exact.matvec(&u)));
            }
            Ok(ConditionBReport {
                kind: MeshKind::Simplicial,
                k,
                exactness_residual: r,
                pi_h_residual: None,
                d_pi_h_residual: None,
                raw_s1plus_gap: None,
            })
        }
        MeshKind::Cubical => {
            let s = FeSpace::new(mesh.clone(), Family::S1Plus, k)?;
            let q = FeSpace::new(mesh.clone(), Family::Q1Minus, k)?;
            let lq = cross_mass_vertex(&w, &q, coefficient)?;
            let eq = cross_mass_exact(&w, &q, coefficient)?;
            let ls = cross_mass_vertex(&w, &s, coefficient)?;
            let es = cross_mass_exact(&w, &s, coefficient)?;
            let derivs: Option<(SparseOperator, SparseOperator)> = if k < mesh.dim() {
                let s1 = FeSpace::new(mesh.clone(), Family::Q1Minus, k + 1)?;
                Some((exterior_derivative_matrix(&s, &s1)?, exterior_derivative_matrix(&q, &s1)?))
            } else {
                None
            };
            let (mut ex, mut pi, mut dpi, mut raw) = (0.0, 0.0, 0.0, 0.0);
            for _ in 0..trials {
                let ut = random_vec(&mut rng, q.dim());
                worst(&mut ex, relative_gap(&lq.matvec(&ut), &eq.matvec(&ut)));
                let u = random_vec(&mut rng, s.dim());
                let pu = pi_h(&s, &q, &u)?;
                let lu = ls.matvec(&u);
                worst(&mut pi, relative_gap(&lq.matvec(&pu), &lu));
                worst(&mut raw, relative_gap(&lu, &es.matvec(&u)));
                if let Some((ds, dq)) = &derivs {
                    worst(&mut dpi, relative_gap(&dq.matvec(&pu), &ds.matvec(&u)));
                }
            }
            Ok(ConditionBReport {
                kind: MeshKind::Cubical,
                k,
                exactness_residual: ex,
                pi_h_residual: Some(pi),
                d_pi_h_residual: derivs.map(|_| dpi),
                raw_s1plus_gap: Some(raw),
            })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn condition_a_small_grids() {
        for kind in [MeshKind::Simplicial, MeshKind::Cubical] {
            let r = verify_condition_a(Domain::UnitSquare, kind, 1, &[1, 2, 3], &CoefficientSpec::Identity).unwrap();
            assert!(r.all_positive());
            let twice = verify_condition_a(Domain::UnitSquare, kind, 1, &[2], &CoefficientSpec::Scalar { value: 2.0 }).unwrap();
            assert!((twice.levels[0].min - r.levels[1].min).abs() < 1e-10);
        }
    }

    #[test]
    fn condition_b_on_both_kinds() {
        for kind in [MeshKind::Simplicial, MeshKind::Cubical] {
            let mesh = Arc::new(build_grid(Domain::UnitSquare, kind, 2).unwrap());
            for k in 0..=2 {
                let r = verify_condition_b(&mesh, k, 5, 1, None).unwrap();
                assert!(r.exactness_residual < 1e-12, "{r:?}");
                if kind == MeshKind::Cubical {
                    assert!(r.pi_h_residual.unwrap() < 1e-12, "{r:?}");
                    if k < 2 {
                        assert!(r.d_pi_h_residual.unwrap() < 1e-12, "{r:?}");
                    }
                }
            }
        }
    }
}
