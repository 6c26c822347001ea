use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::convergence::{level_problem, LevelProblem};
use super::StudyConfig;
use crate::assembly::{l2_error, l2_error_d};
use crate::error::{Error, Result};
use crate::hodge::{
    infsup_estimate, locality_probe, CoderivativeSolver, ConservationReport, HarmonicMode, HodgePair, InfSupReport,
    Variant,
};
use crate::mesh::build_grid;
use crate::poly::checks::{s1plus_suite, CheckResult};

const LOCALITY_VERTICES: usize = 8;
const FAR_PER_VERTEX: usize = 40;
const NEAR_PER_VERTEX: usize = 10;
const EXACT_PER_VERTEX: usize = 10;

#[derive(Clone, Debug, Serialize)]
pub struct LocalityStudy {
    pub level: usize,
    pub vertices: Vec<usize>,
    pub far_probes: usize,
    /// Far probes of the lumped coderivative with any nonzero change.
    pub far_nonzero: usize,
    pub max_far_change: f64,
    pub near_probes: usize,
    pub near_nonzero: usize,
    pub exact_far_probes: usize,
    pub exact_far_nonzero: usize,
    pub max_exact_far_change: f64,
    pub passed: bool,
}

/// Far and near perturbation probes of the lumped coderivative at sampled
/// vertices, with the exact-mass coderivative as a control. Uses the
/// finest configured level.
pub fn run_locality(config: &StudyConfig) -> Result<LocalityStudy> {
    config.validate(1)?;
    let level = *config.levels.last().expect("validated");
    let mesh = Arc::new(build_grid(config.domain, config.kind, level)?);
    let field = config.coefficient.build(&mesh, config.k - 1)?;
    let pair = HodgePair::new(mesh.clone(), config.k, field)?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let u: Vec<f64> = (0..pair.u_space().dim()).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let exact = CoderivativeSolver::new(&pair, Variant::Exact)?;
    let mut vertices: Vec<usize> = (0..mesh.num_vertices()).collect();
    vertices.shuffle(&mut rng);
    vertices.truncate(LOCALITY_VERTICES);
    vertices.sort_unstable();
    let mut out = LocalityStudy {
        level,
        vertices: vertices.clone(),
        far_probes: 0,
        far_nonzero: 0,
        max_far_change: 0.0,
        near_probes: 0,
        near_nonzero: 0,
        exact_far_probes: 0,
        exact_far_nonzero: 0,
        max_exact_far_change: 0.0,
        passed: false,
    };
    for &v in &vertices {
        let around = mesh.vertex_cells(v);
        let (mut far, mut near): (Vec<usize>, Vec<usize>) =
            (0..pair.u_space().dim()).partition(|&d| pair.u_space().support(d).iter().all(|c| !around.contains(c)));
        far.shuffle(&mut rng);
        near.shuffle(&mut rng);
        for (i, &d) in far.iter().take(FAR_PER_VERTEX).enumerate() {
            let r = locality_probe(&pair, &u, v, d, Variant::Lumped, None)?;
            out.far_probes += 1;
            out.far_nonzero += usize::from(r.max_change != 0.0);
            out.max_far_change = out.max_far_change.max(r.max_change);
            if i < EXACT_PER_VERTEX {
                let e = locality_probe(&pair, &u, v, d, Variant::Exact, Some(&exact))?;
                out.exact_far_probes += 1;
                out.exact_far_nonzero += usize::from(e.max_change != 0.0);
                out.max_exact_far_change = out.max_exact_far_change.max(e.max_change);
            }
        }
        for &d in near.iter().take(NEAR_PER_VERTEX) {
            let r = locality_probe(&pair, &u, v, d, Variant::Lumped, None)?;
            out.near_probes += 1;
            out.near_nonzero += usize::from(r.max_change != 0.0);
        }
    }
    out.passed = out.far_probes > 0 && out.far_nonzero == 0 && out.near_nonzero > 0 && out.exact_far_nonzero > 0;
    Ok(out)
}

#[derive(Clone, Debug, Serialize)]
pub struct UnisolvencyReport {
    pub n_max: usize,
    pub checks: Vec<CheckResult>,
    pub passed: usize,
    pub failed: usize,
}

/// Exact checks of the enriched cubical spaces for n ≤ n_max ≤ 4.
pub fn run_unisolvency(n_max: usize, seed: u64) -> Result<UnisolvencyReport> {
    if !(1..=4).contains(&n_max) {
        return Err(Error::OutOfRange(format!("n_max = {n_max}, expected 1..=4")));
    }
    let checks = s1plus_suite(n_max, seed)?;
    let passed = checks.iter().filter(|c| c.passed).count();
    Ok(UnisolvencyReport { n_max, failed: checks.len() - passed, passed, checks })
}

pub fn run_infsup(config: &StudyConfig) -> Result<InfSupReport> {
    config.validate(1)?;
    infsup_estimate(config.domain, config.kind, config.k, config.variant, &config.levels, &config.coefficient)
}

#[derive(Clone, Debug, Serialize)]
pub struct SolveReport {
    pub config: StudyConfig,
    pub level: usize,
    pub h: f64,
    pub dofs: usize,
    pub solver: &'static str,
    pub iterations: usize,
    pub residual: f64,
    pub harmonic_dim: usize,
    pub harmonic_load: f64,
    pub err_sigma_l2: f64,
    pub err_dsigma_l2: f64,
    pub err_u_l2: f64,
    pub err_du_l2: f64,
    /// k = n only.
    pub conservation: Option<ConservationReport>,
}

/// One manufactured solve on the finest configured level.
pub fn run_solve(config: &StudyConfig) -> Result<SolveReport> {
    config.validate(1)?;
    let level = *config.levels.last().expect("validated");
    let run = || -> Result<SolveReport> {
        let LevelProblem { pair, solution, load } = level_problem(config, level)?;
        let harmonic = pair.harmonic_basis(HarmonicMode::Auto)?;
        let s = pair.solve(&load, config.variant, &harmonic, config.solver)?;
        let conservation = if config.k == config.dim() {
            Some(ConservationReport::compute(&pair, &s.sigma, &load, 20, config.seed)?)
        } else {
            None
        };
        Ok(SolveReport {
            config: config.clone(),
            level,
            h: pair.mesh().h(),
            dofs: pair.saddle_sizes(&harmonic).iter().sum(),
            solver: s.solver,
            iterations: s.iterations,
            residual: s.residual,
            harmonic_dim: s.harmonic_dim,
            harmonic_load: s.harmonic_load,
            err_sigma_l2: l2_error(pair.sigma_space(), &s.sigma, |x| solution.sigma(x))?,
            err_dsigma_l2: l2_error_d(pair.sigma_space(), &s.sigma, |x| solution.dsigma(x))?,
            err_u_l2: l2_error(pair.u_space(), &s.u, |x| solution.u(x))?,
            err_du_l2: l2_error_d(pair.u_space(), &s.u, |x| solution.du(x))?,
            conservation,
        })
    };
    run().map_err(|e| Error::AtLevel { level, source: Box::new(e) })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{Domain, MeshKind};

    #[test]
    fn locality_study_passes_on_both_kinds() {
        for kind in [MeshKind::Simplicial, MeshKind::Cubical] {
            let c = StudyConfig::new(Domain::UnitSquare, kind, 1, Variant::Lumped, vec![3]);
            let r = run_locality(&c).unwrap();
            assert!(r.passed, "{r:?}");
        }
    }

    #[test]
    fn solve_reports_conservation_for_top_degree() {
        let c = StudyConfig::new(Domain::UnitSquare, MeshKind::Cubical, 2, Variant::Lumped, vec![3]);
        let r = run_solve(&c).unwrap();
        assert!(r.conservation.unwrap().max() < 1e-10);
        let c = StudyConfig::new(Domain::UnitSquare, MeshKind::Cubical, 1, Variant::Lumped, vec![3]);
        assert!(run_solve(&c).unwrap().conservation.is_none());
    }

    #[test]
    fn unisolvency_rejects_large_dimension() {
        assert!(run_unisolvency(5, 0).is_err());
        let r = run_unisolvency(2, 0).unwrap();
        assert_eq!(r.failed, 0);
    }
}
