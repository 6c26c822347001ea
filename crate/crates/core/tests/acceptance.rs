//! One PASS/FAIL line per acceptance criterion, with wall-clock time.

use std::sync::Arc;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use local_hodge::assembly::{load_vector, verify_condition_a, verify_condition_b, CoefficientField, CoefficientSpec};
use local_hodge::harness::{run_convergence, run_locality, run_solve, run_unisolvency, StudyConfig};
use local_hodge::hodge::{
    adjoint_residual, coderivative_global, coderivative_local, infsup_estimate, HarmonicMode, HodgePair, SolverKind, Variant,
};
use local_hodge::mesh::{build_grid, Domain, MeshKind};
use local_hodge::poly::checks::algebra_suite;
use local_hodge::sparse::dot;
use local_hodge::Result;

const KINDS: [MeshKind; 2] = [MeshKind::Simplicial, MeshKind::Cubical];
const ANISOTROPIC: CoefficientSpec = CoefficientSpec::RandomAnisotropic { ratio: 100.0, seed: 11, blocks: 2 };
const ANISOTROPIC_CONSTANT: CoefficientSpec = CoefficientSpec::ConstantAnisotropic { ratio: 100.0, seed: 11 };

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: impl Into<String>) -> Result<Outcome> {
    Ok(Outcome { passed, detail: detail.into() })
}

fn secs(d: Duration) -> f64 {
    d.as_secs_f64()
}

fn criterion(id: usize, name: &str, f: impl FnOnce() -> Result<Outcome>) -> bool {
    let start = Instant::now();
    let (passed, detail) = match f() {
        Ok(o) => (o.passed, o.detail),
        Err(e) => (false, format!("error: {e}")),
    };
    println!("criterion {id:>2} {} [{:7.1}s] {name}: {detail}", if passed { "PASS" } else { "FAIL" }, secs(start.elapsed()));
    passed
}

fn square_and_cube() -> [(Domain, usize); 2] {
    [(Domain::UnitSquare, 2), (Domain::UnitCube, 3)]
}

fn mesh(domain: Domain, kind: MeshKind, level: usize) -> Result<Arc<local_hodge::mesh::MeshComplex>> {
    Ok(Arc::new(build_grid(domain, kind, level)?))
}

fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0f64, |m, x| m.max(x.abs()))
}

fn c1() -> Result<Outcome> {
    let start = Instant::now();
    let r = algebra_suite(4, 100, 1)?;
    let failed = r.iter().filter(|c| !c.passed).count();
    let t = secs(start.elapsed());
    outcome(failed == 0 && t < 60.0, format!("{} exact checks, {failed} failed, {t:.1}s (limit 60s)", r.len()))
}

fn c2() -> Result<Outcome> {
    let start = Instant::now();
    let r = run_unisolvency(4, 2)?;
    let t = secs(start.elapsed());
    let first = r.checks.iter().find(|c| !c.passed).map(|c| format!("; first failure {} (n={}, k={})", c.name, c.n, c.k));
    outcome(
        r.failed == 0 && t < 300.0,
        format!("{} exact checks, {} failed, {t:.1}s (limit 300s){}", r.checks.len(), r.failed, first.unwrap_or_default()),
    )
}

fn c3(spec: &CoefficientSpec) -> Result<Outcome> {
    let mut worst_drift: f64 = 0.0;
    let mut lowest = f64::INFINITY;
    let mut ok = true;
    let mut cases = 0;
    for (domain, n) in square_and_cube() {
        for kind in KINDS {
            for k in 0..=n {
                let levels = [2, 3, 4];
                let r = verify_condition_a(domain, kind, k, &levels, spec)?;
                ok &= r.all_positive() && r.max_drift < 0.1;
                worst_drift = worst_drift.max(r.max_drift);
                lowest = r.levels.iter().fold(lowest, |m, l| m.min(l.min));
                cases += 1;
            }
        }
    }
    outcome(ok, format!("{cases} families over 3 levels, smallest eigenvalue {lowest:.4}, max drift {:.2}% (limit 10%)", 100.0 * worst_drift))
}

fn c4(spec: &CoefficientSpec) -> Result<Outcome> {
    let (mut ex, mut pi, mut dpi, mut raw) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
    for (domain, n) in square_and_cube() {
        for kind in KINDS {
            let m = mesh(domain, kind, if n == 2 { 3 } else { 2 })?;
            for k in 0..=n {
                let field = spec.build(&m, k)?;
                let r = verify_condition_b(&m, k, 5, 3, field.as_ref())?;
                ex = ex.max(r.exactness_residual);
                pi = pi.max(r.pi_h_residual.unwrap_or(0.0));
                dpi = dpi.max(r.d_pi_h_residual.unwrap_or(0.0));
                if let Some(g) = r.raw_s1plus_gap {
                    raw = raw.max(g);
                }
            }
        }
    }
    outcome(
        ex <= 1e-12 && pi <= 1e-12 && dpi <= 1e-12,
        format!("exactness {ex:.1e}, Pi_h product {pi:.1e}, d Pi_h {dpi:.1e} (limit 1e-12); largest raw S1+ gap {raw:.1e}"),
    )
}

fn c5(spec: &CoefficientSpec) -> Result<Outcome> {
    let (mut far, mut far_nz, mut near_nz, mut exact_nz, mut ok) = (0, 0, 0, 0, true);
    for (domain, n) in square_and_cube() {
        for kind in KINDS {
            for k in 1..=n {
                let mut c = StudyConfig::new(domain, kind, k, Variant::Lumped, vec![if n == 2 { 3 } else { 2 }]);
                c.coefficient = spec.clone();
                let r = run_locality(&c)?;
                ok &= r.passed;
                far += r.far_probes;
                far_nz += r.far_nonzero;
                near_nz += r.near_nonzero;
                exact_nz += usize::from(r.exact_far_nonzero > 0);
            }
        }
    }
    outcome(
        ok,
        format!("{far} far probes with {far_nz} nonzero changes; {near_nz} near probes changed; exact-mass control nonlocal in {exact_nz}/10 pairs"),
    )
}

fn c6(spec: &CoefficientSpec) -> Result<Outcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let (mut adj, mut block) = (0.0f64, 0.0f64);
    for (domain, n) in square_and_cube() {
        for kind in KINDS {
            let m = mesh(domain, kind, if n == 2 { 3 } else { 2 })?;
            for k in 1..=n {
                let pair = HodgePair::new(m.clone(), k, spec.build(&m, k - 1)?)?;
                for _ in 0..50 {
                    let u: Vec<f64> = (0..pair.u_space().dim()).map(|_| rng.gen_range(-1.0..1.0)).collect();
                    let local = coderivative_local(&pair, &u)?;
                    adj = adj.max(adjoint_residual(&pair, &u, &local)?);
                    let global = coderivative_global(&pair, &u, Variant::Lumped)?;
                    let diff: Vec<f64> = local.iter().zip(&global).map(|(a, b)| a - b).collect();
                    block = block.max(max_abs(&diff) / max_abs(&local));
                }
            }
        }
    }
    let m = mesh(Domain::UnitInterval, MeshKind::Simplicial, 1)?;
    let p = HodgePair::new(m, 1, None)?;
    let oracle = coderivative_local(&p, &p.u_space().interpolate(|_| vec![1.0]))?;
    let hand = oracle.iter().zip([-4.0, 0.0, 4.0]).all(|(a, b)| (a - b).abs() < 1e-13);
    outcome(
        adj <= 1e-10 && block <= 1e-12 && hand,
        format!("adjoint residual {adj:.1e} (limit 1e-10), block vs global {block:.1e} (limit 1e-12), 1D oracle {oracle:?}"),
    )
}

fn c7(spec: &CoefficientSpec) -> Result<Outcome> {
    let mut ok = true;
    let mut worst = f64::INFINITY;
    let mut times = Vec::new();
    let mut failures = Vec::new();
    for (domain, n) in square_and_cube() {
        let start = Instant::now();
        let levels: Vec<usize> = if n == 2 { (2..=6).collect() } else { (2..=4).collect() };
        for kind in KINDS {
            for k in [1, n] {
                for variant in [Variant::Lumped, Variant::Exact] {
                    let mut c = StudyConfig::new(domain, kind, k, variant, levels.clone());
                    c.coefficient = spec.clone();
                    let r = run_convergence(&c)?;
                    let rate = r.final_rate.unwrap_or(f64::NAN);
                    if !r.passed {
                        failures.push(format!("{domain}/{kind}/k={k}/{variant}: {rate:.3}"));
                    }
                    ok &= r.passed;
                    worst = worst.min(rate);
                }
            }
        }
        let t = secs(start.elapsed());
        ok &= t < if n == 2 { 120.0 } else { 600.0 };
        times.push(t);
    }
    outcome(
        ok,
        format!(
            "16 studies, lowest finest-pair rate {worst:.3} (threshold 0.9); 2D {:.1}s (limit 120s), 3D {:.1}s (limit 600s){}",
            times[0],
            times[1],
            if failures.is_empty() { String::new() } else { format!("; below threshold: {}", failures.join(", ")) }
        ),
    )
}

fn c8() -> Result<Outcome> {
    let mut dims = Vec::new();
    let mut ok = true;
    for (domain, kind, want) in
        [(Domain::UnitSquare, MeshKind::Simplicial, 0), (Domain::UnitSquare, MeshKind::Cubical, 0), (Domain::SquareWithHole, MeshKind::Simplicial, 1)]
    {
        for level in 1..=3 {
            let pair = HodgePair::new(mesh(domain, kind, level)?, 1, None)?;
            let h = pair.harmonic_basis(HarmonicMode::Dense)?;
            ok &= h.dim() == want;
            dims.push(h.dim());
        }
    }
    let pair = HodgePair::new(mesh(Domain::SquareWithHole, MeshKind::Simplicial, 3)?, 1, None)?;
    let h = pair.harmonic_basis(HarmonicMode::Dense)?;
    let f = load_vector(pair.u_space(), |x| vec![(3.0 * x[1]).sin() + x[0], x[0] * x[1] - 1.0]);
    let s = pair.solve(&f, Variant::Lumped, &h, SolverKind::Auto)?;
    let mk = &pair.matrices().mass_k;
    let component = h.vectors().iter().map(|q| dot(&s.u, &mk.matvec(q)).abs()).fold(0.0, f64::max);
    ok &= component <= 1e-10;
    outcome(ok, format!("dims square/simplicial, square/cubical, annulus over levels 1-3: {dims:?}; max <u_h, q> = {component:.1e} (limit 1e-10)"))
}

fn c9() -> Result<Outcome> {
    let mut ok = true;
    let mut worst_drift: f64 = 0.0;
    let mut lowest = f64::INFINITY;
    let mut max_ratio: f64 = 1.0;
    for kind in KINDS {
        for k in [1, 2] {
            let mut smallest = Vec::new();
            for variant in [Variant::Lumped, Variant::Exact] {
                let r = infsup_estimate(Domain::UnitSquare, kind, k, variant, &[1, 2, 3], &CoefficientSpec::Identity)?;
                ok &= r.all_positive() && r.drift < 0.2 && r.levels.iter().all(|l| l.dim <= 5000);
                worst_drift = worst_drift.max(r.drift);
                lowest = r.levels.iter().fold(lowest, |m, l| m.min(l.smallest_singular));
                smallest.push(r.levels.iter().map(|l| l.smallest_singular).collect::<Vec<_>>());
            }
            for (a, b) in smallest[0].iter().zip(&smallest[1]) {
                max_ratio = max_ratio.max(a / b).max(b / a);
            }
        }
    }
    outcome(
        ok,
        format!("smallest singular value {lowest:.4} > 0, max drift {:.1}% (limit 20%), lumped/exact within factor {max_ratio:.3}", 100.0 * worst_drift),
    )
}

fn c10() -> Result<Outcome> {
    let mut worst: f64 = 0.0;
    let mut cases = 0;
    for (domain, n) in square_and_cube() {
        for kind in KINDS {
            let c = StudyConfig::new(domain, kind, n, Variant::Lumped, vec![if n == 2 { 4 } else { 2 }]);
            let r = run_solve(&c)?.conservation.expect("k = n");
            worst = worst.max(r.max());
            cases += 1;
        }
    }
    outcome(worst <= 1e-10, format!("{cases} meshes, every cell, whole domain and 20 random unions each: max residual {worst:.1e} (limit 1e-10)"))
}

/// K = identity must reproduce the unweighted path bit for bit.
fn identity_bitwise() -> Result<bool> {
    let mut same = true;
    for (domain, n) in square_and_cube() {
        for kind in KINDS {
            let m = mesh(domain, kind, 2)?;
            for k in 1..=n {
                let a = HodgePair::new(m.clone(), k, None)?;
                let b = HodgePair::new(m.clone(), k, Some(CoefficientField::identity(&m, k - 1)))?;
                same &= a.lumped_mass().to_sparse().to_dense() == b.lumped_mass().to_sparse().to_dense();
                same &= a.exact_sigma_mass().to_dense() == b.exact_sigma_mass().to_dense();
                let h = a.harmonic_basis(HarmonicMode::Auto)?;
                let f: Vec<f64> = (0..a.u_space().dim()).map(|i| ((i * 13 % 7) as f64) - 3.0).collect();
                for variant in [Variant::Lumped, Variant::Exact] {
                    let x = a.solve(&f, variant, &h, SolverKind::Direct)?;
                    let y = b.solve(&f, variant, &h, SolverKind::Direct)?;
                    same &= x.sigma == y.sigma && x.u == y.u;
                }
            }
        }
    }
    Ok(same)
}

fn c11() -> Result<Outcome> {
    let parts: [(&str, Box<dyn Fn() -> Result<Outcome>>); 5] = [
        ("3", Box::new(|| c3(&ANISOTROPIC))),
        ("4", Box::new(|| c4(&ANISOTROPIC))),
        ("5", Box::new(|| c5(&ANISOTROPIC))),
        ("6", Box::new(|| c6(&ANISOTROPIC))),
        ("7", Box::new(|| c7(&ANISOTROPIC_CONSTANT))),
    ];
    let mut ok = true;
    let mut failed = Vec::new();
    for (id, f) in parts {
        let o = f()?;
        println!("    criterion {id:>2} with anisotropic K: {} {}", if o.passed { "pass" } else { "fail" }, o.detail);
        if !o.passed {
            failed.push(id);
        }
        ok &= o.passed;
    }
    let bitwise = identity_bitwise()?;
    ok &= bitwise;
    outcome(
        ok,
        format!(
            "criteria 3-7 re-run with ratio-100 K ({}); identity path bit-identical: {bitwise}",
            if failed.is_empty() { "all pass".to_string() } else { format!("failed: {}", failed.join(", ")) }
        ),
    )
}

fn main() {
    faer::set_global_parallelism(faer::Par::Seq);
    if std::env::args().any(|a| a == "--list") {
        return;
    }
    let identity = CoefficientSpec::Identity;
    let results = [
        criterion(1, "exact form algebra", c1),
        criterion(2, "S1+ theorem suite", c2),
        criterion(3, "lumped/exact mass equivalence", || c3(&identity)),
        criterion(4, "exactness on piecewise constants", || c4(&identity)),
        criterion(5, "locality of the coderivative", || c5(&identity)),
        criterion(6, "adjointness and block equivalence", || c6(&identity)),
        criterion(7, "convergence of the manufactured suite", || c7(&identity)),
        criterion(8, "harmonic forms", c8),
        criterion(9, "inf-sup stability", c9),
        criterion(10, "local conservation", c10),
        criterion(11, "coefficient robustness", c11),
    ];
    let passed = results.iter().filter(|p| **p).count();
    println!("acceptance: {passed}/{} criteria passed", results.len());
    if passed != results.len() {
        std::process::exit(1);
    }
}
