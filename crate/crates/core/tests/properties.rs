use std::sync::Arc;

use proptest::prelude::*;

use local_hodge::assembly::CoefficientField;
use local_hodge::hodge::{adjoint_residual, coderivative_local, locality_probe, HodgePair, Variant};
use local_hodge::mesh::{build_grid, Domain, MeshKind};

fn pair(kind: MeshKind, k: usize, scale: Option<f64>) -> HodgePair {
    let m = Arc::new(build_grid(Domain::UnitSquare, kind, 2).unwrap());
    let field = scale.map(|c| CoefficientField::scalar(&m, k - 1, c));
    HodgePair::new(m, k, field).unwrap()
}

fn kind_strategy() -> impl Strategy<Value = MeshKind> {
    prop_oneof![Just(MeshKind::Simplicial), Just(MeshKind::Cubical)]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn discrete_coderivative_is_adjoint(kind in kind_strategy(), k in 1usize..=2, seed in any::<u64>()) {
        let p = pair(kind, k, None);
        let u: Vec<f64> = (0..p.u_space().dim()).map(|i| ((seed.wrapping_add(i as u64 * 2654435761) % 1000) as f64) / 500.0 - 1.0).collect();
        let d = coderivative_local(&p, &u).unwrap();
        prop_assert!(adjoint_residual(&p, &u, &d).unwrap() < 1e-12);
    }

    #[test]
    fn coderivative_is_linear_in_the_coefficient(kind in kind_strategy(), k in 1usize..=2, c in 0.1f64..50.0) {
        let base = pair(kind, k, None);
        let scaled = pair(kind, k, Some(c));
        let u: Vec<f64> = (0..base.u_space().dim()).map(|i| (i as f64).sin()).collect();
        let a = coderivative_local(&base, &u).unwrap();
        let b = coderivative_local(&scaled, &u).unwrap();
        let scale = a.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        for (x, y) in a.iter().zip(&b) {
            prop_assert!((c * x - y).abs() <= 1e-12 * c * scale);
        }
    }

    #[test]
    fn far_perturbations_never_reach_the_vertex(kind in kind_strategy(), vertex in 0usize..25, dof_pick in any::<usize>()) {
        let p = pair(kind, 1, None);
        let around = p.mesh().vertex_cells(vertex).to_vec();
        let far: Vec<usize> = (0..p.u_space().dim()).filter(|&d| p.u_space().support(d).iter().all(|c| !around.contains(c))).collect();
        prop_assume!(!far.is_empty());
        let dof = far[dof_pick % far.len()];
        let u: Vec<f64> = (0..p.u_space().dim()).map(|i| (i as f64 * 0.37).cos()).collect();
        let r = locality_probe(&p, &u, vertex, dof, Variant::Lumped, None).unwrap();
        prop_assert_eq!(r.max_change, 0.0);
    }
}
