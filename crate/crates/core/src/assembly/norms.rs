use crate::alt::binomial;
use crate::error::{Error, Result};
use crate::fe::FeSpace;
use crate::quadrature::cell_rule;

use super::LOAD_POINTS;

fn error_norm<F: Fn(&[f64]) -> Vec<f64>>(space: &FeSpace, u: &[f64], exact: F, derivative: bool) -> Result<f64> {
    if u.len() != space.dim() {
        return Err(Error::DimensionMismatch(format!("{} coefficients for a space of dimension {}", u.len(), space.dim())));
    }
    let mesh = space.mesh();
    let n = mesh.dim();
    let k = space.degree();
    if derivative && k == n {
        return Ok(0.0);
    }
    let degree = if derivative { k + 1 } else { k };
    let rule = cell_rule(mesh.reference_cell(), LOAD_POINTS);
    let tab = if derivative { space.reference().tabulate_d(&rule.points) } else { space.reference().tabulate(&rule.points) };
    let nc = binomial(n, degree);
    let mut total = 0.0;
    let mut refv = vec![0.0; nc];
    let mut phys = vec![0.0; nc];
    for c in 0..mesh.num_cells() {
        let map = space.cell_map(c);
        let dofs = space.cell_dofs(c);
        let jac = map.jacobian_abs();
        for (q, y) in rule.points.iter().enumerate() {
            refv.iter_mut().for_each(|v| *v = 0.0);
            for (j, &g) in dofs.iter().enumerate() {
                for (r, t) in refv.iter_mut().zip(tab.get(q, j)) {
                    *r += u[g] * t;
                }
            }
            map.push_forward(degree, &refv, &mut phys);
            let e = exact(&map.to_physical(y));
            let s: f64 = phys.iter().zip(&e).map(|(a, b)| (a - b) * (a - b)).sum();
            total += rule.weights[q] * jac * s;
        }
    }
    Ok(total.sqrt())
}

/// ‖u_h − u‖ in L².
pub fn l2_error<F: Fn(&[f64]) -> Vec<f64>>(space: &FeSpace, u: &[f64], exact: F) -> Result<f64> {
    error_norm(space, u, exact, false)
}

/// ‖du_h − du‖ in L², with du given by its Alt coefficients.
pub fn l2_error_d<F: Fn(&[f64]) -> Vec<f64>>(space: &FeSpace, u: &[f64], exact_d: F) -> Result<f64> {
    error_norm(space, u, exact_d, true)
}

/// ‖f‖ in L² over the mesh of a space.
pub fn l2_norm_of_field<F: Fn(&[f64]) -> Vec<f64>>(space: &FeSpace, f: F) -> Result<f64> {
    error_norm(space, &vec![0.0; space.dim()], f, false)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{build_grid, Domain, MeshKind};
    use crate::poly::Family;
    use std::sync::Arc;

    #[test]
    fn interpolant_error_decreases_linearly() {
        let f = |x: &[f64]| vec![(x[0] * 2.0).sin(), x[0] * x[1]];
        let df = |x: &[f64]| vec![x[1]];
        let mut prev: Option<f64> = None;
        for level in 2..5 {
            let m = Arc::new(build_grid(Domain::UnitSquare, MeshKind::Simplicial, level).unwrap());
            let s = FeSpace::new(m, Family::P1MinusLocal, 1).unwrap();
            let u = s.interpolate(f);
            let e = l2_error(&s, &u, f).unwrap();
            assert!(l2_error_d(&s, &u, df).unwrap() < 0.2);
            if let Some(p) = prev {
                let rate = (p / e).log2();
                assert!(rate > 0.9, "rate {rate}");
            }
            prev = Some(e);
        }
        let m = Arc::new(build_grid(Domain::UnitSquare, MeshKind::Cubical, 1).unwrap());
        let s = FeSpace::new(m, Family::Q1Minus, 2).unwrap();
        assert!((l2_norm_of_field(&s, |_| vec![3.0]).unwrap() - 3.0).abs() < 1e-13);
    }
}
