//! Quadrature rules on the reference simplex and cube.

use std::f64::consts::PI;

use itertools::Itertools;

use crate::poly::ReferenceCell;

#[derive(Clone, Debug)]
pub struct Rule {
    pub points: Vec<Vec<f64>>,
    pub weights: Vec<f64>,
}

/// Gauss–Legendre rule with m points on [0, 1].
pub fn gauss_legendre(m: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(m >= 1);
    let mut x = Vec::with_capacity(m);
    let mut w = Vec::with_capacity(m);
    for i in 0..m {
        let mut t = (PI * (i as f64 + 0.75) / (m as f64 + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, t);
            for j in 2..=m {
                let p2 = ((2 * j - 1) as f64 * t * p1 - (j - 1) as f64 * p0) / j as f64;
                p0 = p1;
                p1 = p2;
            }
            let p = if m == 1 { t } else { p1 };
            let pm1 = if m == 1 { 1.0 } else { p0 };
            dp = m as f64 * (t * p - pm1) / (t * t - 1.0);
            let dt = p / dp;
            t -= dt;
            if dt.abs() < 1e-16 {
                break;
            }
        }
        x.push(0.5 * (1.0 - t));
        w.push(1.0 / ((1.0 - t * t) * dp * dp));
    }
    let mut pairs: Vec<(f64, f64)> = x.into_iter().zip(w).collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    pairs.into_iter().unzip()
}

/// Tensor Gauss rule with m points per axis on [0,1]^dim.
pub fn box_rule(dim: usize, m: usize) -> Rule {
    let (x, w) = gauss_legendre(m);
    if dim == 0 {
        return Rule { points: vec![vec![]], weights: vec![1.0] };
    }
    let mut points = Vec::new();
    let mut weights = Vec::new();
    for idx in (0..dim).map(|_| 0..m).multi_cartesian_product() {
        points.push(idx.iter().map(|&i| x[i]).collect());
        weights.push(idx.iter().map(|&i| w[i]).product());
    }
    Rule { points, weights }
}

/// Collapsed (Duffy) Gauss rule with m points per direction on the unit
/// simplex; exact for total degree ≤ 2m − dim.
pub fn simplex_rule(dim: usize, m: usize) -> Rule {
    let cube = box_rule(dim, m);
    let mut points = Vec::with_capacity(cube.points.len());
    let mut weights = Vec::with_capacity(cube.points.len());
    for (u, w) in cube.points.iter().zip(&cube.weights) {
        let mut x = vec![0.0; dim];
        let mut rest = 1.0;
        for i in 0..dim {
            x[i] = u[i] * rest;
            rest *= 1.0 - u[i];
        }
        let jac: f64 = (0..dim).map(|i| (1.0 - u[i]).powi((dim - 1 - i) as i32)).product();
        points.push(x);
        weights.push(w * jac);
    }
    Rule { points, weights }
}

/// Rule on a reference cell with m points per direction.
pub fn cell_rule(cell: ReferenceCell, m: usize) -> Rule {
    match cell {
        ReferenceCell::Simplex(n) => simplex_rule(n, m),
        ReferenceCell::Cube(n) => box_rule(n, m),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_exactness() {
        for m in 1..=6 {
            let (x, w) = gauss_legendre(m);
            for p in 0..2 * m {
                let q: f64 = x.iter().zip(&w).map(|(xi, wi)| wi * xi.powi(p as i32)).sum();
                assert!((q - 1.0 / (p as f64 + 1.0)).abs() < 1e-14, "m={m} p={p}");
            }
        }
    }

    #[test]
    fn simplex_exactness() {
        // ∫ x^a y^b over the unit triangle = a! b! / (a + b + 2)!
        let r = simplex_rule(2, 3);
        let f = |a: i32, b: i32| r.points.iter().zip(&r.weights).map(|(p, w)| w * p[0].powi(a) * p[1].powi(b)).sum::<f64>();
        assert!((f(0, 0) - 0.5).abs() < 1e-15);
        assert!((f(1, 0) - 1.0 / 6.0).abs() < 1e-15);
        assert!((f(1, 1) - 1.0 / 24.0).abs() < 1e-15);
        assert!((f(2, 2) - 4.0 / 720.0).abs() < 1e-15);
        let r3 = simplex_rule(3, 3);
        let v: f64 = r3.weights.iter().sum();
        assert!((v - 1.0 / 6.0).abs() < 1e-15);
        let xyz: f64 = r3.points.iter().zip(&r3.weights).map(|(p, w)| w * p[0] * p[1] * p[2]).sum();
        assert!((xyz - 1.0 / 720.0).abs() < 1e-16);
    }
}
