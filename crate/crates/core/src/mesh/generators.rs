use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use itertools::Itertools;
use serde::{Deserialize, Serialize};

use super::{MeshComplex, MeshKind};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Domain {
    UnitInterval,
    UnitSquare,
    UnitCube,
    SquareWithHole,
}

impl Domain {
    pub fn dim(self) -> usize {
        match self {
            Domain::UnitInterval => 1,
            Domain::UnitSquare | Domain::SquareWithHole => 2,
            Domain::UnitCube => 3,
        }
    }

    pub fn betti(self) -> Vec<usize> {
        match self {
            Domain::SquareWithHole => vec![1, 1, 0],
            d => {
                let mut b = vec![0; d.dim() + 1];
                b[0] = 1;
                b
            }
        }
    }
}

impl fmt::Display for Domain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Domain::UnitInterval => "unit_interval",
            Domain::UnitSquare => "unit_square",
            Domain::UnitCube => "unit_cube",
            Domain::SquareWithHole => "square_with_hole",
        })
    }
}

impl FromStr for Domain {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "unit_interval" => Ok(Domain::UnitInterval),
            "unit_square" => Ok(Domain::UnitSquare),
            "unit_cube" => Ok(Domain::UnitCube),
            "square_with_hole" => Ok(Domain::SquareWithHole),
            _ => Err(Error::Config(format!("unknown domain {s:?}"))),
        }
    }
}

impl fmt::Display for MeshKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            MeshKind::Simplicial => "simplicial",
            MeshKind::Cubical => "cubical",
        })
    }
}

impl FromStr for MeshKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "simplicial" => Ok(MeshKind::Simplicial),
            "cubical" => Ok(MeshKind::Cubical),
            _ => Err(Error::Config(format!("unknown mesh kind {s:?}"))),
        }
    }
}

/// Structured box grid with `cells_per_axis` boxes per axis over
/// [0, extent]ⁿ, keeping only boxes accepted by `keep` (given lower-corner
/// integer coordinates).
fn box_grid(
    n: usize,
    cells_per_axis: usize,
    extent: f64,
    keep: impl Fn(&[usize]) -> bool,
) -> (Vec<Vec<f64>>, Vec<Vec<usize>>) {
    let m = cells_per_axis;
    let step = extent / m as f64;
    let boxes: Vec<Vec<usize>> = (0..n)
        .map(|_| 0..m)
        .multi_cartesian_product()
        .map(|mut idx| {
            idx.reverse();
            idx
        })
        .filter(|idx| keep(idx))
        .collect();
    // Vertex ids in lexicographic order with axis 0 fastest, only used ones.
    let mut used: BTreeMap<Vec<usize>, usize> = BTreeMap::new();
    let key = |p: &[usize]| -> Vec<usize> { p.iter().rev().copied().collect() };
    for b in &boxes {
        for v in 0..1usize << n {
            let p: Vec<usize> = (0..n).map(|i| b[i] + ((v >> i) & 1)).collect();
            used.insert(key(&p), 0);
        }
    }
    let mut vertices = Vec::with_capacity(used.len());
    for (i, (k, id)) in used.iter_mut().enumerate() {
        *id = i;
        vertices.push(k.iter().rev().map(|&c| c as f64 * step).collect());
    }
    let mut sorted_boxes = boxes;
    sorted_boxes.sort_by_key(|b| key(b));
    let cells = sorted_boxes
        .iter()
        .map(|b| {
            (0..1usize << n)
                .map(|v| {
                    let p: Vec<usize> = (0..n).map(|i| b[i] + ((v >> i) & 1)).collect();
                    used[&key(&p)]
                })
                .collect()
        })
        .collect();
    (vertices, cells)
}

/// Split each box into simplices: two triangles along the (0…0)–(1…1)
/// diagonal in 2D, the six path simplices of the Kuhn triangulation in 3D.
fn simplicial_split(n: usize, boxes: &[Vec<usize>]) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    for b in boxes {
        if n == 1 {
            out.push(vec![b[0], b[1]]);
            continue;
        }
        if n == 2 {
            out.push(vec![b[0], b[1], b[3]]);
            out.push(vec![b[0], b[3], b[2]]);
            continue;
        }
        for perm in (0..n).permutations(n) {
            let mut v = 0usize;
            let mut simplex = vec![b[0]];
            for a in perm {
                v |= 1 << a;
                simplex.push(b[v]);
            }
            out.push(simplex);
        }
    }
    out
}

/// Structured meshes with h = 2^{−level}·h₀.
pub fn build_grid(domain: Domain, kind: MeshKind, level: usize) -> Result<MeshComplex> {
    if level > 12 {
        return Err(Error::OutOfRange(format!("refinement level {level}")));
    }
    let n = domain.dim();
    let (vertices, boxes) = match domain {
        Domain::SquareWithHole => {
            if kind != MeshKind::Simplicial {
                return Err(Error::Unsupported("square_with_hole is only available as a simplicial mesh".into()));
            }
            let m = 3usize << level;
            let lo = 1usize << level;
            let hi = 2usize << level;
            box_grid(2, m, 3.0, |b| !(b[0] >= lo && b[0] < hi && b[1] >= lo && b[1] < hi))
        }
        _ => box_grid(n, 1usize << level, 1.0, |_| true),
    };
    let cells = match kind {
        MeshKind::Cubical => boxes,
        MeshKind::Simplicial => simplicial_split(n, &boxes),
    };
    Ok(MeshComplex::new(kind, n, vertices, cells)?.with_betti(domain.betti()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_counts() {
        let m = build_grid(Domain::UnitSquare, MeshKind::Cubical, 2).unwrap();
        assert_eq!((m.num_cells(), m.num_vertices(), m.num_faces(1)), (16, 25, 40));
        let t = build_grid(Domain::UnitSquare, MeshKind::Simplicial, 0).unwrap();
        assert_eq!(t.num_faces(1), 5);
        let hole = build_grid(Domain::SquareWithHole, MeshKind::Simplicial, 0).unwrap();
        assert_eq!(hole.euler_characteristic(), 0);
        assert_eq!(hole.num_cells(), 16);
        let cube = build_grid(Domain::UnitCube, MeshKind::Simplicial, 1).unwrap();
        assert_eq!(cube.num_cells(), 48);
        assert_eq!(cube.euler_characteristic(), 1);
        let line = build_grid(Domain::UnitInterval, MeshKind::Simplicial, 1).unwrap();
        assert_eq!(line.num_cells(), 2);
        assert!(build_grid(Domain::SquareWithHole, MeshKind::Cubical, 0).is_err());
    }

    #[test]
    fn mesh_size_halves() {
        let a = build_grid(Domain::UnitSquare, MeshKind::Simplicial, 1).unwrap();
        let b = build_grid(Domain::UnitSquare, MeshKind::Simplicial, 2).unwrap();
        assert!((b.h() / a.h() - 0.5).abs() < 1e-14);
    }

    #[test]
    fn names_round_trip() {
        for d in [Domain::UnitInterval, Domain::UnitSquare, Domain::UnitCube, Domain::SquareWithHole] {
            assert_eq!(d.to_string().parse::<Domain>().unwrap(), d);
        }
        assert!("torus".parse::<Domain>().is_err());
    }
}
