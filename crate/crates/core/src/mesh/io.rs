use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{MeshComplex, MeshKind};
use crate::error::Result;

/// On-disk mesh: {"n", "kind", "vertices": [[..]], "cells": [[ids]]}, 0-based ids.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MeshFile {
    pub n: usize,
    pub kind: MeshKind,
    pub vertices: Vec<Vec<f64>>,
    pub cells: Vec<Vec<usize>>,
}

impl MeshComplex {
    pub fn from_json_str(s: &str) -> Result<Self> {
        let f: MeshFile = serde_json::from_str(s)?;
        MeshComplex::new(f.kind, f.n, f.vertices, f.cells)
    }

    pub fn from_json_file(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json_str(&std::fs::read_to_string(path)?)
    }

    pub fn to_json_string(&self) -> Result<String> {
        let f = MeshFile { n: self.n, kind: self.kind, vertices: self.vertices.clone(), cells: self.cells.clone() };
        Ok(serde_json::to_string(&f)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{build_grid, Domain};

    #[test]
    fn json_round_trip() {
        let m = build_grid(Domain::UnitSquare, MeshKind::Cubical, 1).unwrap();
        let s = m.to_json_string().unwrap();
        let back = MeshComplex::from_json_str(&s).unwrap();
        assert_eq!(back.cells(), m.cells());
        assert_eq!(back.num_faces(1), m.num_faces(1));
        let doc = r#"{"n": 2, "kind": "simplicial", "vertices": [[0,0],[1,0],[0,1]], "cells": [[0,1,2]]}"#;
        assert_eq!(MeshComplex::from_json_str(doc).unwrap().num_faces(1), 3);
        assert!(MeshComplex::from_json_str(r#"{"n": 2}"#).is_err());
    }
}
