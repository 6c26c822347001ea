use super::{MeshComplex, MeshKind};
use crate::error::{Error, Result};

impl MeshComplex {
    /// Uniform refinement: boxes split into 2ⁿ boxes, triangles into four by
    /// edge midpoints, tetrahedra by red refinement in stored vertex order.
    /// Existing vertex ids are kept; new vertices follow face order.
    pub fn refine(&self) -> Result<MeshComplex> {
        let n = self.n;
        let mut vertices = self.vertices.clone();
        let mut offsets = vec![0usize; n + 1];
        let top = match self.kind {
            MeshKind::Cubical => n,
            MeshKind::Simplicial => 1,
        };
        for j in 1..=top {
            offsets[j] = vertices.len();
            for f in &self.faces[j] {
                let mut c = vec![0.0; n];
                for &v in f {
                    for (ci, vi) in c.iter_mut().zip(&self.vertices[v]) {
                        *ci += vi;
                    }
                }
                c.iter_mut().for_each(|x| *x /= f.len() as f64);
                vertices.push(c);
            }
        }
        let mut cells = Vec::with_capacity(self.cells.len() << n);
        match self.kind {
            MeshKind::Cubical => {
                for cell in &self.cells {
                    for child in 0..1usize << n {
                        let verts = (0..1usize << n)
                            .map(|v| {
                                let t: Vec<usize> = (0..n).map(|i| ((child >> i) & 1) + ((v >> i) & 1)).collect();
                                let free: Vec<usize> = (0..n).filter(|&i| t[i] == 1).collect();
                                let mut face: Vec<usize> = (0..1usize << n)
                                    .filter(|w| (0..n).all(|i| t[i] == 1 || ((w >> i) & 1) * 2 == t[i]))
                                    .map(|w| cell[w])
                                    .collect();
                                face.sort_unstable();
                                let j = free.len();
                                if j == 0 {
                                    face[0]
                                } else {
                                    offsets[j] + self.face_index[j][&face]
                                }
                            })
                            .collect();
                        cells.push(verts);
                    }
                }
            }
            MeshKind::Simplicial => {
                let mid = |a: usize, b: usize| -> usize {
                    let key = if a < b { vec![a, b] } else { vec![b, a] };
                    offsets[1] + self.face_index[1][&key]
                };
                for c in &self.cells {
                    match n {
                        1 => {
                            let m = mid(c[0], c[1]);
                            cells.push(vec![c[0], m]);
                            cells.push(vec![m, c[1]]);
                        }
                        2 => {
                            let (x0, x1, x2) = (c[0], c[1], c[2]);
                            let (m01, m02, m12) = (mid(x0, x1), mid(x0, x2), mid(x1, x2));
                            cells.push(vec![x0, m01, m02]);
                            cells.push(vec![m01, x1, m12]);
                            cells.push(vec![m02, m12, x2]);
                            cells.push(vec![m01, m12, m02]);
                        }
                        3 => {
                            let (x0, x1, x2, x3) = (c[0], c[1], c[2], c[3]);
                            let (m01, m02, m03) = (mid(x0, x1), mid(x0, x2), mid(x0, x3));
                            let (m12, m13, m23) = (mid(x1, x2), mid(x1, x3), mid(x2, x3));
                            cells.push(vec![x0, m01, m02, m03]);
                            cells.push(vec![m01, x1, m12, m13]);
                            cells.push(vec![m02, m12, x2, m23]);
                            cells.push(vec![m03, m13, m23, x3]);
                            cells.push(vec![m01, m02, m03, m13]);
                            cells.push(vec![m01, m02, m12, m13]);
                            cells.push(vec![m02, m03, m13, m23]);
                            cells.push(vec![m02, m12, m13, m23]);
                        }
                        _ => return Err(Error::Unsupported(format!("simplicial refinement in dimension {n}"))),
                    }
                }
            }
        }
        let refined = MeshComplex::new(self.kind, n, vertices, cells)?;
        Ok(match &self.betti {
            Some(b) => refined.with_betti(b.clone()),
            None => refined,
        })
    }
}
