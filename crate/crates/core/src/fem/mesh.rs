//! Conforming triangulations with homogeneous Dirichlet boundary vertices.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct TriMesh {
    vertices: Vec<[f64; 2]>,
    triangles: Vec<[usize; 3]>,
    boundary: Vec<bool>,
    interior_index: Vec<Option<usize>>,
    n_dofs: usize,
    h: f64,
    /// n_div when the mesh is the structured unit-square mesh.
    structured: Option<usize>,
}

fn signed_area(a: [f64; 2], b: [f64; 2], c: [f64; 2]) -> f64 {
    0.5 * ((b[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (b[1] - a[1]))
}

fn dist(a: [f64; 2], b: [f64; 2]) -> f64 {
    ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt()
}

impl TriMesh {
    /// Validates and builds a mesh. Clockwise triangles are reoriented.
    pub fn new(vertices: Vec<[f64; 2]>, boundary: Vec<bool>, triangles: Vec<[usize; 3]>) -> Result<Self> {
        if boundary.len() != vertices.len() {
            return Err(Error::invalid("boundary", "one flag per vertex is required"));
        }
        let mut triangles = triangles;
        let mut h: f64 = 0.0;
        for (index, t) in triangles.iter_mut().enumerate() {
            if t.iter().any(|v| *v >= vertices.len()) {
                return Err(Error::invalid("triangles", format!("triangle {index} references a missing vertex")));
            }
            let [a, b, c] = t.map(|v| vertices[v]);
            let area = signed_area(a, b, c);
            let scale = dist(a, b).max(dist(b, c)).max(dist(c, a));
            if !(area.abs() > 1e-14 * scale * scale) {
                return Err(Error::DegenerateElement { index, area });
            }
            if area < 0.0 {
                t.swap(1, 2);
            }
            h = h.max(scale);
        }
        let mut edges: HashMap<(usize, usize), usize> = HashMap::new();
        for t in &triangles {
            for k in 0..3 {
                let (a, b) = (t[k], t[(k + 1) % 3]);
                *edges.entry((a.min(b), a.max(b))).or_default() += 1;
            }
        }
        if let Some(((a, b), _)) = edges.iter().find(|(_, c)| **c > 2) {
            return Err(Error::invalid("triangles", format!("edge ({a}, {b}) is shared by more than two triangles")));
        }
        let mut n_dofs = 0;
        let interior_index = boundary
            .iter()
            .map(|b| {
                if *b {
                    None
                } else {
                    n_dofs += 1;
                    Some(n_dofs - 1)
                }
            })
            .collect();
        Ok(Self { vertices, triangles, boundary, interior_index, n_dofs, h, structured: None })
    }

    /// Structured mesh of the unit square: (n+1)² vertices, each cell split
    /// along its (0,0)–(1,1) diagonal into two triangles.
    pub fn unit_square(n_div: usize) -> Result<Self> {
        if n_div == 0 {
            return Err(Error::invalid("n_div", "must be at least 1"));
        }
        let n = n_div;
        let id = |i: usize, j: usize| j * (n + 1) + i;
        let mut vertices = Vec::with_capacity((n + 1) * (n + 1));
        let mut boundary = Vec::with_capacity((n + 1) * (n + 1));
        for j in 0..=n {
            for i in 0..=n {
                vertices.push([i as f64 / n as f64, j as f64 / n as f64]);
                boundary.push(i == 0 || j == 0 || i == n || j == n);
            }
        }
        let mut triangles = Vec::with_capacity(2 * n * n);
        for j in 0..n {
            for i in 0..n {
                triangles.push([id(i, j), id(i + 1, j), id(i + 1, j + 1)]);
                triangles.push([id(i, j), id(i + 1, j + 1), id(i, j + 1)]);
            }
        }
        let mut mesh = Self::new(vertices, boundary, triangles)?;
        mesh.h = std::f64::consts::SQRT_2 / n as f64;
        mesh.structured = Some(n);
        Ok(mesh)
    }

    pub fn vertices(&self) -> &[[f64; 2]] {
        &self.vertices
    }

    pub fn triangles(&self) -> &[[usize; 3]] {
        &self.triangles
    }

    pub fn is_boundary(&self, v: usize) -> bool {
        self.boundary[v]
    }

    pub fn interior_index(&self) -> &[Option<usize>] {
        &self.interior_index
    }

    pub fn n_dofs(&self) -> usize {
        self.n_dofs
    }

    pub fn n_vertices(&self) -> usize {
        self.vertices.len()
    }

    /// Maximum element diameter.
    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn structured_divisions(&self) -> Option<usize> {
        self.structured
    }

    pub fn area(&self, t: usize) -> f64 {
        let [a, b, c] = self.triangles[t].map(|v| self.vertices[v]);
        signed_area(a, b, c)
    }

    /// Vertex values (boundary vertices set to zero) from interior coefficients.
    pub fn extend_by_zero(&self, coeffs: &[f64]) -> Vec<f64> {
        self.interior_index.iter().map(|d| d.map_or(0.0, |i| coeffs[i])).collect()
    }

    /// Value at x of the P1 function with the given vertex values.
    pub fn evaluate(&self, vertex_values: &[f64], x: [f64; 2]) -> Result<f64> {
        let t = self.locate(x).ok_or(Error::OutsideDomain { point: x })?;
        let [a, b, c] = self.triangles[t];
        let l = self.barycentric(t, x);
        Ok(l[0] * vertex_values[a] + l[1] * vertex_values[b] + l[2] * vertex_values[c])
    }

    fn barycentric(&self, t: usize, x: [f64; 2]) -> [f64; 3] {
        let [a, b, c] = self.triangles[t].map(|v| self.vertices[v]);
        let area = signed_area(a, b, c);
        [signed_area(x, b, c) / area, signed_area(a, x, c) / area, signed_area(a, b, x) / area]
    }

    fn locate(&self, x: [f64; 2]) -> Option<usize> {
        const TOL: f64 = 1e-12;
        if let Some(n) = self.structured {
            if !(-TOL..=1.0 + TOL).contains(&x[0]) || !(-TOL..=1.0 + TOL).contains(&x[1]) {
                return None;
            }
            let i = ((x[0] * n as f64).floor() as usize).min(n - 1);
            let j = ((x[1] * n as f64).floor() as usize).min(n - 1);
            let (s, r) = (x[0] * n as f64 - i as f64, x[1] * n as f64 - j as f64);
            let base = 2 * (j * n + i);
            return Some(if r <= s { base } else { base + 1 });
        }
        (0..self.triangles.len()).find(|t| self.barycentric(*t, x).iter().all(|l| *l >= -TOL))
    }

    /// Text format: vertex count, `x y boundary_flag` lines, triangle count, `i j k` lines.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        writeln!(s, "{}", self.vertices.len()).unwrap();
        for (v, b) in self.vertices.iter().zip(&self.boundary) {
            writeln!(s, "{} {} {}", v[0], v[1], u8::from(*b)).unwrap();
        }
        writeln!(s, "{}", self.triangles.len()).unwrap();
        for t in &self.triangles {
            writeln!(s, "{} {} {}", t[0], t[1], t[2]).unwrap();
        }
        s
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_text()).map_err(|e| Error::io(path, e))
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text, path)
    }

    pub fn parse(text: &str, origin: &Path) -> Result<Self> {
        let perr = |line: usize, message: String| Error::Parse { path: origin.to_path_buf(), line, message };
        let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l.trim())).filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
        let mut next = |what: &str| lines.next().ok_or_else(|| perr(0, format!("unexpected end of file, expected {what}")));

        let (ln, l) = next("vertex count")?;
        let nv: usize = l.parse().map_err(|_| perr(ln, format!("bad vertex count `{l}`")))?;
        let mut vertices = Vec::with_capacity(nv);
        let mut boundary = Vec::with_capacity(nv);
        for _ in 0..nv {
            let (ln, l) = next("a vertex line")?;
            let f: Vec<&str> = l.split_whitespace().collect();
            if f.len() != 3 {
                return Err(perr(ln, "expected `x y boundary_flag`".into()));
            }
            let num = |s: &str| s.parse::<f64>().map_err(|_| perr(ln, format!("bad number `{s}`")));
            vertices.push([num(f[0])?, num(f[1])?]);
            boundary.push(match f[2] {
                "0" => false,
                "1" => true,
                other => return Err(perr(ln, format!("boundary flag must be 0 or 1, got `{other}`"))),
            });
        }
        let (ln, l) = next("triangle count")?;
        let nt: usize = l.parse().map_err(|_| perr(ln, format!("bad triangle count `{l}`")))?;
        let mut triangles = Vec::with_capacity(nt);
        for _ in 0..nt {
            let (ln, l) = next("a triangle line")?;
            let idx: std::result::Result<Vec<usize>, _> = l.split_whitespace().map(str::parse).collect();
            match idx {
                Ok(v) if v.len() == 3 => triangles.push([v[0], v[1], v[2]]),
                _ => return Err(perr(ln, "expected three vertex indices".into())),
            }
        }
        if let Ok((ln, _)) = next("") {
            return Err(perr(ln, "trailing content after triangle list".into()));
        }
        Self::new(vertices, boundary, triangles)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unit_square_counts() {
        for (n, tris, dofs) in [(1, 2, 0), (4, 32, 9), (53, 2 * 53 * 53, 52 * 52)] {
            let m = TriMesh::unit_square(n).unwrap();
            assert_eq!(m.triangles().len(), tris);
            assert_eq!(m.n_dofs(), dofs);
            assert_eq!(m.n_vertices(), (n + 1) * (n + 1));
        }
        let m = TriMesh::unit_square(53).unwrap();
        assert!((m.h() - 0.0267).abs() < 1e-4);
    }

    #[test]
    fn areas_positive_and_sum_to_one() {
        let m = TriMesh::unit_square(7).unwrap();
        let total: f64 = (0..m.triangles().len()).map(|t| m.area(t)).sum();
        assert!((total - 1.0).abs() < 1e-14);
        assert!((0..m.triangles().len()).all(|t| m.area(t) > 0.0));
    }

    #[test]
    fn degenerate_and_cw() {
        let v = vec![[0.0, 0.0], [1.0, 0.0], [2.0, 0.0], [0.0, 1.0]];
        let e = TriMesh::new(v.clone(), vec![true; 4], vec![[0, 1, 2]]).unwrap_err();
        assert!(matches!(e, Error::DegenerateElement { index: 0, .. }));
        let m = TriMesh::new(v, vec![true; 4], vec![[0, 3, 1]]).unwrap();
        assert!(m.area(0) > 0.0);
    }

    #[test]
    fn text_round_trip() {
        let m = TriMesh::unit_square(3).unwrap();
        let back = TriMesh::parse(&m.to_text(), Path::new("m.txt")).unwrap();
        assert_eq!(back.vertices(), m.vertices());
        assert_eq!(back.triangles(), m.triangles());
        assert_eq!(back.n_dofs(), m.n_dofs());
        assert!(TriMesh::parse("2\n0 0 1\n", Path::new("m.txt")).is_err());
    }

    #[test]
    fn evaluate_reproduces_linear() {
        let m = TriMesh::unit_square(5).unwrap();
        let vals: Vec<f64> = m.vertices().iter().map(|v| 2.0 * v[0] - v[1] + 0.5).collect();
        for x in [[0.13, 0.77], [0.5, 0.5], [1.0, 0.0], [0.999, 0.001]] {
            assert!((m.evaluate(&vals, x).unwrap() - (2.0 * x[0] - x[1] + 0.5)).abs() < 1e-13);
        }
        assert!(m.evaluate(&vals, [1.5, 0.0]).is_err());
        // the generic search path agrees
        let g = TriMesh::new(m.vertices().to_vec(), (0..m.n_vertices()).map(|v| m.is_boundary(v)).collect(), m.triangles().to_vec()).unwrap();
        assert!((g.evaluate(&vals, [0.13, 0.77]).unwrap() - m.evaluate(&vals, [0.13, 0.77]).unwrap()).abs() < 1e-14);
    }
}
