//! Conforming triangulations with globally oriented faces.
//!
//! Cells are counter-clockwise vertex triples. Local edge `i` of a cell joins
//! local vertices `(i + 1) % 3` and `(i + 2) % 3` (it is opposite vertex `i`).
//! Each face stores its vertices as `(a, b)` with `a < b` and carries a fixed
//! unit normal `n_F`: the counter-clockwise rotation of the unit tangent from
//! `a` to `b` on interior faces, the outward normal on boundary faces.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::{Mat2, Vec2};

/// Boundary condition class of a boundary face.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BoundaryTag {
    Dirichlet,
    Neumann,
    /// Dirichlet data imposed on the inflow part of a hyperbolic problem.
    Inflow,
    /// No condition on either the primal or flux variable.
    Outflow,
    Unset,
}

impl BoundaryTag {
    /// Primal variable is prescribed on faces with this tag.
    pub fn is_dirichlet(self) -> bool {
        matches!(self, BoundaryTag::Dirichlet | BoundaryTag::Inflow)
    }

    pub fn name(self) -> &'static str {
        match self {
            BoundaryTag::Dirichlet => "DIRICHLET",
            BoundaryTag::Neumann => "NEUMANN",
            BoundaryTag::Inflow => "INFLOW",
            BoundaryTag::Outflow => "OUTFLOW",
            BoundaryTag::Unset => "UNSET",
        }
    }
}

/// Affine map from the reference triangle onto a cell: `x = x0 + J ξ`.
#[derive(Debug, Clone, Copy)]
pub struct CellGeometry {
    pub origin: Vec2,
    pub jacobian: Mat2,
    pub inverse: Mat2,
    pub det: f64,
}

impl CellGeometry {
    pub fn new(p0: Vec2, p1: Vec2, p2: Vec2) -> Self {
        let jacobian = Mat2::from_columns(&[p1 - p0, p2 - p0]);
        let det = jacobian.determinant();
        let inverse = jacobian.try_inverse().unwrap_or_else(Mat2::zeros);
        CellGeometry {
            origin: p0,
            jacobian,
            inverse,
            det,
        }
    }

    pub fn to_physical(&self, xi: [f64; 2]) -> Vec2 {
        self.origin + self.jacobian * Vec2::new(xi[0], xi[1])
    }

    pub fn to_reference(&self, x: Vec2) -> [f64; 2] {
        let r = self.inverse * (x - self.origin);
        [r[0], r[1]]
    }

    pub fn area(&self) -> f64 {
        0.5 * self.det.abs()
    }
}

/// A triangulation of a planar polygon.
#[derive(Debug, Clone)]
pub struct Mesh {
    vertices: Vec<Vec2>,
    cells: Vec<[usize; 3]>,
    faces: Vec<[usize; 2]>,
    face_normals: Vec<Vec2>,
    cell_faces: Vec<[usize; 3]>,
    cell_face_signs: Vec<[f64; 3]>,
    face_cells: Vec<(usize, Option<usize>)>,
    tags: Vec<Option<BoundaryTag>>,
    face_diameters: Vec<f64>,
    cell_diameters: Vec<f64>,
    h_max: f64,
}

impl Mesh {
    /// Builds connectivity from vertex coordinates and counter-clockwise cells.
    /// Every boundary face starts out [`BoundaryTag::Unset`].
    pub fn from_cells(vertices: Vec<Vec2>, cells: Vec<[usize; 3]>) -> Result<Self> {
        if cells.is_empty() {
            return Err(Error::InvalidArgument("mesh has no cells".into()));
        }
        for (k, c) in cells.iter().enumerate() {
            if c.iter().any(|&v| v >= vertices.len()) {
                return Err(Error::InvalidArgument(format!("cell {k} references a missing vertex")));
            }
            let g = CellGeometry::new(vertices[c[0]], vertices[c[1]], vertices[c[2]]);
            if g.det <= 0.0 {
                return Err(Error::InvalidArgument(format!(
                    "cell {k} is not counter-clockwise (signed area {})",
                    0.5 * g.det
                )));
            }
        }

        let mut lookup: HashMap<(usize, usize), usize> = HashMap::with_capacity(cells.len() * 2);
        let mut faces: Vec<[usize; 2]> = Vec::with_capacity(cells.len() * 3 / 2 + 2);
        let mut face_cells: Vec<(usize, Option<usize>)> = Vec::with_capacity(faces.capacity());
        let mut cell_faces = Vec::with_capacity(cells.len());
        for (k, c) in cells.iter().enumerate() {
            let mut cf = [0usize; 3];
            for (i, slot) in cf.iter_mut().enumerate() {
                let a = c[(i + 1) % 3];
                let b = c[(i + 2) % 3];
                let key = (a.min(b), a.max(b));
                let f = *lookup.entry(key).or_insert_with(|| {
                    faces.push([key.0, key.1]);
                    face_cells.push((k, None));
                    faces.len() - 1
                });
                if face_cells[f].0 != k {
                    if face_cells[f].1.is_some() {
                        return Err(Error::InvalidArgument(format!(
                            "face ({}, {}) shared by more than two cells",
                            key.0, key.1
                        )));
                    }
                    face_cells[f].1 = Some(k);
                }
                *slot = f;
            }
            cell_faces.push(cf);
        }

        let mut face_normals = Vec::with_capacity(faces.len());
        let mut face_diameters = Vec::with_capacity(faces.len());
        for (f, &[a, b]) in faces.iter().enumerate() {
            let t = vertices[b] - vertices[a];
            let len = t.norm();
            face_diameters.push(len);
            let mut n = Vec2::new(-t[1], t[0]) / len;
            if face_cells[f].1.is_none() {
                // boundary: make it outward with respect to the only cell
                let c = cells[face_cells[f].0];
                let centroid = (vertices[c[0]] + vertices[c[1]] + vertices[c[2]]) / 3.0;
                if n.dot(&(vertices[a] - centroid)) < 0.0 {
                    n = -n;
                }
            }
            face_normals.push(n);
        }

        let mut cell_face_signs = Vec::with_capacity(cells.len());
        let mut cell_diameters = Vec::with_capacity(cells.len());
        for (k, c) in cells.iter().enumerate() {
            let mut signs = [0.0; 3];
            let mut diam: f64 = 0.0;
            for i in 0..3 {
                let pa = vertices[c[(i + 1) % 3]];
                let pb = vertices[c[(i + 2) % 3]];
                let t = pb - pa;
                diam = diam.max(t.norm());
                let outward = Vec2::new(t[1], -t[0]);
                signs[i] = if outward.dot(&face_normals[cell_faces[k][i]]) > 0.0 { 1.0 } else { -1.0 };
            }
            cell_face_signs.push(signs);
            cell_diameters.push(diam);
        }

        // order face_cells so the first cell is the one n_F points out of
        for (f, fc) in face_cells.iter_mut().enumerate() {
            if let Some(other) = fc.1 {
                let local = cell_faces[fc.0].iter().position(|&g| g == f).unwrap();
                if cell_face_signs[fc.0][local] < 0.0 {
                    *fc = (other, Some(fc.0));
                }
            }
        }

        let tags = face_cells
            .iter()
            .map(|fc| if fc.1.is_none() { Some(BoundaryTag::Unset) } else { None })
            .collect();
        let h_max = cell_diameters.iter().cloned().fold(0.0, f64::max);

        Ok(Mesh {
            vertices,
            cells,
            faces,
            face_normals,
            cell_faces,
            cell_face_signs,
            face_cells,
            tags,
            face_diameters,
            cell_diameters,
            h_max,
        })
    }

    pub fn n_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn n_cells(&self) -> usize {
        self.cells.len()
    }

    pub fn n_faces(&self) -> usize {
        self.faces.len()
    }

    pub fn vertices(&self) -> &[Vec2] {
        &self.vertices
    }

    pub fn vertex(&self, v: usize) -> Vec2 {
        self.vertices[v]
    }

    pub fn cells(&self) -> &[[usize; 3]] {
        &self.cells
    }

    pub fn cell(&self, k: usize) -> [usize; 3] {
        self.cells[k]
    }

    pub fn faces(&self) -> &[[usize; 2]] {
        &self.faces
    }

    pub fn face(&self, f: usize) -> [usize; 2] {
        self.faces[f]
    }

    /// Global unit normal `n_F`.
    pub fn face_normal(&self, f: usize) -> Vec2 {
        self.face_normals[f]
    }

    /// Faces of cell `k`, local edge `i` opposite local vertex `i`.
    pub fn cell_faces(&self, k: usize) -> [usize; 3] {
        self.cell_faces[k]
    }

    /// `+1` where the cell's outward normal on the local edge equals `n_F`.
    pub fn cell_face_signs(&self, k: usize) -> [f64; 3] {
        self.cell_face_signs[k]
    }

    /// Adjacent cells of face `f`. The first is the cell `n_F` points out of.
    pub fn face_cells(&self, f: usize) -> (usize, Option<usize>) {
        self.face_cells[f]
    }

    pub fn is_boundary_face(&self, f: usize) -> bool {
        self.face_cells[f].1.is_none()
    }

    /// Boundary tag of face `f`; `None` for interior faces.
    pub fn boundary_tag(&self, f: usize) -> Option<BoundaryTag> {
        self.tags[f]
    }

    pub fn boundary_faces(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.faces.len()).filter(|&f| self.face_cells[f].1.is_none())
    }

    pub fn face_diameter(&self, f: usize) -> f64 {
        self.face_diameters[f]
    }

    pub fn cell_diameter(&self, k: usize) -> f64 {
        self.cell_diameters[k]
    }

    pub fn h_max(&self) -> f64 {
        self.h_max
    }

    pub fn face_midpoint(&self, f: usize) -> Vec2 {
        let [a, b] = self.faces[f];
        0.5 * (self.vertices[a] + self.vertices[b])
    }

    /// Point on face `f` at parameter `t ∈ [0, 1]` from the lower- to the
    /// higher-indexed vertex.
    pub fn face_point(&self, f: usize, t: f64) -> Vec2 {
        let [a, b] = self.faces[f];
        self.vertices[a] + t * (self.vertices[b] - self.vertices[a])
    }

    pub fn geometry(&self, k: usize) -> CellGeometry {
        let c = self.cells[k];
        CellGeometry::new(self.vertices[c[0]], self.vertices[c[1]], self.vertices[c[2]])
    }

    pub fn cell_area(&self, k: usize) -> f64 {
        self.geometry(k).area()
    }

    pub fn area(&self) -> f64 {
        (0..self.n_cells()).map(|k| self.cell_area(k)).sum()
    }

    pub fn cell_centroid(&self, k: usize) -> Vec2 {
        let c = self.cells[k];
        (self.vertices[c[0]] + self.vertices[c[1]] + self.vertices[c[2]]) / 3.0
    }

    /// Local index (0..3) of face `f` within cell `k`.
    pub fn local_face_index(&self, k: usize, f: usize) -> Option<usize> {
        self.cell_faces[k].iter().position(|&g| g == f)
    }

    /// Assigns a tag to every boundary face from its midpoint and outward
    /// normal. A rule returning `None` or [`BoundaryTag::Unset`] for any face
    /// is a configuration error.
    pub fn tag_boundary<R>(&mut self, rule: R) -> Result<()>
    where
        R: Fn(Vec2, Vec2) -> Option<BoundaryTag>,
    {
        let mut tags = self.tags.clone();
        for f in 0..self.faces.len() {
            if self.face_cells[f].1.is_some() {
                continue;
            }
            match rule(self.face_midpoint(f), self.face_normals[f]) {
                Some(tag) if tag != BoundaryTag::Unset => tags[f] = Some(tag),
                _ => {
                    let m = self.face_midpoint(f);
                    return Err(Error::Configuration(format!(
                        "boundary face {f} at ({:.6}, {:.6}) received no tag",
                        m[0], m[1]
                    )));
                }
            }
        }
        self.tags = tags;
        Ok(())
    }

    /// Checks connectivity, orientation and boundary invariants.
    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(Error::InvalidArgument(msg));
        for k in 0..self.n_cells() {
            if self.geometry(k).det <= 0.0 {
                return fail(format!("cell {k} has non-positive area"));
            }
        }
        let mut count = vec![0usize; self.n_faces()];
        for cf in &self.cell_faces {
            for &f in cf {
                count[f] += 1;
            }
        }
        for f in 0..self.n_faces() {
            let expected = if self.is_boundary_face(f) { 1 } else { 2 };
            if count[f] != expected {
                return fail(format!("face {f} has {} cells, expected {expected}", count[f]));
            }
            if self.is_boundary_face(f) {
                let k = self.face_cells[f].0;
                if self.local_face_index(k, f).map(|i| self.cell_face_signs[k][i]) != Some(1.0) {
                    return fail(format!("boundary face {f} normal is not outward"));
                }
            }
        }
        Ok(())
    }

    /// Splits every triangle into four by joining edge midpoints. Boundary
    /// tags pass to the two halves of each boundary face.
    pub fn refine_uniform(&self) -> Result<Mesh> {
        let nv = self.n_vertices();
        let mut vertices = self.vertices.clone();
        vertices.extend((0..self.n_faces()).map(|f| self.face_midpoint(f)));
        let mut cells = Vec::with_capacity(4 * self.n_cells());
        for (k, c) in self.cells.iter().enumerate() {
            let cf = self.cell_faces[k];
            let m = [nv + cf[0], nv + cf[1], nv + cf[2]];
            cells.push([c[0], m[2], m[1]]);
            cells.push([m[2], c[1], m[0]]);
            cells.push([m[1], m[0], c[2]]);
            cells.push([m[0], m[1], m[2]]);
        }
        let mut fine = Mesh::from_cells(vertices, cells)?;
        let mut lookup = HashMap::with_capacity(fine.n_faces());
        for (f, &[a, b]) in fine.faces.iter().enumerate() {
            lookup.insert((a, b), f);
        }
        for f in self.boundary_faces() {
            let [a, b] = self.faces[f];
            let mid = nv + f;
            for (p, q) in [(a, mid), (mid, b)] {
                let child = lookup[&(p.min(q), p.max(q))];
                fine.tags[child] = self.tags[f];
            }
        }
        Ok(fine)
    }

    /// Plain-text dump: vertex, cell and face sections, one record per line.
    ///
    /// ```text
    /// # pdfem mesh
    /// vertices <n>
    /// <x> <y>
    /// cells <n>
    /// <v0> <v1> <v2>
    /// faces <n>
    /// <a> <b> <nx> <ny> <tag>     (tag is INTERIOR for interior faces)
    /// ```
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        s.push_str("# pdfem mesh\n");
        let _ = writeln!(s, "vertices {}", self.n_vertices());
        for v in &self.vertices {
            let _ = writeln!(s, "{:.17e} {:.17e}", v[0], v[1]);
        }
        let _ = writeln!(s, "cells {}", self.n_cells());
        for c in &self.cells {
            let _ = writeln!(s, "{} {} {}", c[0], c[1], c[2]);
        }
        let _ = writeln!(s, "faces {}", self.n_faces());
        for f in 0..self.n_faces() {
            let [a, b] = self.faces[f];
            let n = self.face_normals[f];
            let tag = self.tags[f].map_or("INTERIOR", BoundaryTag::name);
            let _ = writeln!(s, "{a} {b} {:.17e} {:.17e} {tag}", n[0], n[1]);
        }
        s
    }

    pub fn write_text(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_text()).map_err(|e| Error::io(path, e))
    }
}

/// How each grid square of a structured mesh is split into two triangles.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum Diagonal {
    /// Lower-left to upper-right.
    #[default]
    Right,
    /// Lower-right to upper-left.
    Left,
    /// `Right` and `Left` in a checkerboard, `Right` on the square at the
    /// lower-left corner of the grid.
    Alternating,
}

impl Diagonal {
    pub fn name(self) -> &'static str {
        match self {
            Diagonal::Right => "right",
            Diagonal::Left => "left",
            Diagonal::Alternating => "alternating",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "right" => Ok(Diagonal::Right),
            "left" => Ok(Diagonal::Left),
            "alternating" | "right/left" => Ok(Diagonal::Alternating),
            _ => Err(Error::InvalidArgument(format!(
                "unknown diagonal `{s}` (expected right, left or alternating)"
            ))),
        }
    }

    // Cells of the square with corners a (lower left), b, c, d counter-clockwise.
    fn split(self, i: usize, j: usize, [a, b, c, d]: [usize; 4]) -> [[usize; 3]; 2] {
        let left = match self {
            Diagonal::Right => false,
            Diagonal::Left => true,
            Diagonal::Alternating => (i + j) % 2 == 1,
        };
        if left {
            [[a, b, d], [b, c, d]]
        } else {
            [[a, b, c], [a, c, d]]
        }
    }
}

/// Structured mesh of `[xmin, xmax] × [ymin, ymax]` with `nx × ny` squares,
/// each split along the lower-left to upper-right diagonal.
pub fn build_structured_rect(
    nx: usize,
    ny: usize,
    xmin: f64,
    xmax: f64,
    ymin: f64,
    ymax: f64,
) -> Result<Mesh> {
    build_structured_rect_with(nx, ny, xmin, xmax, ymin, ymax, Diagonal::Right)
}

/// [`build_structured_rect`] with a choice of diagonal.
pub fn build_structured_rect_with(
    nx: usize,
    ny: usize,
    xmin: f64,
    xmax: f64,
    ymin: f64,
    ymax: f64,
    diagonal: Diagonal,
) -> Result<Mesh> {
    if nx == 0 || ny == 0 {
        return Err(Error::InvalidArgument(format!("cell counts must be positive, got {nx}×{ny}")));
    }
    if xmax <= xmin || ymax <= ymin || !(xmax - xmin).is_finite() || !(ymax - ymin).is_finite() {
        return Err(Error::InvalidArgument(format!(
            "degenerate rectangle [{xmin}, {xmax}] × [{ymin}, {ymax}]"
        )));
    }
    let dx = (xmax - xmin) / nx as f64;
    let dy = (ymax - ymin) / ny as f64;
    let mut vertices = Vec::with_capacity((nx + 1) * (ny + 1));
    for j in 0..=ny {
        for i in 0..=nx {
            let x = if i == nx { xmax } else { xmin + i as f64 * dx };
            let y = if j == ny { ymax } else { ymin + j as f64 * dy };
            vertices.push(Vec2::new(x, y));
        }
    }
    let id = |i: usize, j: usize| j * (nx + 1) + i;
    let mut cells = Vec::with_capacity(2 * nx * ny);
    for j in 0..ny {
        for i in 0..nx {
            cells.extend(diagonal.split(i, j, [id(i, j), id(i + 1, j), id(i + 1, j + 1), id(i, j + 1)]));
        }
    }
    Mesh::from_cells(vertices, cells)
}

/// L-shaped domain `(−1, 1)² ∖ [0, 1) × (−1, 0]` with `n` squares per unit
/// length; the re-entrant corner sits at the origin.
pub fn build_lshape(n: usize) -> Result<Mesh> {
    build_lshape_with(n, Diagonal::Right)
}

/// [`build_lshape`] with a choice of diagonal; the checkerboard of
/// [`Diagonal::Alternating`] is anchored at `(−1, −1)`.
pub fn build_lshape_with(n: usize, diagonal: Diagonal) -> Result<Mesh> {
    if n == 0 {
        return Err(Error::InvalidArgument("L-shape needs n ≥ 1".into()));
    }
    let m = 2 * n;
    let h = 1.0 / n as f64;
    let coord = |i: usize| if i == m { 1.0 } else { -1.0 + i as f64 * h };
    let removed = |i: usize, j: usize| i >= n && j < n;
    let mut index = vec![usize::MAX; (m + 1) * (m + 1)];
    let mut vertices = Vec::new();
    let mut cells = Vec::with_capacity(6 * n * n);
    let mut vid = |i: usize, j: usize, vertices: &mut Vec<Vec2>| {
        let slot = &mut index[j * (m + 1) + i];
        if *slot == usize::MAX {
            *slot = vertices.len();
            vertices.push(Vec2::new(coord(i), coord(j)));
        }
        *slot
    };
    for j in 0..m {
        for i in 0..m {
            if removed(i, j) {
                continue;
            }
            let a = vid(i, j, &mut vertices);
            let b = vid(i + 1, j, &mut vertices);
            let c = vid(i + 1, j + 1, &mut vertices);
            let d = vid(i, j + 1, &mut vertices);
            cells.extend(diagonal.split(i, j, [a, b, c, d]));
        }
    }
    Mesh::from_cells(vertices, cells)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit(n: usize) -> Mesh {
        build_structured_rect(n, n, 0.0, 1.0, 0.0, 1.0).unwrap()
    }

    #[test]
    fn smallest_rect() {
        let m = unit(1);
        assert_eq!((m.n_vertices(), m.n_cells(), m.n_faces()), (4, 2, 5));
        m.validate().unwrap();
    }

    #[test]
    fn two_by_two_counts() {
        let m = unit(2);
        assert_eq!((m.n_vertices(), m.n_cells(), m.n_faces()), (9, 8, 16));
        assert_eq!(m.boundary_faces().count(), 8);
    }

    #[test]
    fn h_max_of_split_square() {
        let m = build_structured_rect(32, 32, -1.0, 1.0, -1.0, 1.0).unwrap();
        assert!((m.h_max() - 2.0 * 2f64.sqrt() / 32.0).abs() < 1e-14);
    }

    #[test]
    fn invalid_rects() {
        assert!(matches!(build_structured_rect(0, 1, 0.0, 1.0, 0.0, 1.0), Err(Error::InvalidArgument(_))));
        assert!(matches!(build_structured_rect(1, 1, 1.0, 1.0, 0.0, 1.0), Err(Error::InvalidArgument(_))));
        assert!(matches!(build_lshape(0), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn lshape_counts() {
        let m = build_lshape(1).unwrap();
        assert_eq!((m.n_cells(), m.n_vertices()), (6, 8));
        assert_eq!(build_lshape(2).unwrap().n_cells(), 24);
        for n in 1..4 {
            let m = build_lshape(n).unwrap();
            let origin = m.vertices().iter().position(|v| v.norm() < 1e-14).unwrap();
            let on_boundary = m
                .boundary_faces()
                .any(|f| m.face(f).contains(&origin));
            assert!(on_boundary);
            assert!((m.area() - 3.0).abs() < 1e-12);
            m.validate().unwrap();
        }
    }

    #[test]
    fn refinement_counts() {
        assert_eq!(unit(1).refine_uniform().unwrap().n_cells(), 8);
        let l = build_lshape(1).unwrap().refine_uniform().unwrap().refine_uniform().unwrap();
        assert_eq!(l.n_cells(), 96);
        let m = unit(3);
        let r = m.refine_uniform().unwrap();
        assert!((r.h_max() - m.h_max() / 2.0).abs() < 1e-14);
    }

    #[test]
    fn euler_relation() {
        for m in [unit(1), unit(5), build_lshape(3).unwrap(), build_lshape(2).unwrap().refine_uniform().unwrap()] {
            let chi = m.n_vertices() as i64 - m.n_faces() as i64 + m.n_cells() as i64;
            assert_eq!(chi, 1);
        }
    }

    #[test]
    fn refinement_quarters_areas() {
        let m = build_lshape(2).unwrap();
        let r = m.refine_uniform().unwrap();
        for k in 0..m.n_cells() {
            for c in 0..4 {
                let ratio = r.cell_area(4 * k + c) / m.cell_area(k);
                assert!((ratio - 0.25).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn closed_cell_boundary() {
        let m = build_lshape(2).unwrap().refine_uniform().unwrap();
        for k in 0..m.n_cells() {
            let mut acc = Vec2::zeros();
            for (i, &f) in m.cell_faces(k).iter().enumerate() {
                acc += m.cell_face_signs(k)[i] * m.face_normal(f) * m.face_diameter(f);
            }
            assert!(acc.norm() < 1e-12);
        }
    }

    #[test]
    fn tags_all_dirichlet_and_inherited() {
        let mut m = unit(3);
        m.tag_boundary(|_, _| Some(BoundaryTag::Dirichlet)).unwrap();
        let n = m.boundary_faces().filter(|&f| m.boundary_tag(f) == Some(BoundaryTag::Dirichlet)).count();
        assert_eq!(n, 12);
        let r = m.refine_uniform().unwrap();
        assert!(r.boundary_faces().all(|f| r.boundary_tag(f) == Some(BoundaryTag::Dirichlet)));
        assert_eq!(r.boundary_faces().count(), 24);
    }

    #[test]
    fn untagged_face_is_error() {
        let mut m = unit(2);
        let r = m.tag_boundary(|x, _| (x[0] < 1e-12).then_some(BoundaryTag::Dirichlet));
        assert!(matches!(r, Err(Error::Configuration(_))));
    }

    #[test]
    fn boundary_normals_outward() {
        let m = unit(4);
        for f in m.boundary_faces() {
            let x = m.face_midpoint(f);
            let n = m.face_normal(f);
            let expect = if x[0] < 1e-12 {
                Vec2::new(-1.0, 0.0)
            } else if x[0] > 1.0 - 1e-12 {
                Vec2::new(1.0, 0.0)
            } else if x[1] < 1e-12 {
                Vec2::new(0.0, -1.0)
            } else {
                Vec2::new(0.0, 1.0)
            };
            assert!((n - expect).norm() < 1e-14);
        }
    }

    #[test]
    fn text_dump_sections() {
        let mut m = unit(1);
        m.tag_boundary(|_, _| Some(BoundaryTag::Neumann)).unwrap();
        let s = m.to_text();
        assert!(s.contains("vertices 4\n"));
        assert!(s.contains("cells 2\n"));
        assert!(s.contains("faces 5\n"));
        assert_eq!(s.matches("NEUMANN").count(), 4);
        assert_eq!(s.matches("INTERIOR").count(), 1);
    }
}
