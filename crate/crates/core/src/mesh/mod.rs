//! Simplicial `k`-surfaces in the closed unit ball of `R^n`.
//!
//! A [`SimplicialSurface`] stores vertices, `(k+1)`-vertex cells and a
//! boundary flag per vertex. Boundary flags are inferred from face incidence:
//! a `(k-1)`-face with a single incident cell is a boundary face, and every
//! vertex of a boundary face is a boundary vertex. Construction checks the
//! manifold-with-boundary condition and the geometric invariants (vertices in
//! the closed ball, boundary vertices on the unit sphere, non-degenerate
//! cells).

mod clip;
mod frame;
pub mod io;

use std::collections::HashMap;
use std::f64::consts::PI;

pub use clip::{ClipMeasure, DEFAULT_CLIP_DEPTH};
pub use frame::{OrthoFrame, FRAME_TOLERANCE};

use crate::error::{Error, Result};
use crate::vector::AmbientVector;

/// Slack allowed on `|x| <= 1` for every vertex.
pub const BALL_TOLERANCE: f64 = 1e-9;
/// Slack allowed on `|x| = 1` for boundary vertices.
pub const SPHERE_TOLERANCE: f64 = 1e-9;
/// Smallest admissible cell k-volume.
pub const MIN_CELL_VOLUME: f64 = 1e-14;

/// Volume of the unit ball in `R^k`, `pi^(k/2) / Gamma(k/2 + 1)`.
pub fn unit_ball_volume(k: i64) -> Result<f64> {
    if k <= 0 {
        return Err(Error::Domain(format!(
            "unit ball volume needs k >= 1, got {k}"
        )));
    }
    // V_k = 2 pi / k * V_{k-2}, with V_0 = 1 and V_1 = 2.
    let mut v = if k % 2 == 0 { 1.0 } else { 2.0 };
    let mut j = if k % 2 == 0 { 2 } else { 3 };
    while j <= k {
        v *= 2.0 * PI / j as f64;
        j += 2;
    }
    Ok(v)
}

/// Measure of the unit sphere `dB^k`, equal to `k |B^k|`.
pub fn unit_sphere_measure(k: i64) -> Result<f64> {
    Ok(k as f64 * unit_ball_volume(k)?)
}

/// A `(k-1)`-face with exactly one incident cell.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BoundaryFace {
    /// Vertex indices of the face (one vertex for `k = 1`, an edge for `k = 2`).
    pub vertices: Vec<usize>,
    /// The unique incident cell.
    pub cell: usize,
}

/// Discrete `k`-dimensional surface in `B^n`, `k` in `{1, 2}`.
#[derive(Clone, Debug, PartialEq)]
pub struct SimplicialSurface {
    k: usize,
    n: usize,
    vertices: Vec<AmbientVector>,
    cells: Vec<Vec<usize>>,
    boundary_vertex: Vec<bool>,
    boundary_faces: Vec<BoundaryFace>,
}

impl SimplicialSurface {
    /// Builds and validates a surface. The ambient dimension is read from the
    /// vertices.
    pub fn new(k: usize, vertices: Vec<AmbientVector>, cells: Vec<Vec<usize>>) -> Result<Self> {
        if !(1..=2).contains(&k) {
            return Err(Error::Domain(format!(
                "surfaces must have intrinsic dimension 1 or 2, got {k}"
            )));
        }
        let n = vertices
            .first()
            .map(AmbientVector::dim)
            .ok_or_else(|| Error::Invariant("surface has no vertices".into()))?;
        if n < k {
            return Err(Error::Domain(format!(
                "ambient dimension {n} is smaller than k = {k}"
            )));
        }
        if let Some(i) = vertices.iter().position(|v| v.dim() != n) {
            return Err(Error::Invariant(format!(
                "vertex {i} has dimension {} instead of {n}",
                vertices[i].dim()
            )));
        }
        if let Some(i) = vertices
            .iter()
            .position(|v| v.coords().iter().any(|c| !c.is_finite()))
        {
            return Err(Error::Invariant(format!("vertex {i} is not finite")));
        }
        if cells.is_empty() {
            return Err(Error::Invariant("surface has no cells".into()));
        }
        for (c, cell) in cells.iter().enumerate() {
            if cell.len() != k + 1 {
                return Err(Error::Invariant(format!(
                    "cell {c} has {} vertices, expected {}",
                    cell.len(),
                    k + 1
                )));
            }
            if let Some(&bad) = cell.iter().find(|&&i| i >= vertices.len()) {
                return Err(Error::Invariant(format!(
                    "cell {c} references missing vertex {bad}"
                )));
            }
            for a in 0..cell.len() {
                for b in a + 1..cell.len() {
                    if cell[a] == cell[b] {
                        return Err(Error::Invariant(format!("cell {c} repeats a vertex")));
                    }
                }
            }
        }

        let (boundary_faces, boundary_vertex) = boundary_structure(k, vertices.len(), &cells)?;
        let surface = Self {
            k,
            n,
            vertices,
            cells,
            boundary_vertex,
            boundary_faces,
        };
        surface.check_geometry()?;
        Ok(surface)
    }

    /// Same topology, new vertex positions; geometry is re-validated.
    pub fn with_positions(&self, positions: Vec<AmbientVector>) -> Result<Self> {
        if positions.len() != self.vertices.len() {
            return Err(Error::Invariant(format!(
                "expected {} positions, got {}",
                self.vertices.len(),
                positions.len()
            )));
        }
        if positions.iter().any(|p| p.dim() != self.n) {
            return Err(Error::Invariant("position has the wrong dimension".into()));
        }
        let surface = Self {
            vertices: positions,
            ..self.clone()
        };
        surface.check_geometry()?;
        Ok(surface)
    }

    /// Validates the geometric invariants.
    pub fn check_geometry(&self) -> Result<()> {
        for (i, v) in self.vertices.iter().enumerate() {
            let r = v.norm();
            if !r.is_finite() {
                return Err(Error::Invariant(format!("vertex {i} is not finite")));
            }
            if r > 1.0 + BALL_TOLERANCE {
                return Err(Error::Invariant(format!(
                    "vertex {i} lies outside the unit ball (|x| = {r})"
                )));
            }
            if self.boundary_vertex[i] && (r - 1.0).abs() > SPHERE_TOLERANCE {
                return Err(Error::Invariant(format!(
                    "boundary vertex {i} is off the unit sphere (|x| = {r})"
                )));
            }
        }
        for c in 0..self.cells.len() {
            let vol = self.cell_volume(c);
            if !(vol > MIN_CELL_VOLUME) {
                return Err(Error::DegenerateCell {
                    cell: c,
                    volume: vol,
                });
            }
        }
        Ok(())
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn ambient_dim(&self) -> usize {
        self.n
    }

    pub fn vertices(&self) -> &[AmbientVector] {
        &self.vertices
    }

    pub fn cells(&self) -> &[Vec<usize>] {
        &self.cells
    }

    pub fn is_boundary_vertex(&self, v: usize) -> bool {
        self.boundary_vertex[v]
    }

    pub fn boundary_flags(&self) -> &[bool] {
        &self.boundary_vertex
    }

    pub fn boundary_faces(&self) -> &[BoundaryFace] {
        &self.boundary_faces
    }

    pub fn is_closed(&self) -> bool {
        self.boundary_faces.is_empty()
    }

    /// Edge vectors `x_1 - x_0, ..., x_k - x_0` of a cell.
    pub fn cell_edges(&self, cell: usize) -> Vec<AmbientVector> {
        let c = &self.cells[cell];
        let base = &self.vertices[c[0]];
        c[1..].iter().map(|&i| &self.vertices[i] - base).collect()
    }

    /// k-volume of one cell (Gram determinant).
    pub fn cell_volume(&self, cell: usize) -> f64 {
        let edges = self.cell_edges(cell);
        match self.k {
            1 => edges[0].norm(),
            _ => triangle_area(&edges[0], &edges[1]),
        }
    }

    pub fn barycenter(&self, cell: usize) -> AmbientVector {
        let c = &self.cells[cell];
        let mut b = AmbientVector::zeros(self.n);
        for &i in c {
            b.axpy(1.0, &self.vertices[i]);
        }
        b.scaled(1.0 / c.len() as f64)
    }

    /// Sum of the cell k-volumes.
    pub fn surface_measure(&self) -> f64 {
        (0..self.cells.len()).map(|c| self.cell_volume(c)).sum()
    }

    /// `(k-1)`-measure of the boundary; for `k = 1` the number of boundary points.
    pub fn boundary_measure(&self) -> f64 {
        match self.k {
            1 => self.boundary_faces.len() as f64,
            _ => self
                .boundary_faces
                .iter()
                .map(|f| self.vertices[f.vertices[0]].distance(&self.vertices[f.vertices[1]]))
                .sum(),
        }
    }

    /// Orthonormal frame of the tangent plane of a cell.
    pub fn tangent_frame(&self, cell: usize) -> Result<OrthoFrame> {
        if cell >= self.cells.len() {
            return Err(Error::Domain(format!("no cell {cell}")));
        }
        let vol = self.cell_volume(cell);
        if !(vol > MIN_CELL_VOLUME) {
            return Err(Error::DegenerateCell { cell, volume: vol });
        }
        OrthoFrame::gram_schmidt(&self.cell_edges(cell))
    }

    /// Unit conormal of a boundary face: tangent to the incident cell,
    /// orthogonal to the face, pointing out of the cell.
    pub fn outward_conormal(&self, boundary_face: usize) -> Result<AmbientVector> {
        let face = self
            .boundary_faces
            .get(boundary_face)
            .ok_or(Error::NotBoundary(boundary_face))?;
        let cell = &self.cells[face.cell];
        let opposite = *cell
            .iter()
            .find(|v| !face.vertices.contains(v))
            .expect("a cell has a vertex off each of its faces");
        let apex = &self.vertices[opposite];
        let base = &self.vertices[face.vertices[0]];
        let mut out = base - apex;
        if self.k == 2 {
            let edge = &self.vertices[face.vertices[1]] - base;
            let e2 = edge.norm_squared();
            out.axpy(-out.dot(&edge) / e2, &edge);
        }
        out.normalized().ok_or(Error::DegenerateCell {
            cell: face.cell,
            volume: 0.0,
        })
    }

    /// Barycenter of a boundary face.
    pub fn face_barycenter(&self, boundary_face: usize) -> Result<AmbientVector> {
        let face = self
            .boundary_faces
            .get(boundary_face)
            .ok_or(Error::NotBoundary(boundary_face))?;
        let mut b = AmbientVector::zeros(self.n);
        for &i in &face.vertices {
            b.axpy(1.0, &self.vertices[i]);
        }
        Ok(b.scaled(1.0 / face.vertices.len() as f64))
    }

    /// Measure of the part of the surface inside the open ball `B_r(y)`,
    /// with an absolute error bound.
    pub fn clip_measure(&self, y: &AmbientVector, r: f64) -> ClipMeasure {
        clip::clip_measure(self, y, r, DEFAULT_CLIP_DEPTH)
    }

    pub fn clip_measure_with_depth(&self, y: &AmbientVector, r: f64, depth: u32) -> ClipMeasure {
        clip::clip_measure(self, y, r, depth)
    }

    /// All distinct edges as sorted vertex pairs, in first-seen order.
    pub fn edges(&self) -> Vec<[usize; 2]> {
        let mut seen = HashMap::new();
        let mut out = Vec::new();
        for cell in &self.cells {
            for a in 0..cell.len() {
                for b in a + 1..cell.len() {
                    let e = sorted_pair(cell[a], cell[b]);
                    if seen.insert(e, ()).is_none() {
                        out.push(e);
                    }
                }
            }
        }
        out
    }

    pub fn max_edge_length(&self) -> f64 {
        self.edges()
            .iter()
            .map(|e| self.vertices[e[0]].distance(&self.vertices[e[1]]))
            .fold(0.0, f64::max)
    }

    pub fn mean_edge_length(&self) -> f64 {
        let edges = self.edges();
        edges
            .iter()
            .map(|e| self.vertices[e[0]].distance(&self.vertices[e[1]]))
            .sum::<f64>()
            / edges.len() as f64
    }

    /// Number of cells incident to each vertex.
    pub fn vertex_degrees(&self) -> Vec<usize> {
        let mut deg = vec![0; self.vertices.len()];
        for cell in &self.cells {
            for &v in cell {
                deg[v] += 1;
            }
        }
        deg
    }

    /// Splits every cell once at edge midpoints (2 segments or 4 triangles per
    /// cell). Midpoints are not projected, so flat cells subdivide exactly.
    pub fn subdivide(&self) -> Result<Self> {
        let mut vertices = self.vertices.clone();
        let mut midpoint: HashMap<[usize; 2], usize> = HashMap::new();
        let mut mid = |a: usize, b: usize, vertices: &mut Vec<AmbientVector>| -> usize {
            *midpoint.entry(sorted_pair(a, b)).or_insert_with(|| {
                let m = (&vertices[a] + &vertices[b]).scaled(0.5);
                vertices.push(m);
                vertices.len() - 1
            })
        };
        let mut cells = Vec::with_capacity(self.cells.len() * 4);
        for cell in &self.cells {
            match self.k {
                1 => {
                    let m = mid(cell[0], cell[1], &mut vertices);
                    cells.push(vec![cell[0], m]);
                    cells.push(vec![m, cell[1]]);
                }
                _ => {
                    let (a, b, c) = (cell[0], cell[1], cell[2]);
                    let ab = mid(a, b, &mut vertices);
                    let bc = mid(b, c, &mut vertices);
                    let ca = mid(c, a, &mut vertices);
                    cells.push(vec![a, ab, ca]);
                    cells.push(vec![ab, b, bc]);
                    cells.push(vec![ca, bc, c]);
                    cells.push(vec![ab, bc, ca]);
                }
            }
        }
        Self::new(self.k, vertices, cells)
    }

    /// Distance from `y` to the boundary complex (infinite for closed surfaces).
    pub fn distance_to_boundary(&self, y: &AmbientVector) -> f64 {
        self.boundary_faces
            .iter()
            .map(|f| match self.k {
                1 => self.vertices[f.vertices[0]].distance(y),
                _ => point_segment_distance(
                    y,
                    &self.vertices[f.vertices[0]],
                    &self.vertices[f.vertices[1]],
                ),
            })
            .fold(f64::INFINITY, f64::min)
    }
}

pub(crate) fn sorted_pair(a: usize, b: usize) -> [usize; 2] {
    if a < b {
        [a, b]
    } else {
        [b, a]
    }
}

/// Area of the triangle spanned by `u` and `v` in any dimension.
pub(crate) fn triangle_area(u: &AmbientVector, v: &AmbientVector) -> f64 {
    let uu = u.norm_squared();
    let vv = v.norm_squared();
    let uv = u.dot(v);
    0.5 * (uu * vv - uv * uv).max(0.0).sqrt()
}

pub(crate) fn point_segment_distance(
    p: &AmbientVector,
    a: &AmbientVector,
    b: &AmbientVector,
) -> f64 {
    let e = b - a;
    let w = p - a;
    let t = (w.dot(&e) / e.norm_squared()).clamp(0.0, 1.0);
    let mut q = a.clone();
    q.axpy(t, &e);
    q.distance(p)
}

fn boundary_structure(
    k: usize,
    vertex_count: usize,
    cells: &[Vec<usize>],
) -> Result<(Vec<BoundaryFace>, Vec<bool>)> {
    let faces_of = |cell: &[usize]| -> Vec<Vec<usize>> {
        match k {
            1 => vec![vec![cell[0]], vec![cell[1]]],
            _ => vec![
                sorted_pair(cell[0], cell[1]).to_vec(),
                sorted_pair(cell[1], cell[2]).to_vec(),
                sorted_pair(cell[2], cell[0]).to_vec(),
            ],
        }
    };
    let mut incidence: HashMap<Vec<usize>, usize> = HashMap::new();
    for cell in cells {
        for f in faces_of(cell) {
            *incidence.entry(f).or_insert(0) += 1;
        }
    }
    if let Some((face, count)) = incidence.iter().find(|(_, &c)| c > 2) {
        return Err(Error::Invariant(format!(
            "face {face:?} belongs to {count} cells; the complex is not a manifold"
        )));
    }
    let mut boundary_faces = Vec::new();
    let mut flags = vec![false; vertex_count];
    for (c, cell) in cells.iter().enumerate() {
        for f in faces_of(cell) {
            if incidence[&f] == 1 {
                for &v in &f {
                    flags[v] = true;
                }
                boundary_faces.push(BoundaryFace {
                    vertices: f,
                    cell: c,
                });
            }
        }
    }
    Ok((boundary_faces, flags))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn v(c: &[f64]) -> AmbientVector {
        AmbientVector::from(c.to_vec())
    }

    pub(crate) fn diameter(segments: usize) -> SimplicialSurface {
        let vertices = (0..=segments)
            .map(|i| v(&[-1.0 + 2.0 * i as f64 / segments as f64, 0.0]))
            .collect();
        let cells = (0..segments).map(|i| vec![i, i + 1]).collect();
        SimplicialSurface::new(1, vertices, cells).unwrap()
    }

    fn small_triangle() -> SimplicialSurface {
        // Interior triangle; its edges are boundary faces, so vertices must
        // sit on the sphere. Use a triangle inscribed in the unit circle.
        let s = 3f64.sqrt() / 2.0;
        SimplicialSurface::new(
            2,
            vec![v(&[1.0, 0.0, 0.0]), v(&[-0.5, s, 0.0]), v(&[-0.5, -s, 0.0])],
            vec![vec![0, 1, 2]],
        )
        .unwrap()
    }

    #[test]
    fn ball_volumes() {
        assert_eq!(unit_ball_volume(1).unwrap(), 2.0);
        assert_abs_diff_eq!(unit_ball_volume(2).unwrap(), PI, epsilon = 1e-15);
        assert_abs_diff_eq!(
            unit_ball_volume(3).unwrap(),
            4.0 * PI / 3.0,
            epsilon = 1e-15
        );
        assert_abs_diff_eq!(unit_ball_volume(4).unwrap(), PI * PI / 2.0, epsilon = 1e-14);
        assert!(unit_ball_volume(0).is_err());
        assert!(unit_ball_volume(-3).is_err());
        assert_abs_diff_eq!(unit_sphere_measure(2).unwrap(), 2.0 * PI, epsilon = 1e-15);
    }

    #[test]
    fn unit_right_triangle_area() {
        let u = v(&[1.0, 0.0, 0.0]);
        let w = v(&[0.0, 1.0, 0.0]);
        assert_eq!(triangle_area(&u, &w), 0.5);
    }

    #[test]
    fn diameter_measures() {
        let s = diameter(4);
        assert_eq!(s.surface_measure(), 2.0);
        assert_eq!(s.boundary_measure(), 2.0);
        assert_eq!(s.boundary_faces().len(), 2);
        assert!(s.is_boundary_vertex(0) && s.is_boundary_vertex(4));
        assert!(!s.is_boundary_vertex(2));
    }

    #[test]
    fn diameter_frame_and_conormal() {
        let s = SimplicialSurface::new(1, vec![v(&[-1.0, 0.0]), v(&[1.0, 0.0])], vec![vec![0, 1]])
            .unwrap();
        let f = s.tangent_frame(0).unwrap();
        assert_eq!(f.vectors()[0].coords(), &[1.0, 0.0]);
        let ends: Vec<_> = (0..2).map(|i| s.outward_conormal(i).unwrap()).collect();
        assert!(ends.iter().any(|c| c.coords() == [1.0, 0.0]));
        assert!(ends.iter().any(|c| c.coords() == [-1.0, 0.0]));
    }

    #[test]
    fn tilted_chord_conormal_is_chord_direction() {
        let a = v(&[-(0.75f64).sqrt(), 0.5]);
        let b = v(&[(0.75f64).sqrt(), 0.5]);
        let s = SimplicialSurface::new(1, vec![a, b.clone()], vec![vec![0, 1]]).unwrap();
        let idx = s
            .boundary_faces()
            .iter()
            .position(|f| f.vertices == vec![1])
            .unwrap();
        let c = s.outward_conormal(idx).unwrap();
        assert_abs_diff_eq!(c[0], 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(c[1], 0.0, epsilon = 1e-15);
        let angle = c.dot(&b).acos();
        assert_abs_diff_eq!(angle, PI / 6.0, epsilon = 1e-12);
    }

    #[test]
    fn closed_polygon_has_no_boundary() {
        let n = 12;
        let vertices = (0..n)
            .map(|i| {
                let t = 2.0 * PI * i as f64 / n as f64;
                v(&[t.cos(), t.sin(), 0.0])
            })
            .collect();
        let cells = (0..n).map(|i| vec![i, (i + 1) % n]).collect();
        let s = SimplicialSurface::new(1, vertices, cells).unwrap();
        assert!(s.is_closed());
        assert_eq!(s.boundary_measure(), 0.0);
        assert!(s.outward_conormal(0).is_err());
    }

    #[test]
    fn triangle_frame_from_scaled_edges() {
        let s = small_triangle();
        let f = s.tangent_frame(0).unwrap();
        assert!(f.orthonormality_defect() <= FRAME_TOLERANCE);
        assert_eq!(f.k(), 2);
    }

    #[test]
    fn rejects_outside_ball_and_off_sphere_boundary() {
        let r = SimplicialSurface::new(1, vec![v(&[-1.0, 0.0]), v(&[1.5, 0.0])], vec![vec![0, 1]]);
        assert!(matches!(r, Err(Error::Invariant(_))));
        let r = SimplicialSurface::new(1, vec![v(&[-1.0, 0.0]), v(&[0.5, 0.0])], vec![vec![0, 1]]);
        assert!(matches!(r, Err(Error::Invariant(_))));
    }

    #[test]
    fn rejects_degenerate_cell() {
        let s = 3f64.sqrt() / 2.0;
        let r = SimplicialSurface::new(
            2,
            vec![v(&[1.0, 0.0, 0.0]), v(&[-0.5, s, 0.0]), v(&[1.0, 0.0, 0.0])],
            vec![vec![0, 1, 2]],
        );
        assert!(matches!(r, Err(Error::DegenerateCell { .. })));
    }

    #[test]
    fn rejects_non_manifold_edge() {
        let s = 3f64.sqrt() / 2.0;
        let r = SimplicialSurface::new(
            2,
            vec![
                v(&[1.0, 0.0, 0.0]),
                v(&[-1.0, 0.0, 0.0]),
                v(&[0.0, s, 0.0]),
                v(&[0.0, -s, 0.0]),
                v(&[0.0, 0.0, s]),
            ],
            vec![vec![0, 1, 2], vec![0, 1, 3], vec![0, 1, 4]],
        );
        assert!(matches!(r, Err(Error::Invariant(_))));
    }

    #[test]
    fn subdivision_preserves_measures() {
        // Boundary midpoints of a k = 2 mesh leave the sphere, so the check
        // uses a chord and a closed torus of flat squares.
        for s in [
            diameter(3),
            crate::minimizer::seed::clifford_torus(8).unwrap(),
        ] {
            let t = s.subdivide().unwrap();
            assert_eq!(t.cells().len(), s.cells().len() * 2 * s.k());
            assert_abs_diff_eq!(t.surface_measure(), s.surface_measure(), epsilon = 1e-12);
            assert_abs_diff_eq!(t.boundary_measure(), s.boundary_measure(), epsilon = 1e-12);
        }
    }

    #[test]
    fn distance_to_boundary_of_chord() {
        let s = diameter(2);
        assert_abs_diff_eq!(
            s.distance_to_boundary(&v(&[0.0, 0.0])),
            1.0,
            epsilon = 1e-15
        );
    }
}
