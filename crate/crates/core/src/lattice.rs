//! Square-lattice discretizations of rectangles with marked boundary
//! vertices, and the dual/medial structure the interface tracers walk on.
//!
//! A polygon of `W x H` cells has vertices `(i, j)`, `0 <= i <= W`,
//! `0 <= j <= H`, at the points `(i delta, j delta)`. Numbering:
//!
//! * vertex `(i, j)` is `j (W + 1) + i`;
//! * the horizontal edge from `(i, j)` to `(i + 1, j)` is `j W + i`;
//! * the vertical edge from `(i, j)` to `(i, j + 1)` is `W (H + 1) + j (W + 1) + i`;
//! * cell `(i, j)` (lower-left corner `(i, j)`) is `j W + i`.
//!
//! The boundary is the counterclockwise vertex cycle starting at the
//! origin. Marks are positions on that cycle; arc `a` (0-based) is the
//! half-open run of boundary vertices from mark `a` up to, not including,
//! mark `a + 1`. Arcs with even `a` run from an odd mark `x_{2j-1}` to
//! `x_{2j}` (1-based) and carry the `+` spins or the wiring.
//!
//! Mark `x` is represented on the medial lattice by the boundary edge
//! joining it to its clockwise neighbour `pred(x)`: the one boundary edge
//! whose endpoints lie on different arcs.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A face of the planar graph: a cell or the outer face.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Face {
    Cell(usize),
    Outer,
}

/// Rectangle discretization with marked boundary vertices.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiscretePolygon {
    pub width: usize,
    pub height: usize,
    pub delta: f64,
    /// Counterclockwise boundary vertex cycle from the origin.
    boundary: Vec<usize>,
    /// Position of each vertex on the boundary cycle, if any.
    boundary_pos: Vec<Option<usize>>,
    /// Boundary positions of the marks, counterclockwise.
    marks: Vec<usize>,
    /// Arc index of each boundary position.
    arc_of_pos: Vec<usize>,
}

/// Polygon spec as used in configuration files.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PolygonSpec {
    pub ell: f64,
    pub delta: f64,
    /// Marks as fractions of the perimeter, counterclockwise from the origin.
    pub marks: Vec<f64>,
}

/// Builds the grid approximation of `[0, ell] x [0, 1]` with mesh about
/// `delta`, snapping the marks (given as perimeter fractions in `[0, 1)`,
/// counterclockwise from the origin) to the nearest boundary vertices.
pub fn build_rectangle(ell: f64, delta: f64, marks: &[f64]) -> Result<DiscretePolygon> {
    if !(ell > 0.0 && ell.is_finite()) {
        return Err(Error::bounds("ell", ell, "(0, inf)"));
    }
    if !(delta > 0.0 && delta <= 1.0) {
        return Err(Error::bounds("delta", delta, "(0, 1]"));
    }
    let height = (1.0 / delta).round().max(1.0) as usize;
    let width = (ell * height as f64).round().max(1.0) as usize;
    let perimeter = 2 * (width + height);
    let mut positions = Vec::with_capacity(marks.len());
    for &m in marks {
        if !(0.0..1.0).contains(&m) {
            return Err(Error::bounds("mark position", m, "[0, 1)"));
        }
        // Round half up: ties go counterclockwise.
        positions.push(((m * perimeter as f64 + 0.5).floor() as usize) % perimeter);
    }
    DiscretePolygon::with_marks(width, height, 1.0 / height as f64, positions)
}

impl DiscretePolygon {
    /// A `width x height` cell grid with marks at the given boundary
    /// positions (counterclockwise from the origin).
    pub fn with_marks(width: usize, height: usize, delta: f64, marks: Vec<usize>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::invalid("polygon needs at least one cell"));
        }
        let (w, h) = (width, height);
        let mut boundary = Vec::with_capacity(2 * (w + h));
        boundary.extend((0..w).map(|i| i));
        boundary.extend((0..h).map(|j| j * (w + 1) + w));
        boundary.extend((0..w).map(|k| h * (w + 1) + (w - k)));
        boundary.extend((0..h).map(|k| (h - k) * (w + 1)));
        let mut boundary_pos = vec![None; (w + 1) * (h + 1)];
        for (p, &v) in boundary.iter().enumerate() {
            boundary_pos[v] = Some(p);
        }
        let per = boundary.len();
        if marks.iter().any(|&m| m >= per) {
            return Err(Error::invalid("mark position beyond the perimeter"));
        }
        let mut sorted = marks.clone();
        sorted.sort_unstable();
        if sorted.windows(2).any(|s| s[0] == s[1]) {
            return Err(Error::Resolution("two marks snap to the same boundary vertex".into()));
        }
        let descents = (0..marks.len()).filter(|&i| marks[(i + 1) % marks.len()] <= marks[i]).count();
        if marks.len() > 1 && descents != 1 {
            return Err(Error::invalid("marks are not in counterclockwise order"));
        }
        let mut arc_of_pos = vec![0; per];
        if !marks.is_empty() {
            let n = marks.len();
            if n % 2 == 1 {
                return Err(Error::invalid("number of marks must be even"));
            }
            for (a, &m) in marks.iter().enumerate() {
                let end = marks[(a + 1) % n];
                if a % 2 == 1 && (m + 1) % per == end {
                    return Err(Error::Resolution("marks leave an empty odd arc".into()));
                }
                let mut p = m;
                loop {
                    arc_of_pos[p] = a;
                    p = (p + 1) % per;
                    if p == end {
                        break;
                    }
                }
            }
            for (a, &m) in marks.iter().enumerate() {
                if a % 2 == 1 {
                    arc_of_pos[m] = a - 1;
                }
            }
        }
        Ok(DiscretePolygon { width, height, delta, boundary, boundary_pos, marks, arc_of_pos })
    }

    pub fn n_vertices(&self) -> usize {
        (self.width + 1) * (self.height + 1)
    }

    pub fn n_horizontal_edges(&self) -> usize {
        self.width * (self.height + 1)
    }

    pub fn n_edges(&self) -> usize {
        self.n_horizontal_edges() + (self.width + 1) * self.height
    }

    pub fn n_cells(&self) -> usize {
        self.width * self.height
    }

    pub fn vertex(&self, i: usize, j: usize) -> usize {
        j * (self.width + 1) + i
    }

    pub fn vertex_coords(&self, v: usize) -> (usize, usize) {
        (v % (self.width + 1), v / (self.width + 1))
    }

    /// Vertex at integer coordinates, if inside the grid.
    pub fn vertex_at(&self, i: i64, j: i64) -> Option<usize> {
        if i < 0 || j < 0 || i > self.width as i64 || j > self.height as i64 {
            None
        } else {
            Some(self.vertex(i as usize, j as usize))
        }
    }

    pub fn vertex_point(&self, v: usize) -> Complex64 {
        let (i, j) = self.vertex_coords(v);
        Complex64::new(i as f64 * self.delta, j as f64 * self.delta)
    }

    pub fn horizontal_edge(&self, i: usize, j: usize) -> usize {
        j * self.width + i
    }

    pub fn vertical_edge(&self, i: usize, j: usize) -> usize {
        self.n_horizontal_edges() + j * (self.width + 1) + i
    }

    pub fn is_horizontal(&self, e: usize) -> bool {
        e < self.n_horizontal_edges()
    }

    /// Endpoints `(u, v)` with `u` the lower-left one.
    pub fn edge_endpoints(&self, e: usize) -> (usize, usize) {
        if self.is_horizontal(e) {
            let (i, j) = (e % self.width, e / self.width);
            (self.vertex(i, j), self.vertex(i + 1, j))
        } else {
            let k = e - self.n_horizontal_edges();
            let (i, j) = (k % (self.width + 1), k / (self.width + 1));
            (self.vertex(i, j), self.vertex(i, j + 1))
        }
    }

    /// Edge joining two lattice-adjacent vertices.
    pub fn edge_between(&self, a: usize, b: usize) -> Option<usize> {
        let (ai, aj) = self.vertex_coords(a);
        let (bi, bj) = self.vertex_coords(b);
        if aj == bj && ai.abs_diff(bi) == 1 {
            Some(self.horizontal_edge(ai.min(bi), aj))
        } else if ai == bi && aj.abs_diff(bj) == 1 {
            Some(self.vertical_edge(ai, aj.min(bj)))
        } else {
            None
        }
    }

    pub fn edge_midpoint(&self, e: usize) -> Complex64 {
        let (u, v) = self.edge_endpoints(e);
        (self.vertex_point(u) + self.vertex_point(v)) * 0.5
    }

    pub fn cell(&self, i: usize, j: usize) -> usize {
        j * self.width + i
    }

    fn cell_at(&self, i: i64, j: i64) -> Face {
        if i < 0 || j < 0 || i >= self.width as i64 || j >= self.height as i64 {
            Face::Outer
        } else {
            Face::Cell(self.cell(i as usize, j as usize))
        }
    }

    /// Faces on either side of an edge: (below, above) for horizontal
    /// edges, (left, right) for vertical ones.
    pub fn edge_faces(&self, e: usize) -> (Face, Face) {
        let (u, _) = self.edge_endpoints(e);
        let (i, j) = self.vertex_coords(u);
        let (i, j) = (i as i64, j as i64);
        if self.is_horizontal(e) {
            (self.cell_at(i, j - 1), self.cell_at(i, j))
        } else {
            (self.cell_at(i - 1, j), self.cell_at(i, j))
        }
    }

    /// The primal edge separating two faces (dual of the dual edge).
    pub fn edge_of_faces(&self, f: Face, g: Face) -> Option<usize> {
        let coords = |c: usize| (c % self.width, c / self.width);
        match (f, g) {
            (Face::Cell(a), Face::Cell(b)) => {
                let ((ai, aj), (bi, bj)) = (coords(a), coords(b));
                if aj == bj && ai.abs_diff(bi) == 1 {
                    Some(self.vertical_edge(ai.max(bi), aj))
                } else if ai == bi && aj.abs_diff(bj) == 1 {
                    Some(self.horizontal_edge(ai, aj.max(bj)))
                } else {
                    None
                }
            }
            // A boundary cell may share several edges with the outer face.
            _ => None,
        }
    }

    pub fn cell_center(&self, c: usize) -> Complex64 {
        let (i, j) = (c % self.width, c / self.width);
        Complex64::new((i as f64 + 0.5) * self.delta, (j as f64 + 0.5) * self.delta)
    }

    /// Lattice neighbours of `v` with the connecting edges.
    pub fn neighbors(&self, v: usize) -> impl Iterator<Item = (usize, usize)> + '_ {
        let (i, j) = self.vertex_coords(v);
        let (i, j) = (i as i64, j as i64);
        [(1, 0), (-1, 0), (0, 1), (0, -1)].into_iter().filter_map(move |(di, dj)| {
            let w = self.vertex_at(i + di, j + dj)?;
            Some((w, self.edge_between(v, w).unwrap()))
        })
    }

    pub fn boundary(&self) -> &[usize] {
        &self.boundary
    }

    pub fn boundary_position(&self, v: usize) -> Option<usize> {
        self.boundary_pos[v]
    }

    pub fn is_boundary_vertex(&self, v: usize) -> bool {
        self.boundary_pos[v].is_some()
    }

    /// Whether `e` lies along the boundary cycle.
    pub fn is_boundary_edge(&self, e: usize) -> bool {
        let (f, g) = self.edge_faces(e);
        f == Face::Outer || g == Face::Outer
    }

    /// Boundary position of the counterclockwise successor.
    pub fn next_pos(&self, p: usize) -> usize {
        (p + 1) % self.boundary.len()
    }

    pub fn pred_pos(&self, p: usize) -> usize {
        (p + self.boundary.len() - 1) % self.boundary.len()
    }

    /// Number of marks `2N`.
    pub fn n_marks(&self) -> usize {
        self.marks.len()
    }

    /// Boundary positions of the marks.
    pub fn mark_positions(&self) -> &[usize] {
        &self.marks
    }

    pub fn mark_vertex(&self, m: usize) -> usize {
        self.boundary[self.marks[m]]
    }

    /// Arc (0-based) of a boundary vertex.
    pub fn arc_of_vertex(&self, v: usize) -> Option<usize> {
        if self.marks.is_empty() {
            return None;
        }
        self.boundary_pos[v].map(|p| self.arc_of_pos[p])
    }

    /// Arc of a boundary edge: the common arc of its endpoints, or the odd
    /// arc for the edges at the marks.
    pub fn arc_of_boundary_edge(&self, e: usize) -> Option<usize> {
        if !self.is_boundary_edge(e) || self.marks.is_empty() {
            return None;
        }
        let (u, v) = self.edge_endpoints(e);
        let (a, b) = (self.arc_of_pos[self.boundary_pos[u]?], self.arc_of_pos[self.boundary_pos[v]?]);
        Some(if a % 2 == 1 { a } else { b })
    }

    /// Whether arc `a` carries `+` spins (wired bonds).
    pub fn is_plus_arc(a: usize) -> bool {
        a % 2 == 0
    }

    /// Number of boundary edges between consecutive marks.
    pub fn arc_lengths(&self) -> Vec<usize> {
        let (n, per) = (self.marks.len(), self.boundary.len());
        (0..n).map(|a| (self.marks[(a + 1) % n] + per - self.marks[a] - 1) % per + 1).collect()
    }

    /// The boundary edge representing mark `m` (0-based): `(pred(x), x)`
    /// for even `m`, `(x, next(x))` for odd `m`.
    pub fn mark_edge(&self, m: usize) -> usize {
        let p = self.marks[m];
        let q = if m % 2 == 0 { self.pred_pos(p) } else { self.next_pos(p) };
        self.edge_between(self.boundary[q], self.boundary[p]).unwrap()
    }

    /// Mark index whose representing edge is `e`.
    pub fn mark_of_edge(&self, e: usize) -> Option<usize> {
        (0..self.marks.len()).find(|&m| self.mark_edge(m) == e)
    }

    /// Euler characteristic `V - E + F` with the outer face counted.
    pub fn euler_characteristic(&self) -> i64 {
        self.n_vertices() as i64 - self.n_edges() as i64 + self.n_cells() as i64 + 1
    }

    pub fn spec(&self) -> PolygonSpec {
        let per = self.boundary.len() as f64;
        PolygonSpec {
            ell: self.width as f64 / self.height as f64,
            delta: self.delta,
            marks: self.marks.iter().map(|&p| p as f64 / per).collect(),
        }
    }

    /// Physical coordinates of the marks.
    pub fn mark_points(&self) -> Vec<Complex64> {
        (0..self.marks.len()).map(|m| self.vertex_point(self.mark_vertex(m))).collect()
    }

    /// Aspect ratio `W / H` of the discretized rectangle.
    pub fn aspect(&self) -> f64 {
        self.width as f64 / self.height as f64
    }
}

/// Medial lattice: vertices at edge midpoints, edges joining the two edges
/// of a cell that meet at a corner.
#[derive(Clone, Debug)]
pub struct MedialGraph {
    pub points: Vec<Complex64>,
    /// `(edge, edge, cell, corner vertex)` for every cell corner.
    pub edges: Vec<(usize, usize, usize, usize)>,
    /// Marked medial vertices, one per mark.
    pub marked: Vec<usize>,
}

pub fn medial_graph(p: &DiscretePolygon) -> MedialGraph {
    let points = (0..p.n_edges()).map(|e| p.edge_midpoint(e)).collect();
    let mut edges = Vec::with_capacity(4 * p.n_cells());
    for j in 0..p.height {
        for i in 0..p.width {
            let c = p.cell(i, j);
            let (b, t) = (p.horizontal_edge(i, j), p.horizontal_edge(i, j + 1));
            let (l, r) = (p.vertical_edge(i, j), p.vertical_edge(i + 1, j));
            edges.push((b, l, c, p.vertex(i, j)));
            edges.push((b, r, c, p.vertex(i + 1, j)));
            edges.push((t, r, c, p.vertex(i + 1, j + 1)));
            edges.push((t, l, c, p.vertex(i, j + 1)));
        }
    }
    let marked = (0..p.n_marks()).map(|m| p.mark_edge(m)).collect();
    MedialGraph { points, edges, marked }
}
