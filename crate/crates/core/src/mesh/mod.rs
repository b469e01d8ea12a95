//! Polygonal meshes with globally oriented edges.
//!
//! Orientation conventions:
//! - every edge carries a global tangent `t_E` pointing from its lower to its higher
//!   vertex id, and the normal `n_E = rot90(t_E)` so that `(t_E, n_E)` is right-handed;
//! - `ω_EV = +1` at the head of `E`, `−1` at the tail;
//! - `ω_TE = −1` when `t_E` agrees with the counter-clockwise traversal of `T`, `+1`
//!   otherwise, so that `ω_TE n_E` is the outward normal of `T` on `E`.

mod diagnostics;
mod generate;
mod io;

pub use diagnostics::{mesh_diagnostics, CellReport, MeshReport};
pub use generate::{generate, regular_polygon, MeshGenerator};
pub use io::{parse_polymesh, read_polymesh, write_polymesh};

use std::collections::HashMap;

use crate::tensor::{cross, rot90, Vec2};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct Vertex {
    pub id: usize,
    pub x: Vec2,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Edge {
    pub id: usize,
    pub tail: usize,
    pub head: usize,
    pub tangent: Vec2,
    pub normal: Vec2,
    pub length: f64,
    pub midpoint: Vec2,
    /// One (boundary) or two (interior) cell ids.
    pub cells: Vec<usize>,
}

impl Edge {
    pub fn is_boundary(&self) -> bool {
        self.cells.len() == 1
    }

    /// `ω_EV`: `+1` if `t_E` points towards `v`, `−1` otherwise.
    pub fn vertex_orientation(&self, v: usize) -> f64 {
        if v == self.head {
            1.0
        } else {
            debug_assert_eq!(v, self.tail);
            -1.0
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Cell {
    pub id: usize,
    /// Counter-clockwise vertex ids.
    pub vertices: Vec<usize>,
    /// `(edge id, ω_TE)`; local edge `i` joins local vertices `i` and `i + 1`.
    pub edges: Vec<(usize, f64)>,
    /// Star point `x_T`.
    pub center: Vec2,
    pub diameter: f64,
    pub area: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Mesh {
    pub vertices: Vec<Vertex>,
    pub edges: Vec<Edge>,
    pub cells: Vec<Cell>,
    pub boundary_edges: Vec<usize>,
    /// `max_T h_T`
    pub h: f64,
}

/// Signed area of a closed polygon (positive for counter-clockwise order).
pub fn signed_area(pts: &[Vec2]) -> f64 {
    let n = pts.len();
    0.5 * (0..n).map(|i| cross(&pts[i], &pts[(i + 1) % n])).sum::<f64>()
}

pub fn centroid(pts: &[Vec2]) -> Vec2 {
    let n = pts.len();
    let a = signed_area(pts);
    let mut c = Vec2::zeros();
    for i in 0..n {
        let (p, q) = (pts[i], pts[(i + 1) % n]);
        c += (p + q) * cross(&p, &q);
    }
    c / (6.0 * a)
}

pub fn diameter(pts: &[Vec2]) -> f64 {
    let mut d: f64 = 0.0;
    for (i, p) in pts.iter().enumerate() {
        for q in &pts[i + 1..] {
            d = d.max((p - q).norm());
        }
    }
    d
}

fn point_segment_distance(p: &Vec2, a: &Vec2, b: &Vec2) -> f64 {
    let ab = b - a;
    let s = ((p - a).dot(&ab) / ab.norm_squared()).clamp(0.0, 1.0);
    (p - (a + ab * s)).norm()
}

/// Distance from `p` to the polygon boundary.
pub fn boundary_distance(pts: &[Vec2], p: &Vec2) -> f64 {
    let n = pts.len();
    (0..n)
        .map(|i| point_segment_distance(p, &pts[i], &pts[(i + 1) % n]))
        .fold(f64::INFINITY, f64::min)
}

/// `true` when every fan triangle `(p, x_i, x_{i+1})` has positive area.
pub fn is_star_point(pts: &[Vec2], p: &Vec2) -> bool {
    let n = pts.len();
    let h = diameter(pts);
    (0..n).all(|i| {
        let (a, b) = (pts[i], pts[(i + 1) % n]);
        cross(&(a - p), &(b - p)) > 1e-12 * h * h
    })
}

fn point_in_polygon(pts: &[Vec2], p: &Vec2) -> bool {
    let n = pts.len();
    let mut inside = false;
    for i in 0..n {
        let (a, b) = (pts[i], pts[(i + 1) % n]);
        if (a.y > p.y) != (b.y > p.y) {
            let x = a.x + (p.y - a.y) / (b.y - a.y) * (b.x - a.x);
            if p.x < x {
                inside = !inside;
            }
        }
    }
    inside
}

/// Centroid when it is a star point, otherwise the lattice point (16×16 over the bounding
/// box) maximising the distance to the boundary, preferring star points.
pub fn star_center(pts: &[Vec2]) -> Vec2 {
    let c = centroid(pts);
    if is_star_point(pts, &c) {
        return c;
    }
    let (mut lo, mut hi) = (pts[0], pts[0]);
    for p in pts {
        lo = lo.inf(p);
        hi = hi.sup(p);
    }
    let mut best: Option<(bool, f64, Vec2)> = None;
    for i in 0..16 {
        for j in 0..16 {
            let p = Vec2::new(
                lo.x + (hi.x - lo.x) * (i as f64 + 0.5) / 16.0,
                lo.y + (hi.y - lo.y) * (j as f64 + 0.5) / 16.0,
            );
            if !point_in_polygon(pts, &p) {
                continue;
            }
            let key = (is_star_point(pts, &p), boundary_distance(pts, &p));
            if best.map_or(true, |(s, d, _)| (key.0, key.1) > (s, d)) {
                best = Some((key.0, key.1, p));
            }
        }
    }
    best.map_or(c, |(_, _, p)| p)
}

fn segments_intersect(a: &Vec2, b: &Vec2, c: &Vec2, d: &Vec2) -> bool {
    let d1 = cross(&(b - a), &(c - a));
    let d2 = cross(&(b - a), &(d - a));
    let d3 = cross(&(d - c), &(a - c));
    let d4 = cross(&(d - c), &(b - c));
    ((d1 > 0.0) != (d2 > 0.0)) && ((d3 > 0.0) != (d4 > 0.0)) && d1 != 0.0 && d2 != 0.0 && d3 != 0.0 && d4 != 0.0
}

fn is_simple(pts: &[Vec2]) -> bool {
    let n = pts.len();
    for i in 0..n {
        for j in i + 1..n {
            if j == i + 1 || (i == 0 && j == n - 1) {
                continue;
            }
            if segments_intersect(&pts[i], &pts[(i + 1) % n], &pts[j], &pts[(j + 1) % n]) {
                return false;
            }
        }
    }
    true
}

impl Mesh {
    /// Builds topology and orientation data from vertex coordinates and cell vertex lists.
    /// Clockwise cell lists are reversed.
    pub fn from_polygons(coords: Vec<Vec2>, cells: Vec<Vec<usize>>) -> Result<Mesh> {
        let nv = coords.len();
        if nv == 0 || cells.is_empty() {
            return Err(Error::InvalidMesh("mesh needs at least one vertex and one cell".into()));
        }
        if let Some(p) = coords.iter().find(|p| !p.x.is_finite() || !p.y.is_finite()) {
            return Err(Error::InvalidMesh(format!("non-finite coordinate {p:?}")));
        }
        let mut oriented = Vec::with_capacity(cells.len());
        let mut h: f64 = 0.0;
        for (t, cell) in cells.into_iter().enumerate() {
            if cell.len() < 3 {
                return Err(Error::InvalidMesh(format!("cell {t} has fewer than 3 vertices")));
            }
            if let Some(&v) = cell.iter().find(|&&v| v >= nv) {
                return Err(Error::InvalidMesh(format!("cell {t} references vertex {v} (nv = {nv})")));
            }
            let mut pts: Vec<Vec2> = cell.iter().map(|&v| coords[v]).collect();
            let mut cell = cell;
            let area = signed_area(&pts);
            let hd = diameter(&pts);
            if area.abs() <= 1e-14 * hd * hd {
                return Err(Error::DegenerateGeometry { cell: t, msg: "zero area".into() });
            }
            if area < 0.0 {
                cell.reverse();
                pts.reverse();
            }
            if !is_simple(&pts) {
                return Err(Error::InvalidMesh(format!("cell {t} is not a simple polygon")));
            }
            h = h.max(hd);
            oriented.push(cell);
        }
        check_duplicate_vertices(&coords, 1e-12 * h)?;

        let vertices: Vec<Vertex> = coords.iter().enumerate().map(|(id, &x)| Vertex { id, x }).collect();
        let mut edge_index: HashMap<(usize, usize), usize> = HashMap::new();
        let mut edges: Vec<Edge> = Vec::new();
        let mut out_cells = Vec::with_capacity(oriented.len());
        for (t, cell) in oriented.into_iter().enumerate() {
            let n = cell.len();
            let mut cell_edges = Vec::with_capacity(n);
            for i in 0..n {
                let (a, b) = (cell[i], cell[(i + 1) % n]);
                if a == b {
                    return Err(Error::InvalidMesh(format!("cell {t} repeats vertex {a}")));
                }
                let key = (a.min(b), a.max(b));
                let e = *edge_index.entry(key).or_insert_with(|| {
                    let (tail, head) = key;
                    let d = coords[head] - coords[tail];
                    let length = d.norm();
                    let tangent = d / length;
                    edges.push(Edge {
                        id: edges.len(),
                        tail,
                        head,
                        tangent,
                        normal: rot90(&tangent),
                        length,
                        midpoint: (coords[head] + coords[tail]) * 0.5,
                        cells: Vec::new(),
                    });
                    edges.len() - 1
                });
                let edge = &mut edges[e];
                if edge.cells.len() == 2 {
                    return Err(Error::InvalidMesh(format!("edge {a}-{b} shared by more than two cells")));
                }
                edge.cells.push(t);
                let omega = if edge.tail == a { -1.0 } else { 1.0 };
                cell_edges.push((e, omega));
            }
            let pts: Vec<Vec2> = cell.iter().map(|&v| coords[v]).collect();
            out_cells.push(Cell {
                id: t,
                center: star_center(&pts),
                diameter: diameter(&pts),
                area: signed_area(&pts),
                vertices: cell,
                edges: cell_edges,
            });
        }

        for e in &edges {
            if e.cells.len() == 2 {
                let w = |t: usize| out_cells[t].edges.iter().find(|(id, _)| *id == e.id).unwrap().1;
                if w(e.cells[0]) + w(e.cells[1]) != 0.0 {
                    return Err(Error::InvalidMesh(format!(
                        "edge {}-{} traversed in the same direction by cells {} and {} (non-orientable or overlapping)",
                        e.tail, e.head, e.cells[0], e.cells[1]
                    )));
                }
            }
        }
        let boundary_edges = edges.iter().filter(|e| e.is_boundary()).map(|e| e.id).collect();
        Ok(Mesh { vertices, edges, cells: out_cells, boundary_edges, h })
    }

    /// Single-cell mesh, vertex ids following the given (counter-clockwise) order.
    pub fn single_cell(pts: &[Vec2]) -> Result<Mesh> {
        Mesh::from_polygons(pts.to_vec(), vec![(0..pts.len()).collect()])
    }

    pub fn num_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn num_cells(&self) -> usize {
        self.cells.len()
    }

    pub fn cell_points(&self, t: usize) -> Vec<Vec2> {
        self.cells[t].vertices.iter().map(|&v| self.vertices[v].x).collect()
    }

    /// `nv − ne + nc`
    pub fn euler_characteristic(&self) -> isize {
        self.num_vertices() as isize - self.num_edges() as isize + self.num_cells() as isize
    }

    pub fn total_area(&self) -> f64 {
        self.cells.iter().map(|c| c.area).sum()
    }
}

fn check_duplicate_vertices(coords: &[Vec2], tol: f64) -> Result<()> {
    let mut order: Vec<usize> = (0..coords.len()).collect();
    order.sort_by(|&a, &b| coords[a].x.total_cmp(&coords[b].x));
    for (i, &a) in order.iter().enumerate() {
        for &b in &order[i + 1..] {
            if coords[b].x - coords[a].x > tol {
                break;
            }
            if (coords[a] - coords[b]).norm() <= tol {
                return Err(Error::InvalidMesh(format!("duplicate vertices {a} and {b}")));
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit_square() -> Vec<Vec2> {
        vec![Vec2::new(0.0, 0.0), Vec2::new(1.0, 0.0), Vec2::new(1.0, 1.0), Vec2::new(0.0, 1.0)]
    }

    #[test]
    fn unit_square_cell() {
        let m = Mesh::single_cell(&unit_square()).unwrap();
        let c = &m.cells[0];
        assert!((c.area - 1.0).abs() < 1e-15);
        assert!((c.diameter - 2f64.sqrt()).abs() < 1e-15);
        assert_eq!(m.euler_characteristic(), 1);
    }

    #[test]
    fn bottom_edge_orientation() {
        let m = Mesh::single_cell(&unit_square()).unwrap();
        let (e, w) = m.cells[0].edges[0];
        let edge = &m.edges[e];
        assert_eq!((edge.tail, edge.head), (0, 1));
        assert_eq!(edge.tangent, Vec2::new(1.0, 0.0));
        assert_eq!(edge.normal, Vec2::new(0.0, 1.0));
        assert_eq!(w, -1.0);
        assert_eq!(edge.normal * w, Vec2::new(0.0, -1.0));
        assert_eq!(edge.vertex_orientation(1), 1.0);
        assert_eq!(edge.vertex_orientation(0), -1.0);
    }

    #[test]
    fn outward_normals() {
        let m = generate(&MeshGenerator::Kershaw { n: 4, distortion: 0.6 }).unwrap();
        for c in &m.cells {
            for &(e, w) in &c.edges {
                let edge = &m.edges[e];
                assert!(w * edge.normal.dot(&(edge.midpoint - c.center)) > 0.0);
            }
        }
    }

    #[test]
    fn clockwise_input_is_reversed() {
        let mut pts = unit_square();
        pts.reverse();
        let m = Mesh::single_cell(&pts).unwrap();
        assert!(m.cells[0].area > 0.0);
    }

    #[test]
    fn rejects_bowtie() {
        let pts = vec![Vec2::new(0.0, 0.0), Vec2::new(1.0, 1.0), Vec2::new(1.0, 0.0), Vec2::new(0.0, 1.0)];
        assert!(Mesh::single_cell(&pts).is_err());
    }

    #[test]
    fn rejects_duplicate_vertices() {
        let coords = vec![
            Vec2::new(0.0, 0.0),
            Vec2::new(1.0, 0.0),
            Vec2::new(0.0, 1.0),
            Vec2::new(1.0, 0.0),
        ];
        let err = Mesh::from_polygons(coords, vec![vec![0, 1, 2]]).unwrap_err();
        assert!(matches!(err, Error::InvalidMesh(_)));
    }

    #[test]
    fn rejects_inconsistent_neighbours() {
        // Second triangle overlaps the first instead of sitting next to it.
        let coords = vec![Vec2::new(0.0, 0.0), Vec2::new(1.0, 0.0), Vec2::new(0.0, 1.0), Vec2::new(0.2, 0.2)];
        let err = Mesh::from_polygons(coords, vec![vec![0, 1, 2], vec![0, 1, 3]]).unwrap_err();
        assert!(matches!(err, Error::InvalidMesh(_)));
    }

    #[test]
    fn nonconvex_star_center() {
        let pts = vec![
            Vec2::new(0.0, 0.0),
            Vec2::new(2.0, 1.0),
            Vec2::new(0.0, 2.0),
            Vec2::new(0.8, 1.0),
        ];
        let c = star_center(&pts);
        assert!(is_star_point(&pts, &c));
    }
}
