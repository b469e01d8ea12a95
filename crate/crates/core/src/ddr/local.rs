//! Per-cell geometry with orientation data and the polynomial spaces shared by the
//! local operators.

use nalgebra::{DMatrix, DVector};

use crate::mesh::Mesh;
use crate::polycalc::{CellSpace, EdgeSpace};
use crate::tensor::{SymTensor, Vec2};
use crate::Result;

/// Edge `i` of a cell joins local vertices `i` and `i + 1`. Its tangent, normal and
/// parametrisation are the global ones.
#[derive(Debug, Clone)]
pub struct LocalEdge {
    pub global: usize,
    /// `ω_TE`: `ω_TE n_E` points out of the cell.
    pub omega: f64,
    pub tangent: Vec2,
    pub normal: Vec2,
    pub tail_local: usize,
    pub head_local: usize,
    pub space: EdgeSpace,
}

impl LocalEdge {
    /// `ω_EV` for the local vertex `v` (an endpoint of the edge).
    pub fn omega_ev(&self, v: usize) -> f64 {
        if v == self.head_local {
            1.0
        } else {
            debug_assert_eq!(v, self.tail_local);
            -1.0
        }
    }

    pub fn endpoints(&self) -> [(usize, f64); 2] {
        [(self.tail_local, -1.0), (self.head_local, 1.0)]
    }
}

#[derive(Debug, Clone)]
pub struct LocalCell {
    pub id: usize,
    pub space: CellSpace,
    pub vertex_ids: Vec<usize>,
    pub points: Vec<Vec2>,
    pub edges: Vec<LocalEdge>,
}

impl LocalCell {
    /// Cell `t` of `mesh` with polynomial spaces of degree `degree`.
    pub fn new(mesh: &Mesh, t: usize, degree: usize) -> Result<Self> {
        let cell = &mesh.cells[t];
        let space = CellSpace::from_mesh(mesh, t, degree)?;
        let points = mesh.cell_points(t);
        let nv = points.len();
        let edges = cell
            .edges
            .iter()
            .enumerate()
            .map(|(i, &(e, omega))| {
                let edge = &mesh.edges[e];
                let (a, b) = (i, (i + 1) % nv);
                let (tail_local, head_local) = if cell.vertices[a] == edge.tail { (a, b) } else { (b, a) };
                LocalEdge {
                    global: e,
                    omega,
                    tangent: edge.tangent,
                    normal: edge.normal,
                    tail_local,
                    head_local,
                    space: EdgeSpace::new(points[tail_local], points[head_local], degree),
                }
            })
            .collect();
        Ok(Self { id: t, space, vertex_ids: cell.vertices.clone(), points, edges })
    }

    pub fn nv(&self) -> usize {
        self.points.len()
    }

    pub fn h(&self) -> f64 {
        self.space.h()
    }

    /// Values at `x` of the three components of each column of a tensor basis.
    pub fn tensor_values(&self, basis: &DMatrix<f64>, x: &Vec2) -> [DVector<f64>; 3] {
        let n = self.space.n();
        let ev = self.space.mono.eval(x);
        std::array::from_fn(|c| basis.rows(c * n, n).transpose() * &ev)
    }

    /// Values at `x` of the two components of each column of a vector basis.
    pub fn vector_values(&self, basis: &DMatrix<f64>, x: &Vec2) -> [DVector<f64>; 2] {
        let n = self.space.n();
        let ev = self.space.mono.eval(x);
        std::array::from_fn(|c| basis.rows(c * n, n).transpose() * &ev)
    }

    /// `∫_T f : b_i` for every column `b_i` of a tensor basis, by cell quadrature.
    pub fn tensor_moments(&self, basis: &DMatrix<f64>, f: impl Fn(&Vec2) -> SymTensor) -> DVector<f64> {
        let s = &self.space;
        let n = s.n();
        let mut out = DVector::zeros(basis.ncols());
        let comps: Vec<DMatrix<f64>> = (0..3).map(|c| &s.qvals * basis.rows(c * n, n)).collect();
        for (q, x) in s.quad.points.iter().enumerate() {
            let v = f(x);
            let w = s.quad.weights[q];
            for i in 0..basis.ncols() {
                out[i] += w * (v.xx * comps[0][(q, i)] + 2.0 * v.xy * comps[1][(q, i)] + v.yy * comps[2][(q, i)]);
            }
        }
        out
    }
}
