use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use super::exact::{load, ExactSolution};
use super::{GlobalDofMap, Material};
use crate::ddr::{LocalCell, SigmaOps, TensorField};
use crate::mesh::Mesh;
use crate::polycalc::EdgeRule;
use crate::tensor::Vec2;
use crate::{Error, Result};

/// Material-independent per-cell data.
#[derive(Debug, Clone)]
pub struct CellData {
    pub cell: LocalCell,
    pub ops: SigmaOps,
    /// The tensor potential in Frobenius-orthonormal coordinates of `P^ℓ(T;S)`, so
    /// that `‖P τ‖_{L²} = |W τ|`.
    pub potential_onb: DMatrix<f64>,
    /// Global indices of the local Σ dofs.
    pub sigma_idx: Vec<usize>,
    /// Whether each local edge lies on the boundary.
    pub boundary: Vec<bool>,
}

impl CellData {
    /// `‖τ‖²_{Σ,T} = ‖P τ‖² + s(τ, τ)` for local dofs `d`.
    pub fn sigma_norm2(&self, d: &DVector<f64>) -> f64 {
        (&self.potential_onb * d).norm_squared() + (&self.ops.stabilization_rows * d).norm_squared()
    }

    /// `∫ A⁻¹Pτ:Pτ + s(τ,τ)/(D(1+ν))`, evaluated on the factors to avoid cancellation.
    pub fn energy(&self, material: &Material, d: &DVector<f64>) -> f64 {
        let w = &self.potential_onb * d;
        let (c, b) = inverse_coefficients(material);
        let n = w.len() / 3;
        let trace: f64 = (0..n).map(|i| (w[i] + w[2 * n + i]).powi(2)).sum();
        c * (w.norm_squared() - b * trace) + material.stabilization_scale() * (&self.ops.stabilization_rows * d).norm_squared()
    }

    fn local_a(&self, material: &Material) -> DMatrix<f64> {
        let w = &self.potential_onb;
        let n = w.nrows() / 3;
        let tr = w.rows(0, n) + w.rows(2 * n, n);
        let (c, b) = inverse_coefficients(material);
        let r = &self.ops.stabilization_rows;
        let a = (w.transpose() * w - tr.transpose() * &tr * b) * c + r.transpose() * r * material.stabilization_scale();
        (&a + a.transpose()) * 0.5
    }
}

/// `A⁻¹τ = c (τ − b tr(τ) I)`.
fn inverse_coefficients(m: &Material) -> (f64, f64) {
    (1.0 / (m.d * (1.0 - m.nu)), m.nu / (1.0 + m.nu))
}

/// Local operators of every cell of a mesh at degree `ℓ`.
#[derive(Debug, Clone)]
pub struct Discretization {
    pub l: usize,
    pub h: f64,
    pub dofmap: GlobalDofMap,
    pub cells: Vec<CellData>,
}

impl Discretization {
    pub fn new(mesh: &Mesh, l: usize) -> Result<Self> {
        let dofmap = GlobalDofMap::new(mesh, l)?;
        let li = l as isize;
        let cells = (0..mesh.num_cells())
            .into_par_iter()
            .map(|t| {
                let cell = LocalCell::new(mesh, t, l + 2)?;
                let ops = SigmaOps::new(&cell, l)?;
                let s = &cell.space;
                let potential_onb = s.tensor_basis(li).transpose() * s.tensor_mass() * &ops.potential;
                let sigma_idx = dofmap.local_sigma_indices(&cell);
                let boundary = cell.edges.iter().map(|e| mesh.edges[e.global].is_boundary()).collect();
                Ok(CellData { cell, ops, potential_onb, sigma_idx, boundary })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { l, h: mesh.h, dofmap, cells })
    }

    /// Global Σ interpolate of a field. Shared dofs agree between cells because edge
    /// and vertex dofs use the global parametrisation.
    pub fn interpolate(&self, f: &(dyn TensorField + Sync)) -> DVector<f64> {
        let parts: Vec<_> = self.cells.par_iter().map(|c| c.ops.interpolate(&c.cell, f).values).collect();
        let mut out = DVector::zeros(self.dofmap.sigma_len());
        for (c, p) in self.cells.iter().zip(parts) {
            for (&g, v) in c.sigma_idx.iter().zip(p.iter()) {
                out[g] = *v;
            }
        }
        out
    }

    /// Orthonormal coefficients of the `L²` projection onto `P^{ℓ−1}` on every cell.
    pub fn project_scalar(&self, f: &(dyn Fn(&Vec2) -> f64 + Sync)) -> DVector<f64> {
        let m = self.dofmap.u_len;
        let parts: Vec<DVector<f64>> = self.cells.par_iter().map(|c| cell_moments(&c.cell, m, f)).collect();
        let mut out = DVector::zeros(self.dofmap.u_total());
        for (t, p) in parts.into_iter().enumerate() {
            out.rows_mut(t * m, m).copy_from(&p);
        }
        out
    }

    pub fn gather(&self, t: usize, sigma: &DVector<f64>) -> DVector<f64> {
        DVector::from_iterator(self.cells[t].sigma_idx.len(), self.cells[t].sigma_idx.iter().map(|&g| sigma[g]))
    }

    /// `‖τ‖²_{Σ,h}` of a global Σ vector.
    pub fn sigma_norm2(&self, sigma: &DVector<f64>) -> f64 {
        (0..self.cells.len()).into_par_iter().map(|t| self.cells[t].sigma_norm2(&self.gather(t, sigma))).sum()
    }
}

/// `∫_T f φ_i` for the first `m` orthonormal basis functions.
fn cell_moments(cell: &LocalCell, m: usize, f: &(dyn Fn(&Vec2) -> f64 + Sync)) -> DVector<f64> {
    let s = &cell.space;
    let mut out = DVector::zeros(m);
    for (q, (x, w)) in s.quad.points.iter().zip(&s.quad.weights).enumerate() {
        let fx = w * f(x);
        for i in 0..m {
            out[i] += fx * s.onb_qvals[(q, i)];
        }
    }
    out
}

/// Load and boundary data of a clamped plate.
pub trait PlateData: Sync {
    fn load(&self, x: &Vec2) -> f64;
    /// `∂_n u` at a boundary point with outer unit normal `n`.
    fn normal_slope(&self, x: &Vec2, n: &Vec2) -> f64;
}

/// Data generated by a closed-form deflection.
pub struct Manufactured<'a> {
    pub solution: &'a dyn ExactSolution,
    pub material: Material,
}

impl PlateData for Manufactured<'_> {
    fn load(&self, x: &Vec2) -> f64 {
        load(self.solution, &self.material, x)
    }

    fn normal_slope(&self, x: &Vec2, n: &Vec2) -> f64 {
        self.solution.grad_u(x).dot(n)
    }
}

/// Per-cell matrices: `a_T` on the Σ dofs and the right-hand sides.
#[derive(Debug, Clone)]
pub struct LocalSystem {
    pub a: DMatrix<f64>,
    /// Boundary term on the Σ test dofs.
    pub g: DVector<f64>,
    /// `∫ f v` on the u test dofs.
    pub f: DVector<f64>,
}

/// The saddle-point problem `a_h(σ,τ) + b_h(τ,u) = g(τ)`, `b_h(σ,v) = −∫ f v`, kept
/// as per-cell blocks; `b_T` is the discrete div-div of the cell.
#[derive(Debug, Clone)]
pub struct GlobalSystem<'a> {
    pub disc: &'a Discretization,
    pub material: Material,
    pub locals: Vec<LocalSystem>,
}

pub fn assemble_global<'a>(disc: &'a Discretization, material: Material, data: &dyn PlateData) -> Result<GlobalSystem<'a>> {
    let l = disc.l;
    let u_len = disc.dofmap.u_len;
    let locals = disc
        .cells
        .par_iter()
        .map(|c| {
            let a = c.local_a(&material);
            let f = cell_moments(&c.cell, u_len, &|x: &Vec2| data.load(x));
            if f.iter().any(|v| !v.is_finite()) {
                return Err(Error::Quadrature(format!("non-finite load moments in cell {}", c.cell.id)));
            }
            let mut g = DVector::zeros(c.ops.dim());
            for (e, edge) in c.cell.edges.iter().enumerate() {
                if !c.boundary[e] {
                    continue;
                }
                let outer = edge.normal * edge.omega;
                let rule = EdgeRule::new(edge.space.tail, edge.space.head, 2 * l + 6);
                let mut trace = DVector::zeros(l + 1);
                for ((s, x), w) in rule.params.iter().zip(&rule.points).zip(&rule.weights) {
                    trace += edge.space.values(l as isize, *s) * (w * data.normal_slope(x, &outer));
                }
                g -= c.ops.edge_potentials[e].transpose() * trace;
            }
            Ok(LocalSystem { a, g, f })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(GlobalSystem { disc, material, locals })
}

impl GlobalSystem<'_> {
    pub fn dofmap(&self) -> &GlobalDofMap {
        &self.disc.dofmap
    }

    /// Right-hand side in global numbering.
    pub fn rhs(&self) -> DVector<f64> {
        let map = self.dofmap();
        let mut r = DVector::zeros(map.total());
        for (t, (c, loc)) in self.disc.cells.iter().zip(&self.locals).enumerate() {
            for (&g, v) in c.sigma_idx.iter().zip(loc.g.iter()) {
                r[g] += v;
            }
            r.rows_mut(map.u_offset(t), map.u_len).copy_from(&(-&loc.f));
        }
        r
    }

    /// Matrix-free product with the full symmetric saddle-point matrix.
    pub fn apply(&self, x: &DVector<f64>) -> DVector<f64> {
        let map = self.dofmap();
        let mut y = DVector::zeros(map.total());
        for (t, (c, loc)) in self.disc.cells.iter().zip(&self.locals).enumerate() {
            let xs = self.disc.gather(t, x);
            let xu = x.rows(map.u_offset(t), map.u_len);
            let ys = &loc.a * &xs + c.ops.dd.transpose() * xu;
            for (&g, v) in c.sigma_idx.iter().zip(ys.iter()) {
                y[g] += v;
            }
            let yu = &c.ops.dd * &xs;
            let mut block = y.rows_mut(map.u_offset(t), map.u_len);
            block += yu;
        }
        y
    }

    /// `‖K x − rhs‖ / ‖rhs‖`, or the absolute residual when the right-hand side is zero.
    pub fn relative_residual(&self, x: &DVector<f64>, rhs: &DVector<f64>) -> f64 {
        let r = (self.apply(x) - rhs).norm();
        let n = rhs.norm();
        if n > 0.0 {
            r / n
        } else {
            r
        }
    }

    /// Entries of the full matrix in global numbering (duplicates not merged).
    pub fn full_triplets(&self) -> Vec<(usize, usize, f64)> {
        let map = self.dofmap();
        let parts: Vec<Vec<(usize, usize, f64)>> = (0..self.locals.len())
            .into_par_iter()
            .map(|t| {
                let c = &self.disc.cells[t];
                let loc = &self.locals[t];
                let uo = map.u_offset(t);
                let mut out = Vec::new();
                for (j, &gj) in c.sigma_idx.iter().enumerate() {
                    for (i, &gi) in c.sigma_idx.iter().enumerate() {
                        out.push((gi, gj, loc.a[(i, j)]));
                    }
                    for i in 0..map.u_len {
                        let b = c.ops.dd[(i, j)];
                        out.push((uo + i, gj, b));
                        out.push((gj, uo + i, b));
                    }
                }
                out
            })
            .collect();
        parts.concat()
    }

    /// `a_h(τ, υ)` for global Σ vectors.
    pub fn a_form(&self, tau: &DVector<f64>, ups: &DVector<f64>) -> f64 {
        (0..self.locals.len())
            .map(|t| self.disc.gather(t, tau).dot(&(&self.locals[t].a * self.disc.gather(t, ups))))
            .sum()
    }

    /// `b_h(τ, v)` for a global Σ vector and broken `P^{ℓ−1}` coefficients.
    pub fn b_form(&self, tau: &DVector<f64>, v: &DVector<f64>) -> f64 {
        let m = self.dofmap().u_len;
        (0..self.locals.len()).map(|t| v.rows(t * m, m).dot(&(&self.disc.cells[t].ops.dd * self.disc.gather(t, tau)))).sum()
    }

    /// `a_h(τ, τ)` from the factored local forms.
    pub fn energy(&self, tau: &DVector<f64>) -> f64 {
        (0..self.locals.len()).into_par_iter().map(|t| self.disc.cells[t].energy(&self.material, &self.disc.gather(t, tau))).sum()
    }
}
