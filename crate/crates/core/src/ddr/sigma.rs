//! Operators on `Σ_T^ℓ`: interpolator, discrete div-div, edge and tensor potentials,
//! stabilisation and norms.

use nalgebra::{DMatrix, DVector};

use super::fields::TensorField;
use super::layout::{SigmaDofVec, SigmaLayout};
use super::local::LocalCell;
use crate::polycalc::{DiffOp, FieldKind, HolyCholySplit};
use crate::tensor::SymTensor;
use crate::{Error, Result};

#[derive(Debug, Clone)]
pub struct SigmaOps {
    pub l: usize,
    pub layout: SigmaLayout,
    /// Split of degree `ℓ − 3` (cell block `Holy^{ℓ−3}`).
    pub split_low: HolyCholySplit,
    /// Split of degree `ℓ` (cell block `cHoly^ℓ` and the potential's test space).
    pub split_top: HolyCholySplit,
    /// Discrete div-div, orthonormal coefficients of `P^{ℓ−1}(T)`.
    pub dd: DMatrix<f64>,
    /// Edge potentials, Legendre coefficients of `P^ℓ(E)`, one matrix per local edge.
    pub edge_potentials: Vec<DMatrix<f64>>,
    /// Tensor potential, tensor monomial coefficients.
    pub potential: DMatrix<f64>,
    /// Gram matrix of the stabilisation form.
    pub stabilization: DMatrix<f64>,
    /// Weighted residual rows `R` with `stabilization = RᵀR`.
    pub stabilization_rows: DMatrix<f64>,
    /// Gram matrix of the operator norm: `∫ PΣ:PΣ + s`.
    pub operator_gram: DMatrix<f64>,
    /// Diagonal weights of the component norm.
    pub component_weights: DVector<f64>,
    /// Relative size of the potential's right-hand side on affine test functions.
    pub compatibility_residual: f64,
}

impl SigmaOps {
    pub fn new(cell: &LocalCell, l: usize) -> Result<Self> {
        let s = &cell.space;
        if s.degree() < l + 2 {
            return Err(Error::InvalidParameter(format!(
                "Σ operators of degree {l} need a cell space of degree {}",
                l + 2
            )));
        }
        let layout = SigmaLayout::new(l, cell.nv())?;
        let dim = layout.dim();
        let li = l as isize;
        let split_low = HolyCholySplit::new(s, li - 3)?;
        let split_top = HolyCholySplit::new(s, li)?;
        let mt = s.tensor_mass();
        let (hess, _) = DiffOp::Hess.matrix(FieldKind::Scalar, &s.d1, &s.d2)?;

        // Discrete div-div.
        let sb = s.scalar_basis(li - 1);
        let mut dd = DMatrix::zeros(sb.ncols(), dim);
        dd.columns_mut(0, layout.holy_len()).copy_from(&((&hess * &sb).transpose() * &mt * &split_low.holy));
        let tau_e: Vec<DMatrix<f64>> = (0..cell.nv())
            .map(|e| {
                let mut m = DMatrix::zeros(layout.edge_tau_len(), dim);
                for j in 0..layout.edge_tau_len() {
                    m[(j, layout.edge_offset(e) + j)] = 1.0;
                }
                m
            })
            .collect();
        dd -= boundary_functional(cell, &layout, &sb, &tau_e);

        let edge_potentials = (0..cell.nv()).map(|e| edge_potential(cell, &layout, e)).collect::<Result<Vec<_>>>()?;

        // Tensor potential: test and trial space spanned by [Holy^ℓ, cHoly^ℓ].
        let (dh, dc) = (split_top.dim_holy(), split_top.dim_choly());
        let mut f = DMatrix::zeros(3 * s.n(), dh + dc);
        f.columns_mut(0, dh).copy_from(&split_top.holy);
        f.columns_mut(dh, dc).copy_from(&split_top.choly);
        let gram = f.transpose() * &mt * &f;
        let mut rhs = DMatrix::zeros(dh + dc, dim);
        let q = &split_top.holy_potentials;
        let dd_field = &sb * &dd;
        rhs.rows_mut(0, dh).copy_from(&(q.transpose() * &s.mass * &dd_field + boundary_functional(cell, &layout, q, &edge_potentials)));
        for i in 0..dc {
            rhs[(dh + i, layout.choly_offset() + i)] = 1.0;
        }
        let coords = gram
            .clone()
            .cholesky()
            .ok_or_else(|| Error::Singular(format!("tensor potential Gram matrix on cell {} is singular", cell.id)))?
            .solve(&rhs);
        let potential = &f * coords;

        // Compatibility on affine q.
        let mut affine = DMatrix::zeros(s.n(), 3);
        for i in 0..3 {
            affine[(i, i)] = 1.0;
        }
        let volume = affine.transpose() * &s.mass * &dd_field;
        let boundary = boundary_functional(cell, &layout, &affine, &edge_potentials);
        let scale = volume.amax().max(boundary.amax()).max(f64::MIN_POSITIVE);
        let compatibility_residual = (volume + boundary).amax() / scale;
        if compatibility_residual > 1e-10 {
            return Err(Error::Singular(format!(
                "tensor potential right-hand side is incompatible on cell {} (residual {compatibility_residual:.3e})",
                cell.id
            )));
        }

        let stabilization_rows = stabilization_rows(cell, &layout, &potential, &edge_potentials);
        let stabilization = stabilization_rows.transpose() * &stabilization_rows;
        let operator_gram = potential.transpose() * &mt * &potential + &stabilization;
        let component_weights = component_weights(&layout, cell.h());
        Ok(Self {
            l,
            layout,
            split_low,
            split_top,
            dd,
            edge_potentials,
            potential,
            stabilization,
            stabilization_rows,
            operator_gram,
            component_weights,
            compatibility_residual,
        })
    }

    pub fn dim(&self) -> usize {
        self.layout.dim()
    }

    /// Interpolates a tensor field with first derivatives.
    pub fn interpolate(&self, cell: &LocalCell, f: &dyn TensorField) -> SigmaDofVec {
        let l = self.l as isize;
        let layout = self.layout;
        let mut v = DVector::zeros(layout.dim());
        let holy = cell.tensor_moments(&self.split_low.holy, |x| f.value(x));
        let choly = cell.tensor_moments(&self.split_top.choly, |x| f.value(x));
        v.rows_mut(0, holy.len()).copy_from(&holy);
        v.rows_mut(layout.choly_offset(), choly.len()).copy_from(&choly);
        for (e, edge) in cell.edges.iter().enumerate() {
            let (n, t) = (edge.normal, edge.tangent);
            let te = edge.space.project(l - 2, |_, x| f.value(x).bilinear(&n, &n));
            let de = edge.space.project(l - 1, |_, x| {
                let (d1, d2) = f.derivatives(x);
                let dt = t.x * d1 + t.y * d2;
                dt.bilinear(&n, &t) + f.vdiv(x).dot(&n)
            });
            let o = layout.edge_offset(e);
            v.rows_mut(o, te.len()).copy_from(&te);
            v.rows_mut(o + layout.edge_tau_len(), de.len()).copy_from(&de);
        }
        for (i, x) in cell.points.iter().enumerate() {
            let o = layout.vertex_offset(i);
            let val = f.value(x);
            v.rows_mut(o, 3).copy_from_slice(&val.to_array());
        }
        SigmaDofVec { layout, values: v }
    }

    /// Orthonormal coefficients of `DD τ` in `P^{ℓ−1}(T)`.
    pub fn apply_dd(&self, dofs: &SigmaDofVec) -> DVector<f64> {
        &self.dd * &dofs.values
    }

    /// Monomial coefficients of the tensor potential.
    pub fn apply_potential(&self, dofs: &SigmaDofVec) -> DVector<f64> {
        &self.potential * &dofs.values
    }

    /// Legendre coefficients of the edge potential on local edge `e`.
    pub fn apply_edge_potential(&self, e: usize, dofs: &SigmaDofVec) -> DVector<f64> {
        &self.edge_potentials[e] * &dofs.values
    }

    pub fn stabilization_form(&self, a: &SigmaDofVec, b: &SigmaDofVec) -> f64 {
        (&self.stabilization_rows * &a.values).dot(&(&self.stabilization_rows * &b.values))
    }

    pub fn operator_norm(&self, a: &SigmaDofVec) -> f64 {
        a.values.dot(&(&self.operator_gram * &a.values)).max(0.0).sqrt()
    }

    pub fn component_norm(&self, a: &SigmaDofVec) -> f64 {
        a.values.iter().zip(self.component_weights.iter()).map(|(x, w)| w * x * x).sum::<f64>().sqrt()
    }
}

/// For each column `q` of `tests` (scalar monomial coefficients), the functional
/// `Σ_E ω_TE Σ_V ω_EV (τ_V n_E·t_E) q(x_V) + Σ_E ω_TE (∫_E T_E ∂_n q − ∫_E D_E q)`,
/// where `traces[e]` maps the dofs to the Legendre coefficients of `T_E`.
fn boundary_functional(cell: &LocalCell, layout: &SigmaLayout, tests: &DMatrix<f64>, traces: &[DMatrix<f64>]) -> DMatrix<f64> {
    let s = &cell.space;
    let m = tests.ncols();
    let mut out = DMatrix::zeros(m, layout.dim());
    let d_len = layout.edge_d_len() as isize;
    for (e, edge) in cell.edges.iter().enumerate() {
        let (n, t) = (edge.normal, edge.tangent);
        let tr_deg = traces[e].nrows() as isize - 1;
        let mut a_tr = DMatrix::zeros(m, traces[e].nrows());
        let mut a_d = DMatrix::zeros(m, layout.edge_d_len());
        let rule = &edge.space.rule;
        for ((sp, x), w) in rule.params.iter().zip(&rule.points).zip(&rule.weights) {
            let qv = tests.transpose() * s.mono.eval(x);
            let (g1, g2) = s.mono.eval_grad(x);
            let dnq = tests.transpose() * (g1 * n.x + g2 * n.y);
            a_tr += &dnq * edge.space.values(tr_deg, *sp).transpose() * *w;
            a_d -= &qv * edge.space.values(d_len - 1, *sp).transpose() * *w;
        }
        out += &a_tr * &traces[e] * edge.omega;
        let d_off = layout.edge_offset(e) + layout.edge_tau_len();
        let mut cols = out.columns_mut(d_off, layout.edge_d_len());
        cols += a_d * edge.omega;
        let bw = SymTensor::bilinear_weights(&n, &t);
        for (v, w_ev) in edge.endpoints() {
            let qv = tests.transpose() * s.mono.eval(&cell.points[v]);
            let o = layout.vertex_offset(v);
            for (c, b) in bw.iter().enumerate() {
                let mut col = out.column_mut(o + c);
                col += &qv * (edge.omega * w_ev * b);
            }
        }
    }
    out
}

/// Edge potential on local edge `e`: Legendre coefficients `c_j = τ_{E,j}` for `j ≤ ℓ − 2`,
/// the two top coefficients fixed by the endpoint values `τ_V n_E·n_E`.
fn edge_potential(cell: &LocalCell, layout: &SigmaLayout, e: usize) -> Result<DMatrix<f64>> {
    let edge = &cell.edges[e];
    let l = layout.l;
    let dim = layout.dim();
    let mut pe = DMatrix::zeros(l + 1, dim);
    let off = layout.edge_offset(e);
    for j in 0..l - 1 {
        pe[(j, off + j)] = 1.0;
    }
    let n = edge.normal;
    let bw = SymTensor::bilinear_weights(&n, &n);
    let mut a = nalgebra::Matrix2::zeros();
    let mut r = DMatrix::zeros(2, dim);
    for (row, (v, sp)) in edge.endpoints().into_iter().enumerate() {
        let psi = edge.space.values(l as isize, sp);
        a[(row, 0)] = psi[l - 1];
        a[(row, 1)] = psi[l];
        for c in 0..3 {
            r[(row, layout.vertex_offset(v) + c)] += bw[c];
        }
        for j in 0..l - 1 {
            r[(row, off + j)] -= psi[j];
        }
    }
    let inv = a.try_inverse().ok_or_else(|| Error::Singular(format!("edge potential system on edge {}", edge.global)))?;
    let top = nalgebra::DMatrix::from_column_slice(2, 2, inv.as_slice()) * r;
    pe.rows_mut(l - 1, 2).copy_from(&top);
    Ok(pe)
}

fn stabilization_rows(cell: &LocalCell, layout: &SigmaLayout, potential: &DMatrix<f64>, edge_potentials: &[DMatrix<f64>]) -> DMatrix<f64> {
    let s = &cell.space;
    let n_mono = s.n();
    let h = cell.h();
    let dim = layout.dim();
    let l = layout.l as isize;
    let comp = |c: usize| potential.rows(c * n_mono, n_mono);
    let mut rows: Vec<DVector<f64>> = Vec::new();
    for (e, edge) in cell.edges.iter().enumerate() {
        let (n, t) = (edge.normal, edge.tangent);
        let nn = SymTensor::bilinear_weights(&n, &n);
        let nt = SymTensor::bilinear_weights(&n, &t);
        let d_off = layout.edge_offset(e) + layout.edge_tau_len();
        let rule = &edge.space.rule;
        for ((sp, x), w) in rule.params.iter().zip(&rule.points).zip(&rule.weights) {
            let ev = s.mono.eval(x);
            let (g1, g2) = s.mono.eval_grad(x);
            let gt = &g1 * t.x + &g2 * t.y;
            let mut r1 = DVector::zeros(dim);
            let mut r2 = DVector::zeros(dim);
            for c in 0..3 {
                r1 += comp(c).transpose() * &ev * nn[c];
                r2 += comp(c).transpose() * &gt * nt[c];
            }
            r1 -= edge_potentials[e].transpose() * edge.space.values(l, *sp);
            // VDIV P · n
            r2 += (comp(0).transpose() * &g1 + comp(1).transpose() * &g2) * n.x;
            r2 += (comp(1).transpose() * &g1 + comp(2).transpose() * &g2) * n.y;
            let psi = edge.space.values(l - 1, *sp);
            for j in 0..psi.len() {
                r2[d_off + j] -= psi[j];
            }
            rows.push(r1 * (h * w).sqrt());
            rows.push(r2 * (h * h * h * w).sqrt());
        }
    }
    let weights = [1.0, std::f64::consts::SQRT_2, 1.0];
    for (v, x) in cell.points.iter().enumerate() {
        let ev = s.mono.eval(x);
        for c in 0..3 {
            let mut r = comp(c).transpose() * &ev;
            r[layout.vertex_offset(v) + c] -= 1.0;
            rows.push(r * (h * weights[c]));
        }
    }
    DMatrix::from_fn(rows.len(), dim, |i, j| rows[i][j])
}

fn component_weights(layout: &SigmaLayout, h: f64) -> DVector<f64> {
    let mut w = DVector::from_element(layout.dim(), 1.0);
    for e in 0..layout.nv {
        let o = layout.edge_offset(e);
        w.rows_mut(o, layout.edge_tau_len()).fill(h);
        w.rows_mut(o + layout.edge_tau_len(), layout.edge_d_len()).fill(h * h * h);
    }
    for v in 0..layout.nv {
        let o = layout.vertex_offset(v);
        w[o] = h * h;
        w[o + 1] = 2.0 * h * h;
        w[o + 2] = h * h;
    }
    w
}
