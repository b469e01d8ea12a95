//! Operators on `V_T^k`: interpolator, edge trace, full and discrete symmetric curls
//! and the vector potential.

use nalgebra::{DMatrix, DVector, Matrix4};

use super::fields::VectorField;
use super::layout::{SigmaLayout, VDofVec, VLayout};
use super::local::LocalCell;
use crate::polycalc::{choly_basis, DiffOp, FieldKind, HolyCholySplit};
use crate::tensor::Vec2;
use crate::{Error, Result};

#[derive(Debug, Clone)]
pub struct VOps {
    pub k: usize,
    pub layout: VLayout,
    /// Per local edge: Legendre coefficients of `v_ET` in `P^k(E)`, first component in
    /// rows `0..=k`, second in rows `k+1..=2k+1`.
    pub traces: Vec<DMatrix<f64>>,
    /// Full symmetric curl, tensor monomial coefficients of `P^{k−1}(T;S)`.
    pub csym: DMatrix<f64>,
    /// Discrete symmetric curl into `Σ_T^{k−1}`.
    pub ucsym: DMatrix<f64>,
    pub sigma_layout: SigmaLayout,
    /// Vector potential, vector monomial coefficients of `P^k(T;R²)`.
    pub potential: DMatrix<f64>,
    /// Smallest singular value of the `VROT: cHoly^{k+1} → P^k` matrix in orthonormal coordinates.
    pub vrot_min_singular_value: f64,
}

impl VOps {
    pub fn new(cell: &LocalCell, k: usize) -> Result<Self> {
        let s = &cell.space;
        if s.degree() < k + 1 {
            return Err(Error::InvalidParameter(format!("V operators of degree {k} need a cell space of degree {}", k + 1)));
        }
        let layout = VLayout::new(k, cell.nv())?;
        let dim = layout.dim();
        let ki = k as isize;
        let traces = (0..cell.nv()).map(|e| edge_trace(cell, &layout, e)).collect::<Result<Vec<_>>>()?;

        // Full symmetric curl, Riesz representation in the orthonormal basis of P^{k−1}(T;S).
        let tb = s.tensor_basis(ki - 1);
        let vm = s.vector_mass();
        let (vrot, _) = DiffOp::VRot.matrix(FieldKind::SymTensor, &s.d1, &s.d2)?;
        let mut coords = edge_curl_term(cell, &tb, &traces, dim);
        let vb_cell = s.vector_basis(ki - 2);
        let mut cell_cols = coords.columns_mut(0, layout.cell_len());
        cell_cols -= (&vrot * &tb).transpose() * &vm * &vb_cell;
        let csym = &tb * coords;

        // Discrete symmetric curl.
        let sigma_layout = SigmaLayout::new(k - 1, cell.nv())?;
        let split_low = HolyCholySplit::new(s, ki - 4)?;
        let choly = choly_basis(s, ki - 1)?;
        let mt = s.tensor_mass();
        let mut ucsym = DMatrix::zeros(sigma_layout.dim(), dim);
        ucsym.rows_mut(0, sigma_layout.holy_len()).copy_from(&(split_low.holy.transpose() * &mt * &csym));
        ucsym.rows_mut(sigma_layout.choly_offset(), sigma_layout.choly_len()).copy_from(&(choly.transpose() * &mt * &csym));
        for (e, edge) in cell.edges.iter().enumerate() {
            let (n, t) = (edge.normal, edge.tangent);
            let dl = edge.space.derivative_matrix(ki);
            let tr = &traces[e];
            let dv: Vec<DMatrix<f64>> = (0..2).map(|c| &dl * tr.rows(c * (k + 1), k + 1)).collect();
            // With n_E = rot90(t_E), SYMCURL v n·n = −∂_t v·n and the D-combination of
            // SYMCURL v equals −∂²_t v·t, hence the signs.
            let dtn = -(&dv[0] * n.x + &dv[1] * n.y);
            let d2tt = -(&dl * (&dv[0] * t.x + &dv[1] * t.y));
            let o = sigma_layout.edge_offset(e);
            let (lt, ld) = (sigma_layout.edge_tau_len(), sigma_layout.edge_d_len());
            ucsym.rows_mut(o, lt).copy_from(&dtn.rows(0, lt));
            ucsym.rows_mut(o + lt, ld).copy_from(&d2tt.rows(0, ld));
        }
        for v in 0..cell.nv() {
            let (vo, so) = (layout.vertex_offset(v), sigma_layout.vertex_offset(v));
            // C G = (G12, (G22 − G11)/2, −G21)
            ucsym[(so, vo + 3)] = 1.0;
            ucsym[(so + 1, vo + 5)] = 0.5;
            ucsym[(so + 1, vo + 2)] = -0.5;
            ucsym[(so + 2, vo + 4)] = -1.0;
        }

        // Vector potential, tested against cHoly^{k+1}.
        let upsilon = choly_basis(s, ki + 1)?;
        let vb = s.vector_basis(ki);
        let m = (&vrot * &upsilon).transpose() * &vm * &vb;
        let vrot_min_singular_value = m.singular_values().min();
        if vrot_min_singular_value < 1e-8 {
            return Err(Error::Singular(format!(
                "VROT from cHoly^{} to P^{k} is not invertible on cell {} (σ_min = {vrot_min_singular_value:.3e})",
                k + 1,
                cell.id
            )));
        }
        let rhs = edge_curl_term(cell, &upsilon, &traces, dim) - upsilon.transpose() * &mt * &csym;
        let p = m.lu().solve(&rhs).ok_or_else(|| Error::Singular("vector potential system".into()))?;
        let potential = vb * p;

        Ok(Self { k, layout, traces, csym, ucsym, sigma_layout, potential, vrot_min_singular_value })
    }

    pub fn dim(&self) -> usize {
        self.layout.dim()
    }

    /// Interpolates a `C¹` vector field.
    pub fn interpolate(&self, cell: &LocalCell, f: &dyn VectorField) -> VDofVec {
        let k = self.k as isize;
        let layout = self.layout;
        let mut v = DVector::zeros(layout.dim());
        let cb = cell.space.project_vector(k - 2, |x| f.value(x));
        v.rows_mut(0, cb.len()).copy_from(&cb);
        let ec = layout.edge_component_len();
        for (e, edge) in cell.edges.iter().enumerate() {
            let o = layout.edge_offset(e);
            for c in 0..2 {
                let p = edge.space.project(k - 4, |_, x| f.value(x)[c]);
                v.rows_mut(o + c * ec, ec).copy_from(&p);
            }
        }
        for (i, x) in cell.points.iter().enumerate() {
            let o = layout.vertex_offset(i);
            let val = f.value(x);
            let g = f.gradient(x);
            v.rows_mut(o, 6).copy_from_slice(&[val.x, val.y, g[0], g[1], g[2], g[3]]);
        }
        VDofVec { layout, values: v }
    }

    /// Legendre coefficients of both components of `v_ET` on local edge `e`.
    pub fn edge_trace(&self, e: usize, dofs: &VDofVec) -> (DVector<f64>, DVector<f64>) {
        let t = &self.traces[e] * &dofs.values;
        let k1 = self.k + 1;
        (t.rows(0, k1).into_owned(), t.rows(k1, k1).into_owned())
    }

    pub fn eval_edge_trace(&self, cell: &LocalCell, e: usize, dofs: &VDofVec, s: f64) -> Vec2 {
        let (a, b) = self.edge_trace(e, dofs);
        let edge = &cell.edges[e].space;
        Vec2::new(edge.eval(&a, s), edge.eval(&b, s))
    }

    pub fn apply_csym(&self, dofs: &VDofVec) -> DVector<f64> {
        &self.csym * &dofs.values
    }

    pub fn apply_ucsym(&self, dofs: &VDofVec) -> DVector<f64> {
        &self.ucsym * &dofs.values
    }

    pub fn apply_potential(&self, dofs: &VDofVec) -> DVector<f64> {
        &self.potential * &dofs.values
    }
}

/// Trace map on local edge `e`: matches `π^{k−4}` moments, endpoint values and endpoint
/// tangential derivatives `G_V t_E`.
fn edge_trace(cell: &LocalCell, layout: &VLayout, e: usize) -> Result<DMatrix<f64>> {
    let edge = &cell.edges[e];
    let k = layout.k;
    let ki = k as isize;
    let dim = layout.dim();
    let ec = layout.edge_component_len();
    let t = edge.tangent;
    let mut out = DMatrix::zeros(2 * (k + 1), dim);
    let ends = edge.endpoints();
    let vals: Vec<DVector<f64>> = ends.iter().map(|&(_, s)| edge.space.values(ki, s)).collect();
    let ders: Vec<DVector<f64>> = ends.iter().map(|&(_, s)| edge.space.derivatives(ki, s)).collect();
    let mut a = Matrix4::zeros();
    for j in 0..4 {
        let jj = k - 3 + j;
        a[(0, j)] = vals[0][jj];
        a[(1, j)] = vals[1][jj];
        a[(2, j)] = ders[0][jj];
        a[(3, j)] = ders[1][jj];
    }
    let inv = a
        .try_inverse()
        .ok_or_else(|| Error::Singular(format!("edge trace interpolation on edge {} is singular", edge.global)))?;
    let inv = DMatrix::from_column_slice(4, 4, inv.as_slice());
    for c in 0..2 {
        let row0 = c * (k + 1);
        let moment_off = layout.edge_offset(e) + c * ec;
        for j in 0..ec {
            out[(row0 + j, moment_off + j)] = 1.0;
        }
        let mut r = DMatrix::zeros(4, dim);
        for (i, &(v, _)) in ends.iter().enumerate() {
            let vo = layout.vertex_offset(v);
            r[(i, vo + c)] = 1.0;
            // (G t)_c = G_{c1} t1 + G_{c2} t2
            r[(2 + i, vo + 2 + 2 * c)] = t.x;
            r[(2 + i, vo + 3 + 2 * c)] = t.y;
            for j in 0..ec {
                r[(i, moment_off + j)] -= vals[i][j];
                r[(2 + i, moment_off + j)] -= ders[i][j];
            }
        }
        out.rows_mut(row0 + k - 3, 4).copy_from(&(&inv * r));
    }
    Ok(out)
}

/// `Σ_E ω_TE ∫_E v_ET · (τ_i t_E)` for every column `τ_i` of a tensor basis.
fn edge_curl_term(cell: &LocalCell, basis: &DMatrix<f64>, traces: &[DMatrix<f64>], dim: usize) -> DMatrix<f64> {
    let m = basis.ncols();
    let mut out = DMatrix::zeros(m, dim);
    for (e, edge) in cell.edges.iter().enumerate() {
        let t = edge.tangent;
        let k1 = traces[e].nrows() / 2;
        let mut acc = [DMatrix::zeros(m, k1), DMatrix::zeros(m, k1)];
        let rule = &edge.space.rule;
        for ((sp, x), w) in rule.params.iter().zip(&rule.points).zip(&rule.weights) {
            let [a, b, c] = cell.tensor_values(basis, x);
            let psi = edge.space.values(k1 as isize - 1, *sp);
            let tt = [&a * t.x + &b * t.y, &b * t.x + &c * t.y];
            for comp in 0..2 {
                acc[comp] += &tt[comp] * psi.transpose() * *w;
            }
        }
        for comp in 0..2 {
            out += &acc[comp] * traces[e].rows(comp * k1, k1) * edge.omega;
        }
    }
    out
}
