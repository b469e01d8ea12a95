//! Block layouts of the local spaces `V_T^k` and `Σ_T^ℓ`.
//!
//! `V_T^k`: cell block (vector orthonormal coefficients of `P^{k−2}`), then per edge the
//! Legendre coefficients of `v_E ∈ P^{k−4}(E;R²)` (first component, then second), then
//! per vertex `(v1, v2, G11, G12, G21, G22)`.
//!
//! `Σ_T^ℓ`: Hessian block `Holy^{ℓ−3}`, Koszul block `cHoly^ℓ`, then per edge `τ_E`
//! followed by `D_E`, then per vertex `(τ11, τ12, τ22)`.

use nalgebra::DVector;

use crate::polycalc::{choly_dim, holy_dim, poly_dim};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct VLayout {
    pub k: usize,
    pub nv: usize,
}

impl VLayout {
    pub fn new(k: usize, nv: usize) -> Result<Self> {
        if k < 3 {
            return Err(Error::InvalidParameter(format!("V_T^k needs k ≥ 3, got {k}")));
        }
        Ok(Self { k, nv })
    }

    pub fn cell_len(&self) -> usize {
        2 * poly_dim(self.k as isize - 2)
    }

    /// Length of one component of an edge block.
    pub fn edge_component_len(&self) -> usize {
        self.k - 3
    }

    pub fn edge_len(&self) -> usize {
        2 * self.edge_component_len()
    }

    pub fn edge_offset(&self, e: usize) -> usize {
        self.cell_len() + e * self.edge_len()
    }

    pub fn vertex_offset(&self, v: usize) -> usize {
        self.cell_len() + self.nv * self.edge_len() + 6 * v
    }

    pub fn dim(&self) -> usize {
        self.cell_len() + self.nv * (self.edge_len() + 6)
    }

    /// `k(k−1) + 2k·card(V_T)`.
    pub fn closed_form_dim(k: usize, nv: usize) -> usize {
        k * (k - 1) + 2 * k * nv
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SigmaLayout {
    pub l: usize,
    pub nv: usize,
}

impl SigmaLayout {
    pub fn new(l: usize, nv: usize) -> Result<Self> {
        if l < 2 {
            return Err(Error::InvalidParameter(format!("Σ_T^ℓ needs ℓ ≥ 2, got {l}")));
        }
        Ok(Self { l, nv })
    }

    pub fn holy_len(&self) -> usize {
        holy_dim(self.l as isize - 3)
    }

    pub fn choly_len(&self) -> usize {
        choly_dim(self.l as isize)
    }

    pub fn cell_len(&self) -> usize {
        self.holy_len() + self.choly_len()
    }

    pub fn choly_offset(&self) -> usize {
        self.holy_len()
    }

    pub fn edge_tau_len(&self) -> usize {
        self.l - 1
    }

    pub fn edge_d_len(&self) -> usize {
        self.l
    }

    pub fn edge_len(&self) -> usize {
        self.edge_tau_len() + self.edge_d_len()
    }

    /// Offset of `τ_E`; `D_E` follows at `+ edge_tau_len()`.
    pub fn edge_offset(&self, e: usize) -> usize {
        self.cell_len() + e * self.edge_len()
    }

    pub fn vertex_offset(&self, v: usize) -> usize {
        self.cell_len() + self.nv * self.edge_len() + 3 * v
    }

    pub fn dim(&self) -> usize {
        self.cell_len() + self.nv * (self.edge_len() + 3)
    }

    /// `3ℓ(ℓ+1)/2 + 2(ℓ+1)·card(V_T) − 3`.
    pub fn closed_form_dim(l: usize, nv: usize) -> usize {
        3 * l * (l + 1) / 2 + 2 * (l + 1) * nv - 3
    }
}

/// Flat coefficient vector of `V_T^k`.
#[derive(Debug, Clone, PartialEq)]
pub struct VDofVec {
    pub layout: VLayout,
    pub values: DVector<f64>,
}

impl VDofVec {
    pub fn new(layout: VLayout, values: DVector<f64>) -> Result<Self> {
        if values.len() != layout.dim() {
            return Err(Error::ShapeMismatch(format!("V dofs: expected {}, got {}", layout.dim(), values.len())));
        }
        Ok(Self { layout, values })
    }

    pub fn zeros(layout: VLayout) -> Self {
        Self { layout, values: DVector::zeros(layout.dim()) }
    }

    pub fn vertex(&self, v: usize) -> [f64; 6] {
        let o = self.layout.vertex_offset(v);
        std::array::from_fn(|i| self.values[o + i])
    }
}

/// Flat coefficient vector of `Σ_T^ℓ`.
#[derive(Debug, Clone, PartialEq)]
pub struct SigmaDofVec {
    pub layout: SigmaLayout,
    pub values: DVector<f64>,
}

impl SigmaDofVec {
    pub fn new(layout: SigmaLayout, values: DVector<f64>) -> Result<Self> {
        if values.len() != layout.dim() {
            return Err(Error::ShapeMismatch(format!("Σ dofs: expected {}, got {}", layout.dim(), values.len())));
        }
        Ok(Self { layout, values })
    }

    pub fn zeros(layout: SigmaLayout) -> Self {
        Self { layout, values: DVector::zeros(layout.dim()) }
    }

    pub fn tau_e(&self, e: usize) -> DVector<f64> {
        self.values.rows(self.layout.edge_offset(e), self.layout.edge_tau_len()).into_owned()
    }

    pub fn d_e(&self, e: usize) -> DVector<f64> {
        let o = self.layout.edge_offset(e) + self.layout.edge_tau_len();
        self.values.rows(o, self.layout.edge_d_len()).into_owned()
    }

    pub fn vertex(&self, v: usize) -> [f64; 3] {
        let o = self.layout.vertex_offset(v);
        [self.values[o], self.values[o + 1], self.values[o + 2]]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dimensions_match_closed_forms() {
        for nv in 3..=8 {
            for k in 3..=5 {
                assert_eq!(VLayout::new(k, nv).unwrap().dim(), VLayout::closed_form_dim(k, nv));
                let l = k - 1;
                assert_eq!(SigmaLayout::new(l, nv).unwrap().dim(), SigmaLayout::closed_form_dim(l, nv));
            }
            assert_eq!(SigmaLayout::new(5, nv).unwrap().dim(), SigmaLayout::closed_form_dim(5, nv));
        }
        assert_eq!(VLayout::new(3, 3).unwrap().dim(), 24);
        assert_eq!(VLayout::new(4, 4).unwrap().dim(), 44);
        assert_eq!(SigmaLayout::new(2, 3).unwrap().dim(), 24);
        assert_eq!(SigmaLayout::new(3, 4).unwrap().dim(), 47);
    }

    #[test]
    fn degenerate_blocks_are_empty() {
        assert_eq!(VLayout::new(3, 4).unwrap().edge_len(), 0);
        assert_eq!(SigmaLayout::new(2, 4).unwrap().holy_len(), 0);
        assert!(VLayout::new(2, 3).is_err());
        assert!(SigmaLayout::new(1, 3).is_err());
    }

    #[test]
    fn offsets_are_contiguous() {
        let s = SigmaLayout::new(3, 5).unwrap();
        assert_eq!(s.edge_offset(0), s.cell_len());
        assert_eq!(s.vertex_offset(0), s.edge_offset(5));
        assert_eq!(s.vertex_offset(4) + 3, s.dim());
        assert!(SigmaDofVec::new(s, DVector::zeros(3)).is_err());
    }
}
