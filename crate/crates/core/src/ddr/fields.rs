//! Field evaluators consumed by the interpolators.

use nalgebra::DVector;

use crate::polycalc::{CellSpace, DiffOp, FieldKind};
use crate::tensor::{SymTensor, Vec2};

pub trait VectorField {
    fn value(&self, x: &Vec2) -> Vec2;
    /// `(∂1v1, ∂2v1, ∂1v2, ∂2v2)`.
    fn gradient(&self, x: &Vec2) -> [f64; 4];
}

pub trait TensorField {
    fn value(&self, x: &Vec2) -> SymTensor;
    /// `(∂1τ, ∂2τ)`.
    fn derivatives(&self, x: &Vec2) -> (SymTensor, SymTensor);

    fn vdiv(&self, x: &Vec2) -> Vec2 {
        let (d1, d2) = self.derivatives(x);
        Vec2::new(d1.xx + d2.xy, d1.xy + d2.yy)
    }
}

/// Vector field given by closures.
pub struct FnVector<F, G> {
    pub value: F,
    pub gradient: G,
}

impl<F, G> VectorField for FnVector<F, G>
where
    F: Fn(&Vec2) -> Vec2,
    G: Fn(&Vec2) -> [f64; 4],
{
    fn value(&self, x: &Vec2) -> Vec2 {
        (self.value)(x)
    }

    fn gradient(&self, x: &Vec2) -> [f64; 4] {
        (self.gradient)(x)
    }
}

/// Tensor field given by closures.
pub struct FnTensor<F, G> {
    pub value: F,
    pub derivatives: G,
}

impl<F, G> TensorField for FnTensor<F, G>
where
    F: Fn(&Vec2) -> SymTensor,
    G: Fn(&Vec2) -> (SymTensor, SymTensor),
{
    fn value(&self, x: &Vec2) -> SymTensor {
        (self.value)(x)
    }

    fn derivatives(&self, x: &Vec2) -> (SymTensor, SymTensor) {
        (self.derivatives)(x)
    }
}

/// Vector polynomial stored by monomial coefficients of a cell space.
pub struct PolyVector<'a> {
    pub space: &'a CellSpace,
    pub coeffs: DVector<f64>,
}

impl VectorField for PolyVector<'_> {
    fn value(&self, x: &Vec2) -> Vec2 {
        self.space.eval_vector(&self.coeffs, x)
    }

    fn gradient(&self, x: &Vec2) -> [f64; 4] {
        let n = self.space.n();
        let (g1, g2) = self.space.mono.eval_grad(x);
        let (a, b) = (self.coeffs.rows(0, n), self.coeffs.rows(n, n));
        [g1.dot(&a), g2.dot(&a), g1.dot(&b), g2.dot(&b)]
    }
}

/// Symmetric tensor polynomial stored by monomial coefficients of a cell space.
pub struct PolyTensor<'a> {
    pub space: &'a CellSpace,
    pub coeffs: DVector<f64>,
}

impl PolyTensor<'_> {
    /// Monomial coefficients of `DIV VDIV τ`.
    pub fn div_vdiv(&self) -> DVector<f64> {
        let (v, _) = DiffOp::VDiv.apply(self.space, FieldKind::SymTensor, &self.coeffs).expect("tensor shape");
        let (d, _) = DiffOp::Div.apply(self.space, FieldKind::Vector, &v).expect("vector shape");
        d
    }
}

impl TensorField for PolyTensor<'_> {
    fn value(&self, x: &Vec2) -> SymTensor {
        self.space.eval_tensor(&self.coeffs, x)
    }

    fn derivatives(&self, x: &Vec2) -> (SymTensor, SymTensor) {
        let n = self.space.n();
        let (g1, g2) = self.space.mono.eval_grad(x);
        let c = |b: usize| self.coeffs.rows(b * n, n);
        (
            SymTensor::new(g1.dot(&c(0)), g1.dot(&c(1)), g1.dot(&c(2))),
            SymTensor::new(g2.dot(&c(0)), g2.dot(&c(1)), g2.dot(&c(2))),
        )
    }
}
