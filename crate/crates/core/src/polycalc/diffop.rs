//! Two-dimensional differential operators as matrices on monomial coefficients.
//!
//! Block conventions: vectors `(v1, v2)`, full matrices `(G11, G12, G21, G22)`,
//! symmetric tensors `(τ11, τ12, τ22)`.

use std::fmt;

use nalgebra::{DMatrix, DVector};

use super::basis::CellSpace;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FieldKind {
    Scalar,
    Vector,
    Matrix,
    SymTensor,
}

impl FieldKind {
    pub fn blocks(self) -> usize {
        match self {
            FieldKind::Scalar => 1,
            FieldKind::Vector => 2,
            FieldKind::Matrix => 4,
            FieldKind::SymTensor => 3,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DiffOp {
    Grad,
    Curl,
    Div,
    SymCurl,
    VDiv,
    VRot,
    Hess,
    /// The algebraic map `G ↦ (G12, (G22 − G11)/2, −G21)`.
    C,
}

impl fmt::Display for DiffOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            DiffOp::Grad => "GRAD",
            DiffOp::Curl => "CURL",
            DiffOp::Div => "DIV",
            DiffOp::SymCurl => "SYMCURL",
            DiffOp::VDiv => "VDIV",
            DiffOp::VRot => "VROT",
            DiffOp::Hess => "HESS",
            DiffOp::C => "C",
        };
        f.write_str(s)
    }
}

/// Block matrix builder: `rows[i][j]` is a linear combination of `I`, `∂1`, `∂2`, `∂1∂1`, ...
struct Blocks<'a> {
    n: usize,
    d1: &'a DMatrix<f64>,
    d2: &'a DMatrix<f64>,
}

#[derive(Clone, Copy)]
enum Term {
    Id,
    D1,
    D2,
    D11,
    D12,
    D22,
}

impl Blocks<'_> {
    fn block(&self, t: Term) -> DMatrix<f64> {
        match t {
            Term::Id => DMatrix::identity(self.n, self.n),
            Term::D1 => self.d1.clone(),
            Term::D2 => self.d2.clone(),
            Term::D11 => self.d1 * self.d1,
            Term::D12 => self.d1 * self.d2,
            Term::D22 => self.d2 * self.d2,
        }
    }

    fn build(&self, out_blocks: usize, in_blocks: usize, entries: &[(usize, usize, f64, Term)]) -> DMatrix<f64> {
        let n = self.n;
        let mut m = DMatrix::zeros(out_blocks * n, in_blocks * n);
        for &(i, j, c, t) in entries {
            let mut v = m.view_mut((i * n, j * n), (n, n));
            v += self.block(t) * c;
        }
        m
    }
}

impl DiffOp {
    /// Matrix of the operator acting on fields of kind `input`, and the kind of the image.
    pub fn matrix(self, input: FieldKind, d1: &DMatrix<f64>, d2: &DMatrix<f64>) -> Result<(DMatrix<f64>, FieldKind)> {
        use FieldKind::*;
        use Term::*;
        let b = Blocks { n: d1.nrows(), d1, d2 };
        let out = match (self, input) {
            (DiffOp::Grad, Scalar) => (b.build(2, 1, &[(0, 0, 1.0, D1), (1, 0, 1.0, D2)]), Vector),
            (DiffOp::Grad, Vector) => {
                (b.build(4, 2, &[(0, 0, 1.0, D1), (1, 0, 1.0, D2), (2, 1, 1.0, D1), (3, 1, 1.0, D2)]), Matrix)
            }
            (DiffOp::Curl, Scalar) => (b.build(2, 1, &[(0, 0, 1.0, D2), (1, 0, -1.0, D1)]), Vector),
            (DiffOp::Div, Vector) => (b.build(1, 2, &[(0, 0, 1.0, D1), (0, 1, 1.0, D2)]), Scalar),
            (DiffOp::SymCurl, Vector) => (
                b.build(3, 2, &[(0, 0, 1.0, D2), (1, 1, 0.5, D2), (1, 0, -0.5, D1), (2, 1, -1.0, D1)]),
                SymTensor,
            ),
            (DiffOp::VDiv, SymTensor) => (
                b.build(2, 3, &[(0, 0, 1.0, D1), (0, 1, 1.0, D2), (1, 1, 1.0, D1), (1, 2, 1.0, D2)]),
                Vector,
            ),
            (DiffOp::VRot, SymTensor) => (
                b.build(2, 3, &[(0, 0, 1.0, D2), (0, 1, -1.0, D1), (1, 1, 1.0, D2), (1, 2, -1.0, D1)]),
                Vector,
            ),
            (DiffOp::Hess, Scalar) => (b.build(3, 1, &[(0, 0, 1.0, D11), (1, 0, 1.0, D12), (2, 0, 1.0, D22)]), SymTensor),
            (DiffOp::C, Matrix) => {
                (b.build(3, 4, &[(0, 1, 1.0, Id), (1, 3, 0.5, Id), (1, 0, -0.5, Id), (2, 2, -1.0, Id)]), SymTensor)
            }
            _ => {
                return Err(Error::ShapeMismatch(format!("{self} is not defined on {input:?} fields")));
            }
        };
        Ok(out)
    }

    /// Applies the operator to monomial coefficients on `space`.
    pub fn apply(self, space: &CellSpace, input: FieldKind, coeffs: &DVector<f64>) -> Result<(DVector<f64>, FieldKind)> {
        let expected = input.blocks() * space.n();
        if coeffs.len() != expected {
            return Err(Error::ShapeMismatch(format!(
                "{self}: expected {expected} coefficients for a {input:?} field, got {}",
                coeffs.len()
            )));
        }
        let (m, kind) = self.matrix(input, &space.d1, &space.d2)?;
        Ok((m * coeffs, kind))
    }
}
