//! L²-orthonormal scalar, vector and symmetric-tensor bases on a polygonal cell.
//!
//! Polynomials are stored by their coefficients in the scaled monomials of a
//! [`MonomialSpace`]. Vector fields stack two scalar blocks and symmetric tensors stack
//! three blocks `(11, 12, 22)`. The orthonormal basis is hierarchical: the first
//! `poly_dim(m)` columns of [`CellSpace::onb`] span `P^m(T)`.

use nalgebra::{Cholesky, DMatrix, DVector};

use super::monomial::{poly_dim, MonomialSpace};
use super::quadrature::{polygon_rule, QuadRule};
use crate::mesh::Mesh;
use crate::tensor::{SymTensor, Vec2};
use crate::{Error, Result};

const MAX_GRAM_CONDITION: f64 = 1e14;

#[derive(Debug, Clone)]
pub struct CellSpace {
    pub mono: MonomialSpace,
    pub vertices: Vec<Vec2>,
    pub area: f64,
    pub quad: QuadRule,
    /// Monomial values at the quadrature points (`nq × N`).
    pub qvals: DMatrix<f64>,
    /// Monomial Gram matrix.
    pub mass: DMatrix<f64>,
    /// Monomial coefficients of the orthonormal basis (upper triangular, `N × N`).
    pub onb: DMatrix<f64>,
    /// Orthonormal basis values at the quadrature points.
    pub onb_qvals: DMatrix<f64>,
    pub d1: DMatrix<f64>,
    pub d2: DMatrix<f64>,
}

impl CellSpace {
    /// Builds the space of polynomials of degree `degree` on the polygon `vertices`,
    /// scaled about `center` by `h`. Quadrature is exact for products of two members.
    pub fn new(vertices: &[Vec2], center: Vec2, h: f64, degree: usize) -> Result<Self> {
        let quad = polygon_rule(vertices, center, 2 * degree + 2)?;
        let mono = MonomialSpace::with_axis(degree, center, h, principal_axis(&quad, center));
        let n = mono.dim();
        let mut qvals = DMatrix::zeros(quad.len(), n);
        for (q, p) in quad.points.iter().enumerate() {
            qvals.row_mut(q).copy_from(&mono.eval(p).transpose());
        }
        let mut weighted = qvals.clone();
        for (q, w) in quad.weights.iter().enumerate() {
            weighted.row_mut(q).scale_mut(*w);
        }
        let mass = qvals.transpose() * &weighted;
        let area: f64 = quad.weights.iter().sum();
        let onb = orthonormalize(&mass)?;
        let onb_qvals = &qvals * &onb;
        let d1 = mono.derivative(0);
        let d2 = mono.derivative(1);
        Ok(Self { mono, vertices: vertices.to_vec(), area, quad, qvals, mass, onb, onb_qvals, d1, d2 })
    }

    pub fn from_mesh(mesh: &Mesh, t: usize, degree: usize) -> Result<Self> {
        let cell = &mesh.cells[t];
        Self::new(&mesh.cell_points(t), cell.center, cell.diameter, degree).map_err(|e| match e {
            Error::Quadrature(msg) | Error::Singular(msg) => Error::DegenerateGeometry { cell: t, msg },
            other => other,
        })
    }

    pub fn degree(&self) -> usize {
        self.mono.degree
    }

    /// Number of monomials (scalar block size).
    pub fn n(&self) -> usize {
        self.mono.dim()
    }

    pub fn h(&self) -> f64 {
        self.mono.h
    }

    pub fn center(&self) -> Vec2 {
        self.mono.center
    }

    fn check_degree(&self, m: isize) {
        assert!(m <= self.degree() as isize, "degree {m} exceeds the cell space degree {}", self.degree());
    }

    /// Orthonormal basis of `P^m(T)` as monomial coefficient columns.
    pub fn scalar_basis(&self, m: isize) -> DMatrix<f64> {
        self.check_degree(m);
        self.onb.columns(0, poly_dim(m)).into_owned()
    }

    /// Orthonormal basis of `P^m(T;R²)`: first all `(φ, 0)`, then all `(0, φ)`.
    pub fn vector_basis(&self, m: isize) -> DMatrix<f64> {
        let b = self.scalar_basis(m);
        let (n, p) = b.shape();
        let mut out = DMatrix::zeros(2 * n, 2 * p);
        out.view_mut((0, 0), (n, p)).copy_from(&b);
        out.view_mut((n, p), (n, p)).copy_from(&b);
        out
    }

    /// Frobenius-orthonormal basis of `P^m(T;S)`: `(φ,0,0)`, `(0,φ/√2,0)`, `(0,0,φ)`.
    pub fn tensor_basis(&self, m: isize) -> DMatrix<f64> {
        let b = self.scalar_basis(m);
        let (n, p) = b.shape();
        let mut out = DMatrix::zeros(3 * n, 3 * p);
        out.view_mut((0, 0), (n, p)).copy_from(&b);
        out.view_mut((n, p), (n, p)).copy_from(&(&b * std::f64::consts::FRAC_1_SQRT_2));
        out.view_mut((2 * n, 2 * p), (n, p)).copy_from(&b);
        out
    }

    pub fn vector_mass(&self) -> DMatrix<f64> {
        block_diag(&[(&self.mass, 1.0), (&self.mass, 1.0)])
    }

    /// Gram matrix of the Frobenius product on tensor coefficients.
    pub fn tensor_mass(&self) -> DMatrix<f64> {
        block_diag(&[(&self.mass, 1.0), (&self.mass, 2.0), (&self.mass, 1.0)])
    }

    pub fn eval(&self, c: &DVector<f64>, x: &Vec2) -> f64 {
        self.mono.eval(x).dot(c)
    }

    pub fn eval_vector(&self, c: &DVector<f64>, x: &Vec2) -> Vec2 {
        let n = self.n();
        let m = self.mono.eval(x);
        Vec2::new(m.dot(&c.rows(0, n)), m.dot(&c.rows(n, n)))
    }

    pub fn eval_tensor(&self, c: &DVector<f64>, x: &Vec2) -> SymTensor {
        let n = self.n();
        let m = self.mono.eval(x);
        SymTensor::new(m.dot(&c.rows(0, n)), m.dot(&c.rows(n, n)), m.dot(&c.rows(2 * n, n)))
    }

    pub fn integrate(&self, f: impl Fn(&Vec2) -> f64) -> f64 {
        self.quad.integrate(f)
    }

    /// Orthonormal coefficients of the L² projection of `f` onto `P^m(T)`.
    pub fn project_scalar(&self, m: isize, f: impl Fn(&Vec2) -> f64) -> DVector<f64> {
        let vals: Vec<f64> = self.quad.points.iter().map(f).collect();
        self.project_samples(m, &vals)
    }

    /// Projection onto `P^m(T)` of values sampled at the quadrature points.
    pub fn project_samples(&self, m: isize, vals: &[f64]) -> DVector<f64> {
        self.check_degree(m);
        let p = poly_dim(m);
        let mut out = DVector::zeros(p);
        for (q, v) in vals.iter().enumerate() {
            let wf = self.quad.weights[q] * v;
            for j in 0..p {
                out[j] += wf * self.onb_qvals[(q, j)];
            }
        }
        out
    }

    /// Orthonormal coefficients (see [`Self::vector_basis`]) of the projection onto `P^m(T;R²)`.
    pub fn project_vector(&self, m: isize, f: impl Fn(&Vec2) -> Vec2) -> DVector<f64> {
        let vals: Vec<Vec2> = self.quad.points.iter().map(f).collect();
        let a = self.project_samples(m, &vals.iter().map(|v| v.x).collect::<Vec<_>>());
        let b = self.project_samples(m, &vals.iter().map(|v| v.y).collect::<Vec<_>>());
        stack(&[&a, &b])
    }

    /// Orthonormal coefficients (see [`Self::tensor_basis`]) of the projection onto `P^m(T;S)`.
    pub fn project_tensor(&self, m: isize, f: impl Fn(&Vec2) -> SymTensor) -> DVector<f64> {
        let vals: Vec<SymTensor> = self.quad.points.iter().map(f).collect();
        let a = self.project_samples(m, &vals.iter().map(|v| v.xx).collect::<Vec<_>>());
        let r2 = std::f64::consts::SQRT_2;
        let b = self.project_samples(m, &vals.iter().map(|v| r2 * v.xy).collect::<Vec<_>>());
        let c = self.project_samples(m, &vals.iter().map(|v| v.yy).collect::<Vec<_>>());
        stack(&[&a, &b, &c])
    }

    /// Monomial coefficients of a tensor field sampled as `f` and projected onto `P^m(T;S)`.
    pub fn interpolate_tensor(&self, m: isize, f: impl Fn(&Vec2) -> SymTensor) -> DVector<f64> {
        self.tensor_basis(m) * self.project_tensor(m, f)
    }

    pub fn interpolate_vector(&self, m: isize, f: impl Fn(&Vec2) -> Vec2) -> DVector<f64> {
        self.vector_basis(m) * self.project_vector(m, f)
    }

    pub fn interpolate_scalar(&self, m: isize, f: impl Fn(&Vec2) -> f64) -> DVector<f64> {
        self.scalar_basis(m) * self.project_scalar(m, f)
    }
}

/// Two passes of Cholesky orthonormalisation; returns `B` with `Bᵀ M B = I`.
/// Major axis of the second-moment tensor of the rule's region about `center`.
fn principal_axis(quad: &QuadRule, center: Vec2) -> Vec2 {
    let mut m = nalgebra::Matrix2::zeros();
    for (p, w) in quad.points.iter().zip(&quad.weights) {
        let d = p - center;
        m += d * d.transpose() * *w;
    }
    // Closed-form eigenvector of the symmetric 2×2 moment matrix.
    let angle = 0.5 * (2.0 * m[(0, 1)]).atan2(m[(0, 0)] - m[(1, 1)]);
    Vec2::new(angle.cos(), angle.sin())
}

pub fn orthonormalize(mass: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    // Cholesky is insensitive to diagonal scaling, so condition the Jacobi-scaled matrix.
    let d = mass.diagonal().map(|v| 1.0 / v.max(f64::MIN_POSITIVE).sqrt());
    let scaled = DMatrix::from_fn(mass.nrows(), mass.ncols(), |i, j| mass[(i, j)] * d[i] * d[j]);
    let eig = scaled.symmetric_eigenvalues();
    let (lo, hi) = (eig.min(), eig.max());
    if !(lo > 0.0) || hi / lo > MAX_GRAM_CONDITION {
        return Err(Error::Singular(format!(
            "scaled Gram matrix has condition number {:.3e}; the cell is too degenerate for this degree",
            hi / lo
        )));
    }
    let n = mass.nrows();
    let first = inverse_cholesky_factor(mass, n)?;
    let second = inverse_cholesky_factor(&(first.transpose() * mass * &first), n)?;
    Ok(first * second)
}

fn inverse_cholesky_factor(m: &DMatrix<f64>, n: usize) -> Result<DMatrix<f64>> {
    let sym = (m + m.transpose()) * 0.5;
    let chol = Cholesky::new(sym).ok_or_else(|| Error::Singular("Gram matrix is not positive definite".into()))?;
    let lt = chol.l().transpose();
    lt.solve_upper_triangular(&DMatrix::identity(n, n))
        .ok_or_else(|| Error::Singular("triangular Gram factor is singular".into()))
}

pub fn block_diag(blocks: &[(&DMatrix<f64>, f64)]) -> DMatrix<f64> {
    let rows: usize = blocks.iter().map(|b| b.0.nrows()).sum();
    let cols: usize = blocks.iter().map(|b| b.0.ncols()).sum();
    let mut out = DMatrix::zeros(rows, cols);
    let (mut r, mut c) = (0, 0);
    for (b, s) in blocks {
        out.view_mut((r, c), b.shape()).copy_from(&(*b * *s));
        r += b.nrows();
        c += b.ncols();
    }
    out
}

pub fn stack(parts: &[&DVector<f64>]) -> DVector<f64> {
    DVector::from_iterator(parts.iter().map(|p| p.len()).sum(), parts.iter().flat_map(|p| p.iter().copied()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn square() -> CellSpace {
        let pts = [Vec2::new(0.0, 0.0), Vec2::new(1.0, 0.0), Vec2::new(1.0, 1.0), Vec2::new(0.0, 1.0)];
        CellSpace::new(&pts, Vec2::new(0.5, 0.5), 2f64.sqrt(), 4).unwrap()
    }

    #[test]
    fn orthonormal_gram() {
        let s = square();
        let g = s.onb.transpose() * &s.mass * &s.onb;
        assert!((g - DMatrix::identity(s.n(), s.n())).amax() < 1e-10);
        let t = s.tensor_basis(3);
        let gt = t.transpose() * s.tensor_mass() * &t;
        assert!((gt - DMatrix::identity(t.ncols(), t.ncols())).amax() < 1e-10);
    }

    #[test]
    fn unit_square_constant_is_one() {
        let s = square();
        assert_eq!(s.scalar_basis(1).ncols(), 3);
        assert!((s.eval(&s.scalar_basis(0).column(0).into_owned(), &Vec2::new(0.2, 0.9)).abs() - 1.0).abs() < 1e-12);
        assert_eq!(s.scalar_basis(-1).ncols(), 0);
    }

    #[test]
    fn mean_of_x1() {
        let s = square();
        let c = s.interpolate_scalar(0, |x| x.x);
        assert!((s.eval(&c, &Vec2::new(0.1, 0.1)) - 0.5).abs() < 1e-14);
    }

    #[test]
    fn tensor_projection_is_identity_on_polynomials() {
        let s = square();
        let f = |x: &Vec2| SymTensor::new(x.x * x.y, x.y * x.y * x.y, 1.0 - x.x);
        let c = s.interpolate_tensor(3, f);
        let p = Vec2::new(0.3, 0.8);
        assert!((s.eval_tensor(&c, &p) - f(&p)).norm() < 1e-12);
    }
}
