//! Scaled monomials `ξ^α` with `ξ = Rᵀ(x − x_T)/h_T`, ordered by total degree and then
//! by the exponent of `ξ2`. The rotation `R` aligns `ξ1` with the principal axis of the
//! cell, which keeps the Gram matrix well conditioned on elongated cells of any
//! orientation.

use nalgebra::{DMatrix, DVector, Matrix2};

use crate::tensor::Vec2;

/// Dimension of `P^m` in two variables; zero for `m < 0`.
pub fn poly_dim(m: isize) -> usize {
    if m < 0 {
        0
    } else {
        let m = m as usize;
        (m + 1) * (m + 2) / 2
    }
}

/// Position of `ξ1^a1 ξ2^a2` in the ordering.
pub fn monomial_index(a1: usize, a2: usize) -> usize {
    let d = a1 + a2;
    d * (d + 1) / 2 + a2
}

/// Exponents of all monomials up to degree `d`, in index order.
pub fn exponents(d: usize) -> Vec<(usize, usize)> {
    let mut out = Vec::with_capacity(poly_dim(d as isize));
    for deg in 0..=d {
        for a2 in 0..=deg {
            out.push((deg - a2, a2));
        }
    }
    out
}

/// Scaled monomials of a fixed maximal degree attached to a centre and a length scale.
#[derive(Debug, Clone)]
pub struct MonomialSpace {
    pub degree: usize,
    pub center: Vec2,
    pub h: f64,
    /// Columns are the local axes in physical coordinates.
    pub frame: Matrix2<f64>,
    pub exps: Vec<(usize, usize)>,
}

impl MonomialSpace {
    pub fn new(degree: usize, center: Vec2, h: f64) -> Self {
        Self::with_axis(degree, center, h, Vec2::new(1.0, 0.0))
    }

    /// Local frame `(a, rot90(a))` for the unit vector along `axis`.
    pub fn with_axis(degree: usize, center: Vec2, h: f64, axis: Vec2) -> Self {
        let a = axis.normalize();
        let frame = Matrix2::new(a.x, -a.y, a.y, a.x);
        Self { degree, center, h, frame, exps: exponents(degree) }
    }

    pub fn dim(&self) -> usize {
        self.exps.len()
    }

    pub fn xi(&self, x: &Vec2) -> Vec2 {
        self.frame.transpose() * (x - self.center) / self.h
    }

    fn powers(&self, t: f64) -> Vec<f64> {
        let mut p = vec![1.0; self.degree + 1];
        for i in 1..=self.degree {
            p[i] = p[i - 1] * t;
        }
        p
    }

    /// Values of every monomial at `x`.
    pub fn eval(&self, x: &Vec2) -> DVector<f64> {
        let xi = self.xi(x);
        let (p1, p2) = (self.powers(xi.x), self.powers(xi.y));
        DVector::from_iterator(self.dim(), self.exps.iter().map(|&(a, b)| p1[a] * p2[b]))
    }

    /// Physical first derivatives `(∂1, ∂2)` of every monomial at `x`.
    pub fn eval_grad(&self, x: &Vec2) -> (DVector<f64>, DVector<f64>) {
        let xi = self.xi(x);
        let (p1, p2) = (self.powers(xi.x), self.powers(xi.y));
        let n = self.dim();
        let mut g1 = DVector::zeros(n);
        let mut g2 = DVector::zeros(n);
        let r = &self.frame;
        for (i, &(a, b)) in self.exps.iter().enumerate() {
            let da = if a > 0 { a as f64 * p1[a - 1] * p2[b] } else { 0.0 };
            let db = if b > 0 { b as f64 * p1[a] * p2[b - 1] } else { 0.0 };
            g1[i] = (r[(0, 0)] * da + r[(0, 1)] * db) / self.h;
            g2[i] = (r[(1, 0)] * da + r[(1, 1)] * db) / self.h;
        }
        (g1, g2)
    }

    /// Matrix of `∂/∂ξ_dir` acting on coefficients.
    fn local_derivative(&self, dir: usize) -> DMatrix<f64> {
        let n = self.dim();
        let mut m = DMatrix::zeros(n, n);
        for (j, &(a, b)) in self.exps.iter().enumerate() {
            match dir {
                0 if a > 0 => m[(monomial_index(a - 1, b), j)] = a as f64,
                1 if b > 0 => m[(monomial_index(a, b - 1), j)] = b as f64,
                _ => {}
            }
        }
        m
    }

    /// Matrix of the physical derivative `∂_dir` (`dir` = 0 or 1) acting on coefficients.
    pub fn derivative(&self, dir: usize) -> DMatrix<f64> {
        let r = &self.frame;
        (self.local_derivative(0) * r[(dir, 0)] + self.local_derivative(1) * r[(dir, 1)]) / self.h
    }

    /// Multiplication by `ξ_dir`. Monomials of top degree are sent to zero, so callers
    /// must only apply it to coefficient vectors of degree below `self.degree`.
    pub fn multiply_xi(&self, dir: usize) -> DMatrix<f64> {
        let n = self.dim();
        let mut m = DMatrix::zeros(n, n);
        for (j, &(a, b)) in self.exps.iter().enumerate() {
            if a + b < self.degree {
                let i = if dir == 0 { monomial_index(a + 1, b) } else { monomial_index(a, b + 1) };
                m[(i, j)] = 1.0;
            }
        }
        m
    }

    /// Multiplication by the physical scaled coordinate `((x − x_T)/h)_dir`, with the
    /// same truncation as [`Self::multiply_xi`].
    pub fn multiply_x(&self, dir: usize) -> DMatrix<f64> {
        let r = &self.frame;
        self.multiply_xi(0) * r[(dir, 0)] + self.multiply_xi(1) * r[(dir, 1)]
    }

    /// Largest degree carrying a non-negligible coefficient, or `None` for the zero polynomial.
    pub fn effective_degree(&self, c: &DVector<f64>, tol: f64) -> Option<usize> {
        let scale = c.amax().max(f64::MIN_POSITIVE);
        self.exps
            .iter()
            .zip(c.iter())
            .filter(|(_, v)| v.abs() > tol * scale)
            .map(|(&(a, b), _)| a + b)
            .max()
    }
}
