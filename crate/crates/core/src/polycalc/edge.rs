//! Orthonormal Legendre bases on edges.
//!
//! An edge is parametrised by `s ∈ [−1, 1]` with `s = −1` at its tail. The basis
//! `ψ_j = sqrt((2j+1)/h_E) P_j(s)` is L²(E)-orthonormal and hierarchical.

use nalgebra::{DMatrix, DVector};

use super::quadrature::EdgeRule;
use crate::tensor::Vec2;

/// Legendre polynomials `P_0..=P_n` and their `s`-derivatives at `s`.
pub fn legendre(n: usize, s: f64) -> (Vec<f64>, Vec<f64>) {
    let mut p = vec![0.0; n + 1];
    let mut dp = vec![0.0; n + 1];
    p[0] = 1.0;
    if n >= 1 {
        p[1] = s;
        dp[1] = 1.0;
    }
    for j in 1..n {
        let jf = j as f64;
        p[j + 1] = ((2.0 * jf + 1.0) * s * p[j] - jf * p[j - 1]) / (jf + 1.0);
        dp[j + 1] = dp[j - 1] + (2.0 * jf + 1.0) * p[j];
    }
    (p, dp)
}

#[derive(Debug, Clone)]
pub struct EdgeSpace {
    pub tail: Vec2,
    pub head: Vec2,
    pub length: f64,
    pub tangent: Vec2,
    pub degree: usize,
    /// Rule exact for products of two members of `P^degree(E)`.
    pub rule: EdgeRule,
}

impl EdgeSpace {
    pub fn new(tail: Vec2, head: Vec2, degree: usize) -> Self {
        let length = (head - tail).norm();
        Self { tail, head, length, tangent: (head - tail) / length, degree, rule: EdgeRule::new(tail, head, 2 * degree + 2) }
    }

    pub fn point(&self, s: f64) -> Vec2 {
        self.tail + (self.head - self.tail) * (0.5 * (s + 1.0))
    }

    /// Values of `ψ_0..ψ_m` at `s` (empty for `m < 0`).
    pub fn values(&self, m: isize, s: f64) -> DVector<f64> {
        if m < 0 {
            return DVector::zeros(0);
        }
        let (p, _) = legendre(m as usize, s);
        DVector::from_fn(m as usize + 1, |j, _| ((2 * j + 1) as f64 / self.length).sqrt() * p[j])
    }

    /// Tangential derivatives `∂_t ψ_j = (2/h_E) dψ_j/ds`.
    pub fn derivatives(&self, m: isize, s: f64) -> DVector<f64> {
        if m < 0 {
            return DVector::zeros(0);
        }
        let (_, dp) = legendre(m as usize, s);
        DVector::from_fn(m as usize + 1, |j, _| ((2 * j + 1) as f64 / self.length).sqrt() * dp[j] * 2.0 / self.length)
    }

    /// Second tangential derivatives.
    pub fn second_derivatives(&self, m: isize, s: f64) -> DVector<f64> {
        let d = self.derivative_matrix(m);
        d.transpose() * d.transpose() * self.values(m, s)
    }

    pub fn eval(&self, c: &DVector<f64>, s: f64) -> f64 {
        self.values(c.len() as isize - 1, s).dot(c)
    }

    /// Coefficients of the L² projection onto `P^m(E)` of `f(s, x)`.
    pub fn project(&self, m: isize, f: impl Fn(f64, &Vec2) -> f64) -> DVector<f64> {
        assert!(m <= self.degree as isize);
        let mut out = DVector::zeros((m + 1).max(0) as usize);
        for ((s, x), w) in self.rule.params.iter().zip(&self.rule.points).zip(&self.rule.weights) {
            out.axpy(w * f(*s, x), &self.values(m, *s), 1.0);
        }
        out
    }

    /// Matrix of `∂_t` on coefficients of `P^m(E)` (column `j` holds the coefficients of `∂_t ψ_j`).
    pub fn derivative_matrix(&self, m: isize) -> DMatrix<f64> {
        let n = (m + 1).max(0) as usize;
        let mut d = DMatrix::zeros(n, n);
        for (s, w) in self.rule.params.iter().zip(&self.rule.weights) {
            d += self.values(m, *s) * self.derivatives(m, *s).transpose() * *w;
        }
        d
    }
}
