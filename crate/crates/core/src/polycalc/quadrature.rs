//! Quadrature on polygons (fan of collapsed Gauss rules) and on edges (Gauss–Legendre).

use std::num::NonZeroUsize;

use gauss_quad::legendre::GaussLegendre;

use crate::tensor::{cross, Vec2};
use crate::{Error, Result};

#[derive(Debug, Clone)]
pub struct QuadRule {
    pub points: Vec<Vec2>,
    pub weights: Vec<f64>,
    /// Polynomial degree integrated exactly.
    pub degree: usize,
}

impl QuadRule {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn integrate(&self, f: impl Fn(&Vec2) -> f64) -> f64 {
        self.points.iter().zip(&self.weights).map(|(p, w)| w * f(p)).sum()
    }
}

/// Gauss–Legendre nodes and weights on `[−1, 1]`, ascending nodes.
pub fn gauss_legendre(n: usize) -> Vec<(f64, f64)> {
    let rule = GaussLegendre::new(NonZeroUsize::new(n.max(1)).unwrap());
    let mut pairs = rule.as_node_weight_pairs().to_vec();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    pairs
}

/// Number of Gauss–Legendre points integrating degree `d` exactly.
pub fn gauss_points_for_degree(d: usize) -> usize {
    d / 2 + 1
}

/// Collapsed (Duffy) Gauss rule on the triangle `(p0, p1, p2)`, exact to degree `d`.
pub fn triangle_rule(p0: Vec2, p1: Vec2, p2: Vec2, d: usize) -> Result<QuadRule> {
    let twice_area = cross(&(p1 - p0), &(p2 - p0));
    let scale = (p1 - p0).norm().max((p2 - p0).norm()).max((p2 - p1).norm());
    if !(twice_area > 1e-14 * scale * scale) {
        return Err(Error::Quadrature(format!(
            "triangle ({:?}, {:?}, {:?}) has non-positive area",
            p0.as_slice(),
            p1.as_slice(),
            p2.as_slice()
        )));
    }
    // The Jacobian u·2|T| raises the degree in the collapsed direction by one.
    let gu = gauss_legendre(gauss_points_for_degree(d + 1));
    let gv = gauss_legendre(gauss_points_for_degree(d));
    let mut points = Vec::with_capacity(gu.len() * gv.len());
    let mut weights = Vec::with_capacity(gu.len() * gv.len());
    for &(su, wu) in &gu {
        let u = 0.5 * (su + 1.0);
        for &(sv, wv) in &gv {
            let v = 0.5 * (sv + 1.0);
            points.push(p0 + ((p1 - p0) + (p2 - p1) * v) * u);
            weights.push(0.25 * wu * wv * u * twice_area);
        }
    }
    Ok(QuadRule { points, weights, degree: d })
}

/// Fan triangulation from the star point `center`, each triangle carrying a rule of
/// exactness `d`.
pub fn polygon_rule(vertices: &[Vec2], center: Vec2, d: usize) -> Result<QuadRule> {
    let n = vertices.len();
    let mut rule = QuadRule { points: Vec::new(), weights: Vec::new(), degree: d };
    for i in 0..n {
        let tri = triangle_rule(center, vertices[i], vertices[(i + 1) % n], d)?;
        rule.points.extend(tri.points);
        rule.weights.extend(tri.weights);
    }
    Ok(rule)
}

/// Gauss–Legendre rule on a segment, parametrised by `s ∈ [−1, 1]` with `s = −1` at `tail`.
#[derive(Debug, Clone)]
pub struct EdgeRule {
    pub params: Vec<f64>,
    pub points: Vec<Vec2>,
    /// Physical weights (sum to the edge length).
    pub weights: Vec<f64>,
    pub degree: usize,
}

impl EdgeRule {
    pub fn new(tail: Vec2, head: Vec2, d: usize) -> EdgeRule {
        let half = 0.5 * (head - tail).norm();
        let mid = (head + tail) * 0.5;
        let dir = (head - tail) * 0.5;
        let gl = gauss_legendre(gauss_points_for_degree(d));
        EdgeRule {
            params: gl.iter().map(|p| p.0).collect(),
            points: gl.iter().map(|p| mid + dir * p.0).collect(),
            weights: gl.iter().map(|p| p.1 * half).collect(),
            degree: d,
        }
    }

    pub fn integrate(&self, f: impl Fn(f64, &Vec2) -> f64) -> f64 {
        self.params.iter().zip(&self.points).zip(&self.weights).map(|((s, p), w)| w * f(*s, p)).sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit_square() -> Vec<Vec2> {
        vec![Vec2::new(0.0, 0.0), Vec2::new(1.0, 0.0), Vec2::new(1.0, 1.0), Vec2::new(0.0, 1.0)]
    }

    #[test]
    fn bilinear_over_square() {
        let q = polygon_rule(&unit_square(), Vec2::new(0.5, 0.5), 2).unwrap();
        assert!((q.integrate(|p| p.x * p.y) - 0.25).abs() < 1e-14);
        assert!(q.weights.iter().all(|&w| w > 0.0));
    }

    #[test]
    fn two_point_gauss_on_reference_edge() {
        let e = EdgeRule::new(Vec2::new(-1.0, 0.0), Vec2::new(1.0, 0.0), 3);
        assert_eq!(e.params.len(), 2);
        assert!((e.integrate(|s, _| s * s) - 2.0 / 3.0).abs() < 1e-15);
    }

    /// ∫_{simplex} x^a y^b = a! b! / (a + b + 2)!
    fn simplex_moment(a: u32, b: u32) -> f64 {
        let fact = |n: u32| (1..=n).map(f64::from).product::<f64>();
        fact(a) * fact(b) / fact(a + b + 2)
    }

    #[test]
    fn simplex_exactness_degree_14() {
        let d = 2 * 4 + 6;
        let q = triangle_rule(Vec2::new(0.0, 0.0), Vec2::new(1.0, 0.0), Vec2::new(0.0, 1.0), d).unwrap();
        for a in 0..=d as u32 {
            for b in 0..=(d as u32 - a) {
                let exact = simplex_moment(a, b);
                let num = q.integrate(|p| p.x.powi(a as i32) * p.y.powi(b as i32));
                assert!(((num - exact) / exact).abs() < 1e-13, "x^{a} y^{b}: {num} vs {exact}");
            }
        }
    }

    #[test]
    fn rejects_bad_fan() {
        // x_T outside the polygon produces a reversed fan triangle.
        let err = polygon_rule(&unit_square(), Vec2::new(2.0, 0.5), 2).unwrap_err();
        assert!(matches!(err, Error::Quadrature(_)));
    }
}
