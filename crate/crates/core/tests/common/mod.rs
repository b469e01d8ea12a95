//! Independent polynomial oracle for the integration tests: polynomials in raw
//! coordinates with exact symbolic differentiation.

#![allow(dead_code)]

use std::collections::BTreeMap;

use ddr_plates::ddr::{TensorField, VectorField};
use ddr_plates::mesh::{regular_polygon, Mesh};
use ddr_plates::{SymTensor, Vec2};
use rand::Rng;

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Poly(pub BTreeMap<(i32, i32), f64>);

impl Poly {
    pub fn monomial(c: f64, a: i32, b: i32) -> Poly {
        let mut m = BTreeMap::new();
        m.insert((a, b), c);
        Poly(m)
    }

    pub fn constant(c: f64) -> Poly {
        Poly::monomial(c, 0, 0)
    }

    pub fn zero() -> Poly {
        Poly::default()
    }

    /// Random coefficients uniform in [−1, 1] for every monomial of degree ≤ `deg`.
    pub fn random(deg: i32, rng: &mut impl Rng) -> Poly {
        let mut m = BTreeMap::new();
        for d in 0..=deg {
            for b in 0..=d {
                m.insert((d - b, b), rng.gen_range(-1.0..1.0));
            }
        }
        Poly(m)
    }

    pub fn eval(&self, x: &Vec2) -> f64 {
        self.0.iter().map(|(&(a, b), c)| c * x.x.powi(a) * x.y.powi(b)).sum()
    }

    pub fn d(&self, dir: usize) -> Poly {
        let mut m = BTreeMap::new();
        for (&(a, b), &c) in &self.0 {
            let (p, q, f) = if dir == 0 { (a - 1, b, a) } else { (a, b - 1, b) };
            if f > 0 {
                *m.entry((p, q)).or_insert(0.0) += c * f as f64;
            }
        }
        Poly(m)
    }

    pub fn scale(&self, s: f64) -> Poly {
        Poly(self.0.iter().map(|(&k, &c)| (k, c * s)).collect())
    }

    pub fn add(&self, o: &Poly) -> Poly {
        let mut m = self.0.clone();
        for (&k, &c) in &o.0 {
            *m.entry(k).or_insert(0.0) += c;
        }
        Poly(m)
    }

    pub fn sub(&self, o: &Poly) -> Poly {
        self.add(&o.scale(-1.0))
    }
}

#[derive(Debug, Clone)]
pub struct PolyVec(pub [Poly; 2]);

impl PolyVec {
    pub fn random(deg: i32, rng: &mut impl Rng) -> PolyVec {
        PolyVec([Poly::random(deg, rng), Poly::random(deg, rng)])
    }

    /// `(∂2v1, (∂2v2 − ∂1v1)/2, −∂1v2)`
    pub fn sym_curl(&self) -> PolyTens {
        let [v1, v2] = &self.0;
        PolyTens([v1.d(1), v2.d(1).sub(&v1.d(0)).scale(0.5), v2.d(0).scale(-1.0)])
    }
}

impl VectorField for PolyVec {
    fn value(&self, x: &Vec2) -> Vec2 {
        Vec2::new(self.0[0].eval(x), self.0[1].eval(x))
    }

    fn gradient(&self, x: &Vec2) -> [f64; 4] {
        [self.0[0].d(0).eval(x), self.0[0].d(1).eval(x), self.0[1].d(0).eval(x), self.0[1].d(1).eval(x)]
    }
}

/// Symmetric tensor polynomial `(τ11, τ12, τ22)`.
#[derive(Debug, Clone)]
pub struct PolyTens(pub [Poly; 3]);

impl PolyTens {
    pub fn random(deg: i32, rng: &mut impl Rng) -> PolyTens {
        PolyTens([Poly::random(deg, rng), Poly::random(deg, rng), Poly::random(deg, rng)])
    }

    pub fn div_vdiv(&self) -> Poly {
        let [a, b, c] = &self.0;
        a.d(0).d(0).add(&b.d(0).d(1).scale(2.0)).add(&c.d(1).d(1))
    }
}

impl TensorField for PolyTens {
    fn value(&self, x: &Vec2) -> SymTensor {
        SymTensor::new(self.0[0].eval(x), self.0[1].eval(x), self.0[2].eval(x))
    }

    fn derivatives(&self, x: &Vec2) -> (SymTensor, SymTensor) {
        let d = |dir: usize| SymTensor::new(self.0[0].d(dir).eval(x), self.0[1].d(dir).eval(x), self.0[2].d(dir).eval(x));
        (d(0), d(1))
    }
}

/// Test polygons: triangle, square, pentagon, hexagon, two non-convex cells and a
/// high-aspect quadrilateral.
pub fn cell_suite() -> Vec<(&'static str, Vec<Vec2>)> {
    let p = |v: &[(f64, f64)]| v.iter().map(|&(x, y)| Vec2::new(x, y)).collect::<Vec<_>>();
    vec![
        ("triangle", p(&[(0.0, 0.0), (1.0, 0.0), (0.0, 1.0)])),
        ("square", p(&[(0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (0.0, 1.0)])),
        ("pentagon", regular_polygon(5, Vec2::new(0.3, 0.2), 0.8)),
        ("hexagon", regular_polygon(6, Vec2::new(0.0, 0.0), 1.0)),
        ("dart", p(&[(0.0, 0.0), (2.0, 1.0), (0.0, 2.0), (0.8, 1.0)])),
        ("lshape", p(&[(0.0, 0.0), (2.0, 0.0), (2.0, 1.0), (1.0, 1.0), (1.0, 2.0), (0.0, 2.0)])),
        ("sliver-quad", p(&[(0.0, 0.0), (4.0, 0.0), (4.1, 0.5), (0.2, 0.4)])),
    ]
}

pub fn single(pts: &[Vec2]) -> Mesh {
    Mesh::single_cell(pts).expect("valid test polygon")
}

/// Points spread over a polygon: quadrature-like samples on the fan from its first vertex.
pub fn sample_points(pts: &[Vec2]) -> Vec<Vec2> {
    let c = pts.iter().fold(Vec2::zeros(), |a, p| a + p) / pts.len() as f64;
    let mut out = vec![c];
    for p in pts {
        for s in [0.2, 0.5, 0.9] {
            out.push(c + (p - c) * s);
        }
    }
    out
}

pub fn rel(err: f64, scale: f64) -> f64 {
    err / scale.max(1e-300)
}
