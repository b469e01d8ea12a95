//! Small fixed-size algebra: points and symmetric 2×2 tensors.
//!
//! Symmetric tensors are stored by their three independent entries `(11, 12, 22)`.
//! The Frobenius product therefore counts the off-diagonal entry twice.

use std::ops::{Add, Mul, Neg, Sub};

pub type Vec2 = nalgebra::Vector2<f64>;

/// Rotation by +90°: `(a1, a2) ↦ (−a2, a1)`.
pub fn rot90(v: &Vec2) -> Vec2 {
    Vec2::new(-v.y, v.x)
}

pub fn cross(a: &Vec2, b: &Vec2) -> f64 {
    a.x * b.y - a.y * b.x
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct SymTensor {
    pub xx: f64,
    pub xy: f64,
    pub yy: f64,
}

impl SymTensor {
    pub const ZERO: SymTensor = SymTensor { xx: 0.0, xy: 0.0, yy: 0.0 };
    pub const IDENTITY: SymTensor = SymTensor { xx: 1.0, xy: 0.0, yy: 1.0 };

    pub fn new(xx: f64, xy: f64, yy: f64) -> Self {
        Self { xx, xy, yy }
    }

    pub fn from_array(a: [f64; 3]) -> Self {
        Self::new(a[0], a[1], a[2])
    }

    pub fn to_array(self) -> [f64; 3] {
        [self.xx, self.xy, self.yy]
    }

    pub fn trace(&self) -> f64 {
        self.xx + self.yy
    }

    /// `τ : υ`
    pub fn frobenius(&self, other: &SymTensor) -> f64 {
        self.xx * other.xx + 2.0 * self.xy * other.xy + self.yy * other.yy
    }

    pub fn norm(&self) -> f64 {
        self.frobenius(self).sqrt()
    }

    pub fn apply(&self, v: &Vec2) -> Vec2 {
        Vec2::new(self.xx * v.x + self.xy * v.y, self.xy * v.x + self.yy * v.y)
    }

    /// `τ a · b`
    pub fn bilinear(&self, a: &Vec2, b: &Vec2) -> f64 {
        self.apply(a).dot(b)
    }

    /// Coefficients `(c11, c12, c22)` such that `τ a · b = c · (τ11, τ12, τ22)`.
    pub fn bilinear_weights(a: &Vec2, b: &Vec2) -> [f64; 3] {
        [a.x * b.x, a.x * b.y + a.y * b.x, a.y * b.y]
    }

    /// The algebraic tensor `C` applied to a full 2×2 matrix given row-major as
    /// `[g11, g12, g21, g22]`.
    pub fn c_of_matrix(g: [f64; 4]) -> SymTensor {
        SymTensor::new(g[1], 0.5 * (g[3] - g[0]), -g[2])
    }
}

impl Add for SymTensor {
    type Output = SymTensor;
    fn add(self, o: SymTensor) -> SymTensor {
        SymTensor::new(self.xx + o.xx, self.xy + o.xy, self.yy + o.yy)
    }
}

impl Sub for SymTensor {
    type Output = SymTensor;
    fn sub(self, o: SymTensor) -> SymTensor {
        SymTensor::new(self.xx - o.xx, self.xy - o.xy, self.yy - o.yy)
    }
}

impl Neg for SymTensor {
    type Output = SymTensor;
    fn neg(self) -> SymTensor {
        SymTensor::new(-self.xx, -self.xy, -self.yy)
    }
}

impl Mul<SymTensor> for f64 {
    type Output = SymTensor;
    fn mul(self, t: SymTensor) -> SymTensor {
        SymTensor::new(self * t.xx, self * t.xy, self * t.yy)
    }
}

impl Mul<f64> for SymTensor {
    type Output = SymTensor;
    fn mul(self, s: f64) -> SymTensor {
        s * self
    }
}
