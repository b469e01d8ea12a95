use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use super::Material;
use crate::ddr::TensorField;
use crate::tensor::{SymTensor, Vec2};
use crate::Error;

/// Closed-form deflection with the derivatives needed by the interpolators, the load
/// and the boundary datum. The moment is `σ = −A HESS u` and the load `f = D Δ²u`.
pub trait ExactSolution: Sync {
    fn u(&self, x: &Vec2) -> f64;
    fn grad_u(&self, x: &Vec2) -> Vec2;
    fn hess_u(&self, x: &Vec2) -> SymTensor;
    /// `(∂1 HESS u, ∂2 HESS u)`.
    fn hess_u_derivatives(&self, x: &Vec2) -> (SymTensor, SymTensor);
    fn bilaplacian_u(&self, x: &Vec2) -> f64;
}

/// `u = sin(πx₁) sin(πx₂)` on the unit square.
#[derive(Debug, Clone, Copy, Default)]
pub struct TrigSolution;

impl ExactSolution for TrigSolution {
    fn u(&self, x: &Vec2) -> f64 {
        (PI * x.x).sin() * (PI * x.y).sin()
    }

    fn grad_u(&self, x: &Vec2) -> Vec2 {
        let (s1, c1, s2, c2) = ((PI * x.x).sin(), (PI * x.x).cos(), (PI * x.y).sin(), (PI * x.y).cos());
        Vec2::new(PI * c1 * s2, PI * s1 * c2)
    }

    fn hess_u(&self, x: &Vec2) -> SymTensor {
        let (s1, c1, s2, c2) = ((PI * x.x).sin(), (PI * x.x).cos(), (PI * x.y).sin(), (PI * x.y).cos());
        SymTensor::new(-s1 * s2, c1 * c2, -s1 * s2) * (PI * PI)
    }

    fn hess_u_derivatives(&self, x: &Vec2) -> (SymTensor, SymTensor) {
        let (s1, c1, s2, c2) = ((PI * x.x).sin(), (PI * x.x).cos(), (PI * x.y).sin(), (PI * x.y).cos());
        let p3 = PI * PI * PI;
        (SymTensor::new(-c1 * s2, -s1 * c2, -c1 * s2) * p3, SymTensor::new(-s1 * c2, -c1 * s2, -s1 * c2) * p3)
    }

    fn bilaplacian_u(&self, x: &Vec2) -> f64 {
        4.0 * PI.powi(4) * self.u(x)
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct ZeroSolution;

impl ExactSolution for ZeroSolution {
    fn u(&self, _: &Vec2) -> f64 {
        0.0
    }
    fn grad_u(&self, _: &Vec2) -> Vec2 {
        Vec2::zeros()
    }
    fn hess_u(&self, _: &Vec2) -> SymTensor {
        SymTensor::ZERO
    }
    fn hess_u_derivatives(&self, _: &Vec2) -> (SymTensor, SymTensor) {
        (SymTensor::ZERO, SymTensor::ZERO)
    }
    fn bilaplacian_u(&self, _: &Vec2) -> f64 {
        0.0
    }
}

/// Built-in solutions selectable by name.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolutionKind {
    Trig,
    Zero,
}

impl SolutionKind {
    pub fn solution(self) -> &'static dyn ExactSolution {
        match self {
            SolutionKind::Trig => &TrigSolution,
            SolutionKind::Zero => &ZeroSolution,
        }
    }
}

impl FromStr for SolutionKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self, Error> {
        match s {
            "trig" => Ok(SolutionKind::Trig),
            "zero" => Ok(SolutionKind::Zero),
            _ => Err(Error::InvalidParameter(format!("unknown solution '{s}' (expected trig or zero)"))),
        }
    }
}

impl fmt::Display for SolutionKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SolutionKind::Trig => "trig",
            SolutionKind::Zero => "zero",
        })
    }
}

/// The moment `σ = −A HESS u` as a tensor field.
pub struct MomentField<'a> {
    pub solution: &'a dyn ExactSolution,
    pub material: Material,
}

impl TensorField for MomentField<'_> {
    fn value(&self, x: &Vec2) -> SymTensor {
        -self.material.apply(&self.solution.hess_u(x))
    }

    fn derivatives(&self, x: &Vec2) -> (SymTensor, SymTensor) {
        let (a, b) = self.solution.hess_u_derivatives(x);
        (-self.material.apply(&a), -self.material.apply(&b))
    }
}

/// Load `f = −DIV VDIV σ = D Δ²u`.
pub fn load(solution: &dyn ExactSolution, material: &Material, x: &Vec2) -> f64 {
    material.d * solution.bilaplacian_u(x)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn manufactured_values_at_centre() {
        let x = Vec2::new(0.5, 0.5);
        let sigma = MomentField { solution: &TrigSolution, material: Material::identity() }.value(&x);
        let pi2 = PI * PI;
        assert!((sigma - SymTensor::new(pi2, 0.0, pi2)).norm() < 1e-12);
        assert!((load(&TrigSolution, &Material::identity(), &x) - 4.0 * PI.powi(4)).abs() < 1e-10);
    }

    #[test]
    fn moment_at_origin() {
        let sigma = MomentField { solution: &TrigSolution, material: Material::identity() }.value(&Vec2::zeros());
        assert!((sigma - SymTensor::new(0.0, -PI * PI, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn derivatives_match_finite_differences() {
        let s = TrigSolution;
        let m = Material::new(2.0, 0.3).unwrap();
        let f = MomentField { solution: &s, material: m };
        let x = Vec2::new(0.3, 0.7);
        let e = 1e-6;
        let (d1, d2) = f.derivatives(&x);
        let fd1 = (f.value(&(x + Vec2::new(e, 0.0))) - f.value(&(x - Vec2::new(e, 0.0)))) * (0.5 / e);
        let fd2 = (f.value(&(x + Vec2::new(0.0, e))) - f.value(&(x - Vec2::new(0.0, e)))) * (0.5 / e);
        assert!((d1 - fd1).norm() < 1e-6 && (d2 - fd2).norm() < 1e-6);
        let g = s.grad_u(&x);
        let fdg = (s.u(&(x + Vec2::new(e, 0.0))) - s.u(&(x - Vec2::new(e, 0.0)))) / (2.0 * e);
        assert!((g.x - fdg).abs() < 1e-8);
    }

    #[test]
    fn parse_kind() {
        assert_eq!("trig".parse::<SolutionKind>().unwrap(), SolutionKind::Trig);
        assert!("cos".parse::<SolutionKind>().is_err());
    }
}
