use nalgebra::{DMatrix, Matrix3};

use crate::tensor::SymTensor;
use crate::{Error, Result};

/// Isotropic plate material `Aτ = D[(1−ν)τ + ν tr(τ) I]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Material {
    pub d: f64,
    pub nu: f64,
}

impl Material {
    /// `D > 0`, `0 ≤ ν < 1`. `(D, ν) = (1, 0)` gives `A = I`.
    pub fn new(d: f64, nu: f64) -> Result<Self> {
        if !(d.is_finite() && d > 0.0) {
            return Err(Error::InvalidParameter(format!("bending modulus D = {d} must be positive")));
        }
        if !(0.0..1.0).contains(&nu) {
            return Err(Error::InvalidParameter(format!("Poisson ratio ν = {nu} must lie in [0, 1)")));
        }
        Ok(Self { d, nu })
    }

    pub fn identity() -> Self {
        Self { d: 1.0, nu: 0.0 }
    }

    pub fn apply(&self, t: &SymTensor) -> SymTensor {
        let tr = t.trace();
        SymTensor::new(
            self.d * ((1.0 - self.nu) * t.xx + self.nu * tr),
            self.d * (1.0 - self.nu) * t.xy,
            self.d * ((1.0 - self.nu) * t.yy + self.nu * tr),
        )
    }

    /// `A⁻¹τ = (τ − ν/(1+ν) tr(τ) I) / (D(1−ν))`.
    pub fn apply_inverse(&self, t: &SymTensor) -> SymTensor {
        let c = 1.0 / (self.d * (1.0 - self.nu));
        let b = self.nu / (1.0 + self.nu) * t.trace();
        SymTensor::new(c * (t.xx - b), c * t.xy, c * (t.yy - b))
    }

    /// `A` acting on `(τ11, τ12, τ22)`.
    pub fn matrix(&self) -> Matrix3<f64> {
        let (d, nu) = (self.d, self.nu);
        Matrix3::new(d, 0.0, d * nu, 0.0, d * (1.0 - nu), 0.0, d * nu, 0.0, d)
    }

    pub fn inverse_matrix(&self) -> Matrix3<f64> {
        let c = 1.0 / (self.d * (1.0 - self.nu));
        let b = self.nu / (1.0 + self.nu);
        Matrix3::new(1.0 - b, 0.0, -b, 0.0, 1.0, 0.0, -b, 0.0, 1.0 - b) * c
    }

    /// Inf-sup constant `γ = [D²(1 + 1/(D²(1−ν)²))² + 1]^{−1/2}`.
    pub fn gamma(&self) -> f64 {
        let d2 = self.d * self.d;
        let inner = 1.0 + 1.0 / (d2 * (1.0 - self.nu).powi(2));
        (d2 * inner * inner + 1.0).powf(-0.5)
    }

    /// Scaling `1/(D(1+ν))` of the stabilisation, also the coercivity constant of `A⁻¹`.
    pub fn stabilization_scale(&self) -> f64 {
        1.0 / (self.d * (1.0 + self.nu))
    }

    /// Gram matrix of `(P, Q) ↦ ∫ A⁻¹P : Q` on tensor monomial coefficients, given the
    /// scalar monomial mass matrix.
    pub fn inverse_gram(&self, mass: &DMatrix<f64>) -> DMatrix<f64> {
        let n = mass.nrows();
        let c = 1.0 / (self.d * (1.0 - self.nu));
        let b = self.nu / (1.0 + self.nu);
        let mut g = DMatrix::zeros(3 * n, 3 * n);
        let blocks = [(0, 0, 1.0 - b), (0, 2, -b), (2, 0, -b), (2, 2, 1.0 - b), (1, 1, 2.0)];
        for (i, j, w) in blocks {
            g.view_mut((i * n, j * n), (n, n)).copy_from(&(mass * (c * w)));
        }
        g
    }
}
