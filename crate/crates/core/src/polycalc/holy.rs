//! Splitting of symmetric tensor polynomials into a Hessian part and a Koszul complement:
//! `P^m(T;S) = HESS P^{m+2}(T) ⊕ sym((x − x_T)^⊥ ⊗ P^{m−1}(T;R²))`.

use nalgebra::{DMatrix, DVector};

use super::basis::{orthonormalize, CellSpace};
use super::diffop::{DiffOp, FieldKind};
use super::monomial::poly_dim;
use crate::{Error, Result};

/// `dim HESS P^{m+2}`.
pub fn holy_dim(m: isize) -> usize {
    poly_dim(m + 2).saturating_sub(3)
}

/// `dim sym((x − x_T)^⊥ ⊗ P^{m−1}(R²))`.
pub fn choly_dim(m: isize) -> usize {
    2 * poly_dim(m - 1)
}

/// Frobenius-orthonormal basis of `sym(w ⊗ P^{m−1}(T;R²))`, `w = ((x − x_T)/h)^⊥`
/// with `(a, b)^⊥ = (b, −a)`.
pub fn choly_basis(space: &CellSpace, m: isize) -> Result<DMatrix<f64>> {
    let n = space.n();
    if m > space.degree() as isize {
        return Err(Error::InvalidParameter(format!("Koszul complement of degree {m} exceeds the cell space degree")));
    }
    let p = space.scalar_basis(m - 1);
    let np1 = p.ncols();
    if np1 == 0 {
        return Ok(DMatrix::zeros(3 * n, 0));
    }
    let (x1, x2) = (space.mono.multiply_x(0), space.mono.multiply_x(1));
    let (w1p, w2p) = (&x2 * &p, -(&x1 * &p));
    let mut span = DMatrix::zeros(3 * n, 2 * np1);
    span.view_mut((0, 0), (n, np1)).copy_from(&w1p);
    span.view_mut((n, 0), (n, np1)).copy_from(&(&w2p * 0.5));
    span.view_mut((n, np1), (n, np1)).copy_from(&(&w1p * 0.5));
    span.view_mut((2 * n, np1), (n, np1)).copy_from(&w2p);
    let b = orthonormalize(&(span.transpose() * space.tensor_mass() * &span))?;
    Ok(span * b)
}

#[derive(Debug, Clone)]
pub struct HolyCholySplit {
    pub degree: isize,
    /// Frobenius-orthonormal basis of the Hessian part (tensor monomial coefficients).
    pub holy: DMatrix<f64>,
    /// Scalar potentials whose Hessians are the columns of `holy`.
    pub holy_potentials: DMatrix<f64>,
    /// Frobenius-orthonormal basis of the complement.
    pub choly: DMatrix<f64>,
    /// Smallest singular value of `[holy, choly]` in orthonormal tensor coordinates.
    pub min_singular_value: f64,
}

impl HolyCholySplit {
    pub fn new(space: &CellSpace, m: isize) -> Result<Self> {
        let n = space.n();
        if m + 2 > space.degree() as isize && m >= 0 {
            return Err(Error::InvalidParameter(format!(
                "Hessian split of degree {m} needs a cell space of degree {}",
                m + 2
            )));
        }
        let mt = space.tensor_mass();

        // Hessian part: potentials are the scaled monomials of degree 2..=m+2.
        let first = poly_dim(1);
        let np = poly_dim(m + 2).max(first) - first;
        let mut pot = DMatrix::zeros(n, np);
        for j in 0..np {
            pot[(first + j, j)] = 1.0;
        }
        let (hess, _) = DiffOp::Hess.matrix(FieldKind::Scalar, &space.d1, &space.d2)?;
        let (holy, holy_potentials) = if np == 0 {
            (DMatrix::zeros(3 * n, 0), DMatrix::zeros(n, 0))
        } else {
            let span = &hess * &pot;
            let b = orthonormalize(&(span.transpose() * &mt * &span))?;
            (span * &b, pot * b)
        };

        let choly = choly_basis(space, m)?;

        let dim = holy.ncols() + choly.ncols();
        let min_singular_value = if dim == 0 {
            1.0
        } else {
            let mut all = DMatrix::zeros(3 * n, dim);
            all.columns_mut(0, holy.ncols()).copy_from(&holy);
            all.columns_mut(holy.ncols(), choly.ncols()).copy_from(&choly);
            let coords = space.tensor_basis(m).transpose() * &mt * all;
            coords.singular_values().min()
        };
        if min_singular_value < 1e-8 {
            return Err(Error::Singular(format!(
                "Hessian and Koszul parts of degree {m} are not complementary (σ_min = {min_singular_value:.3e})"
            )));
        }
        Ok(Self { degree: m, holy, holy_potentials, choly, min_singular_value })
    }

    pub fn dim_holy(&self) -> usize {
        self.holy.ncols()
    }

    pub fn dim_choly(&self) -> usize {
        self.choly.ncols()
    }

    /// Matrix of `π_H` from tensor monomial coefficients to orthonormal Hessian coordinates.
    pub fn holy_projector(&self, space: &CellSpace) -> DMatrix<f64> {
        self.holy.transpose() * space.tensor_mass()
    }

    pub fn choly_projector(&self, space: &CellSpace) -> DMatrix<f64> {
        self.choly.transpose() * space.tensor_mass()
    }

    pub fn project_holy(&self, space: &CellSpace, tau: &DVector<f64>) -> DVector<f64> {
        self.holy_projector(space) * tau
    }

    pub fn project_choly(&self, space: &CellSpace, tau: &DVector<f64>) -> DVector<f64> {
        self.choly_projector(space) * tau
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tensor::Vec2;
    use crate::SymTensor;

    fn pentagon(degree: usize) -> CellSpace {
        let pts: Vec<Vec2> = (0..5)
            .map(|i| {
                let a = 2.0 * std::f64::consts::PI * i as f64 / 5.0 + 0.3;
                Vec2::new(a.cos(), a.sin())
            })
            .collect();
        let h = crate::mesh::diameter(&pts);
        CellSpace::new(&pts, crate::mesh::centroid(&pts), h, degree).unwrap()
    }

    #[test]
    fn dimensions() {
        let s = pentagon(8);
        for m in -1..=6isize {
            let split = HolyCholySplit::new(&s, m).unwrap();
            assert_eq!(split.dim_holy(), holy_dim(m));
            assert_eq!(split.dim_choly(), choly_dim(m));
            assert_eq!(holy_dim(m) + choly_dim(m), 3 * poly_dim(m));
            let expected_holy = if m >= 0 { ((m + 4) * (m + 3) / 2 - 3) as usize } else { 0 };
            assert_eq!(holy_dim(m), expected_holy);
            assert_eq!(choly_dim(m), ((m * (m + 1)).max(0)) as usize);
        }
        assert_eq!((holy_dim(2), choly_dim(2)), (12, 6));
    }

    #[test]
    fn hessian_reproduced() {
        let s = pentagon(4);
        let split = HolyCholySplit::new(&s, 1).unwrap();
        let tau = s.interpolate_tensor(1, |x| SymTensor::new(2.0 * x.y, 2.0 * x.x, 0.0));
        let back = &split.holy * split.project_holy(&s, &tau);
        assert!((back - tau).amax() < 1e-11);
    }

    #[test]
    fn projectors_are_idempotent() {
        let s = pentagon(5);
        let split = HolyCholySplit::new(&s, 3).unwrap();
        let mt = s.tensor_mass();
        for basis in [&split.holy, &split.choly] {
            let p = basis * basis.transpose() * &mt;
            assert!((&p * &p - &p).amax() < 1e-11);
            let sym = mt.clone() * &p;
            assert!((&sym - sym.transpose()).amax() < 1e-11);
        }
    }
}
