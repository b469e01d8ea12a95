//! Discrete de Rham plates complex on polygonal meshes.
//!
//! The crate is organised bottom-up:
//!
//! - [`mesh`]: polygonal meshes with global edge orientations, generators and the
//!   `polymesh 1` text format.
//! - [`polycalc`]: quadrature, scaled-monomial calculus, orthonormal bases and the
//!   Hessian/Koszul splitting of symmetric tensor polynomials.
//! - [`ddr`]: the local spaces `V_T^k` and `Σ_T^ℓ`, interpolators, discrete operators,
//!   potentials and the stabilisation.
//! - [`exactness`]: numerical certification of the local complex.
//! - [`solver`]: the mixed Kirchhoff–Love scheme with static condensation.
//! - [`study`]: convergence studies and CSV reporting.

pub mod ddr;
pub mod error;
pub mod exactness;
pub mod mesh;
pub mod polycalc;
pub mod solver;
pub mod study;
pub mod tensor;

pub use error::{Error, Result};
pub use tensor::{SymTensor, Vec2};
