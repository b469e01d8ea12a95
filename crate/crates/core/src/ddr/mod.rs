//! Local discrete spaces `V_T^k` and `Σ_T^ℓ` and their operators.

pub mod fields;
pub mod layout;
pub mod local;
pub mod sigma;
pub mod vspace;

pub use fields::{FnTensor, FnVector, PolyTensor, PolyVector, TensorField, VectorField};
pub use layout::{SigmaDofVec, SigmaLayout, VDofVec, VLayout};
pub use local::{LocalCell, LocalEdge};
pub use sigma::SigmaOps;
pub use vspace::VOps;
