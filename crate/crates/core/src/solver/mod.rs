//! The mixed Kirchhoff–Love scheme: find `(σ_h, u_h) ∈ Σ_h^ℓ × P^{ℓ−1}(T_h)` with
//! `a_h(σ_h,τ) + b_h(τ,u_h) = −Σ_{E ⊂ ∂Ω} ∫_E ∂_n u P_E τ` and `−b_h(σ_h,v) = ∫ f v`.

pub mod assembly;
pub mod dofmap;
pub mod errors;
pub mod exact;
pub mod material;
pub mod solve;

pub use assembly::{assemble_global, CellData, Discretization, GlobalSystem, LocalSystem, Manufactured, PlateData};
pub use dofmap::GlobalDofMap;
pub use errors::{coercivity_witness, compute_errors, inf_sup_witness, sigma_l_distance, CoercivityWitness, ErrorReport};
pub use exact::{ExactSolution, MomentField, SolutionKind, TrigSolution, ZeroSolution};
pub use material::Material;
pub use solve::{SolveMethod, SolveResult, SolveStats, SparseLu};
