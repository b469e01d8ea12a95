use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::{Discretization, ExactSolution, GlobalSystem, MomentField, SolveResult, SparseLu};
use crate::Result;

/// `‖(I_Σσ − σ_h, π^{ℓ−1}u − u_h)‖_{Σ×L,h}` and its two parts.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErrorReport {
    /// `‖I_Σσ − σ_h‖_{Σ,h}`.
    pub err_sigma: f64,
    /// `‖π^{ℓ−1}u − u_h‖_{L²}`.
    pub err_u: f64,
    pub err_total: f64,
    pub gamma: f64,
}

pub fn compute_errors(system: &GlobalSystem, result: &SolveResult, solution: &dyn ExactSolution) -> ErrorReport {
    let disc = system.disc;
    let sigma = disc.interpolate(&MomentField { solution, material: system.material });
    let u = disc.project_scalar(&|x| solution.u(x));
    let err_sigma = disc.sigma_norm2(&(sigma - &result.sigma)).sqrt();
    let err_u = (u - &result.u).norm();
    ErrorReport { err_sigma, err_u, err_total: err_sigma.hypot(err_u), gamma: system.material.gamma() }
}

/// `‖(σ₁ − σ₂, u₁ − u₂)‖_{Σ×L,h}`.
pub fn sigma_l_distance(disc: &Discretization, a: &SolveResult, b: &SolveResult) -> f64 {
    (disc.sigma_norm2(&(&a.sigma - &b.sigma)) + (&a.u - &b.u).norm_squared()).sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoercivityWitness {
    pub samples: usize,
    /// Smallest `a_h(τ,τ) D(1+ν) / ‖τ‖²_{Σ,h}`.
    pub min_ratio: f64,
    pub violations: usize,
}

/// Relative slack for rounding. Spherical tensors attain the coercivity bound of
/// `A⁻¹` exactly, so the ratio can sit at 1 up to rounding.
const COERCIVITY_ROUNDOFF: f64 = 1e-12;

/// Samples `a_h(τ,τ) ≥ ‖τ‖²_{Σ,h}/(D(1+ν))` on random global Σ vectors with
/// entries uniform in `[−1, 1]`.
pub fn coercivity_witness(system: &GlobalSystem, samples: usize, seed: u64) -> CoercivityWitness {
    let n = system.dofmap().sigma_len();
    let scale = system.material.d * (1.0 + system.material.nu);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut min_ratio = f64::INFINITY;
    let mut violations = 0;
    for _ in 0..samples {
        let tau = DVector::from_fn(n, |_, _| rng.gen_range(-1.0..1.0));
        let ratio = system.energy(&tau) * scale / system.disc.sigma_norm2(&tau);
        min_ratio = min_ratio.min(ratio);
        if ratio < 1.0 - COERCIVITY_ROUNDOFF {
            violations += 1;
        }
    }
    CoercivityWitness { samples, min_ratio, violations }
}

/// Smallest `sup_τ b_h(τ,v) / (‖τ‖_{Σ,h} ‖v‖)` over random broken polynomials `v`.
/// The supremum over all of `Σ_h^ℓ` is `(qᵀG⁻¹q)^{1/2}` with `q = b_h(·,v)` and `G`
/// the Gram matrix of `‖·‖_{Σ,h}`.
pub fn inf_sup_witness(system: &GlobalSystem, samples: usize, seed: u64) -> Result<f64> {
    let disc = system.disc;
    let map = &disc.dofmap;
    let parts: Vec<Vec<(usize, usize, f64)>> = disc
        .cells
        .par_iter()
        .map(|c| {
            let w = &c.potential_onb;
            let r = &c.ops.stabilization_rows;
            let g = w.transpose() * w + r.transpose() * r;
            let mut out = Vec::with_capacity(g.len());
            for (j, &gj) in c.sigma_idx.iter().enumerate() {
                for (i, &gi) in c.sigma_idx.iter().enumerate() {
                    out.push((gi, gj, g[(i, j)]));
                }
            }
            out
        })
        .collect();
    let gram = SparseLu::new(map.sigma_len(), parts.concat())?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best = f64::INFINITY;
    for _ in 0..samples {
        let v = DVector::from_fn(map.u_total(), |_, _| rng.gen_range(-1.0..1.0));
        let mut q = DVector::zeros(map.sigma_len());
        for (t, c) in disc.cells.iter().enumerate() {
            let loc = c.ops.dd.transpose() * v.rows(t * map.u_len, map.u_len);
            for (&g, x) in c.sigma_idx.iter().zip(loc.iter()) {
                q[g] += x;
            }
        }
        let z = gram.solve(&q)?;
        best = best.min(q.dot(&z).max(0.0).sqrt() / v.norm());
    }
    Ok(best)
}
