use std::time::Instant;

use faer::prelude::Solve;
use faer::sparse::{SparseColMat, Triplet};
use nalgebra::{Cholesky, DMatrix, DVector, Dyn};
use rayon::prelude::*;

use super::GlobalSystem;
use crate::{Error, Result};

/// Sparse LU of a square matrix given as triplets; duplicate entries are summed.
pub struct SparseLu {
    n: usize,
    nnz: usize,
    lu: faer::sparse::linalg::solvers::Lu<usize, f64>,
}

impl SparseLu {
    pub fn new(n: usize, entries: Vec<(usize, usize, f64)>) -> Result<Self> {
        let merged = merge_duplicates(entries);
        let nnz = merged.len();
        let triplets: Vec<Triplet<usize, usize, f64>> = merged.into_iter().map(|(r, c, v)| Triplet::new(r, c, v)).collect();
        let mat = SparseColMat::<usize, f64>::try_new_from_triplets(n, n, &triplets).map_err(|e| Error::Solver(format!("{e:?}")))?;
        let lu = mat.sp_lu().map_err(|e| Error::Solver(format!("sparse LU failed: {e:?}")))?;
        Ok(Self { n, nnz, lu })
    }

    pub fn nnz(&self) -> usize {
        self.nnz
    }

    pub fn solve(&self, rhs: &DVector<f64>) -> Result<DVector<f64>> {
        let mut x = faer::Mat::<f64>::from_fn(self.n, 1, |i, _| rhs[i]);
        self.lu.solve_in_place(x.as_mut());
        let out = DVector::from_fn(self.n, |i, _| x[(i, 0)]);
        if out.iter().all(|v| v.is_finite()) {
            Ok(out)
        } else {
            Err(Error::Solver("non-finite solution (singular matrix)".into()))
        }
    }
}

/// Sorts by (column, row) and sums repeated entries.
fn merge_duplicates(mut entries: Vec<(usize, usize, f64)>) -> Vec<(usize, usize, f64)> {
    entries.sort_unstable_by_key(|&(r, c, _)| (c, r));
    let mut out: Vec<(usize, usize, f64)> = Vec::with_capacity(entries.len());
    for (r, c, v) in entries {
        match out.last_mut() {
            Some(last) if last.0 == r && last.1 == c => last.2 += v,
            _ => out.push((r, c, v)),
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveMethod {
    Condensed,
    Uncondensed,
}

#[derive(Debug, Clone)]
pub struct SolveStats {
    pub method: SolveMethod,
    /// Size of the factorised system.
    pub ndof: usize,
    pub nnz: usize,
    pub refinement_steps: usize,
    pub seconds: f64,
}

#[derive(Debug, Clone)]
pub struct SolveResult {
    /// Global Σ dofs.
    pub sigma: DVector<f64>,
    /// Orthonormal `P^{ℓ−1}` coefficients, cell after cell.
    pub u: DVector<f64>,
    pub gamma: f64,
    /// Relative residual of the uncondensed equations.
    pub residual: f64,
    pub stats: SolveStats,
}

const RESIDUAL_TARGET: f64 = 1e-13;
const MAX_REFINEMENT: usize = 3;

/// Per-cell elimination of the cell Σ block.
struct CellSchur {
    /// Local positions (in `[Σ_local, u]` order) of the retained dofs.
    retained_local: Vec<usize>,
    /// Retained-system indices of the same dofs.
    retained_global: Vec<usize>,
    chol: Cholesky<f64, Dyn>,
    /// `K_cr`.
    coupling: DMatrix<f64>,
}

impl GlobalSystem<'_> {
    pub fn solve_condensed(&self) -> Result<SolveResult> {
        let start = Instant::now();
        let map = self.dofmap().clone();
        let cl = map.cell_sigma_len;
        let schur: Vec<(CellSchur, DMatrix<f64>)> = (0..self.locals.len())
            .into_par_iter()
            .map(|t| {
                let c = &self.disc.cells[t];
                let k = self.local_matrix(t);
                let n = k.nrows();
                let ns = c.sigma_idx.len();
                let retained_local: Vec<usize> = (cl..n).collect();
                let retained_global: Vec<usize> = c.sigma_idx[cl..]
                    .iter()
                    .copied()
                    .chain(map.u_offset(t)..map.u_offset(t) + map.u_len)
                    .map(|g| map.retained_index(g).expect("retained dof"))
                    .collect();
                debug_assert_eq!(retained_global.len(), n - cl);
                debug_assert!(ns >= cl);
                let kcc = k.view((0, 0), (cl, cl)).into_owned();
                let chol = Cholesky::new(kcc).ok_or_else(|| Error::Singular(format!("cell Σ block of cell {t} is not positive definite")))?;
                let coupling = k.view((0, cl), (cl, n - cl)).into_owned();
                let s = k.view((cl, cl), (n - cl, n - cl)) - coupling.transpose() * chol.solve(&coupling);
                Ok((CellSchur { retained_local, retained_global, chol, coupling }, s))
            })
            .collect::<Result<Vec<_>>>()?;
        let mut entries = Vec::new();
        for (cs, s) in &schur {
            for (j, &gj) in cs.retained_global.iter().enumerate() {
                for (i, &gi) in cs.retained_global.iter().enumerate() {
                    entries.push((gi, gj, s[(i, j)]));
                }
            }
        }
        let lu = SparseLu::new(map.retained_len(), entries)?;
        let cells: Vec<CellSchur> = schur.into_iter().map(|p| p.0).collect();

        let solve = |rhs: &DVector<f64>| -> Result<DVector<f64>> {
            let locals: Vec<DVector<f64>> = (0..cells.len()).map(|t| self.gather_local(t, rhs)).collect();
            let mut rr = DVector::zeros(map.retained_len());
            for (cs, lr) in cells.iter().zip(&locals) {
                let corr = cs.coupling.transpose() * cs.chol.solve(&lr.rows(0, cl).into_owned());
                for (i, (&li, &gi)) in cs.retained_local.iter().zip(&cs.retained_global).enumerate() {
                    // Skeleton rows are shared; add each cell's share once.
                    let own = if gi < map.skeleton_len() { 0.0 } else { lr[li] };
                    rr[gi] += own - corr[i];
                }
            }
            for g in 0..map.skeleton_len() {
                rr[g] += rhs[g];
            }
            let xr = lu.solve(&rr)?;
            let mut x = DVector::zeros(map.total());
            for g in 0..map.total() {
                if let Some(r) = map.retained_index(g) {
                    x[g] = xr[r];
                }
            }
            for (t, (cs, lr)) in cells.iter().zip(&locals).enumerate() {
                let xloc = DVector::from_iterator(cs.retained_global.len(), cs.retained_global.iter().map(|&r| xr[r]));
                let xc = cs.chol.solve(&(lr.rows(0, cl) - &cs.coupling * xloc));
                x.rows_mut(map.cell_sigma_offset(t), cl).copy_from(&xc);
            }
            Ok(x)
        };
        self.finish(SolveMethod::Condensed, map.retained_len(), lu.nnz(), start, solve)
    }

    pub fn solve_uncondensed(&self) -> Result<SolveResult> {
        let start = Instant::now();
        let n = self.dofmap().total();
        let lu = SparseLu::new(n, self.full_triplets())?;
        self.finish(SolveMethod::Uncondensed, n, lu.nnz(), start, |rhs| lu.solve(rhs))
    }

    /// Solves with iterative refinement against the uncondensed residual.
    fn finish(
        &self,
        method: SolveMethod,
        ndof: usize,
        nnz: usize,
        start: Instant,
        solve: impl Fn(&DVector<f64>) -> Result<DVector<f64>>,
    ) -> Result<SolveResult> {
        let rhs = self.rhs();
        let mut x = solve(&rhs)?;
        let mut residual = self.relative_residual(&x, &rhs);
        let mut steps = 0;
        while residual > RESIDUAL_TARGET && steps < MAX_REFINEMENT {
            let r = &rhs - self.apply(&x);
            x += solve(&r)?;
            residual = self.relative_residual(&x, &rhs);
            steps += 1;
        }
        if !residual.is_finite() || residual > 1e-10 {
            return Err(Error::Solver(format!("residual {residual:.3e} of the uncondensed equations exceeds 1e-10")));
        }
        let map = self.dofmap();
        Ok(SolveResult {
            sigma: x.rows(0, map.sigma_len()).into_owned(),
            u: x.rows(map.sigma_len(), map.u_total()).into_owned(),
            gamma: self.material.gamma(),
            residual,
            stats: SolveStats { method, ndof, nnz, refinement_steps: steps, seconds: start.elapsed().as_secs_f64() },
        })
    }

    /// `[[a_T, b_Tᵀ], [b_T, 0]]` on `[Σ_local, u_T]`.
    fn local_matrix(&self, t: usize) -> DMatrix<f64> {
        let a = &self.locals[t].a;
        let b = &self.disc.cells[t].ops.dd;
        let (ns, nu) = (a.nrows(), b.nrows());
        let mut k = DMatrix::zeros(ns + nu, ns + nu);
        k.view_mut((0, 0), (ns, ns)).copy_from(a);
        k.view_mut((ns, 0), (nu, ns)).copy_from(b);
        k.view_mut((0, ns), (ns, nu)).copy_from(&b.transpose());
        k
    }

    /// A global vector restricted to `[Σ_local, u_T]`.
    fn gather_local(&self, t: usize, x: &DVector<f64>) -> DVector<f64> {
        let map = self.dofmap();
        let idx = &self.disc.cells[t].sigma_idx;
        let uo = map.u_offset(t);
        DVector::from_iterator(idx.len() + map.u_len, idx.iter().copied().chain(uo..uo + map.u_len).map(|g| x[g]))
    }

    /// Global vector from a solution.
    pub fn stack(&self, result: &SolveResult) -> DVector<f64> {
        let mut x = DVector::zeros(self.dofmap().total());
        x.rows_mut(0, result.sigma.len()).copy_from(&result.sigma);
        x.rows_mut(result.sigma.len(), result.u.len()).copy_from(&result.u);
        x
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn duplicates_are_summed() {
        let lu = SparseLu::new(2, vec![(0, 0, 1.0), (1, 1, 2.0), (0, 0, 1.0), (0, 1, 1.0)]).unwrap();
        assert_eq!(lu.nnz(), 3);
        let x = lu.solve(&DVector::from_vec(vec![3.0, 4.0])).unwrap();
        assert!((x[1] - 2.0).abs() < 1e-15 && (x[0] - 0.5).abs() < 1e-15);
    }

    #[test]
    fn singular_matrix_is_reported() {
        let r = SparseLu::new(2, vec![(0, 0, 1.0), (0, 1, 1.0), (1, 0, 1.0), (1, 1, 1.0)]).and_then(|lu| lu.solve(&DVector::from_vec(vec![1.0, 0.0])));
        assert!(r.is_err());
    }
}
