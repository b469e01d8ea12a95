//! Numerical certification of the local discrete plates complex
//! `RT¹ → V_T^k → Σ_T^{k−1} → P^{k−2}(T)` on single polygons.

use std::fmt::Write as _;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::ddr::{LocalCell, PolyTensor, PolyVector, SigmaOps, TensorField, VOps, VectorField};
use crate::error::Result;
use crate::mesh::{regular_polygon, Mesh};
use crate::polycalc::{poly_dim, DiffOp, FieldKind};
use crate::tensor::Vec2;

/// Operator matrices of the local complex, in the canonical dof bases.
#[derive(Debug, Clone)]
pub struct ComplexMatrices {
    pub cell_id: usize,
    pub k: usize,
    /// `uCsym^{k−1}`: `dim Σ × dim V`.
    pub ucsym: DMatrix<f64>,
    /// `DD^{k−2}` in orthonormal coordinates of `P^{k−2}(T)`: `dim P^{k−2} × dim Σ`.
    pub dd: DMatrix<f64>,
    /// `I_V` applied to `(1,0)`, `(0,1)` and `x − x_T`: `dim V × 3`.
    pub rt_interp: DMatrix<f64>,
    /// `Csym^{k−1}` in orthonormal coordinates of `P^{k−1}(T;S)`.
    pub csym: DMatrix<f64>,
    /// `P_{Σ,T}^{k−1}` in orthonormal coordinates of `P^{k−1}(T;S)`.
    pub tensor_potential: DMatrix<f64>,
    pub v_ops: VOps,
    pub sigma_ops: SigmaOps,
}

impl ComplexMatrices {
    pub fn dim_v(&self) -> usize {
        self.ucsym.ncols()
    }

    pub fn dim_sigma(&self) -> usize {
        self.ucsym.nrows()
    }

    /// `k(k−1) + 2k·card(V_T) − 3`.
    pub fn expected_ucsym_rank(&self) -> usize {
        let nv = self.v_ops.layout.nv;
        self.k * (self.k - 1) + 2 * self.k * nv - 3
    }
}

/// Builds the operator matrices on `cell` (whose space degree must be at least `k + 1`).
pub fn assemble_local_matrices(cell: &LocalCell, k: usize) -> Result<ComplexMatrices> {
    let v_ops = VOps::new(cell, k)?;
    let sigma_ops = SigmaOps::new(cell, k - 1)?;
    let space = &cell.space;
    let xt = space.center();
    let fields: [Box<dyn VectorField>; 3] = [
        Box::new(crate::ddr::FnVector { value: |_: &Vec2| Vec2::new(1.0, 0.0), gradient: |_: &Vec2| [0.0; 4] }),
        Box::new(crate::ddr::FnVector { value: |_: &Vec2| Vec2::new(0.0, 1.0), gradient: |_: &Vec2| [0.0; 4] }),
        Box::new(crate::ddr::FnVector { value: move |x: &Vec2| x - xt, gradient: |_: &Vec2| [1.0, 0.0, 0.0, 1.0] }),
    ];
    let mut rt_interp = DMatrix::zeros(v_ops.dim(), 3);
    for (j, f) in fields.iter().enumerate() {
        rt_interp.set_column(j, &v_ops.interpolate(cell, f.as_ref()).values);
    }
    let coords = space.tensor_basis(k as isize - 1).transpose() * space.tensor_mass();
    Ok(ComplexMatrices {
        cell_id: cell.id,
        k,
        ucsym: v_ops.ucsym.clone(),
        dd: sigma_ops.dd.clone(),
        rt_interp,
        csym: &coords * &v_ops.csym,
        tensor_potential: &coords * &sigma_ops.potential,
        v_ops,
        sigma_ops,
    })
}

/// Corrupts `uCsym` by a rank-one term that leaves the `RT¹` images untouched but
/// leaves the kernel of `DD`. Used to exercise failure reporting.
pub fn inject_complex_fault(m: &mut ComplexMatrices) {
    let q = m.rt_interp.clone().qr().q();
    let mut y = DVector::zeros(m.dim_v());
    y[0] = 1.0;
    y -= &q * (q.transpose() * &y);
    let x = m.dd.row(0).transpose();
    let scale = 1e-3 * m.ucsym.norm() / (x.norm() * y.norm());
    m.ucsym += (x * y.transpose()) * scale;
}

#[derive(Debug, Clone, Copy)]
pub struct CertifyOptions {
    /// Relative tolerance for residuals and the SVD rank cutoff.
    pub tol: f64,
    pub samples: usize,
    pub seed: u64,
}

impl Default for CertifyOptions {
    fn default() -> Self {
        Self { tol: 1e-9, samples: 20, seed: 20240601 }
    }
}

#[derive(Debug, Clone)]
pub struct CheckResult {
    pub label: char,
    pub name: &'static str,
    pub residual: f64,
    pub rank: Option<usize>,
    pub expected: Option<usize>,
    /// `σ_r / σ_{r+1}` at the detected rank.
    pub gap: Option<f64>,
    pub pass: bool,
}

#[derive(Debug, Clone)]
pub struct ExactnessCertificate {
    pub cell_id: usize,
    pub k: usize,
    pub seed: u64,
    pub dim_v: usize,
    pub dim_sigma: usize,
    pub checks: Vec<CheckResult>,
}

impl ExactnessCertificate {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn first_failure(&self) -> Option<&CheckResult> {
        self.checks.iter().find(|c| !c.pass)
    }

    pub fn check(&self, label: char) -> &CheckResult {
        self.checks.iter().find(|c| c.label == label).expect("known check label")
    }

    /// Flat `key=value` report, one line per check after a header line.
    pub fn report(&self) -> String {
        let opt = |v: Option<usize>| v.map_or("-".to_string(), |r| r.to_string());
        let mut s = String::new();
        let _ = writeln!(
            s,
            "cell={} k={} seed={} dim_v={} dim_sigma={} pass={}",
            self.cell_id,
            self.k,
            self.seed,
            self.dim_v,
            self.dim_sigma,
            self.passed()
        );
        for c in &self.checks {
            let gap = c.gap.map_or("-".to_string(), |g| format!("{g:.3e}"));
            let _ = writeln!(
                s,
                "cell={} k={} check={} name={} residual={:.3e} rank={} expected={} gap={} pass={}",
                self.cell_id,
                self.k,
                c.label,
                c.name,
                c.residual,
                opt(c.rank),
                opt(c.expected),
                gap,
                c.pass
            );
        }
        s
    }
}

fn singular_values(m: &DMatrix<f64>) -> Vec<f64> {
    if m.is_empty() {
        return Vec::new();
    }
    let mut sv: Vec<f64> = m.singular_values().iter().copied().collect();
    sv.sort_by(|a, b| b.total_cmp(a));
    sv
}

/// Numerical rank with cutoff `tol·σ_max`, the gap `σ_r/σ_{r+1}` and the relative size
/// `σ_{r+1}/σ_max` of the largest discarded value.
fn numerical_rank(sv: &[f64], tol: f64) -> (usize, f64, f64) {
    let smax = sv.first().copied().unwrap_or(0.0);
    if smax == 0.0 {
        return (0, f64::INFINITY, 0.0);
    }
    let r = sv.iter().take_while(|&&s| s > tol * smax).count();
    let next = sv.get(r).copied().unwrap_or(0.0);
    let gap = if r == 0 { 0.0 } else if next == 0.0 { f64::INFINITY } else { sv[r - 1] / next };
    (r, gap, next / smax)
}

/// Two-sided Ruiz equilibration; the rank is unchanged in exact arithmetic while the
/// dof blocks of different length scales are balanced.
fn equilibrate(m: &DMatrix<f64>) -> DMatrix<f64> {
    let mut a = m.clone();
    for _ in 0..8 {
        for i in 0..a.nrows() {
            let r = a.row(i).amax();
            if r > 0.0 {
                a.row_mut(i).scale_mut(1.0 / r.sqrt());
            }
        }
        for j in 0..a.ncols() {
            let c = a.column(j).amax();
            if c > 0.0 {
                a.column_mut(j).scale_mut(1.0 / c.sqrt());
            }
        }
    }
    a
}

fn spectral_norm(m: &DMatrix<f64>) -> f64 {
    singular_values(m).first().copied().unwrap_or(0.0)
}

/// Runs checks (a)–(g) on `m`.
pub fn check_exactness(cell: &LocalCell, m: &ComplexMatrices, opts: &CertifyOptions) -> ExactnessCertificate {
    let tol = opts.tol;
    let k = m.k;
    let dim_p = poly_dim(k as isize - 2);
    let mut checks = Vec::with_capacity(7);

    let ucsym_norm = spectral_norm(&m.ucsym);
    let a_res = (0..3)
        .map(|j| {
            let w = m.rt_interp.column(j);
            (&m.ucsym * w).norm() / (ucsym_norm * w.norm()).max(f64::MIN_POSITIVE)
        })
        .fold(0.0, f64::max);
    checks.push(CheckResult { label: 'a', name: "rt_kernel", residual: a_res, rank: None, expected: None, gap: None, pass: a_res <= tol });

    let dd_sv = singular_values(&equilibrate(&m.dd));
    let (dd_rank, dd_gap, _) = numerical_rank(&dd_sv, tol);
    let dd_min = dd_sv.get(dim_p.saturating_sub(1)).copied().unwrap_or(0.0) / dd_sv.first().copied().unwrap_or(1.0);
    checks.push(CheckResult {
        label: 'b',
        name: "dd_surjective",
        residual: dd_min,
        rank: Some(dd_rank),
        expected: Some(dim_p),
        gap: Some(dd_gap),
        pass: dd_rank == dim_p,
    });

    let c_res = (&m.dd * &m.ucsym).norm() / (spectral_norm(&m.dd) * ucsym_norm).max(f64::MIN_POSITIVE);
    checks.push(CheckResult { label: 'c', name: "complex_property", residual: c_res, rank: None, expected: None, gap: None, pass: c_res <= tol });

    let u_sv = singular_values(&equilibrate(&m.ucsym));
    let (u_rank, u_gap, u_next) = numerical_rank(&u_sv, tol);
    let expected_rank = m.expected_ucsym_rank();
    checks.push(CheckResult {
        label: 'd',
        name: "rank_ucsym",
        residual: u_next,
        rank: Some(u_rank),
        expected: Some(expected_rank),
        gap: Some(u_gap),
        pass: u_rank == expected_rank && u_rank == m.dim_v() - 3,
    });

    let ker_dd = m.dim_sigma() - dd_rank;
    checks.push(CheckResult {
        label: 'e',
        name: "kernel_dd",
        residual: 0.0,
        rank: Some(ker_dd),
        expected: Some(m.dim_sigma() - dim_p),
        gap: Some(dd_gap),
        pass: ker_dd == m.dim_sigma() - dim_p && ker_dd == u_rank,
    });

    let f_res = dd_commutation_residual(cell, &m.sigma_ops, &m.dd, opts.samples, opts.seed);
    checks.push(CheckResult { label: 'f', name: "commutation", residual: f_res, rank: None, expected: None, gap: None, pass: f_res <= tol });

    let g_res = potential_curl_residual(m);
    checks.push(CheckResult { label: 'g', name: "potential_curl", residual: g_res, rank: None, expected: None, gap: None, pass: g_res <= tol });

    ExactnessCertificate { cell_id: m.cell_id, k, seed: opts.seed, dim_v: m.dim_v(), dim_sigma: m.dim_sigma(), checks }
}

/// `max_i ‖P_{Σ,T} uCsym e_i − Csym e_i‖ / max_i ‖Csym e_i‖` in `L²(T)`.
fn potential_curl_residual(m: &ComplexMatrices) -> f64 {
    let r = &m.tensor_potential * &m.ucsym - &m.csym;
    let num = r.column_iter().map(|c| c.norm()).fold(0.0, f64::max);
    let den = m.csym.column_iter().map(|c| c.norm()).fold(0.0, f64::max);
    num / den.max(f64::MIN_POSITIVE)
}

/// Max relative residual of `DD I_Σ τ = π^{ℓ−1} DIV VDIV τ` over random `τ ∈ P^{ℓ+2}(T;S)`.
fn dd_commutation_residual(cell: &LocalCell, s: &SigmaOps, dd: &DMatrix<f64>, samples: usize, seed: u64) -> f64 {
    let space = &cell.space;
    let l = s.l as isize;
    let basis = space.tensor_basis(l + 2);
    let proj = space.scalar_basis(l - 1).transpose() * &space.mass;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = 0.0f64;
    for _ in 0..samples {
        let r = DVector::from_fn(basis.ncols(), |_, _| rng.gen_range(-1.0..1.0));
        let tau = PolyTensor { space, coeffs: &basis * r };
        let got = dd * &s.interpolate(cell, &tau).values;
        let exact = &proj * tau.div_vdiv();
        worst = worst.max((got - &exact).norm() / exact.norm().max(f64::MIN_POSITIVE));
    }
    worst
}

/// Maximum relative residuals of the identity suite on one cell.
#[derive(Debug, Clone)]
pub struct CommutationReport {
    pub cell_id: usize,
    pub k: usize,
    pub samples: usize,
    pub seed: u64,
    /// `DD∘I_Σ` against `π∘DIV VDIV`.
    pub dd_commutation: f64,
    /// `P_{Σ,T}∘uCsym` against `Csym` on the canonical basis of `V_T^k`.
    pub potential_curl: f64,
    /// `Csym∘I_V = SYMCURL` on `P^k(T;R²)`.
    pub csym_consistency: f64,
    /// `P_V∘I_V = id` on `P^k(T;R²)`.
    pub vector_potential: f64,
    /// `P_{Σ,T}∘I_Σ = id` on `P^ℓ(T;S)`.
    pub tensor_potential: f64,
    /// `P_{Σ,E}∘I_Σ = (·)n_E·n_E` on `P^ℓ(T;S)`.
    pub edge_potential: f64,
}

impl CommutationReport {
    pub fn entries(&self) -> [(&'static str, f64); 6] {
        [
            ("dd_commutation", self.dd_commutation),
            ("potential_curl", self.potential_curl),
            ("csym_consistency", self.csym_consistency),
            ("vector_potential", self.vector_potential),
            ("tensor_potential", self.tensor_potential),
            ("edge_potential", self.edge_potential),
        ]
    }

    pub fn max(&self) -> f64 {
        self.entries().iter().map(|e| e.1).fold(0.0, f64::max)
    }

    pub fn report(&self) -> String {
        let mut s = String::new();
        for (name, r) in self.entries() {
            let _ = writeln!(s, "cell={} k={} identity={} samples={} seed={} residual={:.3e}", self.cell_id, self.k, name, self.samples, self.seed, r);
        }
        s
    }
}

/// Points where polynomial residuals are measured: cell quadrature nodes and vertices.
fn probe_points(cell: &LocalCell) -> Vec<Vec2> {
    cell.space.quad.points.iter().chain(&cell.points).copied().collect()
}

/// Runs the identity suite with `samples` random polynomials per identity.
pub fn check_commutation_consistency(cell: &LocalCell, m: &ComplexMatrices, samples: usize, seed: u64) -> CommutationReport {
    let space = &cell.space;
    let (v, s) = (&m.v_ops, &m.sigma_ops);
    let k = m.k as isize;
    let l = k - 1;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let probes = probe_points(cell);
    let rel = |err: f64, scale: f64| err / scale.max(f64::MIN_POSITIVE);

    let vbasis = space.vector_basis(k);
    let tbasis = space.tensor_basis(l);
    let (mut csym_res, mut pv_res, mut pt_res, mut pe_res) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
    for _ in 0..samples {
        let r = DVector::from_fn(vbasis.ncols(), |_, _| rng.gen_range(-1.0..1.0));
        let field = PolyVector { space, coeffs: &vbasis * r };
        let dofs = v.interpolate(cell, &field);
        let (curl, _) = DiffOp::SymCurl.apply(space, FieldKind::Vector, &field.coeffs).expect("vector coefficients");
        let c = v.apply_csym(&dofs);
        let p = v.apply_potential(&dofs);
        let (mut ec, mut sc, mut ep, mut sp) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
        for x in &probes {
            let exact = space.eval_tensor(&curl, x);
            ec = ec.max((space.eval_tensor(&c, x) - exact).norm());
            sc = sc.max(exact.norm());
            let val = field.value(x);
            ep = ep.max((space.eval_vector(&p, x) - val).norm());
            sp = sp.max(val.norm());
        }
        csym_res = csym_res.max(rel(ec, sc));
        pv_res = pv_res.max(rel(ep, sp));

        let r = DVector::from_fn(tbasis.ncols(), |_, _| rng.gen_range(-1.0..1.0));
        let tau = PolyTensor { space, coeffs: &tbasis * r };
        let dofs = s.interpolate(cell, &tau);
        let p = s.apply_potential(&dofs);
        let (mut et, mut st) = (0.0f64, 0.0f64);
        for x in &probes {
            let exact = tau.value(x);
            et = et.max((space.eval_tensor(&p, x) - exact).norm());
            st = st.max(exact.norm());
        }
        pt_res = pt_res.max(rel(et, st));
        let (mut ee, mut se) = (0.0f64, 0.0f64);
        for (e, edge) in cell.edges.iter().enumerate() {
            let pe = s.apply_edge_potential(e, &dofs);
            for &sp in edge.space.rule.params.iter().chain(&[-1.0, 1.0]) {
                let exact = tau.value(&edge.space.point(sp)).bilinear(&edge.normal, &edge.normal);
                ee = ee.max((edge.space.eval(&pe, sp) - exact).abs());
                se = se.max(exact.abs());
            }
        }
        pe_res = pe_res.max(rel(ee, se));
    }

    CommutationReport {
        cell_id: m.cell_id,
        k: m.k,
        samples,
        seed,
        dd_commutation: dd_commutation_residual(cell, s, &m.dd, samples, seed ^ 0x5eed),
        potential_curl: potential_curl_residual(m),
        csym_consistency: csym_res,
        vector_potential: pv_res,
        tensor_potential: pt_res,
        edge_potential: pe_res,
    }
}

/// Test polygons: unit triangle, unit square, regular pentagon and hexagon, two
/// non-convex polygons and a high-aspect quadrilateral.
pub fn builtin_cells() -> Vec<(&'static str, Vec<Vec2>)> {
    let p = |v: &[(f64, f64)]| v.iter().map(|&(x, y)| Vec2::new(x, y)).collect::<Vec<_>>();
    vec![
        ("triangle", p(&[(0.0, 0.0), (1.0, 0.0), (0.0, 1.0)])),
        ("square", p(&[(0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (0.0, 1.0)])),
        ("pentagon", regular_polygon(5, Vec2::new(0.0, 0.0), 1.0)),
        ("hexagon", regular_polygon(6, Vec2::new(0.0, 0.0), 1.0)),
        ("dart", p(&[(0.0, 0.0), (2.0, 1.0), (0.0, 2.0), (0.8, 1.0)])),
        ("lshape", p(&[(0.0, 0.0), (2.0, 0.0), (2.0, 1.0), (1.0, 1.0), (1.0, 2.0), (0.0, 2.0)])),
        ("sliver-quad", p(&[(0.0, 0.0), (4.0, 0.0), (4.1, 0.5), (0.2, 0.4)])),
    ]
}

/// Certificate and identity report of one cell.
#[derive(Debug, Clone)]
pub struct CellVerification {
    pub certificate: ExactnessCertificate,
    pub identities: CommutationReport,
}

/// Certifies cell `t` of `mesh`, optionally with the fault hook applied.
pub fn verify_cell(mesh: &Mesh, t: usize, k: usize, opts: &CertifyOptions, fault: bool) -> Result<CellVerification> {
    let cell = LocalCell::new(mesh, t, k + 1)?;
    let mut m = assemble_local_matrices(&cell, k)?;
    let identities = check_commutation_consistency(&cell, &m, opts.samples, opts.seed);
    if fault {
        inject_complex_fault(&mut m);
    }
    let certificate = check_exactness(&cell, &m, opts);
    Ok(CellVerification { certificate, identities })
}

/// Certifies every cell of `mesh` in parallel; results are ordered by cell id.
pub fn verify_mesh(mesh: &Mesh, k: usize, opts: &CertifyOptions, fault: bool) -> Result<Vec<CellVerification>> {
    (0..mesh.num_cells()).into_par_iter().map(|t| verify_cell(mesh, t, k, opts, fault)).collect()
}
