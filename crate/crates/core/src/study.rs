//! Convergence studies on mesh families and their CSV output.

use std::io::Write;

use rayon::prelude::*;

use crate::mesh::Mesh;
use crate::solver::{assemble_global, compute_errors, Discretization, Manufactured, Material, SolutionKind};
use crate::{Error, Result};

/// Consecutive refinements whose error ratio falls below this are treated as
/// round-off saturated and end the fitted range.
pub const PLATEAU_RATIO: f64 = 1.2;

pub const CSV_HEADER: &str = "mesh_id,h,ndof_retained,err_total,err_sigma,err_u,rate_total,gamma,solve_seconds";

#[derive(Debug, Clone)]
pub struct StudyConfig {
    pub l: usize,
    pub material: Material,
    pub solution: SolutionKind,
    /// Record solve times; `false` writes zeros so that output is byte-reproducible.
    pub timing: bool,
    /// Solve independent meshes concurrently.
    pub parallel: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StudyRow {
    pub mesh_id: String,
    pub h: f64,
    pub ndof_retained: usize,
    pub err_total: f64,
    pub err_sigma: f64,
    pub err_u: f64,
    /// Pairwise rate against the previous row.
    pub rate_total: Option<f64>,
    pub gamma: f64,
    pub solve_seconds: f64,
}

impl StudyRow {
    pub fn csv_line(&self) -> String {
        let rate = self.rate_total.map(|r| format!("{r:.6}")).unwrap_or_default();
        format!(
            "{},{:.12e},{},{:.12e},{:.12e},{:.12e},{},{:.12e},{:.6}",
            self.mesh_id, self.h, self.ndof_retained, self.err_total, self.err_sigma, self.err_u, rate, self.gamma, self.solve_seconds
        )
    }
}

/// Solves the manufactured problem on one mesh with the condensed solver.
pub fn run_mesh(mesh_id: &str, mesh: &Mesh, cfg: &StudyConfig) -> Result<StudyRow> {
    let disc = Discretization::new(mesh, cfg.l)?;
    let solution = cfg.solution.solution();
    let system = assemble_global(&disc, cfg.material, &Manufactured { solution, material: cfg.material })?;
    let result = system.solve_condensed()?;
    let e = compute_errors(&system, &result, solution);
    Ok(StudyRow {
        mesh_id: mesh_id.to_string(),
        h: mesh.h,
        ndof_retained: result.stats.ndof,
        err_total: e.err_total,
        err_sigma: e.err_sigma,
        err_u: e.err_u,
        rate_total: None,
        gamma: e.gamma,
        solve_seconds: if cfg.timing { result.stats.seconds } else { 0.0 },
    })
}

/// Runs every mesh in order. On failure the rows computed before the failing mesh are
/// returned together with the error.
pub fn run_study(meshes: &[(String, Mesh)], cfg: &StudyConfig) -> (Vec<StudyRow>, Option<Error>) {
    let results: Vec<Result<StudyRow>> = if cfg.parallel {
        meshes.par_iter().map(|(id, m)| run_mesh(id, m, cfg)).collect()
    } else {
        let mut out = Vec::new();
        for (id, m) in meshes {
            let r = run_mesh(id, m, cfg);
            let failed = r.is_err();
            out.push(r);
            if failed {
                break;
            }
        }
        out
    };
    let mut rows = Vec::new();
    let mut error = None;
    for r in results {
        match r {
            Ok(row) => rows.push(row),
            Err(e) => {
                error = Some(e);
                break;
            }
        }
    }
    let errs: Vec<f64> = rows.iter().map(|r| r.err_total).collect();
    let hs: Vec<f64> = rows.iter().map(|r| r.h).collect();
    for (row, rate) in rows.iter_mut().zip(pairwise_rates(&hs, &errs)) {
        row.rate_total = rate;
    }
    (rows, error)
}

/// `log(e_{i−1}/e_i) / log(h_{i−1}/h_i)`; `None` for the first entry.
pub fn pairwise_rates(h: &[f64], err: &[f64]) -> Vec<Option<f64>> {
    (0..h.len()).map(|i| (i > 0).then(|| (err[i - 1] / err[i]).ln() / (h[i - 1] / h[i]).ln())).collect()
}

/// Number of leading points kept: stop at the first refinement whose error ratio is
/// below [`PLATEAU_RATIO`].
pub fn plateau_cutoff(err: &[f64]) -> usize {
    let mut n = err.len().min(1);
    while n < err.len() && err[n - 1] / err[n] >= PLATEAU_RATIO {
        n += 1;
    }
    n
}

/// Least-squares slope of `log err` against `log h`.
pub fn fitted_slope(h: &[f64], err: &[f64]) -> Option<f64> {
    if h.len() < 2 || h.len() != err.len() {
        return None;
    }
    let x: Vec<f64> = h.iter().map(|v| v.ln()).collect();
    let y: Vec<f64> = err.iter().map(|v| v.ln()).collect();
    let n = x.len() as f64;
    let (mx, my) = (x.iter().sum::<f64>() / n, y.iter().sum::<f64>() / n);
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    let sxy: f64 = x.iter().zip(&y).map(|(a, b)| (a - mx) * (b - my)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorComponent {
    Total,
    Sigma,
    U,
}

impl ErrorComponent {
    fn of(self, r: &StudyRow) -> f64 {
        match self {
            ErrorComponent::Total => r.err_total,
            ErrorComponent::Sigma => r.err_sigma,
            ErrorComponent::U => r.err_u,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RateSummary {
    pub slope: Option<f64>,
    pub points_used: usize,
    pub target: f64,
    pub tolerance: f64,
    pub pass: bool,
}

impl RateSummary {
    pub fn line(&self) -> String {
        match self.slope {
            Some(s) => format!(
                "slope={s:.4} points={} target={:.2} tolerance={:.2} {}",
                self.points_used,
                self.target,
                self.tolerance,
                if self.pass { "PASS" } else { "FAIL" }
            ),
            None => format!("slope=undefined points={} FAIL", self.points_used),
        }
    }
}

/// Fitted slope over the non-saturated points, checked against `target − tolerance`.
pub fn summarize(rows: &[StudyRow], component: ErrorComponent, target: f64, tolerance: f64) -> RateSummary {
    let err: Vec<f64> = rows.iter().map(|r| component.of(r)).collect();
    let n = plateau_cutoff(&err);
    let h: Vec<f64> = rows[..n].iter().map(|r| r.h).collect();
    let slope = fitted_slope(&h, &err[..n]);
    RateSummary { slope, points_used: n, target, tolerance, pass: slope.is_some_and(|s| s >= target - tolerance) }
}

pub fn write_csv(rows: &[StudyRow], mut out: impl Write) -> std::io::Result<()> {
    writeln!(out, "{CSV_HEADER}")?;
    for r in rows {
        writeln!(out, "{}", r.csv_line())?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn slope_of_exact_power_law() {
        let h = [0.5, 0.25, 0.125, 0.0625];
        let e: Vec<f64> = h.iter().map(|v: &f64| 3.0 * v.powi(3)).collect();
        assert!((fitted_slope(&h, &e).unwrap() - 3.0).abs() < 1e-12);
        let rates = pairwise_rates(&h, &e);
        assert!(rates[0].is_none() && (rates[3].unwrap() - 3.0).abs() < 1e-12);
    }

    #[test]
    fn plateau_excludes_saturated_tail() {
        assert_eq!(plateau_cutoff(&[1.0, 0.1, 0.01, 0.009, 0.001]), 3);
        assert_eq!(plateau_cutoff(&[1.0, 0.5, 0.25]), 3);
        assert_eq!(plateau_cutoff(&[]), 0);
        assert_eq!(plateau_cutoff(&[2.0]), 1);
    }

    #[test]
    fn summary_applies_tolerance() {
        let rows: Vec<StudyRow> = [0.5, 0.25, 0.125]
            .iter()
            .map(|&h: &f64| StudyRow {
                mesh_id: String::new(),
                h,
                ndof_retained: 0,
                err_total: h.powf(2.8),
                err_sigma: 0.0,
                err_u: 0.0,
                rate_total: None,
                gamma: 0.0,
                solve_seconds: 0.0,
            })
            .collect();
        assert!(summarize(&rows, ErrorComponent::Total, 3.0, 0.25).pass);
        assert!(!summarize(&rows, ErrorComponent::Total, 3.0, 0.1).pass);
    }
}
