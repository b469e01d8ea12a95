use std::fmt::Write as _;
use std::io::Write as _;
use std::path::Path;

use ddr_plates::exactness::{builtin_cells, verify_mesh, CertifyOptions, CellVerification};
use ddr_plates::mesh::{generate, read_polymesh, Mesh, MeshGenerator};
use ddr_plates::solver::{assemble_global, compute_errors, Discretization, Manufactured};
use ddr_plates::study::{run_study, summarize, write_csv, ErrorComponent, StudyConfig, StudyRow};

use crate::config::RunConfig;
use crate::CliError;

/// Resolves mesh sources: `builtin` (the certification cell suite, one mesh per cell),
/// generator strings such as `tri:8` or `kershaw:16:0.5`, or `polymesh 1` files.
pub fn load_meshes(sources: &[String]) -> Result<Vec<(String, Mesh)>, CliError> {
    let mut out = Vec::new();
    for src in sources {
        if src == "builtin" {
            for (name, pts) in builtin_cells() {
                let mesh = Mesh::single_cell(&pts).map_err(|e| CliError::Config(e.to_string()))?;
                out.push((format!("builtin/{name}"), mesh));
            }
        } else if let Ok(g) = src.parse::<MeshGenerator>() {
            out.push((g.to_string(), generate(&g).map_err(|e| CliError::Config(e.to_string()))?));
        } else if Path::new(src).is_file() {
            let mesh = read_polymesh(src).map_err(|e| CliError::Config(format!("{src}: {e}")))?;
            out.push((src.clone(), mesh));
        } else {
            return Err(CliError::Config(format!("mesh source '{src}' is neither a generator nor a readable file")));
        }
    }
    Ok(out)
}

fn emit(out: Option<&Path>, text: &str) -> Result<(), CliError> {
    match out {
        Some(p) => std::fs::write(p, text).map_err(|e| CliError::Config(format!("cannot write {}: {e}", p.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

/// First failing certificate check or identity of a cell, if any.
fn first_failure(v: &CellVerification, identity_tol: f64) -> Option<String> {
    if let Some(c) = v.certificate.first_failure() {
        return Some(format!("cell={} check=({}) {} residual={:.3e}", v.certificate.cell_id, c.label, c.name, c.residual));
    }
    v.identities
        .entries()
        .iter()
        .find(|(_, r)| !(*r < identity_tol))
        .map(|(name, r)| format!("cell={} identity={name} residual={r:.3e}", v.certificate.cell_id))
}

/// Certifies every cell of every mesh at `k = ℓ + 1`. The report goes to `out` or stdout.
pub fn run_verification(cfg: &RunConfig) -> Result<String, CliError> {
    let meshes = load_meshes(&cfg.meshes)?;
    let k = cfg.l + 1;
    let opts = CertifyOptions { tol: cfg.tol, samples: cfg.samples, seed: cfg.seed };
    let mut report = String::new();
    let mut failure = None;
    let mut cells = 0;
    for (label, mesh) in &meshes {
        let results = verify_mesh(mesh, k, &opts, cfg.inject_fault).map_err(|e| CliError::Numerical(format!("{label}: {e}")))?;
        let _ = writeln!(report, "mesh={label} cells={} k={k}", mesh.num_cells());
        for v in &results {
            report.push_str(&v.certificate.report());
            report.push_str(&v.identities.report());
            if failure.is_none() {
                failure = first_failure(v, cfg.identity_tol).map(|f| format!("mesh={label} {f}"));
            }
        }
        cells += results.len();
    }
    emit(cfg.out.as_deref(), &report)?;
    match failure {
        Some(f) => Err(CliError::Verification(format!("verification failed: {f}"))),
        None => Ok(format!("verification passed: {cells} cells, k={k}")),
    }
}

fn solve_one(label: &str, mesh: &Mesh, cfg: &RunConfig) -> Result<(StudyRow, String), CliError> {
    let num = |e: ddr_plates::Error| CliError::Numerical(format!("{label}: {e}"));
    let disc = Discretization::new(mesh, cfg.l).map_err(num)?;
    let solution = cfg.solution.solution();
    let system = assemble_global(&disc, cfg.material, &Manufactured { solution, material: cfg.material }).map_err(num)?;
    let result = system.solve_condensed().map_err(num)?;
    let e = compute_errors(&system, &result, solution);
    let row = StudyRow {
        mesh_id: label.to_string(),
        h: mesh.h,
        ndof_retained: result.stats.ndof,
        err_total: e.err_total,
        err_sigma: e.err_sigma,
        err_u: e.err_u,
        rate_total: None,
        gamma: e.gamma,
        solve_seconds: if cfg.timing { result.stats.seconds } else { 0.0 },
    };
    let summary = format!(
        "mesh={label} h={:.6e} l={} ndof_total={} ndof_retained={} nnz={} residual={:.3e} refinement_steps={}\n\
         err_total={:.6e} err_sigma={:.6e} err_u={:.6e} gamma={:.6}",
        mesh.h,
        cfg.l,
        disc.dofmap.total(),
        result.stats.ndof,
        result.stats.nnz,
        result.residual,
        result.stats.refinement_steps,
        e.err_total,
        e.err_sigma,
        e.err_u,
        e.gamma
    );
    Ok((row, summary))
}

pub fn run_solve(cfg: &RunConfig) -> Result<String, CliError> {
    if cfg.check_exactness {
        let meshes = load_meshes(&cfg.meshes)?;
        let opts = CertifyOptions { tol: cfg.tol, samples: cfg.samples, seed: cfg.seed };
        for (label, mesh) in &meshes {
            for v in verify_mesh(mesh, cfg.l + 1, &opts, cfg.inject_fault).map_err(|e| CliError::Numerical(e.to_string()))? {
                if let Some(f) = first_failure(&v, cfg.identity_tol) {
                    return Err(CliError::Verification(format!("verification failed: mesh={label} {f}")));
                }
            }
        }
    }
    let (label, mesh) = load_meshes(&cfg.meshes)?.remove(0);
    let (row, summary) = solve_one(&label, &mesh, cfg)?;
    if let Some(p) = &cfg.out {
        let mut buf = Vec::new();
        write_csv(&[row], &mut buf).expect("write to memory");
        std::fs::write(p, buf).map_err(|e| CliError::Config(format!("cannot write {}: {e}", p.display())))?;
    }
    Ok(summary)
}

/// Runs the study, writes the CSV (partial on failure) and returns the rate summary.
pub fn run_convergence_study(cfg: &RunConfig) -> Result<String, CliError> {
    let meshes = load_meshes(&cfg.meshes)?;
    if meshes.windows(2).any(|w| w[1].1.h >= w[0].1.h) {
        return Err(CliError::Config("meshes must be ordered by strictly decreasing h".into()));
    }
    let scfg = StudyConfig { l: cfg.l, material: cfg.material, solution: cfg.solution, timing: cfg.timing, parallel: cfg.parallel };
    let (rows, error) = run_study(&meshes, &scfg);
    let mut csv = Vec::new();
    write_csv(&rows, &mut csv).expect("write to memory");
    match &cfg.out {
        Some(p) => std::fs::write(p, &csv).map_err(|e| CliError::Config(format!("cannot write {}: {e}", p.display())))?,
        None => std::io::stdout().write_all(&csv).map_err(|e| CliError::Config(e.to_string()))?,
    }
    if let Some(e) = error {
        return Err(CliError::Numerical(format!("study aborted after {} meshes: {e}", rows.len())));
    }
    let target = (cfg.l + 1) as f64;
    let total = summarize(&rows, ErrorComponent::Total, target, cfg.rate_tolerance);
    let u = summarize(&rows, ErrorComponent::U, target, cfg.rate_tolerance);
    let text = format!("rate err_total: {}\nrate err_u: {}", total.line(), u.line());
    if total.pass {
        Ok(text)
    } else {
        Err(CliError::Verification(text))
    }
}
