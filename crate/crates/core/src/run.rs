//! Suite orchestration behind the command line.

use std::path::{Path, PathBuf};
use std::sync::Arc;

use crate::analysis::{classify_harmonicity, subharmonicity_certificate, SampleSpec};
use crate::config::{build_field, RunConfig, Suite};
use crate::error::{Error, Result};
use crate::field::SurfaceField;
use crate::identities::identity_suite;
use crate::quadrature::{constant_profile, mvf_from_profile, MvfOptions};
use crate::report::{IdentityRow, Meta, MvfRow, ProfileRow, QsigmaSection, Report, SolveSection};
use crate::solver::{residual_check, solve_dirichlet, SolveProblem};

pub const WORKERS_ENV: &str = "GRUSHIN_MVF_WORKERS";

#[derive(Clone, Debug, Default)]
pub struct RunOptions {
    /// Overrides the configured suites when non-empty.
    pub suites: Vec<Suite>,
    /// Overrides the configured output directory.
    pub out: Option<PathBuf>,
}

/// Runs the selected suites; `Err` only for problems that stop the run.
pub fn run(config: &RunConfig, opts: &RunOptions) -> Result<Report> {
    let requested = if opts.suites.is_empty() { &config.suites } else { &opts.suites };
    let suites = config.schedule(requested);
    let surface = config.validate(&suites)?;
    let tol = config.tolerances;
    let mut report = Report {
        meta: Meta {
            n: surface.n(),
            alpha: surface.alpha(),
            surface: surface.label().to_string(),
            seed: config.seed,
        },
        ..Default::default()
    };
    let mut solution_field: Option<Arc<dyn SurfaceField>> = None;

    for suite in suites {
        match suite {
            Suite::Identities => {
                let rows = identity_suite(&surface, config.identities.points, config.seed, tol.identity)?;
                for r in rows.iter().filter(|r| !r.pass) {
                    report.failures.push(format!("identity {} max error {:e}", r.name, r.max_err));
                }
                report.identities = Some(
                    rows.into_iter()
                        .map(|r| IdentityRow { name: r.name, max_err: r.max_err, tol: r.tol, pass: r.pass })
                        .collect(),
                );
            }
            Suite::Qsigma => {
                let q = &config.qsigma;
                let mut spec = SampleSpec::geometric(q.r_min, q.r_max, q.radii, q.directions);
                spec.seed = config.seed;
                let v = classify_harmonicity(&surface, &spec, tol.qsigma)?;
                let pass = q.expect.map_or(true, |e| e == v.classification);
                if !pass {
                    report.failures.push(format!("q_sigma classified {:?}, expected {:?}", v.classification, q.expect));
                }
                report.qsigma = Some(QsigmaSection {
                    classification: v.classification,
                    min: v.min,
                    max: v.max,
                    samples: v.samples,
                    tol: v.tol,
                    pass,
                });
            }
            Suite::Profile => {
                let p = constant_profile(&surface, &config.r_grid, tol.quadrature)?;
                if p.entries.iter().any(|e| !e.converged) {
                    report.failures.push("profile cubature hit its cell budget".into());
                }
                if config.profile.expect_constant && !p.is_constant {
                    report.failures.push(format!("c(r) spread {:e} is not flat", p.spread));
                }
                report.profile = Some(p.entries.iter().map(|e| ProfileRow { r: e.r, c_r: e.c, err: e.err }).collect());
                report.constant = Some(p.constant);
                report.profile_detail = Some(p);
            }
            Suite::Solve => {
                let sc = config.solve.as_ref().expect("validated");
                let problem = SolveProblem::new(surface.clone(), sc.domain.clone(), sc.h, sc.boundary.build()?)?;
                let sol = solve_dirichlet(&problem)?;
                let pointwise = if sc.residual_points.is_empty() {
                    None
                } else {
                    Some(residual_check(&surface, &sol, &sc.residual_points)?)
                };
                report.solve = Some(SolveSection {
                    h: sol.h(),
                    unknowns: sol.diagnostics.unknowns,
                    nnz: sol.diagnostics.nnz,
                    residual: sol.diagnostics.residual,
                    rhs_norm: sol.diagnostics.rhs_norm,
                    f_at_0: sol.node_value(&[0.0, 0.0]).filter(|_| sc.domain.level(&[0.0, 0.0]) < 0.0),
                    pointwise_residual: pointwise,
                });
                if config.output.solution_csv.is_some() {
                    report.solution_csv = Some(sol.to_csv());
                }
                solution_field = Some(Arc::new(sol.interpolant()));
            }
            Suite::Mvf => {
                let spec = config.field.as_ref().expect("validated");
                let field = match build_field(spec, &surface)? {
                    Some(f) => f,
                    None => solution_field.clone().expect("solve runs before mvf"),
                };
                let profile = match &report.profile_detail {
                    Some(p) => p.clone(),
                    None => constant_profile(&surface, &config.r_grid, tol.quadrature)?,
                };
                let opts = MvfOptions { tol: tol.mvf, quad_tol: tol.quadrature };
                let m = mvf_from_profile(&surface, field.as_ref(), profile, config.mvf.mode, &opts)?;
                for e in m.entries.iter().filter(|e| !e.pass) {
                    report.failures.push(format!(
                        "mvf at r = {}: f(0) = {}, M = {}, verdict {}",
                        e.r,
                        e.f0,
                        e.m,
                        e.verdict.as_str()
                    ));
                }
                report.constant = Some(m.constant);
                report.mvf = Some(
                    m.entries
                        .iter()
                        .map(|e| MvfRow { r: e.r, m: e.m, f0: e.f0, verdict: e.verdict, pass: e.pass })
                        .collect(),
                );
                report.mvf_detail = Some(m);
            }
            Suite::Certificate => {
                let c = subharmonicity_certificate(&surface, tol.certificate)?;
                if let Some(want) = config.certificate.expect_overall {
                    if want != c.overall {
                        report.failures.push(format!("certificate overall = {}, expected {want}", c.overall));
                    }
                }
                report.certificate = Some(c);
            }
        }
    }
    Ok(report)
}

/// Exit status for a finished or aborted run: 0 pass, 1 verdict or solver
/// failure, 2 configuration or output problem.
pub fn exit_code(outcome: &Result<Report>) -> i32 {
    match outcome {
        Ok(r) if r.passed() => 0,
        Ok(_) => 1,
        Err(Error::Solver { .. }) => 1,
        Err(_) => 2,
    }
}

/// Loads, runs and writes; returns the exit status and prints diagnostics.
pub fn run_from_path(path: &Path, opts: &RunOptions) -> i32 {
    let config = match RunConfig::load(path) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return 2;
        }
    };
    let outcome = run(&config, opts);
    let report = match &outcome {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return exit_code(&outcome);
        }
    };
    let dir = opts.out.clone().unwrap_or_else(|| config.output.dir.clone());
    let o = &config.output;
    if let Err(e) = report.write(&dir, &o.json, &o.profile_csv, o.solution_csv.as_deref()) {
        eprintln!("error: {e}");
        return 2;
    }
    for f in &report.failures {
        eprintln!("fail: {f}");
    }
    exit_code(&outcome)
}
