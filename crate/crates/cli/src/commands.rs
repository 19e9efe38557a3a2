//! The subcommands. Each builds a JSON report; writing files is shared.

use std::path::{Path, PathBuf};

use hardy_core::deltacalc::{
    distributional_check, growth_estimate_check, inf_equivalence, max_relative_gap, neg_laplacian_formula,
    random_bumps, LaplacianField,
};
use hardy_core::distfield::DistanceField;
use hardy_core::domains::ConvexityReport;
use hardy_core::export;
use hardy_core::hardyopt::{
    estimate_bm_lambda, estimate_mu, hardy_sobolev_quotient, identity_check_l2, lambda_analytic, lambda_lower_bound, remainder_table,
    vector_inequality_check, SolveOptions, TrialFunction,
};
use serde_json::{json, Map, Value};

use crate::config::{LambdaMode, RunConfig};
use crate::{reproduce, CliError, Command, EXIT_OK, EXIT_UNCONVERGED, EXIT_VIOLATION};

/// Result of a command: exit code, report, and the files written.
#[derive(Debug)]
pub struct Outcome {
    pub code: i32,
    pub summary: String,
    pub report: Value,
    pub files: Vec<PathBuf>,
}

/// Random pairs for the vector inequality in `verify`.
pub const VECTOR_TRIALS: usize = 100_000;

pub(crate) fn solve_options(cfg: &RunConfig) -> SolveOptions {
    SolveOptions {
        max_iter: cfg.max_iter,
        tol: cfg.tol,
        seed: cfg.seed,
        ..SolveOptions::default()
    }
}

pub(crate) fn build_field(cfg: &RunConfig) -> Result<DistanceField, CliError> {
    Ok(DistanceField::build(
        cfg.domain(),
        cfg.grid.resolution,
        cfg.grid.geometry,
        cfg.grid.source,
        cfg.grid.angle_tol,
    )?)
}

fn grid_json(cfg: &RunConfig, field: Option<&DistanceField>) -> Value {
    let mut g = serde_json::to_value(&cfg.grid).expect("grid spec serialises");
    if let (Some(f), Value::Object(m)) = (field, &mut g) {
        m.insert("spacing".into(), json!(f.grid.spacing));
        m.insert("dims".into(), json!(f.grid.dims));
    }
    g
}

/// Fields shared by every report.
fn envelope(cfg: &RunConfig, field: Option<&DistanceField>, kind: &str) -> Map<String, Value> {
    let mut m = Map::new();
    m.insert(
        "domain".into(),
        json!({
            "kind": cfg.domain.kind,
            "dim": cfg.domain().dim(),
            "params": cfg.domain.params,
        }),
    );
    m.insert("grid".into(), grid_json(cfg, field));
    m.insert("kind".into(), json!(kind));
    m.insert("p".into(), json!(cfg.p));
    if let Some(q) = cfg.q {
        m.insert("q".into(), json!(q));
    }
    m.insert("seed".into(), json!(cfg.seed));
    m.insert(
        "tolerances".into(),
        json!({
            "solver": cfg.tol,
            "max_iter": cfg.max_iter,
            "convexity": cfg.convexity_tol,
        }),
    );
    m
}

pub(crate) fn write_report(dir: &Path, report: &Value, files: &mut Vec<PathBuf>) -> Result<(), CliError> {
    let path = dir.join("report.json");
    let mut text = serde_json::to_string_pretty(report).expect("report serialises");
    text.push('\n');
    std::fs::write(&path, text)?;
    files.push(path);
    Ok(())
}

pub(crate) fn write_history(dir: &Path, history: &[f64], files: &mut Vec<PathBuf>) -> Result<(), CliError> {
    let path = dir.join("history.csv");
    let mut text = String::from("iter,value\n");
    for (i, v) in history.iter().enumerate() {
        text.push_str(&format!("{i},{v:e}\n"));
    }
    std::fs::write(&path, text)?;
    files.push(path);
    Ok(())
}

fn export_field(
    cfg: &RunConfig,
    dir: &Path,
    field: &DistanceField,
    name: &str,
    values: &[f64],
    files: &mut Vec<PathBuf>,
) -> Result<(), CliError> {
    let s = export::slice(&field.grid, values, cfg.grid.slice)?;
    let pgm = dir.join(format!("{name}.pgm"));
    export::write_pgm(&pgm, &s)?;
    let bin = dir.join(format!("{name}.bin"));
    export::write_binary(&bin, &field.grid, values)?;
    files.push(pgm);
    files.push(bin);
    Ok(())
}

fn masked(field: &DistanceField, f: impl Fn(usize) -> f64) -> Vec<f64> {
    (0..field.len())
        .map(|c| if field.grid.inside[c] { f(c) } else { f64::NAN })
        .collect()
}

fn convexity(cfg: &RunConfig) -> Result<ConvexityReport, CliError> {
    Ok(cfg.domain().convexity_report(cfg.convexity_resolution, cfg.convexity_tol)?)
}

pub fn execute(cmd: &Command, cfg: Option<&RunConfig>, seed: Option<u64>, dir: &Path) -> Result<Outcome, CliError> {
    if let Command::Reproduce { id } = cmd {
        return reproduce::run(id, seed.unwrap_or(0), dir);
    }
    let cfg = cfg.ok_or_else(|| CliError::Usage("this command needs --config".into()))?;
    match cmd {
        Command::Analyze => analyze(cfg, dir),
        Command::Mu => mu(cfg, dir),
        Command::Lambda => lambda(cfg, dir),
        Command::Table => table(cfg, dir),
        Command::Verify => verify(cfg, dir),
        Command::Reproduce { .. } => unreachable!(),
    }
}

fn finish(mut m: Map<String, Value>, flags: Vec<String>, code: i32, summary: String, dir: &Path, mut files: Vec<PathBuf>) -> Result<Outcome, CliError> {
    m.insert("flags".into(), json!(flags));
    let report = Value::Object(m);
    write_report(dir, &report, &mut files)?;
    Ok(Outcome {
        code,
        summary,
        report,
        files,
    })
}

fn analyze(cfg: &RunConfig, dir: &Path) -> Result<Outcome, CliError> {
    let domain = cfg.domain();
    let field = build_field(cfg)?;
    let lap = neg_laplacian_formula(&field, domain)?;
    let conv = convexity(cfg)?;
    let inf = inf_equivalence(&field, &lap, &conv);
    let (gap, compared) = max_relative_gap(&field, &lap);
    let mut files = Vec::new();
    if cfg.export {
        export_field(cfg, dir, &field, "delta", &masked(&field, |c| field.delta[c]), &mut files)?;
        export_field(cfg, dir, &field, "neg_laplacian_formula", &lap.formula, &mut files)?;
        export_field(cfg, dir, &field, "neg_laplacian_fd", &lap.fd, &mut files)?;
        export_field(cfg, dir, &field, "singular", &masked(&field, |c| field.singular[c] as u8 as f64), &mut files)?;
        export_field(cfg, dir, &field, "h_field", &masked(&field, |c| field.h_field[c]), &mut files)?;
    }
    let mut flags = Vec::new();
    if lap.check_consistency().is_err() {
        flags.push("inconsistent_cells".to_string());
    }
    if !inf.verdict_matches {
        flags.push("superharmonicity_verdict_mismatch".to_string());
    }
    let mut m = envelope(cfg, Some(&field), "analyze");
    m.insert("convexity".into(), json!(conv));
    m.insert("inf_equivalence".into(), json!(inf));
    m.insert(
        "laplacian".into(),
        json!({
            "good_cells": lap.good_count,
            "inconsistent_cells": lap.inconsistent_count,
            "inconsistent_share": lap.inconsistent_share(),
            "max_relative_gap": gap,
            "compared_cells": compared,
        }),
    );
    m.insert(
        "distance".into(),
        json!({
            "max_delta": field.max_delta(),
            "singular_fraction": field.singular_fraction(),
            "eikonal_error": field.eikonal_error,
        }),
    );
    let code = if flags.is_empty() { EXIT_OK } else { EXIT_VIOLATION };
    let summary = format!(
        "weakly_mean_convex={} H0={:.6e} inf(-Δδ)={:.6e}",
        conv.weakly_mean_convex, conv.h0, inf.inf_neg_lap
    );
    finish(m, flags, code, summary, dir, files)
}

fn mu(cfg: &RunConfig, dir: &Path) -> Result<Outcome, CliError> {
    let field = build_field(cfg)?;
    let est = estimate_mu(cfg.domain(), &field, cfg.p, &solve_options(cfg))?;
    let r = &est.report;
    let mut files = Vec::new();
    write_history(dir, &r.history, &mut files)?;
    if cfg.export {
        export_field(cfg, dir, &field, "minimizer", &masked(&field, |c| est.trial.values[c]), &mut files)?;
    }
    let mut m = envelope(cfg, Some(&field), "mu_p");
    m.insert("value".into(), json!(r.value));
    m.insert("iterations".into(), json!(r.iterations));
    m.insert("converged".into(), json!(r.converged));
    m.insert("lower_bounds".into(), json!({ "sharp": ((cfg.p - 1.0) / cfg.p).powf(cfg.p) }));
    let mut flags = r.flags.clone();
    if let Some(q) = cfg.q {
        // exponent window read in the ambient dimension of the domain
        let hs = hardy_sobolev_quotient(&field, &est.trial, cfg.p, q)?;
        m.insert(
            "hardy_sobolev".into(),
            json!({ "q": q, "value": hs, "trial": "minimizer", "dimension": field.grid.ambient_dim }),
        );
        flags.push("hardy_sobolev_ambient_dimension".to_string());
    }
    let code = if r.converged { EXIT_OK } else { EXIT_UNCONVERGED };
    let summary = format!("mu_{} = {:.8}", cfg.p, r.value);
    finish(m, flags, code, summary, dir, files)
}

fn lambda(cfg: &RunConfig, dir: &Path) -> Result<Outcome, CliError> {
    let domain = cfg.domain();
    let mut flags = Vec::new();
    let mut files = Vec::new();
    let mut code = EXIT_OK;
    let (mut m, value, contract) = match cfg.mode {
        LambdaMode::Analytic => {
            let l = lambda_analytic(domain, cfg.p, cfg.convexity_resolution, cfg.convexity_tol)?;
            let mut m = envelope(cfg, None, "lambda_lower");
            m.insert("mode".into(), json!("analytic"));
            m.insert("witness_point".into(), json!(l.witness_point));
            m.insert("witness_delta".into(), json!(l.witness_delta));
            m.insert("convexity".into(), json!(l.report));
            (m, l.value, l.contract)
        }
        LambdaMode::Grid => {
            let field = build_field(cfg)?;
            let lap = neg_laplacian_formula(&field, domain)?;
            let conv = convexity(cfg)?;
            let l = lambda_lower_bound(&field, &lap, &conv, domain.n(), cfg.p)?;
            let mut m = envelope(cfg, Some(&field), "lambda_lower");
            m.insert("mode".into(), json!("grid"));
            m.insert("witness_point".into(), json!(l.witness_point));
            m.insert("witness_delta".into(), json!(l.witness_delta));
            m.insert("convexity".into(), json!(conv));
            if cfg.p == 2.0 {
                let bm = estimate_bm_lambda(domain, &field, &solve_options(cfg))?;
                write_history(dir, &bm.history, &mut files)?;
                if !bm.converged {
                    code = EXIT_UNCONVERGED;
                }
                if !(bm.value >= 0.95 * l.value) {
                    flags.push("bm_lambda_below_lower_bound".to_string());
                }
                m.insert("bm_lambda".into(), json!(bm));
            }
            (m, l.value, l.contract)
        }
    };
    m.insert("value".into(), json!(value));
    m.insert("lower_bounds".into(), json!({ "mean_curvature": contract }));
    if value < contract - 1e-9 {
        flags.push("below_mean_curvature_bound".to_string());
    }
    if !flags.is_empty() {
        code = EXIT_VIOLATION;
    }
    let summary = format!("lambda = {value:.10}");
    finish(m, flags, code, summary, dir, files)
}

fn laplacian_if_needed(cfg: &RunConfig, field: &DistanceField) -> Result<Option<LaplacianField>, CliError> {
    let analytic_ok = lambda_analytic(cfg.domain(), 2.0, 16, cfg.convexity_tol).is_ok();
    if analytic_ok {
        Ok(None)
    } else {
        Ok(Some(neg_laplacian_formula(field, cfg.domain())?))
    }
}

fn table(cfg: &RunConfig, dir: &Path) -> Result<Outcome, CliError> {
    let field = build_field(cfg)?;
    let lap = laplacian_if_needed(cfg, &field)?;
    let t = remainder_table(cfg.domain(), &field, lap.as_ref())?;
    let mut m = envelope(cfg, Some(&field), "remainder_table");
    m.insert("table".into(), json!(t));
    let summary = t
        .entries()
        .iter()
        .map(|(k, v)| format!("{k}={v:.6}"))
        .collect::<Vec<_>>()
        .join(" ");
    finish(m, t.flags.clone(), EXIT_OK, summary, dir, Vec::new())
}

fn verify(cfg: &RunConfig, dir: &Path) -> Result<Outcome, CliError> {
    let domain = cfg.domain();
    let field = build_field(cfg)?;
    let lap = neg_laplacian_formula(&field, domain)?;
    let conv = convexity(cfg)?;
    let h = field.grid.spacing;
    let rmax = 0.5 * field.max_delta();
    let mut failed = Vec::new();

    let bumps = random_bumps(domain, &field, cfg.trials, cfg.seed, (4.0 * h).min(rmax), rmax)?;
    let dist = distributional_check(domain, &field, &lap, &bumps)?;
    if dist.iter().any(|r| !r.passed) {
        failed.push("distributional".to_string());
    }

    let mut ident = Vec::new();
    for b in &bumps {
        let t = TrialFunction::from_bump(&field, b, cfg.seed);
        let r = identity_check_l2(&t, &field)?;
        // first-order quadrature contract, relative to the energy
        let tol = 2.0 * h / b.radius;
        ident.push(json!({ "radius": b.radius, "relative": r.relative, "tolerance": tol, "passed": r.relative <= tol }));
        if r.relative > tol && !failed.contains(&"identity".to_string()) {
            failed.push("identity".to_string());
        }
    }

    let vec_viol = vector_inequality_check(cfg.p, VECTOR_TRIALS, cfg.seed)?;
    if vec_viol > 0 {
        failed.push("vector_inequality".to_string());
    }

    let growth = if conv.h0 >= 0.0 {
        let g = growth_estimate_check(&field, &lap, cfg.p, conv.h0, domain.n())?;
        if g.violations > 0 {
            failed.push("growth".to_string());
        }
        json!(g)
    } else {
        json!({ "skipped": "H0 < 0" })
    };

    let mut m = envelope(cfg, Some(&field), "verify");
    m.insert("convexity".into(), json!(conv));
    m.insert("distributional".into(), json!(dist));
    m.insert("identity".into(), json!(ident));
    m.insert("vector_inequality".into(), json!({ "trials": VECTOR_TRIALS, "violations": vec_viol }));
    m.insert("growth".into(), growth);
    m.insert("passed".into(), json!(failed.is_empty()));
    let code = if failed.is_empty() { EXIT_OK } else { EXIT_VIOLATION };
    let summary = if failed.is_empty() {
        "all checks passed".to_string()
    } else {
        format!("failed: {}", failed.join(", "))
    };
    finish(m, failed, code, summary, dir, Vec::new())
}
