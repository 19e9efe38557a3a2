//! Pinned example runs and their stored expectations.

use std::path::Path;

use hardy_core::deltacalc::neg_laplacian_formula;
use hardy_core::distfield::{DeltaSource, DistanceField};
use hardy_core::domains::Domain;
use hardy_core::grid::Geometry;
use hardy_core::hardyopt::{
    estimate_mu, lambda_analytic, lambda_lower_bound, minimal_surface_pointwise, rayleigh_quotient, SolveOptions,
    TrialFunction,
};
use serde::Serialize;
use serde_json::json;

use crate::commands::{write_history, write_report, Outcome};
use crate::{CliError, EXIT_OK, EXIT_VIOLATION};

pub const IDS: [&str; 6] = [
    "ball",
    "critical-torus",
    "thick-torus",
    "annulus-failure",
    "minimal-slab",
    "square-sharpness",
];

/// Profile samples for analytic mode.
const PROFILE_RES: usize = 720;
/// Boundary-layer exponents `1/2 + ε`.
pub const LAYER_EPS: [f64; 4] = [0.2, 0.1, 0.05, 0.01];
/// Inner radii of the annulus family.
pub const ANNULUS_INNER: [f64; 3] = [0.2, 0.1, 0.05];

#[derive(Debug, Clone, Serialize)]
pub struct Quantity {
    pub name: String,
    pub value: f64,
    pub expected: String,
    pub passed: bool,
}

fn near(name: &str, value: f64, target: f64, tol: f64) -> Quantity {
    Quantity {
        name: name.into(),
        value,
        expected: format!("{target} ± {tol:e}"),
        passed: (value - target).abs() <= tol,
    }
}

fn at_least(name: &str, value: f64, bound: f64) -> Quantity {
    Quantity {
        name: name.into(),
        value,
        expected: format!("≥ {bound}"),
        passed: value >= bound,
    }
}

fn at_most(name: &str, value: f64, bound: f64) -> Quantity {
    Quantity {
        name: name.into(),
        value,
        expected: format!("≤ {bound}"),
        passed: value <= bound,
    }
}

fn field(d: &Domain, res: usize) -> Result<DistanceField, CliError> {
    Ok(DistanceField::build(d, res, Geometry::Cartesian, DeltaSource::Analytic, 0.5)?)
}

pub fn run(id: &str, seed: u64, dir: &Path) -> Result<Outcome, CliError> {
    let mut q = Vec::new();
    let mut history = None;
    match id {
        "ball" => {
            let l = lambda_analytic(&Domain::ball(3, 1.0)?, 2.0, PROFILE_RES, 1e-2)?;
            q.push(near("lambda_analytic_n2_R1", l.value, 4.0, 1e-6));
            let disk = Domain::ball(2, 1.0)?;
            let f = field(&disk, 256)?;
            let lap = neg_laplacian_formula(&f, &disk)?;
            let conv = disk.convexity_report(256, 1e-2)?;
            let g = lambda_lower_bound(&f, &lap, &conv, 1, 2.0)?;
            q.push(near("lambda_grid_n1_R1", g.value, 2.0, 0.04));
        }
        "critical-torus" => {
            let l = lambda_analytic(&Domain::torus(1.0, 2.0)?, 2.0, PROFILE_RES, 1e-2)?;
            q.push(near("lambda", l.value, 1.0, 1e-6));
            q.push(near("min_sampled_H", l.report.min_sampled_h, 0.0, 1e-9));
        }
        "thick-torus" => {
            let l = lambda_analytic(&Domain::torus(1.0, 3.0)?, 2.0, PROFILE_RES, 1e-2)?;
            let h0 = l.report.min_sampled_h;
            q.push(near("min_sampled_H", h0, 0.5, 1e-9));
            q.push(at_least("lambda", l.value, h0 * h0));
        }
        "annulus-failure" => {
            let mut prev = f64::INFINITY;
            let mut last = f64::NAN;
            for (i, &ri) in ANNULUS_INNER.iter().enumerate() {
                let a = Domain::annulus(2, ri, 1.0)?;
                let est = estimate_mu(&a, &field(&a, 400)?, 2.0, &SolveOptions { seed, ..SolveOptions::default() })?;
                let v = est.report.value;
                if i > 0 {
                    q.push(at_most(&format!("mu_r{ri}_below_previous"), v, prev - 1e-12));
                }
                prev = v;
                last = v;
            }
            q.push(at_most("mu_r0.05", last, 0.25));
        }
        "minimal-slab" => {
            let l = lambda_analytic(&Domain::catenoid_slab(1.0, 2.0)?, 2.0, PROFILE_RES, 1e-9)?;
            let k0 = l.report.kappa0;
            q.push(at_least("lambda", l.value, k0 * k0 - 1e-9));
            q.push(near("pointwise_violations", minimal_surface_pointwise(10_000, seed) as f64, 0.0, 0.0));
        }
        "square-sharpness" => {
            let sq = Domain::cuboid(vec![1.0, 1.0])?;
            let f = field(&sq, 128)?;
            let est = estimate_mu(&sq, &f, 2.0, &SolveOptions { seed, ..SolveOptions::default() })?;
            q.push(at_least("mu", est.report.value, 0.25));
            q.push(at_most("mu", est.report.value, 0.32));
            history = Some(est.report.history);
            let mut prev = f64::INFINITY;
            for e in LAYER_EPS {
                let t = TrialFunction::boundary_layer(&f, 0.5 + e, f64::INFINITY)?;
                let v = rayleigh_quotient(&t, &f, 2.0)?;
                q.push(at_most(&format!("layer_quotient_eps{e}"), v, prev));
                prev = v;
            }
            q.push(at_most("layer_quotient_eps0.01", prev, 0.28));
        }
        other => return Err(CliError::Usage(format!("unknown example {other:?}"))),
    }
    let failed: Vec<String> = q.iter().filter(|x| !x.passed).map(|x| x.name.clone()).collect();
    let report = json!({
        "kind": "reproduce",
        "example": id,
        "seed": seed,
        "quantities": q,
        "passed": failed.is_empty(),
        "flags": failed,
    });
    let mut files = Vec::new();
    if let Some(h) = history {
        write_history(dir, &h, &mut files)?;
    }
    write_report(dir, &report, &mut files)?;
    let summary = if failed.is_empty() {
        format!("{id}: all quantities match")
    } else {
        format!("{id}: mismatch in {}", failed.join(", "))
    };
    Ok(Outcome {
        code: if failed.is_empty() { EXIT_OK } else { EXIT_VIOLATION },
        summary,
        report,
        files,
    })
}
