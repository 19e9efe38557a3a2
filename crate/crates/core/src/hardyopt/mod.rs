//! Hardy quotients and the constants built from them: `μ_p`, the
//! Brezis–Marcus `Λ`, curvature lower bounds, remainder tables and the
//! identity/inequality checks.

pub mod bounds;
pub mod checks;
pub mod descent;
pub mod eigen;
pub mod forms;
pub mod table;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::deltacalc::Bump;
use crate::distfield::{DistanceField, Stage};
use crate::domains::Domain;
use crate::{Error, Result};

pub use bounds::{lambda_analytic, lambda_lower_bound, minimal_surface_pointwise, AnalyticLambda, LambdaBound};
pub use checks::{
    corrected_inequality, corrected_inequality_check, hardy_sobolev_quotient, identity_check_l2,
    vector_inequality_check, CorrectedReport, IdentityResidual,
};
pub use eigen::EigenOptions;
pub use forms::{check_admissible, energy_p, hardy_p, weighted_p, Discretization};
pub use table::{remainder_table, RemainderTable, J0};

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "snake_case", tag = "type")]
pub enum TrialKind {
    EigenIterate,
    BoundaryLayer { exponent: f64, cutoff: f64 },
    RandomBump { seed: u64 },
}

/// Node values of a compactly supported trial function.
#[derive(Debug, Clone)]
pub struct TrialFunction {
    pub values: Vec<f64>,
    pub kind: TrialKind,
}

impl TrialFunction {
    /// `min(δ, cutoff)^exponent` on the active nodes; `cutoff = ∞` gives a
    /// pure power of `δ`.
    pub fn boundary_layer(field: &DistanceField, exponent: f64, cutoff: f64) -> Result<Self> {
        if !(exponent > 0.0) || !(cutoff > 0.0) {
            return Err(Error::domain(format!(
                "boundary layer needs positive exponent and cutoff, got {exponent}, {cutoff}"
            )));
        }
        let disc = Discretization::new(field)?;
        let x: Vec<f64> = disc.delta.iter().map(|d| d.min(cutoff).powf(exponent)).collect();
        Ok(Self {
            values: disc.scatter(&x, field.len()),
            kind: TrialKind::BoundaryLayer { exponent, cutoff },
        })
    }

    /// Node values of a bump, zeroed off the active nodes.
    pub fn from_bump(field: &DistanceField, bump: &Bump, seed: u64) -> Self {
        let grid = &field.grid;
        let values = (0..grid.len())
            .map(|c| {
                if forms::carries_unknown(field, c) {
                    bump.value(&grid.coords(c))
                } else {
                    0.0
                }
            })
            .collect();
        Self {
            values,
            kind: TrialKind::RandomBump { seed },
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum QuotientKind {
    MuP,
    BmLambda,
    LambdaLower,
    HsQuotient,
}

#[derive(Debug, Clone, Serialize)]
pub struct QuotientReport {
    pub value: f64,
    pub p: f64,
    pub kind: QuotientKind,
    pub iterations: usize,
    pub history: Vec<f64>,
    pub grid_resolution: f64,
    pub seed: u64,
    pub converged: bool,
    pub flags: Vec<String>,
}

#[derive(Debug, Clone, Copy)]
pub struct SolveOptions {
    pub max_iter: usize,
    pub tol: f64,
    pub seed: u64,
    pub block: usize,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            max_iter: 500,
            tol: 1e-8,
            seed: 0,
            block: 6,
        }
    }
}

impl SolveOptions {
    fn eigen(&self) -> EigenOptions {
        EigenOptions {
            block: self.block,
            tol: self.tol,
            max_iter: self.max_iter,
        }
    }
}

/// `Σ vol·|∇⁺f|^p / Σ vol·|f/δ|^p`.
pub fn rayleigh_quotient(f: &TrialFunction, field: &DistanceField, p: f64) -> Result<f64> {
    if !(p > 1.0) {
        return Err(Error::domain(format!("p must exceed 1, got {p}")));
    }
    check_admissible(field, &f.values)?;
    let den = hardy_p(field, &f.values, p);
    if den == 0.0 {
        return Err(Error::domain("trial function vanishes identically"));
    }
    Ok(energy_p(field, &f.values, p) / den)
}

fn require_complete(field: &DistanceField) -> Result<()> {
    if field.stage < Stage::Complete {
        return Err(Error::precondition("distance field is not complete"));
    }
    Ok(())
}

/// `δ^{1/2}` followed by seeded multiplicative perturbations of it.
fn start_block(disc: &Discretization, opts: &SolveOptions) -> Vec<Vec<f64>> {
    let base: Vec<f64> = disc.delta.iter().map(|d| d.sqrt()).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut out = vec![base.clone()];
    for _ in 1..opts.block.max(1) {
        out.push(base.iter().map(|b| b * rng.random_range(0.5..1.5)).collect());
    }
    out
}

#[derive(Debug, Clone)]
pub struct MuEstimate {
    pub report: QuotientReport,
    pub trial: TrialFunction,
}

/// Discrete `μ_p`: the smallest generalized eigenvalue for `p = 2`, the best
/// descent value (an upper bound on the discrete infimum) otherwise.
pub fn estimate_mu(domain: &Domain, field: &DistanceField, p: f64, opts: &SolveOptions) -> Result<MuEstimate> {
    require_complete(field)?;
    if !(p > 1.0) {
        return Err(Error::domain(format!("p must exceed 1, got {p}")));
    }
    let _ = domain;
    let disc = Discretization::new(field)?;
    let mut flags = Vec::new();
    let (value, vector, history, iterations, converged) = if p == 2.0 {
        let a = disc.stiffness(field);
        let m = disc.hardy_mass();
        let r = eigen::smallest_generalized(&a, &m, start_block(&disc, opts), opts.eigen())
            .ok_or_else(|| Error::precondition("stiffness matrix is not positive definite"))?;
        (r.value, r.vector, r.history, r.iterations, r.converged)
    } else {
        flags.push("upper_bound".to_string());
        let start: Vec<f64> = disc.delta.iter().map(|d| d.powf((p - 1.0) / p)).collect();
        let r = descent::minimize_quotient(field, &disc, p, start, opts.max_iter, opts.tol);
        let x = disc.gather(&r.values);
        (r.value, x, r.history, r.iterations, r.converged)
    };
    if !converged {
        flags.push("unconverged".to_string());
    }
    Ok(MuEstimate {
        report: QuotientReport {
            value,
            p,
            kind: QuotientKind::MuP,
            iterations,
            history,
            grid_resolution: field.grid.spacing,
            seed: opts.seed,
            converged,
            flags,
        },
        trial: TrialFunction {
            values: disc.scatter(&vector, field.len()),
            kind: TrialKind::EigenIterate,
        },
    })
}

/// Smallest eigenvalue of `∫|∇f|² - ¼∫f²/δ²` against `∫f²`. When the form is
/// not positive definite the report carries a `breakdown` flag and a NaN value.
pub fn estimate_bm_lambda(domain: &Domain, field: &DistanceField, opts: &SolveOptions) -> Result<QuotientReport> {
    require_complete(field)?;
    let _ = domain;
    let disc = Discretization::new(field)?;
    let shift: Vec<f64> = disc.hardy_mass().iter().map(|w| -0.25 * w).collect();
    let a = disc.stiffness(field).add_diagonal(&shift);
    let mut report = QuotientReport {
        value: f64::NAN,
        p: 2.0,
        kind: QuotientKind::BmLambda,
        iterations: 0,
        history: Vec::new(),
        grid_resolution: field.grid.spacing,
        seed: opts.seed,
        converged: false,
        flags: Vec::new(),
    };
    match eigen::smallest_generalized(&a, &disc.volume, start_block(&disc, opts), opts.eigen()) {
        None => report.flags.push("breakdown".to_string()),
        Some(r) => {
            report.value = r.value;
            report.history = r.history;
            report.iterations = r.iterations;
            report.converged = r.converged;
            if !r.converged {
                report.flags.push("unconverged".to_string());
            }
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distfield::DeltaSource;
    use crate::grid::Geometry;

    fn field(d: &Domain, res: usize) -> DistanceField {
        DistanceField::build(d, res, Geometry::Cartesian, DeltaSource::Analytic, 0.5).unwrap()
    }

    #[test]
    fn zero_trial_is_rejected() {
        let d = Domain::ball(2, 1.0).unwrap();
        let f = field(&d, 16);
        let t = TrialFunction {
            values: vec![0.0; f.len()],
            kind: TrialKind::EigenIterate,
        };
        assert!(matches!(rayleigh_quotient(&t, &f, 2.0), Err(Error::Domain(_))));
    }

    #[test]
    fn sine_product_exceeds_quarter() {
        let d = Domain::cuboid(vec![1.0, 1.0]).unwrap();
        let f = field(&d, 64);
        let g = &f.grid;
        let mut values = vec![0.0; f.len()];
        for c in 0..f.len() {
            if g.active[c] {
                let x = g.coords(c);
                values[c] = (std::f64::consts::PI * x[0]).sin() * (std::f64::consts::PI * x[1]).sin();
            }
        }
        let t = TrialFunction {
            values,
            kind: TrialKind::EigenIterate,
        };
        assert!(rayleigh_quotient(&t, &f, 2.0).unwrap() > 0.25);
    }

    #[test]
    fn eigen_value_matches_its_vector() {
        let d = Domain::ball(2, 1.0).unwrap();
        let f = field(&d, 32);
        let est = estimate_mu(&d, &f, 2.0, &SolveOptions::default()).unwrap();
        assert!(est.report.converged);
        let q = rayleigh_quotient(&est.trial, &f, 2.0).unwrap();
        assert!((q - est.report.value).abs() < 1e-6 * q, "{q} {}", est.report.value);
        assert!(est.report.value > 0.25);
    }

    #[test]
    fn bm_form_on_disk_is_definite() {
        let d = Domain::ball(2, 1.0).unwrap();
        let f = field(&d, 32);
        let bm = estimate_bm_lambda(&d, &f, &SolveOptions::default()).unwrap();
        assert!(bm.flags.is_empty(), "{:?}", bm.flags);
        assert!(bm.value > 0.0);
    }
}
