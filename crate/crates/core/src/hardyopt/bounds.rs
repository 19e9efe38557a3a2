//! Curvature lower bounds `λ(n,Ω) = inf (-Δδ)/(2δ)` and the general-`p`
//! variant `((p-1)/p)^{p-1} inf (-Δδ)/δ^{p-1}`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::deltacalc::LaplacianField;
use crate::distfield::DistanceField;
use crate::domains::{ConvexityReport, Domain};
use crate::numeric::golden_min;
use crate::{Error, Result};

#[derive(Debug, Clone, Serialize)]
pub struct LambdaBound {
    pub value: f64,
    pub p: f64,
    pub witness_point: Vec<f64>,
    pub witness_delta: f64,
    /// `(2/n)H0²` for `p = 2`, `(p/n^{p-1})H0^p` in general.
    pub contract: f64,
    pub cells: usize,
}

fn prefactor(p: f64) -> f64 {
    ((p - 1.0) / p).powf(p - 1.0)
}

fn contract(p: f64, n: usize, h0: f64) -> f64 {
    p / (n as f64).powf(p - 1.0) * h0.max(0.0).powf(p)
}

fn require_convex(report: &ConvexityReport) -> Result<()> {
    if !report.weakly_mean_convex {
        return Err(Error::precondition(format!(
            "domain is not weakly mean convex (H0 = {:.6e})",
            report.h0
        )));
    }
    Ok(())
}

/// Grid mode: infimum over good nodes of the curvature formula.
pub fn lambda_lower_bound(
    field: &DistanceField,
    lap: &LaplacianField,
    report: &ConvexityReport,
    n: usize,
    p: f64,
) -> Result<LambdaBound> {
    require_convex(report)?;
    if !(p > 1.0) {
        return Err(Error::domain(format!("p must exceed 1, got {p}")));
    }
    let mut best = (f64::INFINITY, usize::MAX);
    let mut cells = 0;
    for c in 0..field.len() {
        let (v, d) = (lap.formula[c], field.delta[c]);
        if !field.is_good(c) || !v.is_finite() || !(d > 0.0) {
            continue;
        }
        cells += 1;
        let q = v / d.powf(p - 1.0);
        if q < best.0 {
            best = (q, c);
        }
    }
    if best.1 == usize::MAX {
        return Err(Error::precondition("no good cells carry the curvature formula"));
    }
    Ok(LambdaBound {
        value: prefactor(p) * best.0,
        p,
        witness_point: field.grid.world(best.1),
        witness_delta: field.delta[best.1],
        contract: contract(p, n, report.h0),
        cells,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct AnalyticLambda {
    pub value: f64,
    pub p: f64,
    pub witness_point: Vec<f64>,
    pub witness_delta: f64,
    pub contract: f64,
    pub samples: usize,
    pub report: ConvexityReport,
}

/// Analytic mode: closed-form curvatures along a boundary profile, each
/// paired with `δ ∈ (0, ρ̄(y))` where `ρ̄` is the closed-form ridge distance.
/// The `δ` search is a log grid from `10⁻⁹ρ̄` refined by golden section.
pub fn lambda_analytic(domain: &Domain, p: f64, resolution: usize, tol: f64) -> Result<AnalyticLambda> {
    if !(p > 1.0) {
        return Err(Error::domain(format!("p must exceed 1, got {p}")));
    }
    let bs = domain.profile_sample(resolution)?;
    let report = crate::domains::sampling::report_from_sampling(&bs, tol);
    require_convex(&report)?;
    let mut best = (f64::INFINITY, 0usize, 0.0);
    for (i, s) in bs.samples.iter().enumerate() {
        let rho = domain.ridge_distance(&s.point).ok_or_else(|| {
            Error::precondition(format!("{} has no closed-form ridge distance", domain.kind_name()))
        })?;
        let kappas = s.kappas.entries();
        let mean: f64 = kappas.iter().sum();
        // κ/(1-δκ) = κ + δκ²/(1-δκ): keeps H exact as δ → 0, where the
        // direct sum cancels (the critical torus has H = 0 on its inner equator)
        let g = |d: f64| -> f64 {
            let mut rest = 0.0;
            for k in kappas {
                let w = 1.0 - d * k;
                if w <= 0.0 {
                    return f64::INFINITY;
                }
                rest += k * k / w;
            }
            (mean + d * rest) / d.powf(p - 1.0)
        };
        const STEPS: usize = 160;
        let (lo, hi) = (1e-9 * rho, rho * (1.0 - 1e-9));
        let ratio = (hi / lo).ln();
        let ds: Vec<f64> = (0..=STEPS).map(|j| lo * (ratio * j as f64 / STEPS as f64).exp()).collect();
        let (j, _) = ds
            .iter()
            .map(|&d| g(d))
            .enumerate()
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .unwrap();
        let (a, b) = (ds[j.saturating_sub(1)], ds[(j + 1).min(STEPS)]);
        let (mut d, mut v) = golden_min(g, a, b, 120);
        if g(ds[j]) < v {
            (d, v) = (ds[j], g(ds[j]));
        }
        if v < best.0 {
            best = (v, i, d);
        }
    }
    Ok(AnalyticLambda {
        value: prefactor(p) * best.0,
        p,
        witness_point: bs.samples[best.1].point.clone(),
        witness_delta: best.2,
        contract: contract(p, domain.n(), report.h0),
        samples: bs.samples.len(),
        report,
    })
}

/// Counts random `(κ, δ)` with `κδ < 1` violating `κ²/(1-κ²δ²) ≥ κ²`.
pub fn minimal_surface_pointwise(samples: usize, seed: u64) -> usize {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..samples)
        .filter(|_| {
            let k: f64 = rng.random_range(1e-3..10.0);
            let d: f64 = rng.random_range(0.0..1.0) / k;
            let k2 = k * k;
            !(k2 / (1.0 - k2 * d * d) >= k2)
        })
        .count()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::deltacalc::neg_laplacian_formula;
    use crate::distfield::DeltaSource;
    use crate::grid::Geometry;

    #[test]
    fn ball_constants() {
        let b = Domain::ball(3, 1.0).unwrap();
        let l = lambda_analytic(&b, 2.0, 256, 1e-2).unwrap();
        assert!((l.value - 4.0).abs() < 1e-9, "{}", l.value);
        assert!((l.witness_delta - 0.5).abs() < 1e-4);
        let b = Domain::ball(2, 2.0).unwrap();
        let l = lambda_analytic(&b, 2.0, 64, 1e-2).unwrap();
        assert!((l.value - 0.5).abs() < 1e-9);
        assert!(l.value >= l.contract);
    }

    #[test]
    fn critical_torus_is_one() {
        let t = Domain::torus(1.0, 2.0).unwrap();
        let l = lambda_analytic(&t, 2.0, 720, 1e-2).unwrap();
        assert!((l.value - 1.0).abs() < 1e-9, "{}", l.value);
        assert!(l.value >= 1.0);
    }

    #[test]
    fn annulus_is_rejected() {
        let a = Domain::annulus(2, 0.5, 1.0).unwrap();
        assert!(matches!(lambda_analytic(&a, 2.0, 64, 1e-2), Err(Error::Precondition(_))));
    }

    #[test]
    fn grid_mode_on_disk() {
        let d = Domain::ball(2, 1.0).unwrap();
        let f = DistanceField::build(&d, 128, Geometry::Cartesian, DeltaSource::Analytic, 0.5).unwrap();
        let lap = neg_laplacian_formula(&f, &d).unwrap();
        let rep = d.convexity_report(64, 1e-2).unwrap();
        let l = lambda_lower_bound(&f, &lap, &rep, 1, 2.0).unwrap();
        assert!((l.value - 2.0).abs() < 0.04, "{}", l.value);
        let l3 = lambda_lower_bound(&f, &lap, &rep, 1, 3.0).unwrap();
        assert!(l3.value >= l3.contract);
    }

    #[test]
    fn pointwise_minimal_surface_bound() {
        assert_eq!(minimal_surface_pointwise(10_000, 3), 0);
    }
}
