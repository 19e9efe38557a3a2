//! The `L²` Hardy identity, the elementary vector inequality, the corrected
//! inequality for negative mean curvature and the Hardy–Sobolev quotient.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::forms::{check_admissible, energy_p, hardy_p, weighted_p};
use super::TrialFunction;
use crate::deltacalc::random_bumps;
use crate::distfield::DistanceField;
use crate::domains::{ConvexityReport, Domain};
use crate::numeric::pairwise_sum;
use crate::{Error, Result};

#[derive(Debug, Clone, Serialize)]
pub struct IdentityResidual {
    /// `∫|∇f|² - ¼∫f²/δ²` with the forward-difference energy.
    pub lhs: f64,
    /// `∫|∇f - f∇δ/(2δ)|²` with central differences and exact `∇δ`.
    pub square_term: f64,
    /// `∫∇δ·∇(f²/(2δ))`.
    pub cross_term: f64,
    pub residual: f64,
    pub energy: f64,
    pub relative: f64,
}

fn central_gradient(field: &DistanceField, f: &[f64], c: usize) -> Vec<f64> {
    let grid = &field.grid;
    (0..grid.ndim())
        .map(|a| {
            let up = grid.neighbor(c, a, 1).map_or(0.0, |n| f[n]);
            let dn = grid.neighbor(c, a, -1).map_or(0.0, |n| f[n]);
            (up - dn) / (2.0 * grid.spacing)
        })
        .collect()
}

/// Both sides of the `L²` identity under midpoint quadrature.
pub fn identity_check_l2(f: &TrialFunction, field: &DistanceField) -> Result<IdentityResidual> {
    check_admissible(field, &f.values)?;
    let grid = &field.grid;
    let v = &f.values;
    let energy = energy_p(field, v, 2.0);
    let lhs = energy - 0.25 * hardy_p(field, v, 2.0);
    let mut sq = Vec::new();
    let mut cross = Vec::new();
    for c in 0..grid.len() {
        if !grid.inside[c] || v[c] == 0.0 && central_gradient(field, v, c).iter().all(|g| *g == 0.0) {
            continue;
        }
        let g = central_gradient(field, v, c);
        let nu = field.normal_direction(c).unwrap_or_else(|| field.gradient(c).to_vec());
        let (fc, d) = (v[c], field.delta[c]);
        let vol = grid.cell_volume(c);
        let s: f64 = g.iter().zip(&nu).map(|(gi, ni)| (gi - fc * ni / (2.0 * d)).powi(2)).sum();
        let gn: f64 = g.iter().zip(&nu).map(|(gi, ni)| gi * ni).sum();
        let nn: f64 = nu.iter().map(|x| x * x).sum();
        sq.push(vol * s);
        cross.push(vol * (fc * gn / d - fc * fc * nn / (2.0 * d * d)));
    }
    let (square_term, cross_term) = (pairwise_sum(&sq), pairwise_sum(&cross));
    let residual = (lhs - square_term - cross_term).abs();
    Ok(IdentityResidual {
        lhs,
        square_term,
        cross_term,
        residual,
        energy,
        relative: if energy > 0.0 { residual / energy } else { 0.0 },
    })
}

/// Violations of `|X|^p - |Y|^p ≥ p|Y|^{p-2}⟨X-Y, Y⟩` over random pairs in
/// dimensions 2–4, up to rounding.
pub fn vector_inequality_check(p: f64, trials: usize, seed: u64) -> Result<usize> {
    if !(p > 1.0) {
        return Err(Error::domain(format!("p must exceed 1, got {p}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut bad = 0;
    for _ in 0..trials {
        let d = rng.random_range(2..=4);
        let sx: f64 = 10f64.powf(rng.random_range(-2.0..2.0));
        let sy: f64 = 10f64.powf(rng.random_range(-2.0..2.0));
        let x: Vec<f64> = (0..d).map(|_| sx * rng.random_range(-1.0..1.0)).collect();
        let y: Vec<f64> = (0..d).map(|_| sy * rng.random_range(-1.0..1.0)).collect();
        if !vector_inequality_holds(&x, &y, p) {
            bad += 1;
        }
    }
    Ok(bad)
}

pub fn vector_inequality_holds(x: &[f64], y: &[f64], p: f64) -> bool {
    let nx = x.iter().map(|v| v * v).sum::<f64>().sqrt();
    let ny = y.iter().map(|v| v * v).sum::<f64>().sqrt();
    let lhs = nx.powf(p) - ny.powf(p);
    let rhs = if ny == 0.0 {
        0.0
    } else {
        let inner: f64 = x.iter().zip(y).map(|(a, b)| (a - b) * b).sum();
        p * ny.powf(p - 2.0) * inner
    };
    lhs >= rhs - 1e-12 * (nx.powf(p) + ny.powf(p))
}

/// `(∫|∇f|^p + ((p-1)/p)^{p-1}|H0|∫|f|^p/δ^{p-1},  ((p-1)/p)^p ∫|f/δ|^p)`.
pub fn corrected_inequality(field: &DistanceField, f: &[f64], p: f64, h0: f64) -> (f64, f64) {
    let a = (p - 1.0) / p;
    let lhs = energy_p(field, f, p) + a.powf(p - 1.0) * h0.abs() * weighted_p(field, f, p, p - 1.0);
    (lhs, a.powf(p) * hardy_p(field, f, p))
}

#[derive(Debug, Clone, Serialize)]
pub struct CorrectedReport {
    pub violations: usize,
    pub trials: usize,
    /// Smallest `lhs/rhs` seen.
    pub min_ratio: f64,
    /// Relative quadrature tolerance on `rhs`.
    pub tolerance: f64,
}

/// Relative slack granted to the corrected inequality for quadrature error.
pub const CORRECTED_TOL: f64 = 1e-3;

/// The corrected inequality on seeded random bumps; requires `H0 < 0`.
pub fn corrected_inequality_check(
    domain: &Domain,
    field: &DistanceField,
    report: &ConvexityReport,
    p: f64,
    trials: usize,
    seed: u64,
) -> Result<CorrectedReport> {
    if !(report.h0 < 0.0) {
        return Err(Error::precondition(format!(
            "H0 = {:.4e} is not negative; the plain inequality applies",
            report.h0
        )));
    }
    if !(p > 1.0) {
        return Err(Error::domain(format!("p must exceed 1, got {p}")));
    }
    let h = field.grid.spacing;
    let r_max = (0.9 * field.max_delta()).max(4.0 * h);
    let bumps = random_bumps(domain, field, trials, seed, 4.0 * h, r_max)?;
    let mut violations = 0;
    let mut min_ratio = f64::INFINITY;
    for b in &bumps {
        let t = TrialFunction::from_bump(field, b, seed);
        let (lhs, rhs) = corrected_inequality(field, &t.values, p, report.h0);
        if rhs == 0.0 {
            continue;
        }
        min_ratio = min_ratio.min(lhs / rhs);
        if lhs < rhs * (1.0 - CORRECTED_TOL) {
            violations += 1;
        }
    }
    Ok(CorrectedReport {
        violations,
        trials: bumps.len(),
        min_ratio,
        tolerance: CORRECTED_TOL,
    })
}

/// `(∫|∇f|^p - ((p-1)/p)^p∫|f/δ|^p) / (∫δ^{-q+d(q-p)/p}|f|^q)^{p/q}` with `d`
/// the ambient dimension.
pub fn hardy_sobolev_quotient(field: &DistanceField, f: &TrialFunction, p: f64, q: f64) -> Result<f64> {
    let d = field.grid.ambient_dim as f64;
    if !(2.0 <= p && p < d) {
        return Err(Error::domain(format!("need 2 ≤ p < {d}, got p = {p}")));
    }
    let crit = p * d / (d - p);
    if !(p < q && q <= crit * (1.0 + 1e-12)) {
        return Err(Error::domain(format!("need {p} < q ≤ {crit}, got q = {q}")));
    }
    check_admissible(field, &f.values)?;
    let v = &f.values;
    let num = energy_p(field, v, p) - ((p - 1.0) / p).powf(p) * hardy_p(field, v, p);
    let den = weighted_p(field, v, q, q - d * (q - p) / p).powf(p / q);
    if den == 0.0 {
        return Err(Error::domain("trial function vanishes identically"));
    }
    Ok(num / den)
}
