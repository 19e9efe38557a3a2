//! `-Δδ` from the curvature formula and from finite differences, and the
//! checks built on it: distributional superharmonicity, equivalence of the
//! infima, and the polynomial growth estimate.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::distfield::{step_value, DistanceField, Stage};
use crate::domains::{ConvexityReport, Domain};
use crate::grid::Geometry;
use crate::numeric::{distance, pairwise_sum};
use crate::symfun::curvature_sum_bound;
use crate::{Error, Result};

/// Cells kept clear of `S` and `∂Ω` by the finite-difference Laplacian.
pub const FD_MARGIN: u8 = 3;
/// Largest tolerated share of inconsistent good cells.
pub const INCONSISTENT_SHARE: f64 = 1e-3;

#[derive(Debug, Clone)]
pub struct LaplacianField {
    /// `Σ κ_i/(1 - δκ_i)` at `N(x)`; NaN on singular and outside nodes.
    pub formula: Vec<f64>,
    /// `nH/(n - δH)` at `N(x)`.
    pub bound: Vec<f64>,
    /// Central-difference `-Δδ`, NaN within [`FD_MARGIN`] cells of `S` or `∂Ω`.
    pub fd: Vec<f64>,
    /// `H(N(x))` on every inside node, singular ones included.
    pub mean_h: Vec<f64>,
    /// Good node with some `1 - δκ_i ≤ 0`: a misclassified singular node.
    pub inconsistent: Vec<bool>,
    pub inconsistent_count: usize,
    pub good_count: usize,
    /// Largest `Σ κ_i²` over nearest points of good nodes.
    pub max_kappa_sq: f64,
}

impl LaplacianField {
    pub fn inconsistent_share(&self) -> f64 {
        self.inconsistent_count as f64 / self.good_count.max(1) as f64
    }

    /// Fails the run when inconsistent nodes exceed [`INCONSISTENT_SHARE`].
    pub fn check_consistency(&self) -> Result<()> {
        if self.inconsistent_share() > INCONSISTENT_SHARE {
            return Err(Error::precondition(format!(
                "{} of {} good cells have 1 - δκ ≤ 0",
                self.inconsistent_count, self.good_count
            )));
        }
        Ok(())
    }
}

fn require_complete(field: &DistanceField) -> Result<()> {
    if field.stage < Stage::Nearest {
        return Err(Error::precondition("distance field lacks the nearest-point map"));
    }
    Ok(())
}

/// Per-node curvature formula and its mean-curvature lower bound.
pub fn neg_laplacian_formula(field: &DistanceField, domain: &Domain) -> Result<LaplacianField> {
    require_complete(field)?;
    let grid = &field.grid;
    let n = grid.len();
    let nk = domain.n() as f64;
    // (formula, bound, H, inconsistent, Σκ²)
    let per: Vec<(f64, f64, f64, bool, f64)> = (0..n)
        .into_par_iter()
        .map(|c| {
            let nan = (f64::NAN, f64::NAN, f64::NAN, false, 0.0);
            if !grid.inside[c] {
                return nan;
            }
            let Some(s) = domain.curvature(field.nearest_point(c)) else {
                return nan;
            };
            let delta = field.delta[c];
            if field.singular[c] {
                let den = nk - delta * s.mean;
                let b = if den > 0.0 { nk * s.mean / den } else { f64::NAN };
                return (f64::NAN, b, s.mean, false, 0.0);
            }
            let ksq: f64 = s.kappas.entries().iter().map(|k| k * k).sum();
            match curvature_sum_bound(&s.kappas, delta.max(0.0)) {
                Ok((lhs, rhs)) => (lhs, rhs, s.mean, false, ksq),
                Err(_) => (f64::NAN, f64::NAN, s.mean, true, ksq),
            }
        })
        .collect();
    let good_count = (0..n).filter(|&c| field.is_good(c)).count();
    let inconsistent: Vec<bool> = per.iter().map(|p| p.3).collect();
    Ok(LaplacianField {
        formula: per.iter().map(|p| p.0).collect(),
        bound: per.iter().map(|p| p.1).collect(),
        mean_h: per.iter().map(|p| p.2).collect(),
        inconsistent_count: inconsistent.iter().filter(|&&b| b).count(),
        inconsistent,
        good_count,
        max_kappa_sq: per.iter().map(|p| p.4).fold(0.0, f64::max),
        fd: neg_laplacian_fd(field),
    })
}

/// Centred second differences of `δ` (with the `δ_ρ/ρ` term on axisymmetric
/// grids), masked near `S`, `∂Ω` and truncation faces.
pub fn neg_laplacian_fd(field: &DistanceField) -> Vec<f64> {
    let grid = &field.grid;
    let h = grid.spacing;
    let u = &field.delta;
    (0..grid.len())
        .into_par_iter()
        .map(|c| {
            if !field.is_interior_good(c, FD_MARGIN) {
                return f64::NAN;
            }
            let mut lap = 0.0;
            for a in 0..grid.ndim() {
                let (Some(p), Some(m)) = (step_value(grid, u, c, a, 1), step_value(grid, u, c, a, -1)) else {
                    return f64::NAN;
                };
                lap += (p - 2.0 * u[c] + m) / (h * h);
                if a == 0 && grid.geometry == Geometry::Axisymmetric {
                    let rho = grid.coords(c)[0];
                    lap += (p - m) / (2.0 * h * rho);
                }
            }
            -lap
        })
        .collect()
}

/// Smooth non-negative bump `exp(-1/(1 - |x-c|²/r²))` in grid coordinates.
#[derive(Debug, Clone, Serialize)]
pub struct Bump {
    pub center: Vec<f64>,
    pub radius: f64,
}

impl Bump {
    pub const MAX: f64 = 0.367_879_441_171_442_33; // e^{-1}

    pub fn value(&self, g: &[f64]) -> f64 {
        let s = distance(g, &self.center) / self.radius;
        if s >= 1.0 {
            0.0
        } else {
            (-1.0 / (1.0 - s * s)).exp()
        }
    }

    pub fn gradient(&self, g: &[f64]) -> Vec<f64> {
        let r2 = self.radius * self.radius;
        let q: f64 = g.iter().zip(&self.center).map(|(a, b)| (a - b).powi(2)).sum::<f64>() / r2;
        if q >= 1.0 {
            return vec![0.0; g.len()];
        }
        let w = 1.0 - q;
        let f = (-1.0 / w).exp();
        // d/dx exp(-1/(1-q)) = -f/(1-q)² · dq/dx, dq/dx = 2(x-c)/r²
        g.iter()
            .zip(&self.center)
            .map(|(a, b)| -f / (w * w) * 2.0 * (a - b) / r2)
            .collect()
    }

    /// Support inside `Ω`, off truncation faces and (axisymmetric grids) off the axis.
    pub fn admissible(&self, domain: &Domain, field: &DistanceField) -> bool {
        let grid = &field.grid;
        let x = grid.lift(&self.center);
        if grid.geometry == Geometry::Axisymmetric && self.center[0] <= self.radius {
            return false;
        }
        domain.signed_distance(&x) < -self.radius && domain.truncation_distance(&x) > self.radius
    }
}

/// `count` admissible bumps with radii in `[r_min, r_max]`, placed by
/// rejection sampling with a seeded generator.
pub fn random_bumps(
    domain: &Domain,
    field: &DistanceField,
    count: usize,
    seed: u64,
    r_min: f64,
    r_max: f64,
) -> Result<Vec<Bump>> {
    let grid = &field.grid;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let lo: Vec<f64> = grid.origin.clone();
    let hi: Vec<f64> = grid
        .origin
        .iter()
        .zip(&grid.dims)
        .map(|(o, &n)| o + (n - 1) as f64 * grid.spacing)
        .collect();
    let mut out = Vec::with_capacity(count);
    let mut tries = 0usize;
    while out.len() < count {
        tries += 1;
        if tries > 200_000 + 1000 * count {
            return Err(Error::config(format!(
                "could not place {count} admissible bumps with radius in [{r_min}, {r_max}]"
            )));
        }
        let center: Vec<f64> = lo.iter().zip(&hi).map(|(a, b)| rng.random_range(*a..*b)).collect();
        let radius = if r_max > r_min { rng.random_range(r_min..r_max) } else { r_min };
        let b = Bump { center, radius };
        if b.admissible(domain, field) {
            out.push(b);
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, Serialize)]
pub struct Residual {
    /// `∫∇δ·∇φ - ∫ nH/(n-δH)·φ`.
    pub value: f64,
    pub gradient_term: f64,
    pub bound_term: f64,
    /// Reported midpoint-quadrature error bound.
    pub eps_quad: f64,
    pub max_phi: f64,
    pub passed: bool,
}

/// Sub-samples per axis for cells at or next to the singular set.
fn sub_samples(d: usize) -> usize {
    match d {
        2 => 16,
        3 => 8,
        _ => 4,
    }
}

/// Midpoint quadrature of the distributional inequality for each bump. Cells
/// touching `S` are sub-sampled with exact nearest points, since `∇δ` jumps there.
pub fn distributional_check(
    domain: &Domain,
    field: &DistanceField,
    lap: &LaplacianField,
    phis: &[Bump],
) -> Result<Vec<Residual>> {
    require_complete(field)?;
    let grid = &field.grid;
    let h = grid.spacing;
    let d = grid.ndim();
    let nk = domain.n() as f64;
    phis.iter()
        .map(|phi| {
            if !phi.admissible(domain, field) {
                return Err(Error::precondition(format!(
                    "bump at {:?} (radius {}) leaves the admissible region",
                    phi.center, phi.radius
                )));
            }
            let nodes = grid.nodes_in(&grid.index_box(&phi.center, phi.radius));
            // (gradient term, bound term, integrand for the error bound)
            let parts: Vec<(f64, f64, f64)> = nodes
                .par_iter()
                .map(|&c| {
                    let g = grid.coords(c);
                    if field.singular_steps[c] <= 1 {
                        let m = sub_samples(d);
                        let sub = h / m as f64;
                        let mut gt = Vec::new();
                        let mut bt = Vec::new();
                        for k in 0..m.pow(d as u32) {
                            let mut r = k;
                            let p: Vec<f64> = g
                                .iter()
                                .map(|gi| {
                                    let j = r % m;
                                    r /= m;
                                    gi - 0.5 * h + (j as f64 + 0.5) * sub
                                })
                                .collect();
                            let fv = phi.value(&p);
                            if fv == 0.0 {
                                continue;
                            }
                            let vol = match grid.geometry {
                                Geometry::Cartesian => sub.powi(d as i32),
                                Geometry::Axisymmetric => 2.0 * std::f64::consts::PI * p[0] * sub * sub,
                            };
                            let x = grid.lift(&p);
                            let y = domain.closest_point(&x);
                            let delta = distance(&x, &y);
                            let Some(s) = domain.curvature(&y) else { continue };
                            let v = grid.project_direction(
                                &x.iter().zip(&y).map(|(a, b)| (a - b) / delta).collect::<Vec<_>>(),
                            );
                            let den = nk - delta * s.mean;
                            if !(den > 0.0) || !(delta > 0.0) {
                                continue;
                            }
                            let gp = phi.gradient(&p);
                            gt.push(vol * v.iter().zip(&gp).map(|(a, b)| a * b).sum::<f64>());
                            bt.push(vol * nk * s.mean / den * fv);
                        }
                        (pairwise_sum(&gt), pairwise_sum(&bt), f64::NAN)
                    } else {
                        let fv = phi.value(&g);
                        if fv == 0.0 || !grid.inside[c] {
                            return (0.0, 0.0, 0.0);
                        }
                        let vol = grid.cell_volume(c);
                        let v = field.normal_direction(c).unwrap_or_else(|| vec![0.0; d]);
                        let gp = phi.gradient(&g);
                        let dot: f64 = v.iter().zip(&gp).map(|(a, b)| a * b).sum();
                        let b = lap.bound[c];
                        (vol * dot, vol * b * fv, dot - b * fv)
                    }
                })
                .collect();
            let gradient_term = pairwise_sum(&parts.iter().map(|p| p.0).collect::<Vec<_>>());
            let bound_term = pairwise_sum(&parts.iter().map(|p| p.1).collect::<Vec<_>>());
            // ε = h·|supp|·max|∇(integrand)|, the gradient taken over regular nodes
            let mut slope = 0.0f64;
            let mut supp = 0.0;
            for (i, &c) in nodes.iter().enumerate() {
                if phi.value(&grid.coords(c)) > 0.0 {
                    supp += grid.cell_volume(c);
                }
                let gi = parts[i].2;
                if !gi.is_finite() {
                    continue;
                }
                for a in 0..d {
                    if let Some(nb) = grid.neighbor(c, a, 1) {
                        if let Ok(j) = nodes.binary_search(&nb) {
                            let gj = parts[j].2;
                            if gj.is_finite() {
                                slope = slope.max((gj - gi).abs() / h);
                            }
                        }
                    }
                }
            }
            let eps_quad = h * supp * slope;
            let value = gradient_term - bound_term;
            Ok(Residual {
                value,
                gradient_term,
                bound_term,
                eps_quad,
                max_phi: Bump::MAX,
                passed: value >= -eps_quad,
            })
        })
        .collect()
}

#[derive(Debug, Clone, Serialize)]
pub struct InfEquivalence {
    pub inf_neg_lap: f64,
    #[serde(rename = "inf_H")]
    pub inf_h: f64,
    pub tolerance: f64,
    pub agree: bool,
    /// `inf(-Δδ) ≥ -tolerance`: δ superharmonic off the singular set.
    pub superharmonic: bool,
    /// The superharmonicity verdict matches the mean-convexity verdict.
    pub verdict_matches: bool,
}

/// Compares `inf(-Δδ)` over good nodes with `H0`. The gap is resolution
/// dependent: the formula tends to `H` only as `δ → 0`, and the closest good
/// nodes sit up to one cell off the boundary.
pub fn inf_equivalence(field: &DistanceField, lap: &LaplacianField, report: &ConvexityReport) -> InfEquivalence {
    let grid = &field.grid;
    let mut inf = f64::INFINITY;
    let mut dmin = f64::INFINITY;
    for c in 0..grid.len() {
        if field.is_good(c) && lap.formula[c].is_finite() {
            inf = inf.min(lap.formula[c]);
            dmin = dmin.min(field.delta[c]);
        }
    }
    let tolerance = 2.0 * (dmin + grid.spacing) * lap.max_kappa_sq + report.margin + 1e-9;
    let superharmonic = inf >= -tolerance;
    InfEquivalence {
        inf_neg_lap: inf,
        inf_h: report.h0,
        tolerance,
        agree: (inf - report.h0).abs() <= tolerance,
        superharmonic,
        verdict_matches: superharmonic == report.weakly_mean_convex,
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct GrowthReport {
    pub p: f64,
    #[serde(rename = "H0")]
    pub h0: f64,
    /// `pH0^p/n^{p-1}·(p/(p-1))^{p-1}`.
    pub constant: f64,
    pub checked: usize,
    pub violations: usize,
}

/// Counts good nodes where `-Δδ < C·δ^{p-1}`.
pub fn growth_estimate_check(
    field: &DistanceField,
    lap: &LaplacianField,
    p: f64,
    h0: f64,
    n: usize,
) -> Result<GrowthReport> {
    if !(p > 1.0) {
        return Err(Error::domain(format!("p must exceed 1, got {p}")));
    }
    if h0 < 0.0 {
        return Err(Error::precondition(format!("growth estimate needs H0 ≥ 0, got {h0}")));
    }
    let nf = n as f64;
    let constant = p * h0.powf(p) / nf.powf(p - 1.0) * (p / (p - 1.0)).powf(p - 1.0);
    let (mut checked, mut violations) = (0, 0);
    for c in 0..field.len() {
        let f = lap.formula[c];
        if !field.is_good(c) || !f.is_finite() {
            continue;
        }
        checked += 1;
        if f < constant * field.delta[c].powf(p - 1.0) - 1e-12 * (1.0 + f.abs()) {
            violations += 1;
        }
    }
    Ok(GrowthReport {
        p,
        h0,
        constant,
        checked,
        violations,
    })
}

/// Along inward normal rays from boundary samples, the formula must not
/// decrease before the ray meets `S`. Returns the number of decreasing steps
/// seen over `samples` boundary points with `steps` evaluations each.
pub fn ray_monotonicity(domain: &Domain, resolution: usize, steps: usize) -> Result<usize> {
    let bs = domain.profile_sample(resolution)?;
    let mut bad = 0;
    for s in &bs.samples {
        let Some(rho) = domain.ridge_distance(&s.point) else {
            return Err(Error::precondition("ridge distance not available in closed form"));
        };
        let mut last = f64::NEG_INFINITY;
        for k in 0..steps {
            let t = rho * (k as f64 + 0.5) / steps as f64;
            let Ok((lhs, _)) = curvature_sum_bound(&s.kappas, t) else {
                break;
            };
            if lhs < last - 1e-12 * (1.0 + lhs.abs()) {
                bad += 1;
            }
            last = lhs;
        }
    }
    Ok(bad)
}

/// Relative agreement of the two evaluations on nodes where both exist.
/// Differences below the rounding noise of second differences
/// (`~ ε·max δ/h²`) count as agreement, so flat boundaries compare as equal.
pub fn max_relative_gap(field: &DistanceField, lap: &LaplacianField) -> (f64, usize) {
    let h = field.grid.spacing;
    let noise = 64.0 * f64::EPSILON * field.max_delta().max(h) / (h * h);
    let mut worst = 0.0f64;
    let mut count = 0;
    for (f, d) in lap.formula.iter().zip(&lap.fd) {
        if f.is_finite() && d.is_finite() {
            count += 1;
            let diff = (f - d).abs();
            if diff > noise {
                worst = worst.max(diff / f.abs().max(d.abs()));
            }
        }
    }
    (worst, count)
}

/// Smallest residual relative to the bump height.
pub fn min_residual_ratio(res: &[Residual]) -> f64 {
    res.iter().map(|r| r.value / r.max_phi).fold(f64::INFINITY, f64::min)
}
