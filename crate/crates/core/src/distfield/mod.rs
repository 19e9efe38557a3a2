//! Distance function `δ`, nearest-point map, singular set, ridge function
//! `ρ̄` and normalized distance `h = δ/Λ` on a grid.

mod eikonal;

pub use eikonal::fast_march;

use rayon::prelude::*;
use serde::Serialize;

use crate::domains::Domain;
use crate::grid::{Geometry, Grid};
use crate::numeric::{distance, norm};
use crate::{Error, Result};

/// Width of the boundary layer, in cells, where `δ` is taken from the exact
/// point-to-boundary distance.
pub const EXACT_LAYER: f64 = 3.0;
/// Cap on the cell-distance maps.
const STEP_CAP: u8 = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum DeltaSource {
    /// Fast marching seeded with exact distances in the boundary layer.
    Eikonal,
    /// Exact point-to-boundary distance at every node (analytic kinds only).
    Analytic,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Stage {
    Distance,
    Nearest,
    Complete,
}

#[derive(Debug, Clone)]
pub struct DistanceField {
    pub grid: Grid,
    pub source: DeltaSource,
    pub stage: Stage,
    /// `δ` on inside nodes; `-signed distance` elsewhere (negative outside `Ω`).
    pub delta: Vec<f64>,
    /// Central-difference `∇δ`, `grid.ndim()` components per node.
    pub grad: Vec<f64>,
    /// Largest `|δ - exact|` over inside nodes (analytic kinds, eikonal source).
    pub eikonal_error: Option<f64>,
    /// Nearest boundary point, `grid.ambient_dim` components per node (NaN outside).
    pub nearest: Vec<f64>,
    pub singular: Vec<bool>,
    /// Chebyshev distance in cells to the nearest singular node (capped).
    pub singular_steps: Vec<u8>,
    pub angle_tol: f64,
    /// `Λ(x) = ρ̄(N(x))`.
    pub ridge: Vec<f64>,
    /// `ρ̄` stopped at the grid edge or a truncation face instead of at `S`.
    pub censored: Vec<bool>,
    pub h_field: Vec<f64>,
}

impl DistanceField {
    /// Runs the three stages with default settings.
    pub fn build(
        domain: &Domain,
        resolution: usize,
        geometry: Geometry,
        source: DeltaSource,
        angle_tol: f64,
    ) -> Result<Self> {
        let grid = Grid::new(domain, resolution, geometry)?;
        let f = solve_eikonal(domain, grid, source)?;
        let f = nearest_and_singular(domain, f, angle_tol)?;
        ridge_and_h(domain, f)
    }

    pub fn len(&self) -> usize {
        self.delta.len()
    }

    pub fn is_empty(&self) -> bool {
        self.delta.is_empty()
    }

    pub fn nearest_point(&self, c: usize) -> &[f64] {
        let k = self.grid.ambient_dim;
        &self.nearest[c * k..(c + 1) * k]
    }

    pub fn gradient(&self, c: usize) -> &[f64] {
        let k = self.grid.ndim();
        &self.grad[c * k..(c + 1) * k]
    }

    /// Inside, off the singular set.
    pub fn is_good(&self, c: usize) -> bool {
        self.grid.inside[c] && !self.singular[c]
    }

    /// Good and at least `k` cells away from both `S` and `∂Ω`.
    pub fn is_interior_good(&self, c: usize, k: u8) -> bool {
        self.is_good(c)
            && self.singular_steps[c] >= k
            && self.delta[c] >= k as f64 * self.grid.spacing
            && self.grid.truncation[c] >= k as f64 * self.grid.spacing
    }

    /// Unit vector from the nearest point to the node, in grid coordinates:
    /// the exact gradient of `δ` wherever the nearest point is unique.
    pub fn normal_direction(&self, c: usize) -> Option<Vec<f64>> {
        let x = self.grid.world(c);
        let n = self.nearest_point(c);
        let r = distance(&x, n);
        if !(r > 0.0) {
            return None;
        }
        let v: Vec<f64> = x.iter().zip(n).map(|(a, b)| (a - b) / r).collect();
        Some(self.grid.project_direction(&v))
    }

    pub fn max_delta(&self) -> f64 {
        (0..self.len())
            .filter(|&c| self.grid.inside[c])
            .map(|c| self.delta[c])
            .fold(0.0, f64::max)
    }

    pub fn singular_fraction(&self) -> f64 {
        let inside = self.grid.inside.iter().filter(|&&b| b).count();
        let s = self.singular.iter().filter(|&&b| b).count();
        s as f64 / inside.max(1) as f64
    }
}

impl Grid {
    /// Converts an ambient direction in the grid's plane into grid components.
    pub fn project_direction(&self, v: &[f64]) -> Vec<f64> {
        match self.geometry {
            Geometry::Cartesian => v.to_vec(),
            Geometry::Axisymmetric => vec![v[0], v[2]],
        }
    }
}

/// `δ` and `∇δ` on the grid. Nodes within three cells of `∂Ω` always get the
/// exact distance; deeper nodes get fast marching or the exact distance
/// depending on `source`.
pub fn solve_eikonal(domain: &Domain, grid: Grid, source: DeltaSource) -> Result<DistanceField> {
    if source == DeltaSource::Analytic && !domain.is_analytic() {
        return Err(Error::config("analytic distance is only available for catalog kinds"));
    }
    let n = grid.len();
    let h = grid.spacing;
    let exact: Vec<f64> = (0..n)
        .into_par_iter()
        .map(|c| -domain.signed_distance(&grid.world(c)))
        .collect();
    let mut delta = vec![f64::INFINITY; n];
    let mut known = vec![false; n];
    let mut seeds = 0usize;
    for c in 0..n {
        if !grid.inside[c] {
            delta[c] = exact[c];
        } else if source == DeltaSource::Analytic || exact[c] <= EXACT_LAYER * h {
            delta[c] = exact[c];
            known[c] = true;
            seeds += 1;
        }
    }
    if seeds == 0 {
        return Err(Error::config("no grid node lies inside the domain"));
    }
    let mut eikonal_error = None;
    if source == DeltaSource::Eikonal {
        // the inside region includes nodes past a truncation face so the front is not cut short
        let region: Vec<bool> = (0..n).map(|c| exact[c] > 0.0).collect();
        for c in 0..n {
            if region[c] && !grid.inside[c] && exact[c] <= EXACT_LAYER * h {
                known[c] = true;
                delta[c] = exact[c];
            }
        }
        fast_march(&grid, &region, &mut known, &mut delta);
        for c in 0..n {
            if region[c] && !grid.inside[c] && !known[c] {
                delta[c] = exact[c];
            }
        }
        if domain.is_analytic() {
            let err = (0..n)
                .filter(|&c| grid.inside[c])
                .map(|c| (delta[c] - exact[c]).abs())
                .fold(0.0, f64::max);
            eikonal_error = Some(err);
        }
    }
    let grad = central_gradient(&grid, &delta);
    Ok(DistanceField {
        stage: Stage::Distance,
        source,
        delta,
        grad,
        eikonal_error,
        nearest: Vec::new(),
        singular: vec![false; n],
        singular_steps: vec![STEP_CAP; n],
        angle_tol: f64::NAN,
        ridge: Vec::new(),
        censored: Vec::new(),
        h_field: Vec::new(),
        grid,
    })
}

/// Value of `u` one step from `c`, mirrored across the axis of an
/// axisymmetric grid.
pub(crate) fn step_value(grid: &Grid, u: &[f64], c: usize, axis: usize, dir: isize) -> Option<f64> {
    match grid.neighbor(c, axis, dir) {
        Some(nb) => Some(u[nb]),
        None if axis == 0 && dir < 0 && grid.has_axis => {
            Some(u[c])
        }
        None => None,
    }
}

fn central_gradient(grid: &Grid, u: &[f64]) -> Vec<f64> {
    let d = grid.ndim();
    let h = grid.spacing;
    (0..grid.len())
        .into_par_iter()
        .flat_map_iter(|c| {
            (0..d).map(move |a| {
                let p = step_value(grid, u, c, a, 1).filter(|v| v.is_finite());
                let m = step_value(grid, u, c, a, -1).filter(|v| v.is_finite());
                match (p, m) {
                    (Some(p), Some(m)) => (p - m) / (2.0 * h),
                    (Some(p), None) => (p - u[c]) / h,
                    (None, Some(m)) => (u[c] - m) / h,
                    (None, None) => f64::NAN,
                }
            })
        })
        .collect()
}

fn angle(a: &[f64], b: &[f64]) -> f64 {
    let (na, nb) = (norm(a), norm(b));
    if !(na > 0.0 && nb > 0.0) {
        return 0.0;
    }
    let c: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>() / (na * nb);
    c.clamp(-1.0, 1.0).acos()
}

/// Nearest boundary points and the singular-set classification: a node is
/// singular when the directions to the nearest points of adjacent nodes
/// diverge by more than `angle_tol`, or (implicit kinds, whose projections
/// are only local) when the discrete `∇δ` jumps by more than `angle_tol`.
pub fn nearest_and_singular(domain: &Domain, mut field: DistanceField, angle_tol: f64) -> Result<DistanceField> {
    if field.stage < Stage::Distance {
        return Err(Error::precondition("distance field not computed"));
    }
    let grid = &field.grid;
    let k = grid.ambient_dim;
    let n = grid.len();
    let analytic = domain.is_analytic();
    let nearest: Vec<f64> = (0..n)
        .into_par_iter()
        .flat_map_iter(|c| {
            let y = if grid.inside[c] {
                let x = grid.world(c);
                if analytic {
                    domain.closest_point(&x)
                } else {
                    // start Newton's projection from x - δ∇δ
                    let g = grid.lift(field.gradient(c));
                    let gn = norm(&g);
                    let start: Vec<f64> = if gn > 0.0 {
                        x.iter().zip(&g).map(|(xi, gi)| xi - field.delta[c] * gi / gn).collect()
                    } else {
                        x
                    };
                    domain.closest_point(&start)
                }
            } else {
                vec![f64::NAN; k]
            };
            y.into_iter()
        })
        .collect();
    field.nearest = nearest;

    let d = grid.ndim();
    let tiny = 1e-9 * grid.spacing;
    let dirs: Vec<Option<Vec<f64>>> = (0..n)
        .into_par_iter()
        .map(|c| {
            if grid.inside[c] && field.delta[c] > tiny {
                field.normal_direction(c)
            } else {
                None
            }
        })
        .collect();
    let singular: Vec<bool> = (0..n)
        .into_par_iter()
        .map(|c| {
            let Some(vc) = &dirs[c] else {
                return false;
            };
            let gc = field.gradient(c);
            for a in 0..d {
                for dir in [-1isize, 1] {
                    let Some(nb) = grid.neighbor(c, a, dir) else {
                        continue;
                    };
                    if let Some(vn) = &dirs[nb] {
                        if angle(vc, vn) > angle_tol {
                            return true;
                        }
                    }
                    // exact nearest points make the gradient test redundant, and on
                    // a marched δ it only picks up first-order noise
                    if !analytic && grid.inside[nb] && angle(gc, field.gradient(nb)) > angle_tol {
                        return true;
                    }
                }
            }
            false
        })
        .collect();
    field.singular_steps = chebyshev_steps(grid, &singular);
    field.singular = singular;
    field.angle_tol = angle_tol;
    field.stage = Stage::Nearest;
    Ok(field)
}

/// Chebyshev distance in cells to the nearest marked node, capped.
fn chebyshev_steps(grid: &Grid, marked: &[bool]) -> Vec<u8> {
    let n = grid.len();
    let mut steps = vec![STEP_CAP; n];
    let mut cover: Vec<bool> = marked.to_vec();
    for c in 0..n {
        if cover[c] {
            steps[c] = 0;
        }
    }
    for s in 1..STEP_CAP {
        let mut next = cover.clone();
        for a in 0..grid.ndim() {
            let src = next.clone();
            for c in 0..n {
                if src[c] {
                    continue;
                }
                let hit = [-1isize, 1]
                    .iter()
                    .any(|&dir| grid.neighbor(c, a, dir).is_some_and(|nb| src[nb]));
                if hit {
                    next[c] = true;
                }
            }
        }
        for c in 0..n {
            if next[c] && !cover[c] {
                steps[c] = s;
            }
        }
        if next == cover {
            break;
        }
        cover = next;
    }
    steps
}

/// `ρ̄` by marching along the inward normal from the nearest point until the
/// singular set is hit, then `Λ = ρ̄∘N` and `h = δ/Λ`.
pub fn ridge_and_h(domain: &Domain, mut field: DistanceField) -> Result<DistanceField> {
    if field.stage < Stage::Nearest {
        return Err(Error::precondition("nearest-point map not computed"));
    }
    let grid = &field.grid;
    let n = grid.len();
    let step = 0.5 * grid.spacing;
    let (lo, hi) = domain.bounding_box();
    let reach = distance(lo, hi) + 4.0 * grid.spacing;
    let stops = |p: &[f64]| -> Option<bool> {
        // Some(true): singular hit; Some(false): still good; None: left Ω or the grid
        let c = grid.locate(&grid.project(p))?;
        if !grid.inside[c] {
            return None;
        }
        Some(field.singular[c])
    };
    let marched: Vec<(f64, bool)> = (0..n)
        .into_par_iter()
        .map(|c| {
            if !grid.inside[c] {
                return (f64::NAN, false);
            }
            if field.singular[c] {
                return (field.delta[c], false);
            }
            let z = field.nearest_point(c);
            let x = grid.world(c);
            let r = distance(&x, z);
            if !(r > 0.0) {
                return (f64::NAN, false);
            }
            let eta: Vec<f64> = x.iter().zip(z).map(|(a, b)| (a - b) / r).collect();
            let at = |t: f64| -> Vec<f64> { z.iter().zip(&eta).map(|(zi, e)| zi + t * e).collect() };
            let mut prev = 0.0;
            let mut t = step;
            while t < reach {
                match stops(&at(t)) {
                    Some(false) => {}
                    Some(true) => {
                        let (mut a, mut b) = (prev, t);
                        for _ in 0..12 {
                            let m = 0.5 * (a + b);
                            if stops(&at(m)) == Some(true) {
                                b = m;
                            } else {
                                a = m;
                            }
                        }
                        return (0.5 * (a + b), false);
                    }
                    None if prev > 0.0 => return (prev, true),
                    // the first step may land on a boundary node outside Ω
                    None => {}
                }
                prev = t;
                t += step;
            }
            (prev, true)
        })
        .collect();
    field.ridge = marched.iter().map(|m| m.0).collect();
    field.censored = marched.iter().map(|m| m.1).collect();
    field.h_field = (0..n)
        .map(|c| {
            if !grid.inside[c] {
                0.0
            } else if field.singular[c] {
                1.0
            } else {
                let l = field.ridge[c];
                if l > 0.0 {
                    (field.delta[c] / l).clamp(0.0, 1.0)
                } else {
                    0.0
                }
            }
        })
        .collect();
    field.stage = Stage::Complete;
    Ok(field)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ball_distance_and_medial_point() {
        let d = Domain::ball(2, 1.0).unwrap();
        let f = DistanceField::build(&d, 128, Geometry::Cartesian, DeltaSource::Eikonal, 0.5).unwrap();
        let h = f.grid.spacing;
        for c in 0..f.len() {
            if f.grid.inside[c] {
                let r = norm(&f.grid.world(c));
                assert!((f.delta[c] - (1.0 - r)).abs() <= 2.0 * h, "{} {}", f.delta[c], r);
                if f.singular[c] {
                    assert!(r <= 2.0 * h + 1e-12, "singular at r={r}");
                }
            }
        }
        assert!(f.eikonal_error.unwrap() <= 2.0 * h);
        let c = f.grid.locate(&[0.5, 0.0]).unwrap();
        assert!((f.ridge[c] - 1.0).abs() < 3.0 * h, "{}", f.ridge[c]);
        assert!((f.h_field[c] - 0.5).abs() < 3.0 * h);
    }

    #[test]
    fn square_ridge_at_side_midpoint() {
        let d = Domain::cuboid(vec![1.0, 1.0]).unwrap();
        let f = DistanceField::build(&d, 128, Geometry::Cartesian, DeltaSource::Eikonal, 0.5).unwrap();
        let h = f.grid.spacing;
        let c = f.grid.locate(&[0.5, 0.1]).unwrap();
        assert!((f.ridge[c] - 0.5).abs() < 3.0 * h, "{}", f.ridge[c]);
        for c in 0..f.len() {
            if f.singular[c] {
                let x = f.grid.world(c);
                let off = (x[0] - x[1]).abs().min((x[0] + x[1] - 1.0).abs()) / 2f64.sqrt();
                assert!(off <= 2.0 * h + 1e-12, "{x:?}");
            }
        }
    }

    #[test]
    fn torus_slice_core_circle() {
        let d = Domain::torus(1.0, 2.0).unwrap();
        let f = DistanceField::build(&d, 96, Geometry::Axisymmetric, DeltaSource::Eikonal, 0.5).unwrap();
        let h = f.grid.spacing;
        for c in 0..f.len() {
            if f.grid.inside[c] {
                let x = f.grid.world(c);
                let exact = 1.0 - ((x[0] - 2.0).powi(2) + x[2] * x[2]).sqrt();
                assert!((f.delta[c] - exact).abs() <= 3.0 * h);
                if f.singular[c] {
                    assert!(1.0 - exact <= 2.0 * h + 1e-12);
                }
            }
        }
        let c = f.grid.locate(&[2.5, 0.3]).unwrap();
        assert!((f.ridge[c] - 1.0).abs() < 3.0 * h);
    }

    #[test]
    fn gradient_is_unit_away_from_singular_set() {
        let d = Domain::ball(3, 1.0).unwrap();
        let f = DistanceField::build(&d, 48, Geometry::Cartesian, DeltaSource::Eikonal, 0.5).unwrap();
        let h = f.grid.spacing;
        for c in 0..f.len() {
            if f.is_interior_good(c, 3) {
                let g = norm(f.gradient(c));
                assert!((g - 1.0).abs() <= 5.0 * h, "{g}");
                assert!((0.0..=1.0).contains(&f.h_field[c]));
            }
        }
    }
}
