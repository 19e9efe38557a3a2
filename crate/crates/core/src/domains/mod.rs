//! Catalog of analytic domains with exact boundary geometry, plus implicit
//! domains defined by a level-set expression.
//!
//! Sign conventions: the normal is outward, and principal curvatures are
//! positive on convex parts of the boundary, so the unit sphere `S^n` has
//! mean curvature `H = n`.

mod ellipsoid;
pub mod expr;
pub(crate) mod sampling;
pub mod shape;

pub use ellipsoid::closest_on_ellipsoid;
pub use expr::Expr;
pub use sampling::{BoundarySampling, ConvexityReport, Patch};

use crate::numeric::{distance, norm, unit_ball_volume};
use crate::symfun::SymVector;
use crate::{Error, Result};

#[derive(Debug, Clone)]
pub enum DomainKind {
    Ball { radius: f64 },
    /// Ring torus around the `z` axis; `minor < major`.
    Torus { minor: f64, major: f64 },
    /// Spherical shell `inner < |x| < outer`.
    Annulus { inner: f64, outer: f64 },
    /// `∏ (0, side_i)`.
    Cuboid { sides: Vec<f64> },
    /// `{ x_last > |x'|² }`, cut at `x_last = height`.
    ParaboloidCap { height: f64 },
    /// Inside of the catenoid `ρ = neck·cosh(z/neck)`, cut at `|z| = thickness/2`.
    CatenoidSlab { neck: f64, thickness: f64 },
    /// Outer ellipsoid minus the closure of an inner one, both axis aligned.
    EllipsoidShell { outer: Vec<f64>, inner: Vec<f64> },
    /// `{ F < 0 }` for a user expression `F`.
    Implicit { expr: Expr, source: String },
}

/// A boundary point with its outward normal and principal curvatures.
#[derive(Debug, Clone)]
pub struct CurvatureSample {
    pub point: Vec<f64>,
    pub normal: Vec<f64>,
    pub kappas: SymVector,
    /// Mean curvature, `Σ κ_i`.
    pub mean: f64,
}

impl CurvatureSample {
    fn new(point: Vec<f64>, normal: Vec<f64>, kappas: Vec<f64>) -> Self {
        let kappas = SymVector::new(kappas).expect("finite curvatures");
        let mean = kappas.sum();
        Self {
            point,
            normal,
            kappas,
            mean,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Domain {
    kind: DomainKind,
    dim: usize,
    bbox_min: Vec<f64>,
    bbox_max: Vec<f64>,
    feature: f64,
}

fn positive(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::domain(format!("{name} must be positive, got {v}")))
    }
}

fn check_dim(dim: usize) -> Result<()> {
    if dim < 2 {
        return Err(Error::domain(format!("ambient dimension must be at least 2, got {dim}")));
    }
    Ok(())
}

impl Domain {
    pub fn ball(dim: usize, radius: f64) -> Result<Self> {
        check_dim(dim)?;
        positive("radius", radius)?;
        Ok(Self {
            kind: DomainKind::Ball { radius },
            dim,
            bbox_min: vec![-radius; dim],
            bbox_max: vec![radius; dim],
            feature: 2.0 * radius,
        })
    }

    pub fn torus(minor: f64, major: f64) -> Result<Self> {
        positive("minor radius", minor)?;
        positive("major radius", major)?;
        if minor >= major {
            return Err(Error::domain("torus needs minor < major radius"));
        }
        let e = major + minor;
        Ok(Self {
            kind: DomainKind::Torus { minor, major },
            dim: 3,
            bbox_min: vec![-e, -e, -minor],
            bbox_max: vec![e, e, minor],
            feature: 2.0 * minor,
        })
    }

    pub fn annulus(dim: usize, inner: f64, outer: f64) -> Result<Self> {
        check_dim(dim)?;
        positive("inner radius", inner)?;
        positive("outer radius", outer)?;
        if inner >= outer {
            return Err(Error::domain("annulus needs inner < outer radius"));
        }
        Ok(Self {
            kind: DomainKind::Annulus { inner, outer },
            dim,
            bbox_min: vec![-outer; dim],
            bbox_max: vec![outer; dim],
            feature: (2.0 * inner).min(outer - inner),
        })
    }

    pub fn cuboid(sides: Vec<f64>) -> Result<Self> {
        check_dim(sides.len())?;
        for &s in &sides {
            positive("side length", s)?;
        }
        let feature = sides.iter().cloned().fold(f64::MAX, f64::min);
        Ok(Self {
            dim: sides.len(),
            bbox_min: vec![0.0; sides.len()],
            bbox_max: sides.clone(),
            kind: DomainKind::Cuboid { sides },
            feature,
        })
    }

    pub fn paraboloid_cap(dim: usize, height: f64) -> Result<Self> {
        check_dim(dim)?;
        positive("height", height)?;
        let w = height.sqrt();
        let mut bbox_min = vec![-w; dim];
        let mut bbox_max = vec![w; dim];
        bbox_min[dim - 1] = 0.0;
        bbox_max[dim - 1] = height;
        Ok(Self {
            kind: DomainKind::ParaboloidCap { height },
            dim,
            bbox_min,
            bbox_max,
            // vertex focal length is 1/2
            feature: w.min(1.0),
        })
    }

    pub fn catenoid_slab(neck: f64, thickness: f64) -> Result<Self> {
        positive("neck radius", neck)?;
        positive("thickness", thickness)?;
        let rmax = neck * (thickness / (2.0 * neck)).cosh();
        Ok(Self {
            kind: DomainKind::CatenoidSlab { neck, thickness },
            dim: 3,
            bbox_min: vec![-rmax, -rmax, -thickness / 2.0],
            bbox_max: vec![rmax, rmax, thickness / 2.0],
            feature: 2.0 * neck,
        })
    }

    pub fn ellipsoid_shell(outer: Vec<f64>, inner: Vec<f64>) -> Result<Self> {
        check_dim(outer.len())?;
        if outer.len() != inner.len() {
            return Err(Error::domain("outer and inner semi-axes differ in length"));
        }
        for (&a, &b) in outer.iter().zip(&inner) {
            positive("semi-axis", a)?;
            positive("semi-axis", b)?;
        }
        // inner strictly inside outer: every inner point must satisfy Σ (x/a)² < 1
        let worst = inner
            .iter()
            .zip(&outer)
            .map(|(b, a)| b / a)
            .fold(0.0f64, f64::max);
        if worst >= 1.0 {
            return Err(Error::domain("inner ellipsoid is not strictly inside the outer one"));
        }
        let gap = inner
            .iter()
            .zip(&outer)
            .map(|(b, a)| a - b)
            .fold(f64::MAX, f64::min);
        let thin = inner.iter().cloned().fold(f64::MAX, f64::min) * 2.0;
        Ok(Self {
            dim: outer.len(),
            bbox_min: outer.iter().map(|a| -a).collect(),
            bbox_max: outer.clone(),
            kind: DomainKind::EllipsoidShell { outer, inner },
            feature: gap.min(thin),
        })
    }

    /// `{ F < 0 }` inside the given box. `feature` is the thinnest feature size
    /// used by the grid-resolution check; it defaults to the smallest box extent.
    pub fn implicit(
        source: &str,
        bbox_min: Vec<f64>,
        bbox_max: Vec<f64>,
        feature: Option<f64>,
    ) -> Result<Self> {
        let dim = bbox_min.len();
        check_dim(dim)?;
        if bbox_max.len() != dim || bbox_min.iter().zip(&bbox_max).any(|(a, b)| !(a < b)) {
            return Err(Error::domain("implicit domain needs a non-empty bounding box"));
        }
        let expr = Expr::parse(source)?;
        if expr.arity() > dim {
            return Err(Error::domain(format!(
                "expression uses {} variables but the domain is {dim}-dimensional",
                expr.arity()
            )));
        }
        let ext = bbox_min
            .iter()
            .zip(&bbox_max)
            .map(|(a, b)| b - a)
            .fold(f64::MAX, f64::min);
        Ok(Self {
            kind: DomainKind::Implicit {
                expr,
                source: source.to_string(),
            },
            dim,
            bbox_min,
            bbox_max,
            feature: feature.unwrap_or(ext),
        })
    }

    /// `t·Ω` for analytic kinds.
    pub fn scaled(&self, t: f64) -> Result<Self> {
        positive("scale", t)?;
        let s = |v: &[f64]| v.iter().map(|x| x * t).collect::<Vec<_>>();
        match &self.kind {
            DomainKind::Ball { radius } => Self::ball(self.dim, radius * t),
            DomainKind::Torus { minor, major } => Self::torus(minor * t, major * t),
            DomainKind::Annulus { inner, outer } => Self::annulus(self.dim, inner * t, outer * t),
            DomainKind::Cuboid { sides } => Self::cuboid(s(sides)),
            DomainKind::CatenoidSlab { neck, thickness } => Self::catenoid_slab(neck * t, thickness * t),
            DomainKind::EllipsoidShell { outer, inner } => Self::ellipsoid_shell(s(outer), s(inner)),
            DomainKind::ParaboloidCap { .. } | DomainKind::Implicit { .. } => Err(Error::config(
                "scaling is only available for kinds with a length parameter",
            )),
        }
    }

    pub fn kind(&self) -> &DomainKind {
        &self.kind
    }

    pub fn kind_name(&self) -> &'static str {
        match self.kind {
            DomainKind::Ball { .. } => "ball",
            DomainKind::Torus { .. } => "torus",
            DomainKind::Annulus { .. } => "annulus",
            DomainKind::Cuboid { .. } => "box",
            DomainKind::ParaboloidCap { .. } => "paraboloid_cap",
            DomainKind::CatenoidSlab { .. } => "catenoid_slab",
            DomainKind::EllipsoidShell { .. } => "ellipsoid_shell",
            DomainKind::Implicit { .. } => "implicit",
        }
    }

    /// Ambient dimension `n + 1`.
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Number of principal curvatures, `n`.
    pub fn n(&self) -> usize {
        self.dim - 1
    }

    pub fn bounding_box(&self) -> (&[f64], &[f64]) {
        (&self.bbox_min, &self.bbox_max)
    }

    pub fn thinnest_feature(&self) -> f64 {
        self.feature
    }

    pub fn is_analytic(&self) -> bool {
        !matches!(self.kind, DomainKind::Implicit { .. })
    }

    /// True for kinds whose bounding box cuts an unbounded domain.
    pub fn is_truncated(&self) -> bool {
        matches!(
            self.kind,
            DomainKind::ParaboloidCap { .. } | DomainKind::CatenoidSlab { .. }
        )
    }

    /// Invariant under rotations about the last axis (3D only).
    pub fn is_axisymmetric(&self) -> bool {
        if self.dim != 3 {
            return false;
        }
        match &self.kind {
            DomainKind::Ball { .. }
            | DomainKind::Torus { .. }
            | DomainKind::Annulus { .. }
            | DomainKind::ParaboloidCap { .. }
            | DomainKind::CatenoidSlab { .. } => true,
            DomainKind::EllipsoidShell { outer, inner } => outer[0] == outer[1] && inner[0] == inner[1],
            _ => false,
        }
    }

    /// `(ρ, z)` box of the meridian half-plane for axisymmetric kinds.
    pub fn meridian_box(&self) -> Option<([f64; 2], [f64; 2])> {
        if !self.is_axisymmetric() {
            return None;
        }
        let rho_min = match self.kind {
            DomainKind::Torus { minor, major } => major - minor,
            _ => 0.0,
        };
        Some((
            [rho_min, self.bbox_min[2]],
            [self.bbox_max[0], self.bbox_max[2]],
        ))
    }

    /// Distance from `x` to the artificial truncation faces (`∞` for bounded kinds).
    pub fn truncation_distance(&self, x: &[f64]) -> f64 {
        match self.kind {
            DomainKind::ParaboloidCap { height } => height - x[self.dim - 1],
            DomainKind::CatenoidSlab { thickness, .. } => thickness / 2.0 - x[2].abs(),
            _ => f64::INFINITY,
        }
    }

    /// `x ∈ Ω`, ignoring truncation.
    pub fn contains(&self, x: &[f64]) -> bool {
        self.signed_distance(x) < 0.0
    }

    /// Signed distance to `∂Ω`, negative inside. Exact for analytic kinds; for
    /// implicit kinds the magnitude is the distance to the Newton foot point.
    pub fn signed_distance(&self, x: &[f64]) -> f64 {
        match &self.kind {
            DomainKind::Ball { radius } => norm(x) - radius,
            DomainKind::Torus { minor, major } => {
                let rho = x[0].hypot(x[1]);
                (rho - major).hypot(x[2]) - minor
            }
            DomainKind::Annulus { inner, outer } => {
                let r = norm(x);
                (r - outer).max(inner - r)
            }
            DomainKind::Cuboid { sides } => {
                let mut outside = 0.0;
                let mut inside = f64::MIN;
                for (xi, a) in x.iter().zip(sides) {
                    let q = (xi - a / 2.0).abs() - a / 2.0;
                    outside += q.max(0.0).powi(2);
                    inside = inside.max(q);
                }
                outside.sqrt() + inside.min(0.0)
            }
            DomainKind::ParaboloidCap { .. } => {
                let (rho, z) = self.split_axis(x);
                let s = paraboloid_foot(rho, z);
                let d = (s - rho).hypot(s * s - z);
                if z > rho * rho {
                    -d
                } else {
                    d
                }
            }
            DomainKind::CatenoidSlab { neck, .. } => {
                let (rho, z) = self.split_axis(x);
                let u = catenoid_foot(*neck, rho, z);
                let d = (neck * (u / neck).cosh() - rho).hypot(u - z);
                if rho < neck * (z / neck).cosh() {
                    -d
                } else {
                    d
                }
            }
            DomainKind::EllipsoidShell { outer, inner } => {
                let d_out = distance(x, &closest_on_ellipsoid(outer, x));
                let d_in = distance(x, &closest_on_ellipsoid(inner, x));
                let in_outer = ellipsoid_level(outer, x) < 0.0;
                let in_inner = ellipsoid_level(inner, x) < 0.0;
                if in_outer && !in_inner {
                    -d_out.min(d_in)
                } else if !in_outer {
                    d_out
                } else {
                    d_in
                }
            }
            DomainKind::Implicit { expr, .. } => {
                let f = expr.eval(x);
                let y = self.closest_point(x);
                let d = distance(x, &y);
                if f < 0.0 {
                    -d
                } else {
                    d
                }
            }
        }
    }

    /// Unsigned distance to the boundary.
    pub fn distance(&self, x: &[f64]) -> f64 {
        self.signed_distance(x).abs()
    }

    /// Nearest boundary point; ties are broken deterministically.
    pub fn closest_point(&self, x: &[f64]) -> Vec<f64> {
        match &self.kind {
            DomainKind::Ball { radius } => radial_point(x, *radius),
            DomainKind::Torus { minor, major } => {
                let rho = x[0].hypot(x[1]);
                let (c, s) = if rho > 0.0 { (x[0] / rho, x[1] / rho) } else { (1.0, 0.0) };
                let (mr, mz) = (rho - major, x[2]);
                let q = mr.hypot(mz);
                let (ur, uz) = if q > 0.0 { (mr / q, mz / q) } else { (1.0, 0.0) };
                let r = major + minor * ur;
                vec![r * c, r * s, minor * uz]
            }
            DomainKind::Annulus { inner, outer } => {
                let r = norm(x);
                if outer - r <= r - inner {
                    radial_point(x, *outer)
                } else {
                    radial_point(x, *inner)
                }
            }
            DomainKind::Cuboid { sides } => {
                let inside = x.iter().zip(sides).all(|(xi, a)| *xi > 0.0 && xi < a);
                if inside {
                    let mut best = (f64::MAX, 0, 0.0);
                    for (i, (xi, a)) in x.iter().zip(sides).enumerate() {
                        if *xi < best.0 {
                            best = (*xi, i, 0.0);
                        }
                        if a - xi < best.0 {
                            best = (a - xi, i, *a);
                        }
                    }
                    let mut y = x.to_vec();
                    y[best.1] = best.2;
                    y
                } else {
                    x.iter().zip(sides).map(|(xi, a)| xi.clamp(0.0, *a)).collect()
                }
            }
            DomainKind::ParaboloidCap { .. } => {
                let (rho, z) = self.split_axis(x);
                let s = paraboloid_foot(rho, z);
                self.join_axis(x, s, s * s)
            }
            DomainKind::CatenoidSlab { neck, .. } => {
                let (rho, z) = self.split_axis(x);
                let u = catenoid_foot(*neck, rho, z);
                self.join_axis(x, neck * (u / neck).cosh(), u)
            }
            DomainKind::EllipsoidShell { outer, inner } => {
                let yo = closest_on_ellipsoid(outer, x);
                let yi = closest_on_ellipsoid(inner, x);
                if distance(x, &yo) <= distance(x, &yi) {
                    yo
                } else {
                    yi
                }
            }
            DomainKind::Implicit { expr, .. } => {
                let scale = self.scale();
                let mut y = x.to_vec();
                for _ in 0..60 {
                    let f = expr.eval(&y);
                    let g = self.implicit_gradient(&y);
                    let g2: f64 = g.iter().map(|v| v * v).sum();
                    if !(g2 > 0.0) || !f.is_finite() {
                        break;
                    }
                    for (yi, gi) in y.iter_mut().zip(&g) {
                        *yi -= f * gi / g2;
                    }
                    if f.abs() < 1e-14 * scale * g2.sqrt() {
                        break;
                    }
                }
                y
            }
        }
    }

    /// Outward normal and principal curvatures at a boundary point `y`.
    /// Returns `None` where the boundary is not differentiable (implicit kinds
    /// with a vanishing gradient).
    pub fn curvature(&self, y: &[f64]) -> Option<CurvatureSample> {
        let n = self.n();
        Some(match &self.kind {
            DomainKind::Ball { radius } => {
                let r = norm(y);
                let normal = unit_or_axis(y, r);
                CurvatureSample::new(y.to_vec(), normal, vec![1.0 / radius; n])
            }
            DomainKind::Torus { minor, major } => {
                let rho = y[0].hypot(y[1]);
                let (c, s) = if rho > 0.0 { (y[0] / rho, y[1] / rho) } else { (1.0, 0.0) };
                let (mr, mz) = (rho - major, y[2]);
                let q = mr.hypot(mz);
                let (ct, st) = if q > 0.0 { (mr / q, mz / q) } else { (1.0, 0.0) };
                let k2 = ct / (major + minor * ct);
                CurvatureSample::new(y.to_vec(), vec![ct * c, ct * s, st], vec![1.0 / minor, k2])
            }
            DomainKind::Annulus { inner, outer } => {
                let r = norm(y);
                let u = unit_or_axis(y, r);
                if (r - outer).abs() <= (r - inner).abs() {
                    CurvatureSample::new(y.to_vec(), u, vec![1.0 / outer; n])
                } else {
                    let normal = u.iter().map(|v| -v).collect();
                    CurvatureSample::new(y.to_vec(), normal, vec![-1.0 / inner; n])
                }
            }
            DomainKind::Cuboid { sides } => {
                let mut best = (f64::MAX, 0, -1.0);
                for (i, (yi, a)) in y.iter().zip(sides).enumerate() {
                    if yi.abs() < best.0 {
                        best = (yi.abs(), i, -1.0);
                    }
                    if (a - yi).abs() < best.0 {
                        best = ((a - yi).abs(), i, 1.0);
                    }
                }
                let mut normal = vec![0.0; self.dim];
                normal[best.1] = best.2;
                CurvatureSample::new(y.to_vec(), normal, vec![0.0; n])
            }
            DomainKind::ParaboloidCap { .. } => {
                let (s, _) = self.split_axis(y);
                let dir = self.radial_dir(y);
                let w = (1.0 + 4.0 * s * s).sqrt();
                let mut normal: Vec<f64> = dir.iter().map(|d| 2.0 * s * d / w).collect();
                normal.push(-1.0 / w);
                let mut kappas = vec![2.0 / (w * w * w)];
                kappas.extend(std::iter::repeat_n(2.0 / w, n - 1));
                CurvatureSample::new(y.to_vec(), normal, kappas)
            }
            DomainKind::CatenoidSlab { neck, .. } => {
                let z = y[2];
                let ch = (z / neck).cosh();
                let k = 1.0 / (neck * ch * ch);
                let dir = self.radial_dir(y);
                let normal = vec![dir[0] / ch, dir[1] / ch, -(z / neck).tanh()];
                CurvatureSample::new(y.to_vec(), normal, vec![-k, k])
            }
            DomainKind::EllipsoidShell { outer, inner } => {
                let lo = ellipsoid_level(outer, y).abs();
                let li = ellipsoid_level(inner, y).abs();
                let (axes, sign) = if lo <= li { (outer, 1.0) } else { (inner, -1.0) };
                let grad: Vec<f64> = y.iter().zip(axes).map(|(v, a)| 2.0 * v / (a * a)).collect();
                let mut hess = vec![0.0; self.dim * self.dim];
                for (i, a) in axes.iter().enumerate() {
                    hess[i * self.dim + i] = 2.0 / (a * a);
                }
                let (k, nrm) = shape::level_set_curvatures(&grad, &hess)?;
                CurvatureSample::new(
                    y.to_vec(),
                    nrm.iter().map(|v| sign * v).collect(),
                    k.iter().map(|v| sign * v).collect(),
                )
            }
            DomainKind::Implicit { .. } => {
                let grad = self.implicit_gradient(y);
                let hess = self.implicit_hessian(y);
                let (k, nrm) = shape::level_set_curvatures(&grad, &hess)?;
                if k.iter().any(|v| !v.is_finite()) {
                    return None;
                }
                CurvatureSample::new(y.to_vec(), nrm, k)
            }
        })
    }

    /// Distance along the inward normal from boundary point `y` to the
    /// singular set, where known in closed form.
    pub fn ridge_distance(&self, y: &[f64]) -> Option<f64> {
        match &self.kind {
            DomainKind::Ball { radius } => Some(*radius),
            DomainKind::Torus { minor, .. } => Some(*minor),
            DomainKind::Annulus { inner, outer } => Some((outer - inner) / 2.0),
            DomainKind::Cuboid { sides } => {
                let sample = self.curvature(y)?;
                let face = sample.normal.iter().position(|v| *v != 0.0)?;
                let mut t = sides[face] / 2.0;
                for (j, (yj, a)) in y.iter().zip(sides).enumerate() {
                    if j != face {
                        t = t.min(*yj).min(a - yj);
                    }
                }
                Some(t.max(0.0))
            }
            DomainKind::ParaboloidCap { .. } => {
                let (s, _) = self.split_axis(y);
                Some((1.0 + 4.0 * s * s).sqrt() / 2.0)
            }
            DomainKind::CatenoidSlab { neck, .. } => {
                let ch = (y[2] / neck).cosh();
                Some(neck * ch * ch)
            }
            DomainKind::EllipsoidShell { .. } | DomainKind::Implicit { .. } => None,
        }
    }

    /// Closed-form diameter; for implicit kinds the largest distance between
    /// boundary samples at the given resolution.
    pub fn diameter(&self) -> f64 {
        match &self.kind {
            DomainKind::Ball { radius } => 2.0 * radius,
            DomainKind::Torus { minor, major } => 2.0 * (minor + major),
            DomainKind::Annulus { outer, .. } => 2.0 * outer,
            DomainKind::Cuboid { sides } => norm(sides),
            DomainKind::ParaboloidCap { height } => (2.0 * height.sqrt()).max((height + height * height).sqrt()),
            DomainKind::CatenoidSlab { thickness, .. } => {
                (4.0 * self.bbox_max[0] * self.bbox_max[0] + thickness * thickness).sqrt()
            }
            DomainKind::EllipsoidShell { outer, .. } => 2.0 * outer.iter().cloned().fold(0.0, f64::max),
            DomainKind::Implicit { .. } => {
                let s = self.boundary_sample(32).map(|b| b.samples).unwrap_or_default();
                let mut d = 0.0f64;
                for (i, a) in s.iter().enumerate() {
                    for b in &s[i + 1..] {
                        d = d.max(distance(&a.point, &b.point));
                    }
                }
                d
            }
        }
    }

    /// Closed-form volume of `Ω` (of the truncated region for truncated kinds).
    pub fn volume(&self) -> Option<f64> {
        use std::f64::consts::PI;
        let d = self.dim;
        match &self.kind {
            DomainKind::Ball { radius } => Some(unit_ball_volume(d) * radius.powi(d as i32)),
            DomainKind::Torus { minor, major } => Some(2.0 * PI * PI * major * minor * minor),
            DomainKind::Annulus { inner, outer } => {
                Some(unit_ball_volume(d) * (outer.powi(d as i32) - inner.powi(d as i32)))
            }
            DomainKind::Cuboid { sides } => Some(sides.iter().product()),
            DomainKind::ParaboloidCap { height } => match d {
                2 => Some(4.0 / 3.0 * height.powf(1.5)),
                3 => Some(PI * height * height / 2.0),
                _ => None,
            },
            DomainKind::CatenoidSlab { neck, thickness } => {
                Some(PI * neck * neck * (thickness / 2.0 + neck / 2.0 * (thickness / neck).sinh()))
            }
            DomainKind::EllipsoidShell { outer, inner } => Some(
                unit_ball_volume(d) * (outer.iter().product::<f64>() - inner.iter().product::<f64>()),
            ),
            DomainKind::Implicit { .. } => None,
        }
    }

    /// Interior radius `sup δ`, where known in closed form.
    pub fn inradius(&self) -> Option<f64> {
        match &self.kind {
            DomainKind::Ball { radius } => Some(*radius),
            DomainKind::Torus { minor, .. } => Some(*minor),
            DomainKind::Annulus { inner, outer } => Some((outer - inner) / 2.0),
            DomainKind::Cuboid { sides } => Some(sides.iter().cloned().fold(f64::MAX, f64::min) / 2.0),
            _ => None,
        }
    }

    fn scale(&self) -> f64 {
        self.bbox_min
            .iter()
            .zip(&self.bbox_max)
            .map(|(a, b)| b - a)
            .fold(0.0, f64::max)
    }

    /// Splits `x` into (distance from the last axis, last coordinate).
    fn split_axis(&self, x: &[f64]) -> (f64, f64) {
        let d = self.dim;
        (norm(&x[..d - 1]), x[d - 1])
    }

    fn radial_dir(&self, x: &[f64]) -> Vec<f64> {
        let d = self.dim;
        let r = norm(&x[..d - 1]);
        unit_or_axis(&x[..d - 1], r)
    }

    fn join_axis(&self, x: &[f64], rho: f64, z: f64) -> Vec<f64> {
        let mut y: Vec<f64> = self.radial_dir(x).iter().map(|u| u * rho).collect();
        y.push(z);
        y
    }

    fn implicit_gradient(&self, x: &[f64]) -> Vec<f64> {
        let DomainKind::Implicit { expr, .. } = &self.kind else {
            unreachable!()
        };
        let h = 1e-6 * self.scale();
        let mut p = x.to_vec();
        (0..self.dim)
            .map(|i| {
                p[i] = x[i] + h;
                let fp = expr.eval(&p);
                p[i] = x[i] - h;
                let fm = expr.eval(&p);
                p[i] = x[i];
                (fp - fm) / (2.0 * h)
            })
            .collect()
    }

    fn implicit_hessian(&self, x: &[f64]) -> Vec<f64> {
        let DomainKind::Implicit { expr, .. } = &self.kind else {
            unreachable!()
        };
        let d = self.dim;
        let h = 1e-4 * self.scale();
        let f0 = expr.eval(x);
        let mut p = x.to_vec();
        let mut out = vec![0.0; d * d];
        for i in 0..d {
            p[i] = x[i] + h;
            let fp = expr.eval(&p);
            p[i] = x[i] - h;
            let fm = expr.eval(&p);
            p[i] = x[i];
            out[i * d + i] = (fp - 2.0 * f0 + fm) / (h * h);
            for j in i + 1..d {
                let mut q = |si: f64, sj: f64| {
                    p[i] = x[i] + si * h;
                    p[j] = x[j] + sj * h;
                    let v = expr.eval(&p);
                    p[i] = x[i];
                    p[j] = x[j];
                    v
                };
                let v = (q(1.0, 1.0) - q(1.0, -1.0) - q(-1.0, 1.0) + q(-1.0, -1.0)) / (4.0 * h * h);
                out[i * d + j] = v;
                out[j * d + i] = v;
            }
        }
        out
    }
}

fn unit_or_axis(x: &[f64], r: f64) -> Vec<f64> {
    if r > 0.0 {
        x.iter().map(|v| v / r).collect()
    } else {
        let mut u = vec![0.0; x.len()];
        u[0] = 1.0;
        u
    }
}

fn radial_point(x: &[f64], radius: f64) -> Vec<f64> {
    let r = norm(x);
    unit_or_axis(x, r).iter().map(|u| u * radius).collect()
}

fn ellipsoid_level(axes: &[f64], x: &[f64]) -> f64 {
    x.iter().zip(axes).map(|(v, a)| (v / a).powi(2)).sum::<f64>() - 1.0
}

/// Meridian coordinate `s ≥ 0` of the nearest point on `z = s²` to `(ρ, z)`.
fn paraboloid_foot(rho: f64, z: f64) -> f64 {
    // stationary points solve 2s³ + (1 - 2z)s - ρ = 0
    let g = |s: f64| 2.0 * s * s * s + (1.0 - 2.0 * z) * s - rho;
    if rho <= 0.0 {
        return if z > 0.5 { (z - 0.5).sqrt() } else { 0.0 };
    }
    let mut lo = 0.0;
    let mut hi = rho.max(z.abs().sqrt()) + 1.0;
    while g(hi) < 0.0 {
        hi *= 2.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid == lo || mid == hi {
            break;
        }
        if g(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Height `u` of the nearest point on the meridian `ρ = c·cosh(u/c)` to `(ρ, z)`.
fn catenoid_foot(c: f64, rho: f64, z: f64) -> f64 {
    let dist2 = |u: f64| (c * (u / c).cosh() - rho).powi(2) + (u - z).powi(2);
    // the nearest point is no farther than the horizontal foot (c·cosh(z/c), z)
    let reach = (c * (z / c).cosh() - rho).abs().max(1e-12);
    let m = 128;
    let (mut best_u, mut best) = (z, dist2(z));
    for k in 0..=m {
        let u = z - reach + 2.0 * reach * k as f64 / m as f64;
        let v = dist2(u);
        if v < best {
            best = v;
            best_u = u;
        }
    }
    let step = 2.0 * reach / m as f64;
    crate::numeric::golden_min(dist2, best_u - step, best_u + step, 100).0
}

/// Evaluates `domain.curvature(domain.closest_point(x))`.
pub fn curvature_at_nearest(domain: &Domain, x: &[f64]) -> Option<CurvatureSample> {
    domain.curvature(&domain.closest_point(x))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constructor_invariants() {
        assert!(Domain::ball(1, 1.0).is_err());
        assert!(Domain::ball(2, -1.0).is_err());
        assert!(Domain::torus(2.0, 1.0).is_err());
        assert!(Domain::annulus(2, 1.0, 0.5).is_err());
        assert!(Domain::ellipsoid_shell(vec![2.0, 1.0], vec![1.0, 1.0]).is_err());
        assert!(Domain::ellipsoid_shell(vec![2.0, 1.0], vec![1.0, 0.5]).is_ok());
        assert!(Domain::implicit("x + y + z", vec![0.0, 0.0], vec![1.0, 1.0], None).is_err());
    }

    #[test]
    fn torus_distance_and_curvature() {
        let t = Domain::torus(1.0, 2.0).unwrap();
        let x = [2.3, 0.4, 0.2];
        let rho = (2.3f64 * 2.3 + 0.16).sqrt();
        let expect = 1.0 - ((rho - 2.0).powi(2) + 0.04).sqrt();
        assert!((t.distance(&x) - expect).abs() < 1e-14);
        // inner equator
        let s = t.curvature(&[1.0, 0.0, 0.0]).unwrap();
        assert!((s.kappas.entries()[1] + 1.0).abs() < 1e-14);
        assert!(s.mean.abs() < 1e-14);
        assert_eq!(s.normal, vec![-1.0, 0.0, 0.0]);
    }

    #[test]
    fn paraboloid_foot_point_is_orthogonal() {
        let d = Domain::paraboloid_cap(2, 4.0).unwrap();
        for x in [[0.3, 1.0], [-0.5, 2.0], [1.0, 0.2], [0.0, 2.0]] {
            let y = d.closest_point(&x);
            assert!((y[1] - y[0] * y[0]).abs() < 1e-12);
            // x - y is parallel to the normal
            let s = d.curvature(&y).unwrap();
            let v = [x[0] - y[0], x[1] - y[1]];
            let cross = v[0] * s.normal[1] - v[1] * s.normal[0];
            assert!(cross.abs() < 1e-9, "{x:?}");
        }
        assert!(d.signed_distance(&[0.0, 1.0]) < 0.0);
        assert!((d.curvature(&[0.0, 0.0]).unwrap().mean - 2.0).abs() < 1e-14);
    }

    #[test]
    fn catenoid_is_minimal() {
        let d = Domain::catenoid_slab(1.0, 2.0).unwrap();
        let y = [0.0, 1.0f64.cosh() * 1.0, 1.0];
        let s = d.curvature(&y).unwrap();
        assert_eq!(s.mean, 0.0);
        assert!((norm(&s.normal) - 1.0).abs() < 1e-14);
        let x = [0.0, 0.5, 0.3];
        let f = d.closest_point(&x);
        assert!((f[0].hypot(f[1]) - f[2].cosh()).abs() < 1e-9);
        assert!(d.signed_distance(&x) < 0.0);
    }

    #[test]
    fn implicit_sphere_matches_ball() {
        let d = Domain::implicit("x^2 + y^2 + z^2 - 1", vec![-1.5; 3], vec![1.5; 3], None).unwrap();
        let y = d.closest_point(&[0.3, 0.4, 0.5]);
        assert!((norm(&y) - 1.0).abs() < 1e-10);
        let s = d.curvature(&y).unwrap();
        for k in s.kappas.entries() {
            assert!((k - 1.0).abs() < 1e-5, "{k}");
        }
        assert!((d.signed_distance(&[0.0, 0.0, 0.5]) + 0.5).abs() < 1e-9);
    }

    #[test]
    fn ellipsoid_shell_inner_is_concave() {
        let d = Domain::ellipsoid_shell(vec![3.0, 2.0], vec![1.0, 0.5]).unwrap();
        let s = d.curvature(&[1.0, 0.0]).unwrap();
        // ellipse x²+4y²=1 at (1,0): curvature a/b² = 4, seen from outside
        assert!((s.mean + 4.0).abs() < 1e-10, "{}", s.mean);
        assert_eq!(s.normal, vec![-1.0, 0.0]);
        assert!(d.contains(&[2.0, 0.0]) && !d.contains(&[0.5, 0.0]));
    }
}
