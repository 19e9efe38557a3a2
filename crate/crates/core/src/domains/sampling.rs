//! Boundary sampling and the mean-convexity report.

use std::collections::HashMap;
use std::f64::consts::PI;

use serde::Serialize;

use super::{CurvatureSample, Domain, DomainKind};
use crate::numeric::distance;
use crate::{Error, Result};

/// How samples are laid out, used to bound the curvature variation between them.
#[derive(Debug, Clone)]
pub enum Patch {
    /// Tensor-product parameter grid; `None` marks a skipped sample.
    Grid {
        indices: Vec<Option<usize>>,
        shape: Vec<usize>,
        periodic: Vec<bool>,
    },
    /// Unstructured samples with a nominal spacing.
    Scatter { indices: Vec<usize>, spacing: f64 },
}

#[derive(Debug, Clone, Default)]
pub struct BoundarySampling {
    pub samples: Vec<CurvatureSample>,
    pub patches: Vec<Patch>,
    /// Points where the boundary was not differentiable.
    pub skipped: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ConvexityReport {
    #[serde(rename = "H0")]
    pub h0: f64,
    pub kappa0: f64,
    pub weakly_mean_convex: bool,
    pub witness_point: Vec<f64>,
    pub min_sampled_h: f64,
    pub margin: f64,
    pub tolerance: f64,
    pub samples: usize,
    pub skipped: usize,
}

impl BoundarySampling {
    fn push_grid(&mut self, domain: &Domain, shape: Vec<usize>, periodic: Vec<bool>, points: Vec<Vec<f64>>) {
        let indices = points.into_iter().map(|p| self.push(domain, p)).collect();
        self.patches.push(Patch::Grid {
            indices,
            shape,
            periodic,
        });
    }

    fn push_scatter(&mut self, domain: &Domain, spacing: f64, points: Vec<Vec<f64>>) {
        let indices = points.into_iter().filter_map(|p| self.push(domain, p)).collect();
        self.patches.push(Patch::Scatter { indices, spacing });
    }

    fn push(&mut self, domain: &Domain, p: Vec<f64>) -> Option<usize> {
        match domain.curvature(&p) {
            Some(s) if s.mean.is_finite() => {
                self.samples.push(s);
                Some(self.samples.len() - 1)
            }
            _ => {
                self.skipped.push(p);
                None
            }
        }
    }
}

/// Unit directions on `S^{d-1}` laid out as a parameter grid (`d ≤ 3`).
fn sphere_grid(d: usize, res: usize) -> (Vec<Vec<f64>>, Vec<usize>, Vec<bool>) {
    if d == 2 {
        let pts = (0..res)
            .map(|j| {
                let t = 2.0 * PI * j as f64 / res as f64;
                vec![t.cos(), t.sin()]
            })
            .collect();
        return (pts, vec![res], vec![true]);
    }
    let nt = (res / 2).max(4);
    let mut pts = Vec::with_capacity(nt * res);
    for i in 0..nt {
        let th = PI * (i as f64 + 0.5) / nt as f64;
        for j in 0..res {
            let ph = 2.0 * PI * j as f64 / res as f64;
            pts.push(vec![th.sin() * ph.cos(), th.sin() * ph.sin(), th.cos()]);
        }
    }
    (pts, vec![nt, res], vec![false, true])
}

/// Zero crossings of `f` along the edges of a lattice over the box, each
/// located by bisection. Returns the points and the lattice spacing.
fn lattice_crossings(
    f: impl Fn(&[f64]) -> f64,
    lo: &[f64],
    hi: &[f64],
    res: usize,
) -> (Vec<Vec<f64>>, f64) {
    let d = lo.len();
    let budget = 2.0e6f64.powf(1.0 / d as f64).floor() as usize;
    let res = res.min(budget).max(4);
    let ext = lo.iter().zip(hi).map(|(a, b)| b - a).fold(0.0, f64::max);
    let h = ext / res as f64;
    // nudge the lattice off symmetry planes so crossings are not hit exactly
    let shift = 0.123_456 * h;
    let dims: Vec<usize> = lo
        .iter()
        .zip(hi)
        .map(|(a, b)| ((b - a) / h).ceil() as usize + 2)
        .collect();
    let total: usize = dims.iter().product();
    let coord = |idx: &[usize]| -> Vec<f64> {
        idx.iter()
            .zip(lo)
            .map(|(&i, &l)| l - h + shift + i as f64 * h)
            .collect()
    };
    let mut idx = vec![0usize; d];
    let mut out = Vec::new();
    for lin in 0..total {
        let mut r = lin;
        for a in (0..d).rev() {
            idx[a] = r % dims[a];
            r /= dims[a];
        }
        let x = coord(&idx);
        let fx = f(&x);
        for a in 0..d {
            if idx[a] + 1 >= dims[a] {
                continue;
            }
            let mut y = x.clone();
            y[a] += h;
            let fy = f(&y);
            if (fx < 0.0) == (fy < 0.0) || !fx.is_finite() || !fy.is_finite() {
                continue;
            }
            let (mut s0, mut s1) = (0.0, h);
            for _ in 0..50 {
                let m = 0.5 * (s0 + s1);
                let mut z = x.clone();
                z[a] += m;
                if (f(&z) < 0.0) == (fx < 0.0) {
                    s0 = m;
                } else {
                    s1 = m;
                }
            }
            let mut z = x.clone();
            z[a] += 0.5 * (s0 + s1);
            out.push(z);
        }
    }
    (out, h)
}

impl Domain {
    /// Quasi-uniform sample of `∂Ω` (including the truncation cut for
    /// truncated kinds only where the surface meets it).
    pub fn boundary_sample(&self, resolution: usize) -> Result<BoundarySampling> {
        if resolution < 8 {
            return Err(Error::domain(format!("resolution must be at least 8, got {resolution}")));
        }
        let res = resolution;
        let d = self.dim;
        let mut out = BoundarySampling::default();
        match &self.kind {
            DomainKind::Ball { radius } if d <= 3 => {
                let (dirs, shape, per) = sphere_grid(d, res);
                let pts = dirs.into_iter().map(|u| u.iter().map(|v| v * radius).collect()).collect();
                out.push_grid(self, shape, per, pts);
            }
            DomainKind::Annulus { inner, outer } if d <= 3 => {
                for r in [*outer, *inner] {
                    let (dirs, shape, per) = sphere_grid(d, res);
                    let pts = dirs.into_iter().map(|u| u.iter().map(|v| v * r).collect()).collect();
                    out.push_grid(self, shape, per, pts);
                }
            }
            DomainKind::EllipsoidShell { outer, inner } if d <= 3 => {
                for axes in [outer, inner] {
                    let (dirs, shape, per) = sphere_grid(d, res);
                    let pts = dirs
                        .into_iter()
                        .map(|u| u.iter().zip(axes.iter()).map(|(v, a)| v * a).collect())
                        .collect();
                    out.push_grid(self, shape, per, pts);
                }
            }
            DomainKind::Torus { minor, major } => {
                let mut pts = Vec::with_capacity(res * res);
                for i in 0..res {
                    let th = 2.0 * PI * i as f64 / res as f64;
                    for j in 0..res {
                        let ph = 2.0 * PI * j as f64 / res as f64;
                        let rho = major + minor * th.cos();
                        pts.push(vec![rho * ph.cos(), rho * ph.sin(), minor * th.sin()]);
                    }
                }
                out.push_grid(self, vec![res, res], vec![true, true], pts);
            }
            DomainKind::Cuboid { sides } => {
                let m = if d <= 3 {
                    res
                } else {
                    ((res * res) as f64).powf(1.0 / (d - 1) as f64).floor().max(2.0) as usize
                };
                for face in 0..d {
                    for side in [0.0, sides[face]] {
                        let axes: Vec<usize> = (0..d).filter(|&a| a != face).collect();
                        let count = m.pow(axes.len() as u32);
                        let mut pts = Vec::with_capacity(count);
                        for lin in 0..count {
                            let mut p = vec![0.0; d];
                            p[face] = side;
                            let mut r = lin;
                            for &a in axes.iter().rev() {
                                p[a] = sides[a] * ((r % m) as f64 + 0.5) / m as f64;
                                r /= m;
                            }
                            pts.push(p);
                        }
                        out.push_grid(self, vec![m; axes.len()], vec![false; axes.len()], pts);
                    }
                }
            }
            DomainKind::ParaboloidCap { height } if d <= 3 => {
                let w = height.sqrt();
                if d == 2 {
                    let pts = (0..=res)
                        .map(|i| {
                            let s = -w + 2.0 * w * i as f64 / res as f64;
                            vec![s, s * s]
                        })
                        .collect();
                    out.push_grid(self, vec![res + 1], vec![false], pts);
                } else {
                    let mut pts = Vec::new();
                    for i in 0..=res {
                        let s = w * i as f64 / res as f64;
                        for j in 0..res {
                            let ph = 2.0 * PI * j as f64 / res as f64;
                            pts.push(vec![s * ph.cos(), s * ph.sin(), s * s]);
                        }
                    }
                    out.push_grid(self, vec![res + 1, res], vec![false, true], pts);
                }
            }
            DomainKind::CatenoidSlab { neck, thickness } => {
                let mut pts = Vec::new();
                for i in 0..=res {
                    let z = -thickness / 2.0 + thickness * i as f64 / res as f64;
                    let rho = neck * (z / neck).cosh();
                    for j in 0..res {
                        let ph = 2.0 * PI * j as f64 / res as f64;
                        pts.push(vec![rho * ph.cos(), rho * ph.sin(), z]);
                    }
                }
                out.push_grid(self, vec![res + 1, res], vec![false, true], pts);
            }
            DomainKind::Implicit { expr, .. } => {
                let (pts, h) = lattice_crossings(|x| expr.eval(x), &self.bbox_min, &self.bbox_max, res);
                let pts = pts.into_iter().map(|p| self.closest_point(&p)).collect();
                out.push_scatter(self, h, pts);
            }
            _ => {
                // higher-dimensional curved kinds: lattice crossings of the exact distance
                let (lo, hi) = self.sampling_box();
                let (pts, h) = lattice_crossings(|x| self.signed_distance(x), &lo, &hi, res);
                let pts = pts
                    .into_iter()
                    .map(|p| self.closest_point(&p))
                    .filter(|p| self.truncation_distance(p) >= 0.0)
                    .collect();
                out.push_scatter(self, h, pts);
            }
        }
        Ok(out)
    }

    fn sampling_box(&self) -> (Vec<f64>, Vec<f64>) {
        let pad: Vec<f64> = self
            .bbox_min
            .iter()
            .zip(&self.bbox_max)
            .map(|(a, b)| 0.05 * (b - a))
            .collect();
        let mut hi: Vec<f64> = self.bbox_max.iter().zip(&pad).map(|(b, p)| b + p).collect();
        if let DomainKind::ParaboloidCap { height } = self.kind {
            hi[self.dim - 1] = height;
        }
        (
            self.bbox_min.iter().zip(&pad).map(|(a, p)| a - p).collect(),
            hi,
        )
    }

    /// Samples of a generating profile: the meridian curve `{y = 0, x ≥ 0}`
    /// for axisymmetric 3D kinds, the full boundary otherwise. Rotational
    /// symmetry makes the meridian carry every curvature value.
    pub fn profile_sample(&self, resolution: usize) -> Result<BoundarySampling> {
        if !self.is_axisymmetric() {
            return self.boundary_sample(resolution);
        }
        if resolution < 8 {
            return Err(Error::domain(format!("resolution must be at least 8, got {resolution}")));
        }
        let res = resolution;
        let arc = |f: &dyn Fn(f64) -> (f64, f64), a: f64, b: f64, closed: bool| -> Vec<Vec<f64>> {
            let m = if closed { res } else { res + 1 };
            (0..m)
                .map(|i| {
                    let t = a + (b - a) * i as f64 / res as f64;
                    let (r, z) = f(t);
                    vec![r, 0.0, z]
                })
                .collect()
        };
        let mut out = BoundarySampling::default();
        let curve = |pts: Vec<Vec<f64>>, closed: bool, out: &mut BoundarySampling| {
            let n = pts.len();
            out.push_grid(self, vec![n], vec![closed], pts);
        };
        match &self.kind {
            DomainKind::Ball { radius } => {
                let r = *radius;
                curve(arc(&|t| (r * t.sin(), r * t.cos()), 0.0, PI, false), false, &mut out);
            }
            DomainKind::Torus { minor, major } => {
                let (a, b) = (*minor, *major);
                curve(arc(&|t| (b + a * t.cos(), a * t.sin()), 0.0, 2.0 * PI, true), true, &mut out);
            }
            DomainKind::Annulus { inner, outer } => {
                for r in [*outer, *inner] {
                    curve(arc(&|t| (r * t.sin(), r * t.cos()), 0.0, PI, false), false, &mut out);
                }
            }
            DomainKind::ParaboloidCap { height } => {
                curve(arc(&|s| (s, s * s), 0.0, height.sqrt(), false), false, &mut out);
            }
            DomainKind::CatenoidSlab { neck, thickness } => {
                let c = *neck;
                let t = thickness / 2.0;
                curve(arc(&|z| (c * (z / c).cosh(), z), -t, t, false), false, &mut out);
            }
            DomainKind::EllipsoidShell { outer, inner } => {
                for ax in [outer, inner] {
                    let (a, c) = (ax[0], ax[2]);
                    curve(arc(&|t| (a * t.sin(), c * t.cos()), 0.0, PI, false), false, &mut out);
                }
            }
            _ => unreachable!("non-axisymmetric kinds handled above"),
        }
        Ok(out)
    }

    /// Minimum mean curvature with a safety margin for what the samples may
    /// miss, and the weak classification `H0 ≥ -tol`.
    pub fn convexity_report(&self, resolution: usize, tol: f64) -> Result<ConvexityReport> {
        let bs = self.boundary_sample(resolution)?;
        Ok(report_from_sampling(&bs, tol))
    }
}

pub(crate) fn report_from_sampling(bs: &BoundarySampling, tol: f64) -> ConvexityReport {
    let mut h0 = f64::INFINITY;
    let mut min_h = f64::INFINITY;
    let mut margin_at_min = 0.0;
    let mut witness = Vec::new();
    for patch in &bs.patches {
        let ids: Vec<usize> = match patch {
            Patch::Grid { indices, .. } => indices.iter().flatten().copied().collect(),
            Patch::Scatter { indices, .. } => indices.clone(),
        };
        let Some(&arg) = ids
            .iter()
            .min_by(|&&a, &&b| bs.samples[a].mean.total_cmp(&bs.samples[b].mean))
        else {
            continue;
        };
        let m = patch_margin(&bs.samples, patch);
        let lo = bs.samples[arg].mean;
        if lo - m < h0 {
            h0 = lo - m;
            margin_at_min = m;
            witness = bs.samples[arg].point.clone();
        }
        min_h = min_h.min(lo);
    }
    let kappa0 = bs
        .samples
        .iter()
        .flat_map(|s| s.kappas.entries().iter().map(|k| k.abs()))
        .fold(f64::INFINITY, f64::min);
    ConvexityReport {
        h0,
        kappa0,
        weakly_mean_convex: h0 >= -tol,
        witness_point: witness,
        min_sampled_h: min_h,
        margin: margin_at_min,
        tolerance: tol,
        samples: bs.samples.len(),
        skipped: bs.skipped.len(),
    }
}

fn is_constant(samples: &[CurvatureSample], ids: impl Iterator<Item = usize>) -> bool {
    let hs: Vec<f64> = ids.map(|i| samples[i].mean).collect();
    let (lo, hi) = hs
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &h| (a.min(h), b.max(h)));
    hs.is_empty() || hi - lo <= 1e-12 * (1.0 + hi.abs().max(lo.abs()))
}

/// Bound on how far `H` may dip below the sampled minimum between samples:
/// the smaller of a first-order (Lipschitz) and a second-order (interpolation)
/// estimate from finite differences of the samples themselves.
fn patch_margin(samples: &[CurvatureSample], patch: &Patch) -> f64 {
    match patch {
        Patch::Grid {
            indices,
            shape,
            periodic,
        } => {
            if is_constant(samples, indices.iter().flatten().copied()) {
                return 0.0;
            }
            let k = shape.len();
            let mut strides = vec![1usize; k];
            for a in (0..k.saturating_sub(1)).rev() {
                strides[a] = strides[a + 1] * shape[a + 1];
            }
            let mut first = 0.0;
            let mut second = 0.0;
            for a in 0..k {
                let (mut lip, mut curv, mut step) = (0.0f64, 0.0f64, 0.0f64);
                for lin in 0..indices.len() {
                    let i = (lin / strides[a]) % shape[a];
                    let nb = |off: isize| -> Option<usize> {
                        let j = i as isize + off;
                        let j = if periodic[a] {
                            j.rem_euclid(shape[a] as isize)
                        } else if j < 0 || j >= shape[a] as isize {
                            return None;
                        } else {
                            j
                        };
                        indices[(lin as isize + (j - i as isize) * strides[a] as isize) as usize]
                    };
                    let (Some(c), Some(n)) = (indices[lin], nb(1)) else {
                        continue;
                    };
                    let d1 = distance(&samples[c].point, &samples[n].point);
                    if d1 < 1e-14 {
                        continue;
                    }
                    let dh = samples[n].mean - samples[c].mean;
                    lip = lip.max(dh.abs() / d1);
                    step = step.max(d1);
                    if let Some(p) = nb(-1) {
                        let d0 = distance(&samples[p].point, &samples[c].point);
                        if d0 > 1e-14 {
                            let s = 2.0 * (dh / d1 - (samples[c].mean - samples[p].mean) / d0) / (d0 + d1);
                            curv = curv.max(s.abs());
                        }
                    }
                }
                first += lip * step / 2.0;
                second += curv * step * step / 8.0;
            }
            first.min(second.max(first * 1e-3))
        }
        Patch::Scatter { indices, spacing } => {
            if is_constant(samples, indices.iter().copied()) {
                return 0.0;
            }
            let radius = 2.0 * spacing;
            let mut buckets: HashMap<Vec<i64>, Vec<usize>> = HashMap::new();
            let key = |p: &[f64]| p.iter().map(|v| (v / radius).floor() as i64).collect::<Vec<_>>();
            for &i in indices {
                buckets.entry(key(&samples[i].point)).or_default().push(i);
            }
            let d = samples.first().map_or(0, |s| s.point.len());
            let mut lip = 0.0f64;
            for &i in indices {
                let base = key(&samples[i].point);
                for off in 0..3usize.pow(d as u32) {
                    let mut r = off;
                    let cell: Vec<i64> = base
                        .iter()
                        .map(|b| {
                            let o = (r % 3) as i64 - 1;
                            r /= 3;
                            b + o
                        })
                        .collect();
                    for &j in buckets.get(&cell).into_iter().flatten() {
                        if j <= i {
                            continue;
                        }
                        let dist = distance(&samples[i].point, &samples[j].point);
                        if dist > 1e-3 * spacing && dist <= radius {
                            lip = lip.max((samples[i].mean - samples[j].mean).abs() / dist);
                        }
                    }
                }
            }
            lip * spacing
        }
    }
}
