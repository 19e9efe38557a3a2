//! Uniform node grids over a domain's bounding box.
//!
//! Values live on nodes; "cell" below means the node and the box of side
//! `spacing` centred on it. Axisymmetric grids discretise the meridian
//! half-plane `(ρ, z)` of a 3D domain of revolution, with cell volume
//! `2πρ·h²`.

use std::f64::consts::PI;

use serde::Serialize;

use crate::domains::Domain;
use crate::{Error, Result};

/// Cells padded around the bounding box on each side.
pub const PAD: usize = 2;
/// Upper limit on the number of nodes, to fail fast on runaway configs.
pub const MAX_NODES: usize = 60_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Geometry {
    Cartesian,
    Axisymmetric,
}

#[derive(Debug, Clone)]
pub struct Grid {
    pub origin: Vec<f64>,
    pub spacing: f64,
    pub dims: Vec<usize>,
    pub geometry: Geometry,
    strides: Vec<usize>,
    /// Node in `Ω` and strictly inside the truncation box.
    pub inside: Vec<bool>,
    /// Inside, and far enough from truncation faces to carry trial functions.
    pub active: Vec<bool>,
    /// Distance to the truncation faces (`∞` for bounded kinds).
    pub truncation: Vec<f64>,
    /// Ambient dimension of the domain (3 for axisymmetric grids).
    pub ambient_dim: usize,
    /// The first axis starts half a cell off the symmetry axis `ρ = 0`.
    pub has_axis: bool,
}

impl Grid {
    /// Grid with `resolution` cells across the largest box extent. Fails when
    /// the thinnest feature is covered by fewer than 8 cells.
    pub fn new(domain: &Domain, resolution: usize, geometry: Geometry) -> Result<Self> {
        if resolution < 8 {
            return Err(Error::config(format!("grid resolution must be at least 8, got {resolution}")));
        }
        let (lo, hi, axis) = match geometry {
            Geometry::Cartesian => {
                let (lo, hi) = domain.bounding_box();
                (lo.to_vec(), hi.to_vec(), false)
            }
            Geometry::Axisymmetric => {
                let (lo, hi) = domain.meridian_box().ok_or_else(|| {
                    Error::config(format!("{} domain is not axisymmetric", domain.kind_name()))
                })?;
                (lo.to_vec(), hi.to_vec(), lo[0] == 0.0)
            }
        };
        let ext = lo.iter().zip(&hi).map(|(a, b)| b - a).fold(0.0, f64::max);
        let h = ext / resolution as f64;
        let cells = domain.thinnest_feature() / h;
        if cells < 8.0 {
            return Err(Error::config(format!(
                "grid spacing {h:.4e} resolves the thinnest feature ({:.4e}) with only {cells:.1} cells; at least 8 are required",
                domain.thinnest_feature()
            )));
        }
        let mut origin = Vec::with_capacity(lo.len());
        let mut dims = Vec::with_capacity(lo.len());
        for (a, (l, u)) in lo.iter().zip(&hi).enumerate() {
            let n = ((u - l) / h - 1e-9).ceil() as usize;
            if a == 0 && axis {
                // nodes at ρ = h/2, 3h/2, ...: the axis is a symmetry line, not a boundary
                origin.push(0.5 * h);
                dims.push(n + PAD + 1);
            } else {
                origin.push(l - PAD as f64 * h);
                dims.push(n + 2 * PAD + 1);
            }
        }
        let total: usize = dims.iter().product();
        if total > MAX_NODES {
            return Err(Error::config(format!("grid would have {total} nodes (limit {MAX_NODES})")));
        }
        let mut strides = vec![1usize; dims.len()];
        for a in 1..dims.len() {
            strides[a] = strides[a - 1] * dims[a - 1];
        }
        let mut g = Grid {
            origin,
            spacing: h,
            dims,
            geometry,
            strides,
            inside: Vec::new(),
            active: Vec::new(),
            truncation: Vec::new(),
            ambient_dim: domain.dim(),
            has_axis: axis,
        };
        let mut inside = vec![false; total];
        let mut active = vec![false; total];
        let mut trunc = vec![f64::INFINITY; total];
        let mut x = vec![0.0; g.ambient_dim];
        for c in 0..total {
            g.world_into(c, &mut x);
            let t = domain.truncation_distance(&x);
            trunc[c] = t;
            if t > 0.0 && domain.signed_distance(&x) < 0.0 {
                inside[c] = true;
                active[c] = t > 2.0 * h;
            }
        }
        g.inside = inside;
        g.active = active;
        g.truncation = trunc;
        Ok(g)
    }

    pub fn len(&self) -> usize {
        self.inside.len()
    }

    pub fn is_empty(&self) -> bool {
        self.inside.is_empty()
    }

    /// Number of grid axes.
    pub fn ndim(&self) -> usize {
        self.dims.len()
    }

    pub fn strides(&self) -> &[usize] {
        &self.strides
    }

    pub fn index(&self, idx: &[usize]) -> usize {
        idx.iter().zip(&self.strides).map(|(i, s)| i * s).sum()
    }

    pub fn multi_index(&self, mut c: usize) -> Vec<usize> {
        self.dims
            .iter()
            .map(|&n| {
                let i = c % n;
                c /= n;
                i
            })
            .collect()
    }

    /// Grid coordinates of node `c`.
    pub fn coords(&self, c: usize) -> Vec<f64> {
        let mut r = c;
        self.dims
            .iter()
            .zip(&self.origin)
            .map(|(&n, &o)| {
                let i = r % n;
                r /= n;
                o + i as f64 * self.spacing
            })
            .collect()
    }

    /// Lifts grid coordinates into the ambient space.
    pub fn lift(&self, g: &[f64]) -> Vec<f64> {
        match self.geometry {
            Geometry::Cartesian => g.to_vec(),
            Geometry::Axisymmetric => vec![g[0], 0.0, g[1]],
        }
    }

    /// Projects an ambient point lying in the grid's plane to grid coordinates.
    pub fn project(&self, x: &[f64]) -> Vec<f64> {
        match self.geometry {
            Geometry::Cartesian => x.to_vec(),
            Geometry::Axisymmetric => vec![x[0].hypot(x[1]), x[2]],
        }
    }

    /// Ambient coordinates of node `c`.
    pub fn world(&self, c: usize) -> Vec<f64> {
        self.lift(&self.coords(c))
    }

    fn world_into(&self, c: usize, out: &mut [f64]) {
        let g = self.coords(c);
        match self.geometry {
            Geometry::Cartesian => out.copy_from_slice(&g),
            Geometry::Axisymmetric => {
                out[0] = g[0];
                out[1] = 0.0;
                out[2] = g[1];
            }
        }
    }

    /// Neighbour of `c` one step along `axis` in direction `dir` (±1).
    pub fn neighbor(&self, c: usize, axis: usize, dir: isize) -> Option<usize> {
        let i = (c / self.strides[axis]) % self.dims[axis];
        let j = i as isize + dir;
        if j < 0 || j >= self.dims[axis] as isize {
            None
        } else {
            Some((c as isize + dir * self.strides[axis] as isize) as usize)
        }
    }

    /// Volume of the cell around node `c`.
    pub fn cell_volume(&self, c: usize) -> f64 {
        let h = self.spacing;
        match self.geometry {
            Geometry::Cartesian => h.powi(self.ndim() as i32),
            Geometry::Axisymmetric => {
                let rho = self.origin[0] + (c % self.dims[0]) as f64 * h;
                2.0 * PI * rho * h * h
            }
        }
    }

    /// Nearest node to grid coordinates `g`, if inside the grid.
    pub fn locate(&self, g: &[f64]) -> Option<usize> {
        let mut c = 0;
        for (a, (&x, &o)) in g.iter().zip(&self.origin).enumerate() {
            let i = ((x - o) / self.spacing).round();
            if i < 0.0 || i >= self.dims[a] as f64 || !i.is_finite() {
                return None;
            }
            c += i as usize * self.strides[a];
        }
        Some(c)
    }

    /// Axis-aligned index range of nodes within distance `r` of grid point `g`.
    pub fn index_box(&self, g: &[f64], r: f64) -> Vec<(usize, usize)> {
        g.iter()
            .zip(&self.origin)
            .zip(&self.dims)
            .map(|((&x, &o), &n)| {
                let lo = ((x - r - o) / self.spacing).floor().max(0.0) as usize;
                let hi = (((x + r - o) / self.spacing).ceil().max(0.0) as usize).min(n - 1);
                (lo, hi)
            })
            .collect()
    }

    /// All node indices in an index box, first axis fastest.
    pub fn nodes_in(&self, ranges: &[(usize, usize)]) -> Vec<usize> {
        let mut out = Vec::new();
        if ranges.iter().any(|(a, b)| a > b) {
            return out;
        }
        let mut idx: Vec<usize> = ranges.iter().map(|r| r.0).collect();
        loop {
            out.push(self.index(&idx));
            let mut a = 0;
            loop {
                if a == idx.len() {
                    return out;
                }
                if idx[a] < ranges[a].1 {
                    idx[a] += 1;
                    break;
                }
                idx[a] = ranges[a].0;
                a += 1;
            }
        }
    }

    /// Measure of `Ω` inside the truncation box, by cell counting.
    pub fn inside_volume(&self) -> f64 {
        let v: Vec<f64> = (0..self.len())
            .filter(|&c| self.inside[c])
            .map(|c| self.cell_volume(c))
            .collect();
        crate::numeric::pairwise_sum(&v)
    }
}
