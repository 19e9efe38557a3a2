//! Discrete Dirichlet energy and weighted masses on the active grid nodes.
//!
//! Gradients are forward differences; the energy of cell `c` is weighted by
//! its own volume. Unknowns are the active nodes at least half a cell from
//! `∂Ω`; every other node is held at zero, which realises compact support
//! inside `Ω` and away from truncation faces. A node closer than `h/2` has a
//! cell straddling the boundary, and its `1/δ²` weight would let a single-node
//! spike drive the quotient towards zero.

use rayon::prelude::*;

use crate::distfield::DistanceField;
use crate::numeric::pairwise_sum;
use crate::{Error, Result};

/// Symmetric sparse matrix, stored as sorted unique `(row, col, value)`
/// entries of both triangles.
#[derive(Debug, Clone)]
pub struct SparseSym {
    pub n: usize,
    pub row_ptr: Vec<usize>,
    pub cols: Vec<usize>,
    pub vals: Vec<f64>,
}

impl SparseSym {
    pub fn from_entries(n: usize, mut entries: Vec<(usize, usize, f64)>) -> Self {
        entries.sort_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)));
        let mut row_ptr = vec![0usize; n + 1];
        let mut cols = Vec::with_capacity(entries.len());
        let mut vals: Vec<f64> = Vec::with_capacity(entries.len());
        let mut last: Option<(usize, usize)> = None;
        for (i, j, v) in entries {
            if last == Some((i, j)) {
                *vals.last_mut().unwrap() += v;
            } else {
                cols.push(j);
                vals.push(v);
                row_ptr[i + 1] += 1;
                last = Some((i, j));
            }
        }
        for i in 0..n {
            row_ptr[i + 1] += row_ptr[i];
        }
        Self { n, row_ptr, cols, vals }
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        (0..self.n)
            .into_par_iter()
            .map(|i| {
                (self.row_ptr[i]..self.row_ptr[i + 1])
                    .map(|k| self.vals[k] * x[self.cols[k]])
                    .sum()
            })
            .collect()
    }

    /// `self + diag(d)`.
    pub fn add_diagonal(&self, d: &[f64]) -> Self {
        let mut out = self.clone();
        for i in 0..self.n {
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                if self.cols[k] == i {
                    out.vals[k] += d[i];
                }
            }
        }
        out
    }
}

/// Whether node `c` may carry a non-zero trial value.
pub fn carries_unknown(field: &DistanceField, c: usize) -> bool {
    field.grid.active[c] && field.delta[c] >= 0.5 * field.grid.spacing
}

/// Active-node numbering and the quadratic forms of the `p = 2` problems.
#[derive(Debug, Clone)]
pub struct Discretization {
    /// Grid node of each unknown.
    pub nodes: Vec<usize>,
    /// Unknown of each grid node (`usize::MAX` when held at zero).
    pub slot: Vec<usize>,
    /// Cell volumes of the unknowns.
    pub volume: Vec<f64>,
    /// `δ` at the unknowns.
    pub delta: Vec<f64>,
}

impl Discretization {
    pub fn new(field: &DistanceField) -> Result<Self> {
        let grid = &field.grid;
        let nodes: Vec<usize> = (0..grid.len())
            .filter(|&c| carries_unknown(field, c))
            .collect();
        if nodes.is_empty() {
            return Err(Error::config("no active grid nodes"));
        }
        let mut slot = vec![usize::MAX; grid.len()];
        for (k, &c) in nodes.iter().enumerate() {
            slot[c] = k;
        }
        Ok(Self {
            volume: nodes.iter().map(|&c| grid.cell_volume(c)).collect(),
            delta: nodes.iter().map(|&c| field.delta[c]).collect(),
            nodes,
            slot,
        })
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Stiffness matrix of `Σ_c vol(c)·|∇⁺f(c)|²`.
    pub fn stiffness(&self, field: &DistanceField) -> SparseSym {
        let grid = &field.grid;
        let h2 = grid.spacing * grid.spacing;
        let mut entries = Vec::new();
        for c in 0..grid.len() {
            for a in 0..grid.ndim() {
                let Some(nb) = grid.neighbor(c, a, 1) else { continue };
                let (i, j) = (self.slot[c], self.slot[nb]);
                if i == usize::MAX && j == usize::MAX {
                    continue;
                }
                let w = grid.cell_volume(c) / h2;
                if i != usize::MAX {
                    entries.push((i, i, w));
                }
                if j != usize::MAX {
                    entries.push((j, j, w));
                }
                if i != usize::MAX && j != usize::MAX {
                    entries.push((i, j, -w));
                    entries.push((j, i, -w));
                }
            }
        }
        SparseSym::from_entries(self.len(), entries)
    }

    /// Diagonal of the `|f/δ|²` mass.
    pub fn hardy_mass(&self) -> Vec<f64> {
        self.volume.iter().zip(&self.delta).map(|(v, d)| v / (d * d)).collect()
    }

    pub fn scatter(&self, x: &[f64], len: usize) -> Vec<f64> {
        let mut out = vec![0.0; len];
        for (k, &c) in self.nodes.iter().enumerate() {
            out[c] = x[k];
        }
        out
    }

    pub fn gather(&self, values: &[f64]) -> Vec<f64> {
        self.nodes.iter().map(|&c| values[c]).collect()
    }
}

/// Rejects trial functions that are non-zero off the active nodes.
pub fn check_admissible(field: &DistanceField, values: &[f64]) -> Result<()> {
    if values.len() != field.len() {
        return Err(Error::domain("trial function does not match the grid"));
    }
    let grid = &field.grid;
    if let Some(c) = (0..grid.len()).find(|&c| values[c] != 0.0 && !carries_unknown(field, c)) {
        return Err(Error::domain(format!(
            "trial function is non-zero at {:?}, outside the admissible region",
            grid.world(c)
        )));
    }
    Ok(())
}

/// Forward-difference gradient of node values at node `c` (zero beyond the grid).
pub fn forward_gradient(field: &DistanceField, f: &[f64], c: usize) -> Vec<f64> {
    let grid = &field.grid;
    (0..grid.ndim())
        .map(|a| {
            let up = grid.neighbor(c, a, 1).map_or(0.0, |nb| f[nb]);
            (up - f[c]) / grid.spacing
        })
        .collect()
}

/// `Σ vol·|∇⁺f|^p` over every node whose stencil sees a non-zero value.
pub fn energy_p(field: &DistanceField, f: &[f64], p: f64) -> f64 {
    let grid = &field.grid;
    let terms: Vec<f64> = (0..grid.len())
        .into_par_iter()
        .map(|c| {
            let g = forward_gradient(field, f, c);
            let s: f64 = g.iter().map(|v| v * v).sum();
            if s == 0.0 {
                0.0
            } else {
                grid.cell_volume(c) * s.powf(p / 2.0)
            }
        })
        .collect();
    pairwise_sum(&terms)
}

/// `Σ vol·|f|^p/δ^p` over inside nodes.
pub fn hardy_p(field: &DistanceField, f: &[f64], p: f64) -> f64 {
    weighted_p(field, f, p, p)
}

/// `Σ vol·|f|^p/δ^s` over inside nodes.
pub fn weighted_p(field: &DistanceField, f: &[f64], p: f64, s: f64) -> f64 {
    let grid = &field.grid;
    let terms: Vec<f64> = (0..grid.len())
        .into_par_iter()
        .map(|c| {
            if f[c] == 0.0 || !grid.inside[c] {
                0.0
            } else {
                grid.cell_volume(c) * f[c].abs().powf(p) / field.delta[c].powf(s)
            }
        })
        .collect();
    pairwise_sum(&terms)
}
