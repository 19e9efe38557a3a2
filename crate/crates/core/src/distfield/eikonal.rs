//! First-order fast marching for `|∇u| = 1` on a node grid.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::grid::Grid;

#[derive(PartialEq)]
struct Entry(f64, usize);

impl Eq for Entry {}

impl PartialOrd for Entry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Entry {
    // min-heap on the value; ties broken by index for determinism
    fn cmp(&self, other: &Self) -> Ordering {
        other.0.total_cmp(&self.0).then_with(|| other.1.cmp(&self.1))
    }
}

/// Marches from the nodes with `known[c]` (whose values in `u` are final) over
/// the nodes with `region[c]`. Returns the number of nodes reached.
pub fn fast_march(grid: &Grid, region: &[bool], known: &mut [bool], u: &mut [f64]) -> usize {
    let h = grid.spacing;
    let d = grid.ndim();
    let mut trial = vec![false; grid.len()];
    let mut heap = BinaryHeap::new();
    let mut reached = 0;

    let solve = |c: usize, known: &[bool], u: &[f64]| -> f64 {
        let mut a: Vec<f64> = Vec::with_capacity(d);
        for axis in 0..d {
            let mut best = f64::INFINITY;
            for dir in [-1isize, 1] {
                let nb = grid.neighbor(c, axis, dir);
                if let Some(nb) = nb {
                    if known[nb] && region[nb] {
                        best = best.min(u[nb]);
                    }
                }
            }
            // on an axisymmetric grid the mirror of the first ρ layer is the
            // node itself, so the missing neighbour needs no special case
            if best.is_finite() {
                a.push(best);
            }
        }
        a.sort_by(f64::total_cmp);
        // solve Σ_{i<k} (x - a_i)² = h² for increasing k while x > a_k
        let mut x = a[0] + h;
        for k in 2..=a.len() {
            if x <= a[k - 1] {
                break;
            }
            let s: f64 = a[..k].iter().sum();
            let s2: f64 = a[..k].iter().map(|v| v * v).sum();
            let kf = k as f64;
            let disc = s * s - kf * (s2 - h * h);
            if disc < 0.0 {
                break;
            }
            x = (s + disc.sqrt()) / kf;
        }
        x
    };

    for c in 0..grid.len() {
        if known[c] && region[c] {
            for axis in 0..d {
                for dir in [-1isize, 1] {
                    if let Some(nb) = grid.neighbor(c, axis, dir) {
                        if region[nb] && !known[nb] && !trial[nb] {
                            trial[nb] = true;
                            let v = solve(nb, known, u);
                            u[nb] = v;
                            heap.push(Entry(v, nb));
                        }
                    }
                }
            }
        }
    }
    while let Some(Entry(v, c)) = heap.pop() {
        if known[c] || v > u[c] {
            continue;
        }
        known[c] = true;
        reached += 1;
        for axis in 0..d {
            for dir in [-1isize, 1] {
                if let Some(nb) = grid.neighbor(c, axis, dir) {
                    if region[nb] && !known[nb] {
                        let w = solve(nb, known, u);
                        if !trial[nb] || w < u[nb] {
                            trial[nb] = true;
                            u[nb] = w;
                            heap.push(Entry(w, nb));
                        }
                    }
                }
            }
        }
    }
    reached
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domains::Domain;
    use crate::grid::Geometry;

    #[test]
    fn plane_front_is_exact() {
        // seed the column x = 0 of a square; marching along x must be exact
        let d = Domain::cuboid(vec![1.0, 1.0]).unwrap();
        let g = Grid::new(&d, 32, Geometry::Cartesian).unwrap();
        let region = vec![true; g.len()];
        let mut known = vec![false; g.len()];
        let mut u = vec![f64::INFINITY; g.len()];
        for c in 0..g.len() {
            if g.multi_index(c)[0] == 0 {
                known[c] = true;
                u[c] = 0.0;
            }
        }
        fast_march(&g, &region, &mut known, &mut u);
        for c in 0..g.len() {
            let i = g.multi_index(c)[0] as f64;
            assert!((u[c] - i * g.spacing).abs() < 1e-12);
        }
    }
}
