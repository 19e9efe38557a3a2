//! Smallest eigenpair of `A x = λ M x` (`A` sparse SPD, `M` positive
//! diagonal) by block inverse iteration with Rayleigh–Ritz projection.

use faer::linalg::solvers::Solve;
use faer::sparse::{SparseColMat, Triplet};
use faer::{Mat, Side};
use nalgebra::{DMatrix, SymmetricEigen};

use super::forms::SparseSym;
use crate::numeric::pairwise_sum;

#[derive(Debug, Clone, Copy)]
pub struct EigenOptions {
    pub block: usize,
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for EigenOptions {
    fn default() -> Self {
        Self {
            block: 6,
            tol: 1e-8,
            max_iter: 500,
        }
    }
}

#[derive(Debug, Clone)]
pub struct EigenResult {
    pub value: f64,
    /// `M`-normalised eigenvector.
    pub vector: Vec<f64>,
    /// Smallest Ritz value after each iteration.
    pub history: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
}

/// Sparse Cholesky factor; `None` from [`factor`] means `A` is not positive definite.
pub struct Factor {
    llt: faer::sparse::linalg::solvers::Llt<usize, f64>,
    n: usize,
}

pub fn factor(a: &SparseSym) -> Option<Factor> {
    faer::set_global_parallelism(faer::Par::Seq);
    let mut trip = Vec::with_capacity(a.vals.len() / 2 + a.n);
    for i in 0..a.n {
        for k in a.row_ptr[i]..a.row_ptr[i + 1] {
            let j = a.cols[k];
            if i >= j {
                trip.push(Triplet::new(i, j, a.vals[k]));
            }
        }
    }
    let mat = SparseColMat::<usize, f64>::try_new_from_triplets(a.n, a.n, &trip).ok()?;
    let llt = mat.sp_cholesky(Side::Lower).ok()?;
    Some(Factor { llt, n: a.n })
}

impl Factor {
    pub fn solve(&self, cols: &[Vec<f64>]) -> Vec<Vec<f64>> {
        let k = cols.len();
        let mut b = Mat::<f64>::from_fn(self.n, k, |i, j| cols[j][i]);
        self.llt.solve_in_place(b.as_mut());
        (0..k).map(|j| b.col_as_slice(j).to_vec()).collect()
    }
}

fn mdot(x: &[f64], m: &[f64], y: &[f64]) -> f64 {
    let t: Vec<f64> = x.iter().zip(m).zip(y).map(|((a, w), b)| a * w * b).collect();
    pairwise_sum(&t)
}

fn dot(x: &[f64], y: &[f64]) -> f64 {
    let t: Vec<f64> = x.iter().zip(y).map(|(a, b)| a * b).collect();
    pairwise_sum(&t)
}

/// Modified Gram–Schmidt in the `M` inner product, applied twice; nearly
/// dependent columns are dropped.
fn m_orthonormalize(mut cols: Vec<Vec<f64>>, m: &[f64]) -> Vec<Vec<f64>> {
    for _ in 0..2 {
        let mut out: Vec<Vec<f64>> = Vec::with_capacity(cols.len());
        for mut y in cols {
            let before = mdot(&y, m, &y).sqrt();
            for q in &out {
                let c = mdot(q, m, &y);
                for (yi, qi) in y.iter_mut().zip(q) {
                    *yi -= c * qi;
                }
            }
            let nrm = mdot(&y, m, &y).sqrt();
            if nrm > 1e-10 * before && nrm > 0.0 {
                y.iter_mut().for_each(|v| *v /= nrm);
                out.push(y);
            }
        }
        cols = out;
    }
    cols
}

/// Ritz pairs of `(A, M)` on the span of `cols` (assumed `M`-orthonormal),
/// ascending.
fn rayleigh_ritz(a: &SparseSym, m: &[f64], cols: &[Vec<f64>]) -> (Vec<f64>, Vec<Vec<f64>>) {
    let k = cols.len();
    let ay: Vec<Vec<f64>> = cols.iter().map(|y| a.matvec(y)).collect();
    let ak = DMatrix::from_fn(k, k, |i, j| 0.5 * (dot(&cols[i], &ay[j]) + dot(&cols[j], &ay[i])));
    let mk = DMatrix::from_fn(k, k, |i, j| mdot(&cols[i], m, &cols[j]));
    let l = match mk.clone().cholesky() {
        Some(c) => c.l(),
        None => DMatrix::identity(k, k),
    };
    let linv = l.clone().try_inverse().unwrap_or_else(|| DMatrix::identity(k, k));
    let c = &linv * ak * linv.transpose();
    let c = (&c + c.transpose()) * 0.5;
    let eig = SymmetricEigen::new(c);
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let w = linv.transpose() * &eig.eigenvectors;
    let n = cols[0].len();
    let vals = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vecs = order
        .iter()
        .map(|&j| {
            let mut v = vec![0.0; n];
            for (i, y) in cols.iter().enumerate() {
                let c = w[(i, j)];
                for (vi, yi) in v.iter_mut().zip(y) {
                    *vi += c * yi;
                }
            }
            v
        })
        .collect();
    (vals, vecs)
}

/// Smallest eigenpair of `(A, diag(m))`. Returns `None` when `A` is not
/// positive definite (Cholesky breakdown).
pub fn smallest_generalized(
    a: &SparseSym,
    m: &[f64],
    start: Vec<Vec<f64>>,
    opts: EigenOptions,
) -> Option<EigenResult> {
    let fac = factor(a)?;
    let mut x = m_orthonormalize(start, m);
    let mut history = Vec::new();
    let mut converged = false;
    let mut best = (f64::INFINITY, Vec::new());
    let mut iterations = 0;
    for it in 0..opts.max_iter {
        iterations = it + 1;
        let rhs: Vec<Vec<f64>> = x
            .iter()
            .map(|v| v.iter().zip(m).map(|(a, b)| a * b).collect())
            .collect();
        let y = m_orthonormalize(fac.solve(&rhs), m);
        if y.is_empty() {
            break;
        }
        let (vals, vecs) = rayleigh_ritz(a, m, &y);
        let theta = vals[0];
        if theta < best.0 {
            best = (theta, vecs[0].clone());
        }
        let prev = history.last().copied();
        history.push(theta);
        x = vecs;
        if let Some(p) = prev {
            if it >= 2 && (p - theta).abs() <= opts.tol * theta.abs() {
                converged = true;
                break;
            }
        }
    }
    let (value, mut vector) = best;
    // fix the sign so the vector is mostly positive
    if vector.iter().sum::<f64>() < 0.0 {
        vector.iter_mut().for_each(|v| *v = -*v);
    }
    Some(EigenResult {
        value,
        vector,
        history,
        iterations,
        converged,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn laplacian_1d(n: usize) -> SparseSym {
        let mut e = Vec::new();
        for i in 0..n {
            e.push((i, i, 2.0));
            if i + 1 < n {
                e.push((i, i + 1, -1.0));
                e.push((i + 1, i, -1.0));
            }
        }
        SparseSym::from_entries(n, e)
    }

    #[test]
    fn dirichlet_chain_eigenvalue() {
        let n = 200;
        let a = laplacian_1d(n);
        let m = vec![1.0; n];
        let start = (0..4)
            .map(|k| (0..n).map(|i| ((i + 1) as f64 * (k + 1) as f64 * 0.01).sin() + 1.0).collect())
            .collect();
        let r = smallest_generalized(&a, &m, start, EigenOptions::default()).unwrap();
        let exact = 2.0 - 2.0 * (PI / (n + 1) as f64).cos();
        assert!(r.converged);
        assert!((r.value - exact).abs() < 1e-8 * exact, "{} {}", r.value, exact);
        // Ritz values never increase
        assert!(r.history.windows(2).all(|w| w[1] <= w[0] * (1.0 + 1e-12)));
    }

    #[test]
    fn indefinite_matrix_breaks_down() {
        let a = laplacian_1d(10).add_diagonal(&vec![-1.0; 10]);
        assert!(factor(&a).is_none());
    }
}
