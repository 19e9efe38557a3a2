//! Principal curvatures of a level set from the gradient and Hessian of its
//! defining function.

use nalgebra::{DMatrix, SymmetricEigen};

/// Principal curvatures of `{F = 0}` at a point where `∇F = grad`, `∇²F = hess`
/// (row-major, `d×d`). The normal is `grad/|grad|` (outward when `F < 0`
/// inside), and the sign convention gives the unit sphere `κ_i = +1`.
///
/// Returns `None` when the gradient is too small for the normal to be defined.
pub fn level_set_curvatures(grad: &[f64], hess: &[f64]) -> Option<(Vec<f64>, Vec<f64>)> {
    let d = grad.len();
    let gnorm = grad.iter().map(|g| g * g).sum::<f64>().sqrt();
    if !(gnorm > 1e-12) || hess.iter().any(|h| !h.is_finite()) {
        return None;
    }
    let normal: Vec<f64> = grad.iter().map(|g| g / gnorm).collect();
    if d == 2 {
        let t = [-normal[1], normal[0]];
        let k = (t[0] * (hess[0] * t[0] + hess[1] * t[1]) + t[1] * (hess[2] * t[0] + hess[3] * t[1]))
            / gnorm;
        return Some((vec![k], normal));
    }
    let proj = DMatrix::from_fn(d, d, |i, j| {
        (if i == j { 1.0 } else { 0.0 }) - normal[i] * normal[j]
    });
    let h = DMatrix::from_row_slice(d, d, hess);
    let mut shape = &proj * h * &proj / gnorm;
    // symmetrise against round-off before the eigen-solve
    shape = (&shape + shape.transpose()) * 0.5;
    let eig = SymmetricEigen::new(shape);
    let drop = (0..d)
        .max_by(|&a, &b| {
            let pa = (0..d).map(|i| eig.eigenvectors[(i, a)] * normal[i]).sum::<f64>().abs();
            let pb = (0..d).map(|i| eig.eigenvectors[(i, b)] * normal[i]).sum::<f64>().abs();
            pa.total_cmp(&pb)
        })
        .unwrap();
    let mut kappas: Vec<f64> = (0..d)
        .filter(|&i| i != drop)
        .map(|i| eig.eigenvalues[i])
        .collect();
    kappas.sort_by(f64::total_cmp);
    Some((kappas, normal))
}
