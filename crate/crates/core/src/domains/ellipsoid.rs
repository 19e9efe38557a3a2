//! Closest point on an axis-aligned ellipsoid `Σ (x_i/a_i)² = 1`, by root
//! bracketing on the Lagrange multiplier (Eberly's construction), in any
//! dimension.

pub fn closest_on_ellipsoid(axes: &[f64], p: &[f64]) -> Vec<f64> {
    let d = axes.len();
    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&a, &b| axes[b].total_cmp(&axes[a]));
    let e: Vec<f64> = order.iter().map(|&i| axes[i]).collect();
    let y: Vec<f64> = order.iter().map(|&i| p[i].abs()).collect();
    let xs = closest_sorted(&e, &y);
    let mut out = vec![0.0; d];
    for (k, &i) in order.iter().enumerate() {
        out[i] = xs[k].copysign(if p[i] < 0.0 { -1.0 } else { 1.0 });
    }
    out
}

fn closest_sorted(e: &[f64], y: &[f64]) -> Vec<f64> {
    let d = e.len();
    let last = d - 1;
    if d == 1 {
        return vec![e[0]];
    }
    if y[last] > 0.0 {
        let f = |t: f64| -> f64 {
            e.iter()
                .zip(y)
                .map(|(&ei, &yi)| {
                    let r = ei * yi / (t + ei * ei);
                    r * r
                })
                .sum::<f64>()
                - 1.0
        };
        let mut lo = -e[last] * e[last] + e[last] * y[last];
        let mut hi = e.iter().zip(y).map(|(a, b)| (a * b).powi(2)).sum::<f64>().sqrt();
        if hi < lo {
            std::mem::swap(&mut lo, &mut hi);
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid == lo || mid == hi {
                break;
            }
            if f(mid) > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let t = 0.5 * (lo + hi);
        return e
            .iter()
            .zip(y)
            .map(|(&ei, &yi)| ei * ei * yi / (t + ei * ei))
            .collect();
    }
    let el2 = e[last] * e[last];
    let mut ratios = Vec::with_capacity(last);
    let mut ok = true;
    for i in 0..last {
        let den = e[i] * e[i] - el2;
        if den <= 0.0 {
            ok = false;
            break;
        }
        ratios.push(e[i] * y[i] / den);
    }
    if ok {
        let s: f64 = ratios.iter().map(|r| r * r).sum();
        if s < 1.0 {
            let mut x: Vec<f64> = ratios.iter().zip(e).map(|(r, ei)| ei * r).collect();
            x.push(e[last] * (1.0 - s).sqrt());
            return x;
        }
    }
    let mut x = closest_sorted(&e[..last], &y[..last]);
    x.push(0.0);
    x
}

#[cfg(test)]
mod tests {
    use super::*;

    fn brute_2d(a: f64, b: f64, p: [f64; 2]) -> f64 {
        (0..200_000)
            .map(|k| {
                let t = k as f64 / 200_000.0 * std::f64::consts::TAU;
                ((a * t.cos() - p[0]).powi(2) + (b * t.sin() - p[1]).powi(2)).sqrt()
            })
            .fold(f64::MAX, f64::min)
    }

    #[test]
    fn matches_parametric_scan() {
        for p in [[0.3, 0.2], [2.5, -0.4], [0.0, 0.1], [0.1, 0.0], [-1.0, 1.5], [0.0, 0.0]] {
            let x = closest_on_ellipsoid(&[2.0, 1.0], &p);
            let on = (x[0] / 2.0).powi(2) + x[1].powi(2);
            assert!((on - 1.0).abs() < 1e-10, "{p:?} -> {x:?}");
            let d = ((x[0] - p[0]).powi(2) + (x[1] - p[1]).powi(2)).sqrt();
            assert!((d - brute_2d(2.0, 1.0, p)).abs() < 1e-6, "{p:?}");
        }
    }

    #[test]
    fn sphere_case_is_radial() {
        let x = closest_on_ellipsoid(&[1.5, 1.5, 1.5], &[0.3, -0.4, 1.2]);
        let r = (0.09f64 + 0.16 + 1.44).sqrt();
        for (xi, pi) in x.iter().zip([0.3, -0.4, 1.2]) {
            assert!((xi - 1.5 * pi / r).abs() < 1e-9);
        }
    }
}
