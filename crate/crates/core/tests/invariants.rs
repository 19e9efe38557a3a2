use hardy_core::deltacalc::neg_laplacian_formula;
use hardy_core::distfield::{DeltaSource, DistanceField};
use hardy_core::domains::Domain;
use hardy_core::grid::Geometry;
use hardy_core::hardyopt::{estimate_bm_lambda, estimate_mu, lambda_analytic, lambda_lower_bound, SolveOptions};

fn field(d: &Domain, res: usize) -> DistanceField {
    DistanceField::build(d, res, Geometry::Cartesian, DeltaSource::Analytic, 0.5).unwrap()
}

fn mu(d: &Domain, res: usize, p: f64) -> f64 {
    let opts = SolveOptions { max_iter: 300, ..SolveOptions::default() };
    estimate_mu(d, &field(d, res), p, &opts).unwrap().report.value
}

#[test]
fn mu_is_scale_invariant() {
    let a = mu(&Domain::ball(2, 1.0).unwrap(), 64, 2.0);
    let b = mu(&Domain::ball(2, 2.0).unwrap(), 64, 2.0);
    assert!((a - b).abs() <= 1e-3 * a, "{a} vs {b}");
}

#[test]
fn lambda_scales_as_inverse_square() {
    for d in [Domain::ball(3, 1.0).unwrap(), Domain::torus(1.0, 3.0).unwrap()] {
        let l1 = lambda_analytic(&d, 2.0, 360, 1e-2).unwrap().value;
        let l2 = lambda_analytic(&d.scaled(2.0).unwrap(), 2.0, 360, 1e-2).unwrap().value;
        assert!((l1 - 4.0 * l2).abs() <= 1e-9 * l1, "{l1} vs {l2}");
    }
}

#[test]
fn mu_p_respects_convex_lower_bound() {
    let disk = Domain::ball(2, 1.0).unwrap();
    for p in [1.5f64, 3.0] {
        let bound = ((p - 1.0) / p).powf(p);
        let v = mu(&disk, 48, p);
        assert!(v >= bound, "p = {p}: {v} < {bound}");
    }
}

#[test]
fn disk_mu_decreases_under_refinement() {
    let disk = Domain::ball(2, 1.0).unwrap();
    let coarse = mu(&disk, 64, 2.0);
    let fine = mu(&disk, 128, 2.0);
    assert!(fine < coarse && fine > 0.25, "{coarse} -> {fine}");
}

#[test]
fn brezis_marcus_constant_dominates_lambda() {
    let disk = Domain::ball(2, 1.0).unwrap();
    let f = field(&disk, 128);
    let lap = neg_laplacian_formula(&f, &disk).unwrap();
    let rep = disk.convexity_report(128, 1e-2).unwrap();
    let lambda = lambda_lower_bound(&f, &lap, &rep, disk.n(), 2.0).unwrap().value;
    let bm = estimate_bm_lambda(&disk, &f, &SolveOptions::default()).unwrap().value;
    assert!(bm >= 0.95 * lambda, "{bm} < 0.95 × {lambda}");
}
