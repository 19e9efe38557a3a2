//! Known lower bounds on the Brezis–Marcus constant, side by side.

use serde::Serialize;

use super::bounds::{lambda_analytic, lambda_lower_bound};
use crate::deltacalc::LaplacianField;
use crate::distfield::DistanceField;
use crate::domains::Domain;
use crate::numeric::unit_sphere_area;
use crate::Result;

/// First positive root of the Bessel-type equation, to the three decimals
/// used for the table.
pub const J0: f64 = 0.940;

#[derive(Debug, Clone, Serialize)]
pub struct RemainderTable {
    #[serde(rename = "lambda_BM")]
    pub lambda_bm: f64,
    #[serde(rename = "lambda_HHL")]
    pub lambda_hhl: f64,
    #[serde(rename = "lambda_FMT")]
    pub lambda_fmt: f64,
    #[serde(rename = "lambda_EL")]
    pub lambda_el: f64,
    #[serde(rename = "lambda_AW")]
    pub lambda_aw: f64,
    /// `inf (-Δδ)/(2δ)`; absent when the domain is not weakly mean convex.
    pub lambda_paper: Option<f64>,
    pub lambda_paper_mode: Option<&'static str>,
    pub c_n: f64,
    pub n: usize,
    pub diam: f64,
    pub volume: f64,
    pub r_int: f64,
    pub sphere_area: f64,
    pub j0: f64,
    pub flags: Vec<String>,
}

impl RemainderTable {
    /// Entries that are lower bounds on `Λ`, by name.
    pub fn entries(&self) -> Vec<(&'static str, f64)> {
        let mut v = vec![
            ("lambda_BM", self.lambda_bm),
            ("lambda_HHL", self.lambda_hhl),
            ("lambda_FMT", self.lambda_fmt),
            ("lambda_EL", self.lambda_el),
            ("lambda_AW", self.lambda_aw),
        ];
        if let Some(l) = self.lambda_paper {
            v.push(("lambda_paper", l));
        }
        v
    }

    pub fn max_entry(&self) -> f64 {
        self.entries().iter().map(|e| e.1).fold(f64::NEG_INFINITY, f64::max)
    }
}

/// `c(n) = (n+1)^{(n-1)/(n+1)} |S_n|^{2/(n+1)} / 4`.
pub fn c_n(n: usize) -> f64 {
    let m = (n + 1) as f64;
    m.powf((n as f64 - 1.0) / m) * unit_sphere_area(n).powf(2.0 / m) / 4.0
}

/// Diameter, volume and interior radius are closed-form for catalog kinds and
/// measured on the grid otherwise. The curvature bound λ uses analytic mode when the kind
/// has a closed-form ridge, the grid formula (`lap`) otherwise.
pub fn remainder_table(domain: &Domain, field: &DistanceField, lap: Option<&LaplacianField>) -> Result<RemainderTable> {
    let n = domain.n();
    let mut flags = Vec::new();
    if domain.is_truncated() {
        flags.push("truncation_dependent".to_string());
    }
    let diam = domain.diameter();
    let volume = domain.volume().unwrap_or_else(|| field.grid.inside_volume());
    let r_int = domain.inradius().unwrap_or_else(|| field.max_delta());
    let cn = c_n(n);
    let hhl = cn / volume.powf(2.0 / (n + 1) as f64);
    let (curv, mode) = match lambda_analytic(domain, 2.0, 512, 1e-2) {
        Ok(l) => (Some(l.value), Some("analytic")),
        Err(_) => {
            let rep = domain.convexity_report(128, 1e-2)?;
            match lap.map(|lap| lambda_lower_bound(field, lap, &rep, n, 2.0)) {
                Some(Ok(l)) => (Some(l.value), Some("grid")),
                _ => {
                    flags.push(if rep.weakly_mean_convex { "lambda_paper_unavailable" } else { "not_mean_convex" }.to_string());
                    (None, None)
                }
            }
        }
    };
    Ok(RemainderTable {
        lambda_bm: 1.0 / (4.0 * diam * diam),
        lambda_hhl: hhl,
        lambda_fmt: 0.75 / (r_int * r_int),
        lambda_el: 6.0 * hhl,
        lambda_aw: J0 * J0 / (r_int * r_int),
        lambda_paper: curv,
        lambda_paper_mode: mode,
        c_n: cn,
        n,
        diam,
        volume,
        r_int,
        sphere_area: unit_sphere_area(n),
        j0: J0,
        flags,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distfield::DeltaSource;
    use crate::grid::Geometry;

    fn table(d: &Domain) -> RemainderTable {
        let f = DistanceField::build(d, 64, Geometry::Cartesian, DeltaSource::Analytic, 0.5).unwrap();
        remainder_table(d, &f, None).unwrap()
    }

    #[test]
    fn disk_arithmetic() {
        let t = table(&Domain::ball(2, 1.0).unwrap());
        assert!((t.lambda_bm - 0.0625).abs() < 1e-15);
        assert!((t.lambda_fmt - 0.75).abs() < 1e-15);
        assert!((t.lambda_aw - 0.8836).abs() < 1e-12);
        assert!((t.lambda_hhl - 0.5).abs() < 1e-12);
        assert!((t.lambda_el - 3.0).abs() < 1e-12);
        assert!((t.lambda_paper.unwrap() - 2.0).abs() < 1e-9);
    }

    #[test]
    fn entries_scale_inverse_square() {
        let d = Domain::cuboid(vec![1.0, 2.0]).unwrap();
        let (a, b) = (table(&d), table(&d.scaled(3.0).unwrap()));
        for ((_, x), (_, y)) in a.entries().iter().zip(b.entries()) {
            if y == 0.0 {
                assert_eq!(*x, 0.0);
            } else {
                assert!((x / y - 9.0).abs() < 1e-9, "{x} {y}");
            }
        }
    }
}
