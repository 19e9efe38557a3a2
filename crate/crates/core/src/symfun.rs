//! Elementary symmetric functions and the inequalities built on them.
//!
//! `σ_k` is evaluated through the coefficients of `∏(1 + λ_i t)`, which keeps
//! the cost at `O(n²)` and avoids the cancellation of subset enumeration.

use crate::{Error, Result};

/// A vector of reals on which symmetric functions are evaluated.
#[derive(Debug, Clone, PartialEq)]
pub struct SymVector {
    entries: Vec<f64>,
}

impl SymVector {
    pub fn new(entries: Vec<f64>) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::domain("symmetric vector needs at least one entry"));
        }
        if let Some(i) = entries.iter().position(|v| !v.is_finite()) {
            return Err(Error::domain(format!("entry {i} is not finite")));
        }
        Ok(Self { entries })
    }

    pub fn entries(&self) -> &[f64] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Sum of entries; for principal curvatures this is the mean curvature `H`.
    pub fn sum(&self) -> f64 {
        self.entries.iter().sum()
    }

    /// All `σ_0..=σ_n` at once.
    pub fn all_sigmas(&self) -> Vec<f64> {
        let n = self.entries.len();
        let mut c = vec![0.0; n + 1];
        c[0] = 1.0;
        for (m, &lam) in self.entries.iter().enumerate() {
            for k in (1..=m + 1).rev() {
                c[k] += lam * c[k - 1];
            }
        }
        c
    }
}

/// `σ_k(v)`, with `σ_0 = 1`.
pub fn sigma_k(v: &SymVector, k: usize) -> Result<f64> {
    if k > v.len() {
        return Err(Error::domain(format!(
            "k = {k} out of range 0..={}",
            v.len()
        )));
    }
    Ok(v.all_sigmas()[k])
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChainReport {
    /// `c(n,k) σ_{k-1}/σ_k` for `k = n, n-1, ..., 1`.
    pub terms: Vec<f64>,
    pub holds: bool,
    pub equality_case: bool,
}

fn chain_coefficient(n: usize, k: usize) -> f64 {
    (n * (n - k + 1)) as f64 / k as f64
}

/// Evaluates the Newton–MacLaurin chain
/// `σ_{n-1}/σ_n ≤ ... ≤ c(n,k) σ_{k-1}/σ_k ≤ ... ≤ n²/σ_1` read right to left,
/// i.e. the returned terms must be non-increasing.
pub fn newton_chain(v: &SymVector, tol: f64) -> Result<ChainReport> {
    if let Some(i) = v.entries().iter().position(|&x| x <= 0.0) {
        return Err(Error::domain(format!(
            "entry {i} = {} is not strictly positive",
            v.entries()[i]
        )));
    }
    let n = v.len();
    let s = v.all_sigmas();
    let terms: Vec<f64> = (1..=n)
        .rev()
        .map(|k| chain_coefficient(n, k) * s[k - 1] / s[k])
        .collect();
    let holds = terms.windows(2).all(|w| w[1] <= w[0] * (1.0 + tol));
    let max = v.entries().iter().cloned().fold(f64::MIN, f64::max);
    let min = v.entries().iter().cloned().fold(f64::MAX, f64::min);
    Ok(ChainReport {
        terms,
        holds,
        equality_case: max - min <= tol * max,
    })
}

/// Returns `(Σ κ_i/(1-δκ_i), nH/(n-δH))`; the first never falls below the second.
pub fn curvature_sum_bound(kappa: &SymVector, delta: f64) -> Result<(f64, f64)> {
    if !(delta >= 0.0) {
        return Err(Error::domain(format!("delta = {delta} must be non-negative")));
    }
    let mut lhs = 0.0;
    for (i, &k) in kappa.entries().iter().enumerate() {
        let d = 1.0 - delta * k;
        if d <= 0.0 {
            return Err(Error::precondition(format!(
                "1 - delta*kappa[{i}] = {d} is not positive"
            )));
        }
        lhs += k / d;
    }
    let n = kappa.len() as f64;
    let h = kappa.sum();
    Ok((lhs, n * h / (n - delta * h)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn sv(v: &[f64]) -> SymVector {
        SymVector::new(v.to_vec()).unwrap()
    }

    /// Subset enumeration; exponential, test-only.
    fn sigma_brute(v: &[f64], k: usize) -> f64 {
        let n = v.len();
        (0u32..(1 << n))
            .filter(|m| m.count_ones() as usize == k)
            .map(|m| {
                (0..n)
                    .filter(|i| m & (1 << i) != 0)
                    .map(|i| v[i])
                    .product::<f64>()
            })
            .sum()
    }

    #[test]
    fn sigma_examples() {
        assert_eq!(sigma_k(&sv(&[1.0, 2.0, 3.0]), 2).unwrap(), 11.0);
        assert_eq!(sigma_k(&sv(&[1.0, 1.0, 1.0]), 3).unwrap(), 1.0);
        assert_eq!(sigma_k(&sv(&[1.0, 2.0, 3.0]), 0).unwrap(), 1.0);
        assert!(matches!(
            sigma_k(&sv(&[1.0, 2.0]), 3),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn chain_examples() {
        let r = newton_chain(&sv(&[1.0, 1.0, 1.0]), 1e-12).unwrap();
        assert_eq!(r.terms, vec![3.0, 3.0, 3.0]);
        assert!(r.holds && r.equality_case);

        let r = newton_chain(&sv(&[1.0, 2.0, 3.0]), 1e-12).unwrap();
        let expect = [11.0 / 6.0, 18.0 / 11.0, 1.5];
        for (t, e) in r.terms.iter().zip(expect) {
            assert!((t - e).abs() < 1e-15);
        }
        assert!(r.holds && !r.equality_case);

        assert!(newton_chain(&sv(&[1.0, 0.0]), 1e-12).is_err());
        assert!(newton_chain(&sv(&[1.0, -2.0]), 1e-12).is_err());
    }

    #[test]
    fn bound_examples() {
        let (l, r) = curvature_sum_bound(&sv(&[1.0, 1.0]), 0.5).unwrap();
        assert!((l - 4.0).abs() < 1e-15 && (r - 4.0).abs() < 1e-15);

        let (l, r) = curvature_sum_bound(&sv(&[1.0, -1.0]), 0.5).unwrap();
        assert!((l - 4.0 / 3.0).abs() < 1e-15);
        assert_eq!(r, 0.0);

        let (l, r) = curvature_sum_bound(&sv(&[2.0, 0.0]), 0.25).unwrap();
        assert!((l - 4.0).abs() < 1e-15 && (r - 8.0 / 3.0).abs() < 1e-15);

        // δ = 0 is the boundary limit: both sides reduce to H
        let (l, r) = curvature_sum_bound(&sv(&[0.7, -0.2, 1.1]), 0.0).unwrap();
        assert!((l - 1.6).abs() < 1e-15 && (r - 1.6).abs() < 1e-15);

        match curvature_sum_bound(&sv(&[1.0, 2.0]), 0.5) {
            Err(Error::Precondition(m)) => assert!(m.contains("kappa[1]")),
            other => panic!("unexpected {other:?}"),
        }
    }

    proptest! {
        #[test]
        fn recurrence_matches_subsets(v in prop::collection::vec(-3.0f64..3.0, 1..=8)) {
            let s = sv(&v);
            for k in 0..=v.len() {
                let a = sigma_k(&s, k).unwrap();
                let b = sigma_brute(&v, k);
                prop_assert!((a - b).abs() <= 1e-12 * (1.0 + b.abs()));
            }
        }

        #[test]
        fn chain_non_increasing(v in prop::collection::vec(0.01f64..10.0, 2..=6)) {
            let r = newton_chain(&sv(&v), 1e-12).unwrap();
            prop_assert!(r.holds);
        }

        #[test]
        fn lhs_monotone_in_delta(k in prop::collection::vec(-2.0f64..2.0, 1..=4), a in 0.0f64..1.0, b in 0.0f64..1.0) {
            let kmax = k.iter().cloned().fold(0.0f64, f64::max);
            let cap = if kmax > 0.0 { 0.99 / kmax } else { 10.0 };
            let (d1, d2) = if a < b { (a * cap, b * cap) } else { (b * cap, a * cap) };
            let s = sv(&k);
            let l1 = curvature_sum_bound(&s, d1).unwrap().0;
            let l2 = curvature_sum_bound(&s, d2).unwrap().0;
            prop_assert!(l2 >= l1 - 1e-12 * (1.0 + l1.abs()));
        }
    }
}
