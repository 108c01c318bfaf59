//! Poisson parameters and total variation bounds for the overlap counts.
//!
//! All bounds are assembled from log-space binomials and then evaluated in
//! plain floating point. A bound that overflows comes back as `+inf` and is
//! marked inapplicable rather than raising an error.

use serde::{Deserialize, Serialize};

use crate::combinatorics::{log_binomial, tv_distance_to_poisson, LogFactorialCache, TvDistance};
use crate::error::{Error, Result};
use crate::thresholds::{log_add_exp, log_overlap_pairs, log_overlap_partners};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundScope {
    /// A single overlap size `r`.
    Overlap { r: u64 },
    /// The joint law of overlap sizes `0..=b`.
    Joint { b: u64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub n: u64,
    pub k: u64,
    pub p: f64,
    pub scope: BoundScope,
    /// One entry for [`BoundScope::Overlap`], `b + 1` entries for [`BoundScope::Joint`].
    pub lambdas: Vec<f64>,
    pub tv_bound: f64,
    /// The p-condition argument times p; should be well below one.
    pub condition_ratio: f64,
    pub applicable: bool,
}

fn check_domain(n: u64, k: u64, r: u64, p: f64) -> Result<()> {
    if 2 * k > n {
        return Err(Error::domain(format!(
            "disjoint pairs need 2k <= n, got n={n}, k={k}"
        )));
    }
    if r > k {
        return Err(Error::domain(format!("overlap size {r} exceeds k={k}")));
    }
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::domain(format!("p must lie in [0, 1], got {p}")));
    }
    Ok(())
}

/// `λ_r = ½ C(n,k) C(k,r) C(n-k,k-r) p²`, the mean number of r-overlapping pairs.
pub fn lambda_r(n: u64, k: u64, r: u64, p: f64) -> Result<f64> {
    check_domain(n, k, r, p)?;
    Ok((log_overlap_pairs(n, k, r)? + 2.0 * p.ln()).exp())
}

/// `2 M p + (1 - 2 M) p²` with `M = C(k,r) C(n-k,k-r)`.
pub fn tv_bound_univariate(n: u64, k: u64, r: u64, p: f64) -> Result<BoundReport> {
    let lambda = lambda_r(n, k, r, p)?;
    let partner_p = (log_overlap_partners(n, k, r)? + p.ln()).exp();
    // 2Mp + p² - 2Mp·p, arranged so a huge M with tiny p stays finite.
    let tv_bound = 2.0 * partner_p + p * p - 2.0 * partner_p * p;
    Ok(BoundReport {
        n,
        k,
        p,
        scope: BoundScope::Overlap { r },
        lambdas: vec![lambda],
        tv_bound,
        condition_ratio: partner_p,
        applicable: partner_p < 1.0 && tv_bound.is_finite(),
    })
}

/// Distance bound between the joint law of `(X_0, …, X_b)` and independent Poissons.
pub fn epsilon_multivariate(n: u64, k: u64, b: u64, p: f64) -> Result<BoundReport> {
    check_domain(n, k, b, p)?;
    let ln_total = log_binomial(n, k)?;
    let ln_sum = (0..=b).try_fold(f64::NEG_INFINITY, |acc, j| {
        log_overlap_partners(n, k, j).map(|m| log_add_exp(acc, m))
    })?;
    let ln_p = p.ln();
    let quartic = (ln_total + 4.0 * ln_p + ln_sum - std::f64::consts::LN_2).exp();
    let cubic = (std::f64::consts::LN_2 + ln_total + 3.0 * ln_p + 2.0 * ln_sum).exp();
    let tv_bound = quartic + cubic;
    let lambdas = (0..=b)
        .map(|j| lambda_r(n, k, j, p))
        .collect::<Result<Vec<_>>>()?;
    let condition_ratio = (ln_p + (ln_total + 2.0 * ln_sum) / 3.0).exp();
    Ok(BoundReport {
        n,
        k,
        p,
        scope: BoundScope::Joint { b },
        lambdas,
        tv_bound,
        condition_ratio,
        applicable: condition_ratio < 1.0 && tv_bound.is_finite(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HypergeometricGap {
    pub n: u64,
    pub k: u64,
    /// `k²/n`, the common mean.
    pub mean: f64,
    pub gap: TvDistance,
    /// `3k/n`.
    pub bound: f64,
    pub within_bound: bool,
}

/// Total variation distance between the overlap law of two random k-sets and
/// `Po(k²/n)`, checked against `3k/n`.
pub fn hypergeometric_poisson_gap(n: u64, k: u64) -> Result<HypergeometricGap> {
    if 2 * k > n {
        return Err(Error::domain(format!("need 2k <= n, got n={n}, k={k}")));
    }
    let hyper = LogFactorialCache::global().hypergeometric_dist(n, k)?;
    let mean = (k * k) as f64 / n as f64;
    let gap = tv_distance_to_poisson(&hyper, mean)?;
    let bound = 3.0 * k as f64 / n as f64;
    Ok(HypergeometricGap {
        n,
        k,
        mean,
        gap,
        bound,
        within_bound: gap.distance + gap.band <= bound,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::combinatorics::{binomial_exact, hypergeometric_pmf, poisson_pmf};

    #[test]
    fn lambda_examples() {
        assert!((lambda_r(6, 3, 1, 0.1).unwrap() - 0.9).abs() < 1e-14);
        assert_eq!(lambda_r(6, 3, 1, 0.0).unwrap(), 0.0);
        for (n, k) in [(10_u64, 3_u64), (40, 12), (400, 40)] {
            let p = 1e-4;
            let direct = 0.5
                * (log_binomial(n, k).unwrap() + log_binomial(n - k, k).unwrap()).exp()
                * p
                * p;
            let l = lambda_r(n, k, 0, p).unwrap();
            assert!((l - direct).abs() <= 1e-12 * direct);
        }
        assert!(lambda_r(5, 3, 0, 0.1).is_err());
        assert!(lambda_r(6, 3, 0, 1.5).is_err());
    }

    #[test]
    fn univariate_examples() {
        let rep = tv_bound_univariate(6, 3, 0, 0.001).unwrap();
        assert!((rep.tv_bound - 0.001999).abs() < 1e-15);
        assert!(rep.applicable);
        assert_eq!(tv_bound_univariate(6, 3, 2, 0.0).unwrap().tv_bound, 0.0);
    }

    #[test]
    fn univariate_r0_is_disjoint_bound() {
        for (n, k) in [(6_u64, 3_u64), (10, 4), (30, 7)] {
            let m = binomial_exact(n - k, k).unwrap() as f64;
            for p in [1e-5, 1e-3, 0.01] {
                let rep = tv_bound_univariate(n, k, 0, p).unwrap();
                let direct = 2.0 * m * p + (1.0 - 2.0 * m) * p * p;
                assert!((rep.tv_bound - direct).abs() <= 1e-13 * direct.abs().max(1e-300));
            }
        }
    }

    #[test]
    fn univariate_nonnegative_when_applicable() {
        for n in (4..=60_u64).step_by(4) {
            for k in 1..=n / 2 {
                for r in 0..=k {
                    for e in 1..=10 {
                        let p = 2f64.powi(-e);
                        let rep = tv_bound_univariate(n, k, r, p).unwrap();
                        if rep.condition_ratio <= 1.0 {
                            assert!(rep.tv_bound >= 0.0);
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn huge_instance_is_flagged_not_failed() {
        let rep = tv_bound_univariate(1000, 300, 90, 0.5).unwrap();
        assert!(!rep.applicable);
        let eps = epsilon_multivariate(1000, 300, 100, 0.5).unwrap();
        assert!(!eps.applicable);
        assert!(eps.tv_bound.is_infinite() || eps.tv_bound > 1.0);
    }

    #[test]
    fn epsilon_examples() {
        assert_eq!(epsilon_multivariate(6, 3, 1, 0.0).unwrap().tv_bound, 0.0);
        let rep = epsilon_multivariate(6, 3, 1, 1e-3).unwrap();
        assert!((rep.tv_bound - (1e-10 + 4e-6)).abs() < 1e-18);
        assert_eq!(rep.lambdas.len(), 2);

        let (n, k, p) = (12_u64, 4_u64, 0.003_f64);
        let c = binomial_exact(n, k).unwrap() as f64;
        let m = binomial_exact(n - k, k).unwrap() as f64;
        let single = 0.5 * c * m * p.powi(4) + 2.0 * c * m * m * p.powi(3);
        let rep = epsilon_multivariate(n, k, 0, p).unwrap();
        assert!((rep.tv_bound - single).abs() <= 1e-13 * single);
    }

    #[test]
    fn epsilon_monotone() {
        for (n, k) in [(12_u64, 4_u64), (50, 10), (400, 40)] {
            for e in 2..12 {
                let p = 10f64.powi(-e);
                let mut prev = 0.0;
                for b in 0..=k {
                    let v = epsilon_multivariate(n, k, b, p).unwrap().tv_bound;
                    assert!(v >= prev);
                    prev = v;
                }
                let bigger = epsilon_multivariate(n, k, k / 2, p * 1.5).unwrap().tv_bound;
                assert!(bigger >= epsilon_multivariate(n, k, k / 2, p).unwrap().tv_bound);
            }
        }
    }

    /// Direct summation over the full overlap support, independent of the
    /// truncation machinery.
    fn gap_by_summation(n: u64, k: u64) -> f64 {
        let mean = (k * k) as f64 / n as f64;
        let mut diff = 0.0;
        let mut covered = 0.0;
        for r in 0..=k {
            let h = hypergeometric_pmf(n, k, r).unwrap();
            let q = poisson_pmf(mean, r).unwrap();
            diff += (h - q).abs();
            covered += q;
        }
        0.5 * (diff + 1.0 - covered)
    }

    #[test]
    fn gap_examples() {
        let g = hypergeometric_poisson_gap(6, 3).unwrap();
        assert!((g.mean - 1.5).abs() < 1e-15);
        assert!((g.gap.distance - gap_by_summation(6, 3)).abs() < 1e-14);
        assert!(g.gap.distance <= 1.5);
        for n in 2..=200_u64 {
            let g = hypergeometric_poisson_gap(n, 1).unwrap();
            assert!(g.gap.distance <= 3.0 / n as f64, "n={n}");
        }
    }

    #[test]
    fn gap_within_bound_on_grid() {
        for n in (10..=1600_u64).step_by(30) {
            for k in (1..=n / 2).step_by(5) {
                let g = hypergeometric_poisson_gap(n, k).unwrap();
                assert!(g.within_bound, "n={n} k={k} gap={}", g.gap.distance);
            }
        }
    }
}
