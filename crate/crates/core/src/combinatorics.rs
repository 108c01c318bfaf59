//! Numerically stable combinatorial and distributional primitives.
//!
//! Everything here works in natural-log space by default. The exact `u128`
//! path ([`binomial_exact`]) exists for small arguments and as an oracle for
//! the log path.

use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Capacity of the process-wide cache returned by [`LogFactorialCache::global`].
pub const DEFAULT_CACHE_CAPACITY: usize = 1 << 16;

/// Poisson laws are truncated at this quantile before total variation sums.
pub const DEFAULT_POISSON_CUT: f64 = 1.0 - 1e-12;

/// Table of `ln(m!)` for `0 <= m <= max_n`.
///
/// The table is built by compensated summation of `ln(m)`, which keeps the
/// absolute error of every entry within a couple of ulps even at `m = 65535`.
#[derive(Debug, Clone)]
pub struct LogFactorialCache {
    table: Vec<f64>,
}

impl LogFactorialCache {
    pub fn new(max_n: usize) -> Self {
        let mut table = Vec::with_capacity(max_n + 1);
        table.push(0.0);
        // Neumaier summation.
        let mut sum = 0.0_f64;
        let mut comp = 0.0_f64;
        for m in 1..=max_n {
            let term = (m as f64).ln();
            let t = sum + term;
            if sum.abs() >= term.abs() {
                comp += (sum - t) + term;
            } else {
                comp += (term - t) + sum;
            }
            sum = t;
            table.push(sum + comp);
        }
        Self { table }
    }

    /// Shared cache with [`DEFAULT_CACHE_CAPACITY`] entries, built on first use.
    pub fn global() -> &'static LogFactorialCache {
        static CACHE: OnceLock<LogFactorialCache> = OnceLock::new();
        CACHE.get_or_init(|| LogFactorialCache::new(DEFAULT_CACHE_CAPACITY))
    }

    pub fn max_n(&self) -> usize {
        self.table.len() - 1
    }

    pub fn log_factorial(&self, m: u64) -> Result<f64> {
        self.table.get(m as usize).copied().ok_or_else(|| {
            Error::capacity(format!(
                "ln({m}!) requested but the log-factorial cache holds 0..={}",
                self.max_n()
            ))
        })
    }

    /// `ln C(n, k)`; `-inf` when `k > n`.
    pub fn log_binomial(&self, n: u64, k: u64) -> Result<f64> {
        let ln_n = self.log_factorial(n)?;
        if k > n {
            return Ok(f64::NEG_INFINITY);
        }
        if k == 0 || k == n {
            return Ok(0.0);
        }
        Ok(ln_n - self.table[k as usize] - self.table[(n - k) as usize])
    }

    /// Probability that a uniformly random k-set meets a fixed k-set of an
    /// n-set in exactly `r` elements: `C(k,r) C(n-k,k-r) / C(n,k)`.
    pub fn hypergeometric_pmf(&self, n: u64, k: u64, r: u64) -> Result<f64> {
        if k > n {
            return Err(Error::domain(format!(
                "hypergeometric needs k <= n, got n={n}, k={k}"
            )));
        }
        if r > k || k - r > n - k {
            return Ok(0.0);
        }
        let ln = self.log_binomial(k, r)? + self.log_binomial(n - k, k - r)?
            - self.log_binomial(n, k)?;
        Ok(ln.exp())
    }

    /// The full overlap law of two random k-sets as a [`DiscreteDist`] on
    /// `max(0, 2k-n)..=k`.
    pub fn hypergeometric_dist(&self, n: u64, k: u64) -> Result<DiscreteDist> {
        if k > n {
            return Err(Error::domain(format!(
                "hypergeometric needs k <= n, got n={n}, k={k}"
            )));
        }
        let lo = (2 * k).saturating_sub(n);
        let probs = (lo..=k)
            .map(|r| self.hypergeometric_pmf(n, k, r))
            .collect::<Result<Vec<_>>>()?;
        Ok(DiscreteDist::new(lo as usize, probs, 0.0))
    }

    /// Most likely overlap size, found by direct argmax over the support.
    pub fn hypergeometric_mode(&self, n: u64, k: u64) -> Result<u64> {
        let dist = self.hypergeometric_dist(n, k)?;
        Ok(dist.mode() as u64)
    }
}

/// `ln C(n, k)` from the global cache.
pub fn log_binomial(n: u64, k: u64) -> Result<f64> {
    LogFactorialCache::global().log_binomial(n, k)
}

/// `C(k,r) C(n-k,k-r) / C(n,k)` from the global cache.
pub fn hypergeometric_pmf(n: u64, k: u64, r: u64) -> Result<f64> {
    LogFactorialCache::global().hypergeometric_pmf(n, k, r)
}

/// Exact `C(n, k)` as a `u128`, or a range error when it does not fit.
pub fn binomial_exact(n: u64, k: u64) -> Result<u128> {
    if k > n {
        return Ok(0);
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        // acc * (n - i) is divisible by (i + 1); divide out the gcd first so
        // the product only overflows when the true value does.
        let num = (n - i) as u128;
        let den = (i + 1) as u128;
        let g = gcd(acc, den);
        let (a, d) = (acc / g, den / g);
        acc = (num / d).checked_mul(a).ok_or_else(|| {
            Error::Range(format!(
                "C({n},{k}) exceeds 128 bits; use log_binomial instead"
            ))
        })?;
    }
    Ok(acc)
}

fn gcd(mut a: u128, mut b: u128) -> u128 {
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

/// `ln(x!)` for any `x`: cached below the global capacity, Stirling series above.
pub fn ln_factorial(x: u64) -> f64 {
    let cache = LogFactorialCache::global();
    if (x as usize) <= cache.max_n() {
        return cache.table[x as usize];
    }
    let z = x as f64;
    let inv = 1.0 / z;
    let inv2 = inv * inv;
    z * z.ln() - z
        + 0.5 * (2.0 * std::f64::consts::PI * z).ln()
        + inv * (1.0 / 12.0 - inv2 * (1.0 / 360.0 - inv2 / 1260.0))
}

/// `e^{-λ} λ^x / x!`, evaluated in log space.
pub fn poisson_pmf(lambda: f64, x: u64) -> Result<f64> {
    check_lambda(lambda)?;
    Ok(poisson_pmf_unchecked(lambda, x))
}

pub(crate) fn poisson_pmf_unchecked(lambda: f64, x: u64) -> f64 {
    if lambda == 0.0 {
        return if x == 0 { 1.0 } else { 0.0 };
    }
    (-lambda + x as f64 * lambda.ln() - ln_factorial(x)).exp()
}

fn check_lambda(lambda: f64) -> Result<()> {
    if !(lambda >= 0.0) || !lambda.is_finite() {
        return Err(Error::domain(format!(
            "Poisson parameter must be finite and >= 0, got {lambda}"
        )));
    }
    Ok(())
}

/// `Po(λ)` truncated at the smallest support `0..=m` carrying at least
/// `quantile_cut` of the mass; the remainder is kept as `tail_mass`.
pub fn poisson_dist(lambda: f64, quantile_cut: f64) -> Result<DiscreteDist> {
    poisson_dist_covering(lambda, quantile_cut, 0)
}

/// Like [`poisson_dist`] but the support always reaches at least `min_max`.
pub fn poisson_dist_covering(lambda: f64, quantile_cut: f64, min_max: u64) -> Result<DiscreteDist> {
    check_lambda(lambda)?;
    if !(quantile_cut > 0.0 && quantile_cut <= 1.0) {
        return Err(Error::domain(format!(
            "quantile cut must lie in (0, 1], got {quantile_cut}"
        )));
    }
    // Past this point every remaining term is below f64 resolution.
    let hard_stop = (lambda + 40.0 * lambda.sqrt() + 200.0).ceil() as u64;
    let mut probs = Vec::new();
    let mut cum = 0.0;
    let mut x = 0_u64;
    loop {
        let p = poisson_pmf_unchecked(lambda, x);
        probs.push(p);
        cum += p;
        if (cum >= quantile_cut && x >= min_max) || (x >= hard_stop && x >= min_max) {
            break;
        }
        x += 1;
    }
    let tail = if cum >= 1.0 { 0.0 } else { 1.0 - cum };
    Ok(DiscreteDist::new(0, probs, tail))
}

/// A law on `support_offset..support_offset + probs.len()`, possibly
/// truncated; the mass discarded by truncation lives in `tail_mass`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiscreteDist {
    pub support_offset: usize,
    pub probs: Vec<f64>,
    pub tail_mass: f64,
}

impl DiscreteDist {
    pub fn new(support_offset: usize, probs: Vec<f64>, tail_mass: f64) -> Self {
        debug_assert!(probs.iter().all(|&p| p >= 0.0));
        Self {
            support_offset,
            probs,
            tail_mass,
        }
    }

    pub fn point_mass(x: usize) -> Self {
        Self::new(x, vec![1.0], 0.0)
    }

    /// Empirical law of integer observations.
    pub fn from_counts(counts: &[u64]) -> Self {
        let total: u64 = counts.iter().sum();
        if total == 0 {
            return Self::new(0, Vec::new(), 0.0);
        }
        let probs = counts.iter().map(|&c| c as f64 / total as f64).collect();
        Self::new(0, probs, 0.0)
    }

    pub fn prob(&self, x: usize) -> f64 {
        x.checked_sub(self.support_offset)
            .and_then(|i| self.probs.get(i))
            .copied()
            .unwrap_or(0.0)
    }

    /// One past the largest support point.
    pub fn support_end(&self) -> usize {
        self.support_offset + self.probs.len()
    }

    pub fn total_mass(&self) -> f64 {
        self.probs.iter().sum()
    }

    pub fn mean(&self) -> f64 {
        self.probs
            .iter()
            .enumerate()
            .map(|(i, p)| (i + self.support_offset) as f64 * p)
            .sum()
    }

    pub fn mode(&self) -> usize {
        let mut best = 0;
        for (i, &p) in self.probs.iter().enumerate() {
            if p > self.probs[best] {
                best = i;
            }
        }
        best + self.support_offset
    }
}

/// Total variation distance with the truncation uncertainty kept apart.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TvDistance {
    pub distance: f64,
    /// Half the total truncated mass; the true distance is within
    /// `distance ± band`.
    pub band: f64,
}

/// `½ Σ |a(x) - b(x)|` over the union of supports.
pub fn tv_distance(a: &DiscreteDist, b: &DiscreteDist) -> TvDistance {
    let lo = a.support_offset.min(b.support_offset);
    let hi = a.support_end().max(b.support_end());
    let sum: f64 = (lo..hi).map(|x| (a.prob(x) - b.prob(x)).abs()).sum();
    TvDistance {
        distance: (0.5 * sum).clamp(0.0, 1.0),
        band: 0.5 * (a.tail_mass + b.tail_mass),
    }
}

/// Total variation distance between a finitely supported law and the
/// untruncated `Po(λ)`.
///
/// Poisson mass off the support of `a` is accounted for exactly, so the only
/// uncertainty left is `a`'s own tail.
pub fn tv_distance_to_poisson(a: &DiscreteDist, lambda: f64) -> Result<TvDistance> {
    check_lambda(lambda)?;
    let mut on_support = 0.0;
    let mut diff = 0.0;
    for (i, &p) in a.probs.iter().enumerate() {
        let q = poisson_pmf_unchecked(lambda, (i + a.support_offset) as u64);
        on_support += q;
        diff += (p - q).abs();
    }
    let off_support = (1.0 - on_support).max(0.0);
    Ok(TvDistance {
        distance: (0.5 * (diff + off_support)).clamp(0.0, 1.0),
        band: 0.5 * a.tail_mass,
    })
}

/// Total variation distance between a finitely supported joint law on
/// integer tuples and the product `Po(λ_0) ⊗ … ⊗ Po(λ_b)`.
///
/// `entries` yields every support point of the joint law with its
/// probability; each tuple must have `lambdas.len()` coordinates.
pub fn tv_distance_to_product_poisson<'a, I>(entries: I, lambdas: &[f64]) -> Result<f64>
where
    I: IntoIterator<Item = (&'a [u64], f64)>,
{
    for &l in lambdas {
        check_lambda(l)?;
    }
    let mut on_support = 0.0;
    let mut diff = 0.0;
    for (tuple, p) in entries {
        if tuple.len() != lambdas.len() {
            return Err(Error::domain(format!(
                "tuple has {} coordinates but {} Poisson parameters were given",
                tuple.len(),
                lambdas.len()
            )));
        }
        let q: f64 = tuple
            .iter()
            .zip(lambdas)
            .map(|(&x, &l)| poisson_pmf_unchecked(l, x))
            .product();
        on_support += q;
        diff += (p - q).abs();
    }
    Ok((0.5 * (diff + (1.0 - on_support).max(0.0))).clamp(0.0, 1.0))
}
