//! Critical family sizes and Janson bounds for pairwise r-overlaps.
//!
//! A pair of distinct k-sets "r-overlaps" when their intersection has exactly
//! `r` elements. For a fixed k-set the number of distinct partners it
//! r-overlaps is `M_r = C(k,r) C(n-k,k-r)` for `r < k` (and 0 for `r = k`),
//! so a family of all k-sets holds `½ C(n,k) M_r` such pairs.

use serde::{Deserialize, Serialize};

use crate::combinatorics::{binomial_exact, log_binomial};
use crate::error::{Error, Result};

/// `ln M_r`, the log of the number of other k-sets meeting a fixed k-set in
/// exactly `r` elements. `-inf` when there are none.
pub fn log_overlap_partners(n: u64, k: u64, r: u64) -> Result<f64> {
    if k > n {
        return Err(Error::domain(format!("k={k} exceeds n={n}")));
    }
    if r > k || k - r > n - k {
        return Ok(f64::NEG_INFINITY);
    }
    if r == k {
        // The only k-set meeting itself in k elements is itself.
        return Ok(f64::NEG_INFINITY);
    }
    Ok(log_binomial(k, r)? + log_binomial(n - k, k - r)?)
}

/// Exact `M_r`, see [`log_overlap_partners`].
pub fn overlap_partners_exact(n: u64, k: u64, r: u64) -> Result<u128> {
    if k > n {
        return Err(Error::domain(format!("k={k} exceeds n={n}")));
    }
    if r >= k || k - r > n - k {
        return Ok(0);
    }
    binomial_exact(k, r)?
        .checked_mul(binomial_exact(n - k, k - r)?)
        .ok_or_else(|| Error::Range(format!("M_{r} for n={n}, k={k} exceeds 128 bits")))
}

/// `ln(½ C(n,k) M_r)`: log of the number of unordered r-overlapping pairs.
pub fn log_overlap_pairs(n: u64, k: u64, r: u64) -> Result<f64> {
    Ok(log_overlap_partners(n, k, r)? + log_binomial(n, k)? - std::f64::consts::LN_2)
}

fn check_pair_domain(n: u64, k: u64, r: u64) -> Result<()> {
    if 2 * k > n {
        return Err(Error::domain(format!(
            "disjoint pairs need 2k <= n, got n={n}, k={k}"
        )));
    }
    if r > k {
        return Err(Error::domain(format!("overlap r={r} exceeds k={k}")));
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThresholdReport {
    pub n: u64,
    pub k: u64,
    pub r: u64,
    /// `sqrt(2 C(n,k) / M_r)`, a count of k-sets.
    pub t0_exact: f64,
    /// `sqrt(2) e^{k²/2n}`, only for `r = 0`.
    pub t0_convenient: Option<f64>,
    /// `C(n,k) / (2 M_r)`, the largest t for which the upper Janson bound bites.
    pub validity_upper: f64,
    /// `k / sqrt(n)`; the large-k regime wants this big.
    pub k_over_sqrt_n: f64,
    /// `k / n^{2/3}`; the convenient form wants this small.
    pub k_over_n_two_thirds: f64,
    pub regime: RegimeFlags,
}

/// Finite-n stand-ins for the asymptotic regime conditions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RegimeFlags {
    /// `k / sqrt(n) >= 2`.
    pub k_much_larger_than_sqrt_n: bool,
    /// `k / n^{2/3} <= 0.5`.
    pub k_small_against_n_two_thirds: bool,
}

pub const SQRT_N_RATIO_FLAG: f64 = 2.0;
pub const TWO_THIRDS_RATIO_FLAG: f64 = 0.5;

/// Threshold family size for the appearance of an r-overlapping pair.
pub fn threshold(n: u64, k: u64, r: u64) -> Result<ThresholdReport> {
    check_pair_domain(n, k, r)?;
    if r == k {
        return Err(Error::domain(format!(
            "no two distinct {k}-sets overlap in {k} elements; the threshold is infinite"
        )));
    }
    let ln_total = log_binomial(n, k)?;
    let ln_partners = log_overlap_partners(n, k, r)?;
    let ln2 = std::f64::consts::LN_2;
    let t0_exact = (0.5 * (ln2 + ln_total - ln_partners)).exp();
    let (nf, kf) = (n as f64, k as f64);
    let t0_convenient = (r == 0).then(|| std::f64::consts::SQRT_2 * (kf * kf / (2.0 * nf)).exp());
    let k_over_sqrt_n = kf / nf.sqrt();
    let k_over_n_two_thirds = kf / nf.powf(2.0 / 3.0);
    Ok(ThresholdReport {
        n,
        k,
        r,
        t0_exact,
        t0_convenient,
        validity_upper: (ln_total - ln2 - ln_partners).exp(),
        k_over_sqrt_n,
        k_over_n_two_thirds,
        regime: RegimeFlags {
            k_much_larger_than_sqrt_n: k_over_sqrt_n >= SQRT_N_RATIO_FLAG,
            k_small_against_n_two_thirds: k_over_n_two_thirds <= TWO_THIRDS_RATIO_FLAG,
        },
    })
}

/// Limit of `P(X_r = 0)` when `t / t0 → A`: `e^{-A²}`.
pub fn limit_probability(a: f64) -> f64 {
    (-a * a).exp()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JansonReport {
    pub n: u64,
    pub k: u64,
    pub r: u64,
    pub p: f64,
    /// Expected number of r-overlapping pairs, `½ C(n,k) M_r p²`.
    pub mu: f64,
    /// Upper estimate `C(n,k) M_r² p³` of the correlated-pair sum.
    pub delta: f64,
    pub lower_bound: f64,
    pub upper_bound: f64,
    /// True when `1 - p² - M_r p <= 0` and the upper bound says nothing.
    pub vacuous: bool,
}

impl JansonReport {
    /// The empty family: no pairs, both bounds equal to one.
    pub fn trivial(n: u64, k: u64, r: u64) -> Self {
        Self {
            n,
            k,
            r,
            p: 0.0,
            mu: 0.0,
            delta: 0.0,
            lower_bound: 1.0,
            upper_bound: 1.0,
            vacuous: false,
        }
    }
}

/// Janson sandwich on `P(X_r = 0)` under independent inclusion with probability `p`.
pub fn janson_bounds(n: u64, k: u64, r: u64, p: f64) -> Result<JansonReport> {
    check_pair_domain(n, k, r)?;
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::domain(format!("p must lie in (0, 1), got {p}")));
    }
    let ln_p = p.ln();
    let ln_partners = log_overlap_partners(n, k, r)?;
    let ln_pairs = log_overlap_pairs(n, k, r)?;
    let mu = (ln_pairs + 2.0 * ln_p).exp();
    let delta = (log_binomial(n, k)? + 2.0 * ln_partners + 3.0 * ln_p).exp();
    let partner_p = (ln_partners + ln_p).exp();
    let one_minus_p2 = 1.0 - p * p;
    let lower_bound = if mu == 0.0 { 1.0 } else { (-mu / one_minus_p2).exp() };
    let factor = one_minus_p2 - partner_p;
    let (upper_bound, vacuous) = if mu == 0.0 {
        (1.0, false)
    } else if factor <= 0.0 {
        (1.0, true)
    } else {
        ((-mu * factor / one_minus_p2).exp().clamp(0.0, 1.0), false)
    };
    Ok(JansonReport {
        n,
        k,
        r,
        p,
        mu,
        delta,
        lower_bound,
        upper_bound,
        vacuous,
    })
}

/// Largest `b` for which the joint Poisson regime sits above the EKR threshold.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct AdmissibleB {
    /// `None` when the condition already fails at `b = 0`.
    pub max_b: Option<u64>,
    /// Some comparison fell inside the log-space slack band.
    pub boundary: bool,
    /// Evaluated in exact integers rather than log space.
    pub exact: bool,
}

/// Half-width of the tie band for the log-space comparison.
pub const ADMISSIBLE_B_SLACK: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Verdict {
    Holds,
    Boundary,
    Fails,
}

/// Scan `b = 0..=k` for `C(n,k) C(n-k,k)³ >= (Σ_{j<=b} M_j)⁴`.
pub fn max_admissible_b(n: u64, k: u64) -> Result<AdmissibleB> {
    check_pair_domain(n, k, 0)?;
    let (verdicts, exact) = match exact_condition(n, k) {
        Some(v) => (v, true),
        None => (log_condition(n, k)?, false),
    };
    let mut max_b = None;
    let mut boundary = false;
    for (b, v) in verdicts.into_iter().enumerate() {
        match v {
            Verdict::Holds => max_b = Some(b as u64),
            Verdict::Boundary => {
                boundary = true;
                max_b = Some(b as u64);
            }
            Verdict::Fails => break,
        }
    }
    Ok(AdmissibleB {
        max_b,
        boundary,
        exact,
    })
}

fn exact_condition(n: u64, k: u64) -> Option<Vec<Verdict>> {
    let total = binomial_exact(n, k).ok()?;
    let disjoint = binomial_exact(n - k, k).ok()?;
    let lhs = total.checked_mul(disjoint.checked_pow(3)?)?;
    let mut sum: u128 = 0;
    let mut out = Vec::with_capacity(k as usize + 1);
    for j in 0..=k {
        sum = sum.checked_add(overlap_partners_exact(n, k, j).ok()?)?;
        let rhs = sum.checked_pow(4)?;
        if lhs >= rhs {
            out.push(Verdict::Holds);
        } else {
            out.push(Verdict::Fails);
            break;
        }
    }
    Some(out)
}

fn log_condition(n: u64, k: u64) -> Result<Vec<Verdict>> {
    let lhs = log_binomial(n, k)? + 3.0 * log_binomial(n - k, k)?;
    let mut ln_sum = f64::NEG_INFINITY;
    let mut out = Vec::with_capacity(k as usize + 1);
    for j in 0..=k {
        ln_sum = log_add_exp(ln_sum, log_overlap_partners(n, k, j)?);
        let diff = lhs - 4.0 * ln_sum;
        out.push(if diff > ADMISSIBLE_B_SLACK {
            Verdict::Holds
        } else if diff < -ADMISSIBLE_B_SLACK {
            Verdict::Fails
        } else {
            Verdict::Boundary
        });
    }
    Ok(out)
}

pub(crate) fn log_add_exp(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    let (hi, lo) = if a > b { (a, b) } else { (b, a) };
    hi + (lo - hi).exp().ln_1p()
}

/// The classical EKR maximum `C(n-1,k-1)` set beside the random threshold.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassicalComparison {
    pub n: u64,
    pub k: u64,
    /// `ln C(n-1, k-1)`.
    pub ln_ekr_max_family: f64,
    /// `ln(sqrt(2) e^{k²/2n})`.
    pub ln_random_threshold: f64,
    /// `ln(sqrt(2) e^{n^{1/5}/2})`, the threshold's form at `k = n^{3/5}`.
    pub ln_random_threshold_at_three_fifths: f64,
    /// `ln k / ln n`.
    pub k_exponent: f64,
}

/// `k` counts as "about `n^{3/5}`" when `ln k / ln n` is within this of 0.6.
pub const THREE_FIFTHS_TOLERANCE: f64 = 0.02;

pub fn classical_comparison(n: u64, k: u64) -> Result<ClassicalComparison> {
    if k == 0 || k > n {
        return Err(Error::domain(format!("need 1 <= k <= n, got n={n}, k={k}")));
    }
    let (nf, kf) = (n as f64, k as f64);
    let half_ln2 = 0.5 * std::f64::consts::LN_2;
    Ok(ClassicalComparison {
        n,
        k,
        ln_ekr_max_family: log_binomial(n - 1, k - 1)?,
        ln_random_threshold: half_ln2 + kf * kf / (2.0 * nf),
        ln_random_threshold_at_three_fifths: half_ln2 + nf.powf(0.2) / 2.0,
        k_exponent: if n > 1 { kf.ln() / nf.ln() } else { f64::NAN },
    })
}

impl ClassicalComparison {
    pub fn near_three_fifths(&self) -> bool {
        (self.k_exponent - 0.6).abs() <= THREE_FIFTHS_TOLERANCE
    }
}
