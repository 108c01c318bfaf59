//! Overlap counting, Monte Carlo experiments and exact enumeration oracles.

use std::collections::HashMap;

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::combinatorics::{
    binomial_exact, log_binomial, poisson_dist_covering, poisson_pmf_unchecked,
    tv_distance_to_poisson, tv_distance_to_product_poisson, DiscreteDist, TvDistance,
    DEFAULT_POISSON_CUT,
};
use crate::error::{Error, Result};
use crate::sampler::{enumerate_ksets, sample_family, Family, KSet, ModelConfig, SamplingMode};
use crate::stein_chen::{epsilon_multivariate, tv_bound_univariate, BoundReport};
use crate::thresholds::{
    janson_bounds, limit_probability, log_overlap_pairs, max_admissible_b, threshold,
    JansonReport,
};

/// Two-sided 95% normal quantile.
pub const Z_95: f64 = 1.959_963_984_540_054;
pub const DEFAULT_BOOTSTRAP: usize = 1000;
/// Joint histograms never track more than overlap sizes `0..=4`.
pub const JOINT_B_CAP: usize = 4;
/// Independent-mode oracle enumerates all `2^C(n,k)` families.
pub const MAX_INDEPENDENT_UNIVERSE: usize = 24;
pub const MAX_FIXED_FAMILIES: u128 = 10_000_000;

/// `(X_0, …, X_k)` for one family.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OverlapCounts {
    /// `counts[r]` is the number of unordered pairs meeting in exactly `r` elements.
    pub counts: Vec<u64>,
    /// Family size.
    pub t: usize,
}

impl OverlapCounts {
    pub fn x(&self, r: usize) -> u64 {
        self.counts.get(r).copied().unwrap_or(0)
    }

    /// Every unordered pair has exactly one overlap size.
    pub fn pair_identity_holds(&self) -> bool {
        let t = self.t as u64;
        self.counts.iter().sum::<u64>() == t * t.saturating_sub(1) / 2
    }
}

pub fn count_overlaps(family: &Family) -> OverlapCounts {
    count_overlaps_in(&family.sets, family.model.k)
}

/// Dense pair loop over the packed bit vectors.
pub fn count_overlaps_in(sets: &[KSet], k: usize) -> OverlapCounts {
    let mut counts = vec![0_u64; k + 1];
    let Some(first) = sets.first() else {
        return OverlapCounts { counts, t: 0 };
    };
    let stride = first.words().len();
    let packed: Vec<u64> = sets.iter().flat_map(|s| s.words().iter().copied()).collect();
    for i in 0..sets.len() {
        let a = &packed[i * stride..(i + 1) * stride];
        for j in i + 1..sets.len() {
            let b = &packed[j * stride..(j + 1) * stride];
            let r: u32 = a.iter().zip(b).map(|(x, y)| (x & y).count_ones()).sum();
            counts[r as usize] += 1;
        }
    }
    OverlapCounts {
        counts,
        t: sets.len(),
    }
}

/// Samples and counts `trials` independent families; `trial_index` runs over
/// `0..trials`. The result is in trial order and does not depend on `threads`.
pub fn run_trials(template: &ModelConfig, trials: u64, threads: Option<usize>) -> Result<Vec<OverlapCounts>> {
    if trials == 0 {
        return Err(Error::domain("need at least one trial"));
    }
    template.validate()?;
    let work = || {
        (0..trials)
            .into_par_iter()
            .map(|i| {
                let family = sample_family(&template.for_trial(i))?;
                let counts = count_overlaps(&family);
                assert!(counts.pair_identity_holds(), "pair identity broken in trial {i}");
                Ok(counts)
            })
            .collect::<Result<Vec<_>>>()
    };
    match threads {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| Error::domain(format!("thread pool: {e}")))?
            .install(work),
        None => work(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProportionEstimate {
    pub successes: u64,
    pub trials: u64,
    pub estimate: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub confidence: f64,
}

impl ProportionEstimate {
    pub fn wilson(successes: u64, trials: u64) -> Self {
        let (ci_low, ci_high) = wilson_interval(successes, trials, Z_95);
        Self {
            successes,
            trials,
            estimate: successes as f64 / trials as f64,
            ci_low,
            ci_high,
            confidence: 0.95,
        }
    }

    pub fn half_width(&self) -> f64 {
        0.5 * (self.ci_high - self.ci_low)
    }
}

/// Wilson score interval for a binomial proportion.
pub fn wilson_interval(successes: u64, trials: u64, z: f64) -> (f64, f64) {
    let n = trials as f64;
    let phat = successes as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let centre = (phat + z2 / (2.0 * n)) / denom;
    let half = z * (phat * (1.0 - phat) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    // Keep the point estimate inside the interval despite rounding at 0 and 1.
    ((centre - half).clamp(0.0, phat), (centre + half).clamp(phat, 1.0))
}

/// Closed-form quantities evaluated at the experiment's inputs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalyticComparison {
    /// Inclusion probability: `p`, or `t / C(n,k)` in fixed-size mode.
    pub p_equivalent: f64,
    /// Expected family size: `t`, or `p C(n,k)` in independent mode.
    pub t_equivalent: f64,
    pub t0_exact: Option<f64>,
    /// `t_equivalent / t0_exact`.
    pub a_ratio: Option<f64>,
    /// `e^{-A²}` at `a_ratio`.
    pub limit_probability: Option<f64>,
    pub janson: Option<JansonReport>,
}

fn equivalents(cfg: &ModelConfig) -> Result<(f64, f64)> {
    let ln_total = log_binomial(cfg.n as u64, cfg.k as u64)?;
    Ok(match cfg.mode {
        SamplingMode::Independent { p } => (p, (p.ln() + ln_total).exp()),
        SamplingMode::FixedSize { t } => (((t as f64).ln() - ln_total).exp(), t as f64),
    })
}

pub fn analytic_comparison(cfg: &ModelConfig, r: usize) -> Result<AnalyticComparison> {
    let (p, t) = equivalents(cfg)?;
    let (n, k, r) = (cfg.n as u64, cfg.k as u64, r as u64);
    let t0 = threshold(n, k, r).ok().map(|rep| rep.t0_exact);
    let a_ratio = t0.map(|t0| t / t0);
    let janson = if p == 0.0 {
        (2 * k <= n && r <= k).then(|| JansonReport::trivial(n, k, r))
    } else {
        janson_bounds(n, k, r, p).ok()
    };
    Ok(AnalyticComparison {
        p_equivalent: p,
        t_equivalent: t,
        t0_exact: t0,
        a_ratio,
        limit_probability: a_ratio.map(limit_probability),
        janson,
    })
}

/// Monte Carlo estimate of `P(X_r = 0)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EkrEstimate {
    pub r: usize,
    pub estimate: ProportionEstimate,
    pub comparison: AnalyticComparison,
    /// Mean family size over the trials.
    pub mean_family_size: f64,
}

pub fn estimate_from_records(template: &ModelConfig, r: usize, records: &[OverlapCounts]) -> Result<EkrEstimate> {
    if records.is_empty() {
        return Err(Error::domain("need at least one trial"));
    }
    let successes = records.iter().filter(|c| c.x(r) == 0).count() as u64;
    let mean_family_size = records.iter().map(|c| c.t as f64).sum::<f64>() / records.len() as f64;
    Ok(EkrEstimate {
        r,
        estimate: ProportionEstimate::wilson(successes, records.len() as u64),
        comparison: analytic_comparison(template, r)?,
        mean_family_size,
    })
}

/// Fraction of trials whose family has no disjoint pair.
pub fn estimate_ekr_probability(template: &ModelConfig, trials: u64) -> Result<EkrEstimate> {
    estimate_overlap_free_probability(template, 0, trials)
}

/// Fraction of trials whose family has no pair meeting in exactly `r` elements.
pub fn estimate_overlap_free_probability(template: &ModelConfig, r: usize, trials: u64) -> Result<EkrEstimate> {
    if r > template.k {
        return Err(Error::domain(format!("r={r} exceeds k={}", template.k)));
    }
    let records = run_trials(template, trials, None)?;
    estimate_from_records(template, r, &records)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MarginalLaw {
    pub r: usize,
    /// `histogram[x]` trials had `X_r = x`.
    pub histogram: Vec<u64>,
    pub dist: DiscreteDist,
    pub mean: f64,
    pub mean_std_error: f64,
    pub lambda: f64,
    /// Distance to `Po(λ_r)` truncated at the `1 - 1e-12` quantile.
    pub tv: TvDistance,
    pub tv_ci: (f64, f64),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JointCell {
    pub tuple: Vec<u64>,
    pub count: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JointLaw {
    /// Tracks `(X_0, …, X_b)`.
    pub b: usize,
    pub histogram: Vec<JointCell>,
    pub lambdas: Vec<f64>,
    /// Exact distance from the empirical joint law to `⊗ Po(λ_j)`.
    pub tv_product: f64,
    pub tv_ci: (f64, f64),
    /// Empirical `P(X_0 = … = X_b = 0)`.
    pub p_all_zero: ProportionEstimate,
    /// `exp(-Σ λ_j)`.
    pub product_all_zero: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmpiricalLaw {
    pub trials: u64,
    pub r_max: usize,
    pub marginals: Vec<MarginalLaw>,
    pub joint: JointLaw,
    /// `tv_bound_univariate` for each tracked `r`, when defined.
    pub univariate_bounds: Vec<Option<BoundReport>>,
    /// `epsilon_multivariate` at the joint `b`, when defined.
    pub epsilon: Option<BoundReport>,
}

/// The joint `b` actually tracked: `min(r_max, max_admissible_b, 4)`.
pub fn default_joint_b(n: usize, k: usize, r_max: usize) -> usize {
    let admissible = if 2 * k <= n {
        max_admissible_b(n as u64, k as u64)
            .ok()
            .and_then(|a| a.max_b)
            .unwrap_or(0) as usize
    } else {
        0
    };
    r_max.min(admissible).min(JOINT_B_CAP)
}

/// Empirical laws of `X_0..=X_{r_max}` with Poisson comparisons.
pub fn empirical_law(template: &ModelConfig, trials: u64, r_max: usize) -> Result<EmpiricalLaw> {
    let records = run_trials(template, trials, None)?;
    let b = default_joint_b(template.n, template.k, r_max);
    law_from_records(template, &records, r_max, b, DEFAULT_BOOTSTRAP)
}

/// `λ_r` at the experiment's equivalent inclusion probability.
fn lambda_for(cfg: &ModelConfig, r: usize, p: f64) -> Result<f64> {
    Ok((log_overlap_pairs(cfg.n as u64, cfg.k as u64, r as u64)? + 2.0 * p.ln()).exp())
}

pub fn law_from_records(
    template: &ModelConfig,
    records: &[OverlapCounts],
    r_max: usize,
    joint_b: usize,
    bootstrap: usize,
) -> Result<EmpiricalLaw> {
    if records.is_empty() {
        return Err(Error::domain("need at least one trial"));
    }
    if r_max > template.k {
        return Err(Error::domain(format!("r_max={r_max} exceeds k={}", template.k)));
    }
    if joint_b > r_max.min(JOINT_B_CAP) {
        return Err(Error::domain(format!(
            "joint b={joint_b} must not exceed min(r_max, {JOINT_B_CAP})"
        )));
    }
    let trials = records.len();
    let (p, _) = equivalents(template)?;
    let lambdas = (0..=r_max)
        .map(|r| lambda_for(template, r, p))
        .collect::<Result<Vec<_>>>()?;
    let mut boot_rng = ChaCha8Rng::seed_from_u64(template.master_seed);
    boot_rng.set_stream(u64::MAX);
    let resamples: Vec<Vec<u32>> = (0..bootstrap)
        .map(|_| (0..trials).map(|_| boot_rng.random_range(0..trials as u32)).collect())
        .collect();

    let mut marginals = Vec::with_capacity(r_max + 1);
    for r in 0..=r_max {
        let values: Vec<u64> = records.iter().map(|c| c.x(r)).collect();
        let max_obs = values.iter().copied().max().unwrap_or(0);
        let mut histogram = vec![0_u64; max_obs as usize + 1];
        for &v in &values {
            histogram[v as usize] += 1;
        }
        let po = poisson_dist_covering(lambdas[r], DEFAULT_POISSON_CUT, max_obs)?;
        let dist = DiscreteDist::from_counts(&histogram);
        let tv = TvDistance {
            distance: tv_histogram(&histogram, trials, &po.probs),
            band: 0.5 * po.tail_mass,
        };
        let mut boot = Vec::with_capacity(bootstrap);
        let mut scratch = vec![0_u64; histogram.len()];
        for idx in &resamples {
            scratch.iter_mut().for_each(|c| *c = 0);
            for &i in idx {
                scratch[values[i as usize] as usize] += 1;
            }
            boot.push(tv_histogram(&scratch, trials, &po.probs));
        }
        let mean = dist.mean();
        let var = values
            .iter()
            .map(|&v| (v as f64 - mean).powi(2))
            .sum::<f64>()
            / (trials.max(2) - 1) as f64;
        marginals.push(MarginalLaw {
            r,
            histogram,
            mean,
            mean_std_error: (var / trials as f64).sqrt(),
            lambda: lambdas[r],
            tv,
            tv_ci: percentile_interval(&mut boot),
            dist,
        });
    }

    let joint = joint_law(records, &lambdas[..=joint_b], &resamples)?;
    let (n, k) = (template.n as u64, template.k as u64);
    let univariate_bounds = (0..=r_max)
        .map(|r| tv_bound_univariate(n, k, r as u64, p).ok())
        .collect();
    let epsilon = epsilon_multivariate(n, k, joint_b as u64, p).ok();
    Ok(EmpiricalLaw {
        trials: trials as u64,
        r_max,
        marginals,
        joint,
        univariate_bounds,
        epsilon,
    })
}

fn joint_law(records: &[OverlapCounts], lambdas: &[f64], resamples: &[Vec<u32>]) -> Result<JointLaw> {
    let dims = lambdas.len();
    let trials = records.len();
    let mut index: HashMap<Vec<u64>, usize> = HashMap::new();
    let mut tuples: Vec<Vec<u64>> = Vec::new();
    let cell_of: Vec<usize> = records
        .iter()
        .map(|c| {
            let key = c.counts[..dims].to_vec();
            *index.entry(key.clone()).or_insert_with(|| {
                tuples.push(key);
                tuples.len() - 1
            })
        })
        .collect();
    let mut counts = vec![0_u64; tuples.len()];
    for &c in &cell_of {
        counts[c] += 1;
    }
    let product: Vec<f64> = tuples
        .iter()
        .map(|t| {
            t.iter()
                .zip(lambdas)
                .map(|(&x, &l)| poisson_pmf_unchecked(l, x))
                .product()
        })
        .collect();
    let tv_of = |counts: &[u64]| {
        let pairs = tuples
            .iter()
            .zip(counts)
            .map(|(t, &c)| (t.as_slice(), c as f64 / trials as f64));
        tv_distance_to_product_poisson(pairs, lambdas)
    };
    let tv_product = tv_of(&counts)?;
    let mut boot = Vec::with_capacity(resamples.len());
    let mut scratch = vec![0_u64; tuples.len()];
    for idx in resamples {
        scratch.iter_mut().for_each(|c| *c = 0);
        for &i in idx {
            scratch[cell_of[i as usize]] += 1;
        }
        // Only cells with mass contribute; the product term is precomputed.
        let mut diff = 0.0;
        let mut covered = 0.0;
        for (c, q) in scratch.iter().zip(&product) {
            diff += (*c as f64 / trials as f64 - q).abs();
            covered += q;
        }
        boot.push((0.5 * (diff + (1.0 - covered).max(0.0))).clamp(0.0, 1.0));
    }
    let zeros = records.iter().filter(|c| c.counts[..dims].iter().all(|&x| x == 0)).count();
    let mut histogram: Vec<JointCell> = tuples
        .into_iter()
        .zip(counts)
        .map(|(tuple, count)| JointCell { tuple, count })
        .collect();
    histogram.sort_by(|a, b| a.tuple.cmp(&b.tuple));
    Ok(JointLaw {
        b: dims - 1,
        histogram,
        lambdas: lambdas.to_vec(),
        tv_product,
        tv_ci: percentile_interval(&mut boot),
        p_all_zero: ProportionEstimate::wilson(zeros as u64, trials as u64),
        product_all_zero: (-lambdas.iter().sum::<f64>()).exp(),
    })
}

/// `½ Σ |counts[x]/total - q[x]|` where `q` covers every observed `x`.
fn tv_histogram(counts: &[u64], total: usize, q: &[f64]) -> f64 {
    debug_assert!(q.len() >= counts.len());
    let sum: f64 = q
        .iter()
        .enumerate()
        .map(|(x, &qx)| {
            let e = counts.get(x).map_or(0.0, |&c| c as f64 / total as f64);
            (e - qx).abs()
        })
        .sum();
    (0.5 * sum).clamp(0.0, 1.0)
}

/// 2.5% and 97.5% empirical quantiles.
fn percentile_interval(values: &mut [f64]) -> (f64, f64) {
    if values.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    values.sort_by(|a, b| a.total_cmp(b));
    let at = |q: f64| values[((q * (values.len() - 1) as f64).round() as usize).min(values.len() - 1)];
    (at(0.025), at(0.975))
}

/// Monte Carlo estimate of `P(X_r = 0)` plus, optionally, the empirical laws.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentResult {
    pub model: ModelConfig,
    pub trials: u64,
    pub ekr: EkrEstimate,
    pub law: Option<EmpiricalLaw>,
}

// ---------------------------------------------------------------------------
// Oracles

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OracleModel {
    Independent { p: f64 },
    FixedSize { t: u64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JointProbability {
    /// `(X_0, …, X_k)`.
    pub tuple: Vec<u64>,
    pub prob: f64,
    /// Number of families with this tuple (fixed-size mode, over `denominator`).
    pub numerator: Option<u64>,
}

/// Exact laws of the overlap counts on a tiny instance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleResult {
    pub n: usize,
    pub k: usize,
    pub model: OracleModel,
    /// Number of equally likely families (fixed-size mode only).
    pub denominator: Option<u64>,
    pub joint: Vec<JointProbability>,
    pub p_no_disjoint: f64,
    /// `E(X_r)` for `r = 0..=k`.
    pub means: Vec<f64>,
    /// `½ C(n,k) M_r p²`, with `p = t / C(n,k)` in fixed-size mode.
    pub lambdas: Vec<f64>,
    pub marginals: Vec<DiscreteDist>,
    /// Exact `d_TV(L(X_r), Po(λ_r))`.
    pub tv_to_poisson: Vec<f64>,
}

impl OracleResult {
    pub fn total_mass(&self) -> f64 {
        self.joint.iter().map(|j| j.prob).sum()
    }

    /// Exact distance between the law of `(X_0, …, X_b)` and `⊗_{j<=b} Po(λ_j)`.
    pub fn joint_tv_to_product(&self, b: usize) -> Result<f64> {
        if b > self.k {
            return Err(Error::domain(format!("b={b} exceeds k={}", self.k)));
        }
        let mut projected: HashMap<&[u64], f64> = HashMap::new();
        for j in &self.joint {
            *projected.entry(&j.tuple[..=b]).or_insert(0.0) += j.prob;
        }
        tv_distance_to_product_poisson(projected, &self.lambdas[..=b])
    }
}

/// Enumerates every family of the independent-inclusion model once; the
/// result can be evaluated at any `p`.
///
/// For each tuple `(X_0, …, X_k)` it stores how many families of each size
/// produce it, so probabilities are `Σ_s c_s p^s (1-p)^{N-s}`.
#[derive(Debug, Clone)]
pub struct IndependentEnumeration {
    n: usize,
    k: usize,
    universe: usize,
    table: Vec<(Vec<u64>, Vec<u64>)>,
}

impl IndependentEnumeration {
    pub fn new(n: usize, k: usize) -> Result<Self> {
        let sets = universe_guarded(n, k, |total| {
            (total <= MAX_INDEPENDENT_UNIVERSE as u128).then_some(()).ok_or_else(|| {
                Error::capacity(format!(
                    "C({n},{k}) = {total} sets would need 2^{total} families; limit is {MAX_INDEPENDENT_UNIVERSE} sets"
                ))
            })
        })?;
        let m = sets.len();
        let overlap = overlap_matrix(&sets);
        let mut table: HashMap<Vec<u64>, Vec<u64>> = HashMap::new();
        let mut present = vec![false; m];
        let mut counts = vec![0_u64; k + 1];
        let mut size = 0_usize;
        let record = |counts: &[u64], size: usize, table: &mut HashMap<Vec<u64>, Vec<u64>>| {
            match table.get_mut(counts) {
                Some(by_size) => by_size[size] += 1,
                None => {
                    let mut by_size = vec![0_u64; m + 1];
                    by_size[size] = 1;
                    table.insert(counts.to_vec(), by_size);
                }
            }
        };
        record(&counts, size, &mut table);
        // Gray code: step g toggles set trailing_zeros(g).
        for step in 1_u64..(1_u64 << m) {
            let flip = step.trailing_zeros() as usize;
            let adding = !present[flip];
            for j in (0..m).filter(|&j| present[j] && j != flip) {
                let r = overlap[flip * m + j] as usize;
                if adding {
                    counts[r] += 1;
                } else {
                    counts[r] -= 1;
                }
            }
            present[flip] = adding;
            if adding {
                size += 1;
            } else {
                size -= 1;
            }
            record(&counts, size, &mut table);
        }
        let mut table: Vec<_> = table.into_iter().collect();
        table.sort();
        Ok(Self {
            n,
            k,
            universe: m,
            table,
        })
    }

    pub fn evaluate(&self, p: f64) -> Result<OracleResult> {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::domain(format!("p must lie in [0, 1], got {p}")));
        }
        let m = self.universe;
        let weights: Vec<f64> = (0..=m)
            .map(|s| p.powi(s as i32) * (1.0 - p).powi((m - s) as i32))
            .collect();
        let joint = self
            .table
            .iter()
            .map(|(tuple, by_size)| JointProbability {
                tuple: tuple.clone(),
                prob: by_size.iter().zip(&weights).map(|(&c, w)| c as f64 * w).sum(),
                numerator: None,
            })
            .collect();
        finish_oracle(self.n, self.k, OracleModel::Independent { p }, p, None, joint)
    }
}

/// Exact laws under the fixed-size model by enumerating all `C(C(n,k), t)` families.
pub fn fixed_size_oracle(n: usize, k: usize, t: u64) -> Result<OracleResult> {
    let sets = universe_guarded(n, k, |total| {
        if u128::from(t) > total {
            return Err(Error::Infeasible {
                requested: t.into(),
                available: total,
            });
        }
        let families = binomial_exact(total as u64, t).unwrap_or(u128::MAX);
        (families <= MAX_FIXED_FAMILIES).then_some(()).ok_or_else(|| {
            Error::capacity(format!(
                "C({total},{t}) = {families} families exceeds the limit {MAX_FIXED_FAMILIES}"
            ))
        })
    })?;
    let m = sets.len();
    let t = t as usize;
    let overlap = overlap_matrix(&sets);
    let mut table: HashMap<Vec<u64>, u64> = HashMap::new();
    let mut chosen: Vec<usize> = (0..t).collect();
    let mut counts = vec![0_u64; k + 1];
    let mut families = 0_u64;
    loop {
        counts.iter_mut().for_each(|c| *c = 0);
        for a in 0..t {
            for b in a + 1..t {
                counts[overlap[chosen[a] * m + chosen[b]] as usize] += 1;
            }
        }
        match table.get_mut(counts.as_slice()) {
            Some(c) => *c += 1,
            None => {
                table.insert(counts.clone(), 1);
            }
        }
        families += 1;
        // Lexicographic successor of the t-combination of 0..m.
        let Some(i) = (0..t).rev().find(|&i| chosen[i] < m - t + i) else {
            break;
        };
        chosen[i] += 1;
        for j in i + 1..t {
            chosen[j] = chosen[j - 1] + 1;
        }
    }
    let mut table: Vec<_> = table.into_iter().collect();
    table.sort();
    let joint = table
        .into_iter()
        .map(|(tuple, c)| JointProbability {
            tuple,
            prob: c as f64 / families as f64,
            numerator: Some(c),
        })
        .collect();
    let p = t as f64 / m as f64;
    finish_oracle(n, k, OracleModel::FixedSize { t: t as u64 }, p, Some(families), joint)
}

/// Dispatches to the enumeration matching `model`.
pub fn oracle_exact(n: usize, k: usize, model: OracleModel) -> Result<OracleResult> {
    match model {
        OracleModel::Independent { p } => IndependentEnumeration::new(n, k)?.evaluate(p),
        OracleModel::FixedSize { t } => fixed_size_oracle(n, k, t),
    }
}

fn universe_guarded(n: usize, k: usize, guard: impl FnOnce(u128) -> Result<()>) -> Result<Vec<KSet>> {
    if k > n {
        return Err(Error::domain(format!("k={k} exceeds n={n}")));
    }
    let total = binomial_exact(n as u64, k as u64).unwrap_or(u128::MAX);
    guard(total)?;
    enumerate_ksets(n, k)
}

fn overlap_matrix(sets: &[KSet]) -> Vec<u8> {
    let m = sets.len();
    let mut out = vec![0_u8; m * m];
    for i in 0..m {
        for j in 0..m {
            out[i * m + j] = sets[i].intersection_size(&sets[j]) as u8;
        }
    }
    out
}

fn finish_oracle(
    n: usize,
    k: usize,
    model: OracleModel,
    p: f64,
    denominator: Option<u64>,
    joint: Vec<JointProbability>,
) -> Result<OracleResult> {
    let mut marginal_probs: Vec<Vec<f64>> = vec![Vec::new(); k + 1];
    let mut means = vec![0.0; k + 1];
    let mut p_no_disjoint = 0.0;
    for j in &joint {
        if j.tuple[0] == 0 {
            p_no_disjoint += j.prob;
        }
        for (r, &x) in j.tuple.iter().enumerate() {
            let slot = &mut marginal_probs[r];
            if slot.len() <= x as usize {
                slot.resize(x as usize + 1, 0.0);
            }
            slot[x as usize] += j.prob;
            means[r] += x as f64 * j.prob;
        }
    }
    let lambdas = (0..=k)
        .map(|r| {
            let ln = log_overlap_pairs(n as u64, k as u64, r as u64)?;
            Ok((ln + 2.0 * p.ln()).exp())
        })
        .collect::<Result<Vec<_>>>()?;
    let marginals: Vec<DiscreteDist> = marginal_probs
        .into_iter()
        .map(|probs| DiscreteDist::new(0, probs, 0.0))
        .collect();
    let tv_to_poisson = marginals
        .iter()
        .zip(&lambdas)
        .map(|(d, &l)| tv_distance_to_poisson(d, l).map(|tv| tv.distance))
        .collect::<Result<Vec<_>>>()?;
    Ok(OracleResult {
        n,
        k,
        model,
        denominator,
        joint,
        p_no_disjoint,
        means,
        lambdas,
        marginals,
        tv_to_poisson,
    })
}
