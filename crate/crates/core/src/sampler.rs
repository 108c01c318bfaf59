//! Bit-vector k-sets and seeded generation of random families.
//!
//! Every trial draws from its own ChaCha stream: the key comes from
//! `master_seed` and the stream id is `trial_index`. Draws inside a trial are
//! consumed in a fixed order, so a family is a pure function of its
//! [`ModelConfig`] no matter how trials are scheduled.

use std::cmp::Ordering;
use std::collections::HashSet;
use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution, Poisson};
use serde::{Deserialize, Serialize};

use crate::combinatorics::{binomial_exact, log_binomial};
use crate::error::{Error, Result};

/// Number of 64-bit blocks in a [`KSet`].
pub const WORDS: usize = 16;
/// Largest ground-set size a [`KSet`] can hold.
pub const MAX_N: usize = WORDS * 64;
/// Upper limit on [`enumerate_ksets`] output.
pub const ENUMERATION_LIMIT: u128 = 1_000_000;
/// Rejection sampling gives up after this many draws per requested set.
pub const REJECTION_FACTOR: u64 = 100;
/// Families larger than this are refused outright.
pub const MAX_FAMILY_SIZE: u64 = 50_000_000;

/// A k-subset of `{0, …, n-1}`; element `i` is present iff bit `i` is set.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct KSet {
    bits: [u64; WORDS],
    n: u16,
    k: u16,
}

impl KSet {
    pub fn empty(n: usize) -> Result<Self> {
        check_capacity(n)?;
        Ok(Self {
            bits: [0; WORDS],
            n: n as u16,
            k: 0,
        })
    }

    /// Builds a set from distinct elements below `n`.
    pub fn from_elements(n: usize, elements: &[usize]) -> Result<Self> {
        let mut set = Self::empty(n)?;
        for &e in elements {
            if e >= n {
                return Err(Error::domain(format!("element {e} outside 0..{n}")));
            }
            if set.contains(e) {
                return Err(Error::domain(format!("element {e} repeated")));
            }
            set.insert_unchecked(e);
        }
        Ok(set)
    }

    fn insert_unchecked(&mut self, e: usize) {
        self.bits[e / 64] |= 1 << (e % 64);
        self.k += 1;
    }

    pub fn n(&self) -> usize {
        self.n as usize
    }

    pub fn k(&self) -> usize {
        self.k as usize
    }

    pub fn contains(&self, e: usize) -> bool {
        e < self.n() && self.bits[e / 64] >> (e % 64) & 1 == 1
    }

    /// The blocks that can hold set bits.
    pub fn words(&self) -> &[u64] {
        &self.bits[..active_words(self.n())]
    }

    pub fn intersection_size(&self, other: &KSet) -> u32 {
        self.words()
            .iter()
            .zip(other.words())
            .map(|(a, b)| (a & b).count_ones())
            .sum()
    }

    /// Elements in increasing order.
    pub fn elements(&self) -> impl Iterator<Item = usize> + '_ {
        self.words().iter().enumerate().flat_map(|(w, &word)| {
            let mut rest = word;
            std::iter::from_fn(move || {
                if rest == 0 {
                    return None;
                }
                let bit = rest.trailing_zeros() as usize;
                rest &= rest - 1;
                Some(w * 64 + bit)
            })
        })
    }

    /// Checks the population count and that no bit sits at or above `n`.
    pub fn is_valid(&self) -> bool {
        let pop: u32 = self.bits.iter().map(|w| w.count_ones()).sum();
        pop as usize == self.k() && self.elements().all(|e| e < self.n()) && {
            let active = active_words(self.n());
            self.bits[active..].iter().all(|&w| w == 0)
        }
    }
}

impl Ord for KSet {
    /// Orders sets as the integers their bit vectors spell.
    fn cmp(&self, other: &Self) -> Ordering {
        for w in (0..WORDS).rev() {
            match self.bits[w].cmp(&other.bits[w]) {
                Ordering::Equal => continue,
                o => return o,
            }
        }
        (self.n, self.k).cmp(&(other.n, other.k))
    }
}

impl PartialOrd for KSet {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Debug for KSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.elements()).finish()
    }
}

impl fmt::Display for KSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for e in self.elements() {
            if !first {
                f.write_str(",")?;
            }
            write!(f, "{e}")?;
            first = false;
        }
        Ok(())
    }
}

fn active_words(n: usize) -> usize {
    n.div_ceil(64)
}

fn check_capacity(n: usize) -> Result<()> {
    if n > MAX_N {
        return Err(Error::capacity(format!(
            "ground set of size {n} exceeds the {MAX_N}-bit set capacity"
        )));
    }
    Ok(())
}

/// Uniform k-subset of `{0, …, n-1}` by Floyd's algorithm.
pub fn random_kset<R: Rng + ?Sized>(n: usize, k: usize, rng: &mut R) -> Result<KSet> {
    check_capacity(n)?;
    if k > n {
        return Err(Error::domain(format!("cannot pick {k} elements from {n}")));
    }
    let mut set = KSet::empty(n)?;
    for j in n - k..n {
        let candidate = rng.random_range(0..=j);
        if set.contains(candidate) {
            set.insert_unchecked(j);
        } else {
            set.insert_unchecked(candidate);
        }
    }
    Ok(set)
}

/// All k-subsets of `{0, …, n-1}` in increasing bit-vector order.
pub fn enumerate_ksets(n: usize, k: usize) -> Result<Vec<KSet>> {
    check_capacity(n)?;
    if k > n {
        return Ok(Vec::new());
    }
    let total = binomial_exact(n as u64, k as u64).unwrap_or(u128::MAX);
    if total > ENUMERATION_LIMIT {
        return Err(Error::capacity(format!(
            "C({n},{k}) = {total} exceeds the enumeration limit {ENUMERATION_LIMIT}"
        )));
    }
    let mut out = Vec::with_capacity(total as usize);
    // Colex successor on sorted positions is the next larger bit vector.
    let mut c: Vec<usize> = (0..k).collect();
    loop {
        out.push(KSet::from_elements(n, &c)?);
        let mut j = 0;
        while j < k && c[j] + 1 == if j + 1 < k { c[j + 1] } else { n } {
            j += 1;
        }
        if j == k {
            break;
        }
        c[j] += 1;
        for (i, slot) in c.iter_mut().enumerate().take(j) {
            *slot = i;
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SamplingMode {
    /// Each k-set joins independently with probability `p`.
    Independent { p: f64 },
    /// Exactly `t` distinct k-sets, uniformly.
    FixedSize { t: u64 },
}

impl fmt::Display for SamplingMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SamplingMode::Independent { p } => write!(f, "independent:{p:e}"),
            SamplingMode::FixedSize { t } => write!(f, "fixed:{t}"),
        }
    }
}

impl FromStr for SamplingMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Parse(format!("unrecognised model `{s}`"));
        let (kind, value) = s.split_once(':').ok_or_else(bad)?;
        match kind {
            "independent" => Ok(SamplingMode::Independent {
                p: value.parse().map_err(|_| bad())?,
            }),
            "fixed" => Ok(SamplingMode::FixedSize {
                t: value.parse().map_err(|_| bad())?,
            }),
            _ => Err(bad()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelConfig {
    pub n: usize,
    pub k: usize,
    pub mode: SamplingMode,
    pub master_seed: u64,
    pub trial_index: u64,
}

impl ModelConfig {
    pub fn fixed(n: usize, k: usize, t: u64, master_seed: u64) -> Self {
        Self {
            n,
            k,
            mode: SamplingMode::FixedSize { t },
            master_seed,
            trial_index: 0,
        }
    }

    pub fn independent(n: usize, k: usize, p: f64, master_seed: u64) -> Self {
        Self {
            n,
            k,
            mode: SamplingMode::Independent { p },
            master_seed,
            trial_index: 0,
        }
    }

    pub fn for_trial(&self, trial_index: u64) -> Self {
        Self {
            trial_index,
            ..*self
        }
    }

    /// The stream this trial draws from.
    pub fn rng(&self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.master_seed);
        rng.set_stream(self.trial_index);
        rng
    }

    pub fn validate(&self) -> Result<()> {
        check_capacity(self.n)?;
        if self.k > self.n {
            return Err(Error::domain(format!(
                "k={} exceeds n={}",
                self.k, self.n
            )));
        }
        match self.mode {
            SamplingMode::Independent { p } if !(0.0..=1.0).contains(&p) => Err(Error::domain(
                format!("inclusion probability must lie in [0, 1], got {p}"),
            )),
            SamplingMode::FixedSize { t } => match universe_size(self.n, self.k) {
                Some(total) if u128::from(t) > total => Err(Error::Infeasible {
                    requested: t.into(),
                    available: total,
                }),
                _ => Ok(()),
            },
            _ => Ok(()),
        }
    }
}

/// `C(n,k)` when it fits in 128 bits.
pub fn universe_size(n: usize, k: usize) -> Option<u128> {
    binomial_exact(n as u64, k as u64).ok()
}

/// How the family size was drawn in independent mode.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CountMethod {
    /// `Binomial(C(n,k), p)`, exact.
    ExactBinomial,
    /// `Poisson(p C(n,k))`; used when `C(n,k)` exceeds 64 bits.
    PoissonApproximation,
}

pub fn count_method(n: usize, k: usize) -> CountMethod {
    match universe_size(n, k) {
        Some(total) if total <= u128::from(u64::MAX) => CountMethod::ExactBinomial,
        _ => CountMethod::PoissonApproximation,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Family {
    pub sets: Vec<KSet>,
    pub model: ModelConfig,
    /// Set in independent mode only.
    pub count_method: Option<CountMethod>,
}

impl Family {
    pub fn len(&self) -> usize {
        self.sets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sets.is_empty()
    }

    /// Distinct members, each a valid k-set over the family's `(n, k)`.
    pub fn is_valid(&self) -> bool {
        let unique: HashSet<_> = self.sets.iter().collect();
        unique.len() == self.sets.len()
            && self.sets.iter().all(|s| {
                s.is_valid() && s.n() == self.model.n && s.k() == self.model.k
            })
    }

    /// Header `n k model seed trial`, then one sorted element list per line.
    pub fn to_text(&self) -> String {
        let m = &self.model;
        let mut out = format!("{} {} {} {} {}\n", m.n, m.k, m.mode, m.master_seed, m.trial_index);
        for set in &self.sets {
            out.push_str(&set.to_string());
            out.push('\n');
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text.lines();
        let header = lines
            .next()
            .ok_or_else(|| Error::Parse("missing header line".into()))?;
        let fields: Vec<&str> = header.split_whitespace().collect();
        let [n, k, mode, seed, trial] = fields[..] else {
            return Err(Error::Parse(format!("header needs 5 fields, got `{header}`")));
        };
        let num = |s: &str| {
            s.parse::<u64>()
                .map_err(|_| Error::Parse(format!("bad integer `{s}` in header")))
        };
        let model = ModelConfig {
            n: num(n)? as usize,
            k: num(k)? as usize,
            mode: mode.parse()?,
            master_seed: num(seed)?,
            trial_index: num(trial)?,
        };
        let mut sets = Vec::new();
        for line in lines {
            let elements = if line.trim().is_empty() {
                Vec::new()
            } else {
                line.split(',')
                    .map(|e| {
                        e.trim()
                            .parse::<usize>()
                            .map_err(|_| Error::Parse(format!("bad element `{e}`")))
                    })
                    .collect::<Result<Vec<_>>>()?
            };
            if elements.len() != model.k {
                return Err(Error::Parse(format!(
                    "set `{line}` has {} elements, expected {}",
                    elements.len(),
                    model.k
                )));
            }
            sets.push(KSet::from_elements(model.n, &elements)?);
        }
        let family = Family {
            sets,
            count_method: matches!(model.mode, SamplingMode::Independent { .. })
                .then(|| count_method(model.n, model.k)),
            model,
        };
        if !family.is_valid() {
            return Err(Error::Parse("family contains duplicate sets".into()));
        }
        Ok(family)
    }
}

/// Draws one random family. See the module docs for the seeding contract.
pub fn sample_family(cfg: &ModelConfig) -> Result<Family> {
    cfg.validate()?;
    let mut rng = cfg.rng();
    let (target, method) = match cfg.mode {
        SamplingMode::FixedSize { t } => (t, None),
        SamplingMode::Independent { p } => {
            let method = count_method(cfg.n, cfg.k);
            (draw_count(cfg.n, cfg.k, p, method, &mut rng)?, Some(method))
        }
    };
    if target > MAX_FAMILY_SIZE {
        return Err(Error::capacity(format!(
            "family of {target} sets exceeds the limit {MAX_FAMILY_SIZE}"
        )));
    }
    let sets = distinct_ksets(cfg.n, cfg.k, target, &mut rng)?;
    Ok(Family {
        sets,
        model: *cfg,
        count_method: method,
    })
}

fn draw_count(n: usize, k: usize, p: f64, method: CountMethod, rng: &mut ChaCha8Rng) -> Result<u64> {
    if p == 0.0 {
        return Ok(0);
    }
    match method {
        CountMethod::ExactBinomial => {
            let total = universe_size(n, k).expect("fits by construction") as u64;
            let dist = Binomial::new(total, p)
                .map_err(|e| Error::domain(format!("binomial count: {e}")))?;
            Ok(dist.sample(rng))
        }
        CountMethod::PoissonApproximation => {
            let mean = (log_binomial(n as u64, k as u64)? + p.ln()).exp();
            if !mean.is_finite() || mean > MAX_FAMILY_SIZE as f64 {
                return Err(Error::capacity(format!(
                    "expected family size {mean:e} exceeds the limit {MAX_FAMILY_SIZE}"
                )));
            }
            let dist = Poisson::new(mean)
                .map_err(|e| Error::domain(format!("Poisson count: {e}")))?;
            Ok(dist.sample(rng) as u64)
        }
    }
}

fn distinct_ksets(n: usize, k: usize, target: u64, rng: &mut ChaCha8Rng) -> Result<Vec<KSet>> {
    distinct_ksets_with_budget(n, k, target, REJECTION_FACTOR, rng)
}

fn distinct_ksets_with_budget(
    n: usize,
    k: usize,
    target: u64,
    factor: u64,
    rng: &mut ChaCha8Rng,
) -> Result<Vec<KSet>> {
    if let Some(total) = universe_size(n, k) {
        if u128::from(target) > total {
            return Err(Error::Infeasible {
                requested: target.into(),
                available: total,
            });
        }
    }
    let mut seen = HashSet::with_capacity(target as usize);
    let mut sets = Vec::with_capacity(target as usize);
    let limit = factor.saturating_mul(target);
    let mut draws = 0_u64;
    while (sets.len() as u64) < target {
        if draws >= limit {
            return Err(Error::Saturation {
                draws,
                target,
            });
        }
        draws += 1;
        let set = random_kset(n, k, rng)?;
        if seen.insert(set) {
            sets.push(set);
        }
    }
    Ok(sets)
}
