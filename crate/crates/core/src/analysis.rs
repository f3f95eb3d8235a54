//! Key-space analysis: density, pseudo-key search, rest-sum probabilities and
//! superincreasing sequence counts.

use std::fmt;

use num_bigint::ToBigUint;
use num_traits::{One, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::numeric::{child_seed, log2_nat, Nat, RandomSource, Rat};
use crate::sis::is_superincreasing;
use crate::systems::{keygen2, Params, PublicKey, System, Variant};

/// `s / log₂(max vᵢ)`.
pub fn density(entries: &[Nat]) -> Result<f64> {
    if entries.is_empty() {
        return Err(Error::Domain("density of an empty row".into()));
    }
    let two = Nat::from(2u32);
    if let Some(i) = entries.iter().position(|v| *v < two) {
        return Err(Error::Domain(format!("entry {i} is {} (< 2)", entries[i])));
    }
    let max = entries.iter().max().expect("nonempty");
    Ok(entries.len() as f64 / log2_nat(max))
}

/// Asymptotic density of a freshly generated key, where one is known.
pub fn density_closed_form(system: System, variant: Variant, s: usize, p: &Nat) -> Option<f64> {
    let s = s as f64;
    let lp = log2_nat(p);
    match (system, variant) {
        (System::One, _) => Some(1.0 / lp),
        (System::Two, Variant::One) => Some(1.0 / (1.0 + 2.0 / s + 2.0 * lp / s)),
        (System::Two, Variant::Two) => Some(1.0 / (2.0 + 2.0 / s + lp / s)),
        (System::Three, _) => None,
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PseudoKey {
    pub q: Nat,
    pub rests: Vec<Nat>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PseudoKeyReport {
    /// Pseudo-keys in `[2, min(q_max, max w)]`, ascending.
    pub candidates: Vec<PseudoKey>,
    /// When `q_max > max w`, every `q′` in `[from, q_max]` is a pseudo-key
    /// with rests `w` itself. Those are counted here rather than listed.
    pub degenerate: Option<(Nat, Nat)>,
    pub unique: bool,
    pub contains_true_key: bool,
}

impl PseudoKeyReport {
    pub fn count(&self) -> Nat {
        let tail = match &self.degenerate {
            Some((lo, hi)) => hi - lo + 1u32,
            None => Nat::zero(),
        };
        Nat::from(self.candidates.len()) + tail
    }

    pub fn contains(&self, q: &Nat) -> bool {
        self.candidates.binary_search_by(|c| c.q.cmp(q)).is_ok()
            || matches!(&self.degenerate, Some((lo, hi)) if lo <= q && q <= hi)
    }
}

/// Rests `w mod q′` qualify when their sum is below `q′` and, once sorted,
/// they form a strictly superincreasing sequence.
pub fn is_pseudokey(w: &[Nat], q: &Nat) -> Option<Vec<Nat>> {
    if q.is_zero() {
        return None;
    }
    let rests: Vec<Nat> = w.iter().map(|x| x % q).collect();
    let sum: Nat = rests.iter().sum();
    if sum >= *q {
        return None;
    }
    let mut sorted = rests.clone();
    sorted.sort();
    is_superincreasing(&sorted).then_some(rests)
}

fn sorted_superincreasing_u64(rests: &[u64], scratch: &mut Vec<u64>) -> bool {
    scratch.clear();
    scratch.extend_from_slice(rests);
    scratch.sort_unstable();
    let mut acc: u128 = 0;
    for (i, &r) in scratch.iter().enumerate() {
        if i > 0 && (r as u128) <= acc {
            return false;
        }
        acc += r as u128;
    }
    true
}

/// Walks `q′` in blocks on which every quotient `⌊wᵢ/q′⌋` is constant. Inside
/// a block the rest sum is affine in `q′`, so the candidates with `Σr < q′`
/// form a suffix of the block and only those are examined.
fn pseudokeys_u64(w: &[u64], q_max: u64) -> Vec<(u64, Vec<u64>)> {
    let mut found = Vec::new();
    let total: u128 = w.iter().map(|&x| x as u128).sum();
    let mut quotients = vec![0u64; w.len()];
    let mut rests = vec![0u64; w.len()];
    let mut scratch = Vec::with_capacity(w.len());
    let mut q = 2u64;
    while q <= q_max {
        let mut hi = q_max;
        let mut ksum: u128 = 0;
        for (k, &wi) in quotients.iter_mut().zip(w) {
            *k = wi / q;
            if *k > 0 {
                hi = hi.min(wi / *k);
            }
            ksum += *k as u128;
        }
        let threshold = total / (ksum + 1);
        let start = if threshold >= q as u128 { threshold + 1 } else { q as u128 };
        if start <= hi as u128 {
            for c in start as u64..=hi {
                for ((r, &wi), &k) in rests.iter_mut().zip(w).zip(&quotients) {
                    *r = wi - k * c;
                }
                if sorted_superincreasing_u64(&rests, &mut scratch) {
                    found.push((c, rests.clone()));
                }
            }
        }
        if hi == u64::MAX {
            break;
        }
        q = hi + 1;
    }
    found
}

/// All pseudo-keys `q′ ∈ [2, q_max]` of the public row.
///
/// `true_key` marks the generating modulus, if known, so the report can say
/// whether it was found.
pub fn find_pseudokeys(key: &PublicKey, q_max: &Nat, true_key: Option<&Nat>) -> PseudoKeyReport {
    let w = key.entries();
    let max_w = w.iter().max().cloned().unwrap_or_default();
    let scan_hi = q_max.min(&max_w).clone();

    let candidates = match (w.iter().map(ToPrimitive::to_u64).collect::<Option<Vec<_>>>(), scan_hi.to_u64()) {
        (Some(small), Some(hi)) => pseudokeys_u64(&small, hi)
            .into_iter()
            .map(|(q, rests)| PseudoKey { q: q.into(), rests: rests.into_iter().map(Nat::from).collect() })
            .collect(),
        _ => {
            let mut out = Vec::new();
            let mut q = Nat::from(2u32);
            while q <= scan_hi {
                if let Some(rests) = is_pseudokey(w, &q) {
                    out.push(PseudoKey { q: q.clone(), rests });
                }
                q += 1u32;
            }
            out
        }
    };

    let degenerate = if *q_max > max_w {
        let mut sorted = w.to_vec();
        sorted.sort();
        let sum: Nat = w.iter().sum();
        let lo = (&max_w + 1u32).max(sum + 1u32);
        (is_superincreasing(&sorted) && lo <= *q_max).then(|| (lo, q_max.clone()))
    } else {
        None
    };

    let mut report = PseudoKeyReport { candidates, degenerate, unique: false, contains_true_key: false };
    report.unique = report.count().is_one();
    report.contains_true_key = true_key.is_some_and(|q| report.contains(q));
    report
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TrialRecord {
    pub trial_index: usize,
    pub seed: u64,
    pub p: u64,
    pub unique: bool,
    pub count: Nat,
    pub contains_true_key: bool,
}

impl fmt::Display for TrialRecord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {} {} {} {}", self.trial_index, self.seed, self.p, self.unique as u8, self.count)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct UniquenessSummary {
    pub s: usize,
    pub p_lo: u64,
    pub p_hi: u64,
    pub records: Vec<TrialRecord>,
}

impl UniquenessSummary {
    pub fn unique_count(&self) -> usize {
        self.records.iter().filter(|r| r.unique).count()
    }

    pub fn fraction(&self) -> f64 {
        self.unique_count() as f64 / self.records.len() as f64
    }

    pub fn summary_line(&self) -> String {
        format!(
            "summary s={} p_range=({},{}) trials={} unique={} fraction={:.4}",
            self.s,
            self.p_lo,
            self.p_hi,
            self.records.len(),
            self.unique_count(),
            self.fraction()
        )
    }
}

/// Generates second-system keys (variant 2) with `p` uniform in the open
/// interval `(p_lo, p_hi)` and records whether the pseudo-key is unique.
pub fn uniqueness_experiment(
    s: usize,
    p_lo: u64,
    p_hi: u64,
    trials: usize,
    seed: u64,
    exec: Execution,
) -> Result<UniquenessSummary> {
    if !(4..=10).contains(&s) {
        return Err(Error::Param(format!("s must be in [4, 10], got {s}")));
    }
    if trials < 100 {
        return Err(Error::Param(format!("need at least 100 trials, got {trials}")));
    }
    if p_hi < p_lo + 2 {
        return Err(Error::Param(format!("({p_lo}, {p_hi}) contains no integer")));
    }
    let records: Result<Vec<TrialRecord>> = exec
        .map_indexed(trials, |i| {
            let trial_seed = child_seed(seed, i as u64);
            let mut rng = RandomSource::new(trial_seed);
            let p = rng.uniform_u64(p_lo + 1, p_hi - 1);
            let params = Params::new(System::Two, s, p).with_variant(Variant::Two).with_seed(rng.next_u64());
            let (public, private) = keygen2(&params)?;
            let q_max = public.entries().iter().max().cloned().unwrap_or_default();
            let report = find_pseudokeys(&public, &q_max, Some(&private.q1));
            Ok(TrialRecord {
                trial_index: i,
                seed: trial_seed,
                p,
                unique: report.unique,
                count: report.count(),
                contains_true_key: report.contains_true_key,
            })
        })
        .into_iter()
        .collect();
    Ok(UniquenessSummary { s, p_lo, p_hi, records: records? })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RestSumMode {
    Exact,
    MonteCarlo { trials: u64 },
}

#[derive(Debug, Clone, PartialEq)]
pub enum RestSumProbability {
    Exact(Rat),
    Estimate { hits: u64, trials: u64 },
}

impl RestSumProbability {
    pub fn value(&self) -> f64 {
        match self {
            RestSumProbability::Exact(r) => r.to_f64().unwrap_or(f64::NAN),
            RestSumProbability::Estimate { hits, trials } => *hits as f64 / *trials as f64,
        }
    }
}

const EXACT_LIMIT: u64 = 100_000_000;

fn check_rest_sum_args(q: u64, s: usize) -> Result<()> {
    if q < 2 {
        return Err(Error::Param(format!("q must be >= 2, got {q}")));
    }
    if s < 1 {
        return Err(Error::Param("s must be >= 1".into()));
    }
    Ok(())
}

/// Counts `c[r]` of the `q^s` rest vectors whose sum is `r`, for `r < q`.
/// `c[r]/q^s` is `P_{q,s,r}`.
pub fn rest_sum_distribution(q: u64, s: usize) -> Result<Vec<Nat>> {
    check_rest_sum_args(q, s)?;
    let mut counts = vec![Nat::one(); q as usize];
    for _ in 1..s {
        let mut acc = Nat::zero();
        for c in counts.iter_mut() {
            acc += &*c;
            *c = acc.clone();
        }
    }
    Ok(counts)
}

/// `P(r₁ + … + r_s ≤ q − 1)` for independent uniform `rᵢ ∈ {0..q−1}`.
pub fn rest_sum_probability(q: u64, s: usize, mode: RestSumMode, rng: &mut RandomSource) -> Result<RestSumProbability> {
    check_rest_sum_args(q, s)?;
    match mode {
        RestSumMode::Exact => {
            let feasible = u32::try_from(s)
                .ok()
                .and_then(|e| q.checked_pow(e))
                .is_some_and(|v| v <= EXACT_LIMIT);
            if !feasible {
                return Err(Error::Mode(format!("exact mode needs q^s <= 10^8 (q={q}, s={s})")));
            }
            let total: Nat = rest_sum_distribution(q, s)?.iter().sum();
            let denom = Nat::from(q).pow(s as u32);
            Ok(RestSumProbability::Exact(Rat::new(total.into(), denom.into())))
        }
        RestSumMode::MonteCarlo { trials } => {
            if trials < 10_000 {
                return Err(Error::Mode(format!("monte carlo needs >= 10^4 trials, got {trials}")));
            }
            let mut hits = 0;
            for _ in 0..trials {
                let mut sum = 0u64;
                for _ in 0..s {
                    sum += rng.uniform_u64(0, q - 1);
                    if sum >= q {
                        break;
                    }
                }
                hits += (sum < q) as u64;
            }
            Ok(RestSumProbability::Estimate { hits, trials })
        }
    }
}

/// `(3/4)^{s−1}`.
pub fn rest_sum_bound(s: usize) -> Rat {
    let e = s.saturating_sub(1) as u32;
    Rat::new(Nat::from(3u32).pow(e).into(), Nat::from(4u32).pow(e).into())
}

/// `binom(n, k)`.
pub fn binomial(n: u64, k: u64) -> Nat {
    if k > n {
        return Nat::zero();
    }
    let k = k.min(n - k);
    let mut acc = Nat::one();
    for i in 0..k {
        acc = acc * (n - i) / (i + 1);
    }
    acc
}

/// `(S_{s,t}, C_{s,t})`: the number of superincreasing sequences of `s`
/// nonnegative integers summing to `t`, and the number of all such sequences.
///
/// Uses `S_{1,t} = 1` and `S_{s,t} = Σ_{u < t/2} S_{s−1,u}`: the last term
/// must exceed the sum `u` of the others, so `u = t − r_s < t/2`.
pub fn count_superincreasing(s: usize, t: u64) -> Result<(Nat, Nat)> {
    if s < 1 {
        return Err(Error::Param("s must be >= 1".into()));
    }
    let total = binomial(t + s as u64 - 1, s as u64 - 1);
    // Highest argument needed at each level, from the top down.
    let mut limits = vec![0i64; s];
    limits[s - 1] = t as i64;
    for k in (0..s - 1).rev() {
        limits[k] = (limits[k + 1] + 1) / 2 - 1;
    }
    if limits[0] < 0 {
        return Ok((Nat::zero(), total));
    }
    let mut level: Vec<Nat> = vec![Nat::one(); limits[0] as usize + 1];
    for k in 1..s {
        let top = limits[k];
        if top < 0 {
            return Ok((Nat::zero(), total));
        }
        let mut prefix = Vec::with_capacity(level.len() + 1);
        prefix.push(Nat::zero());
        for v in &level {
            let next = prefix.last().expect("seeded") + v;
            prefix.push(next);
        }
        level = (0..=top as usize)
            .map(|tt| {
                let cut = (tt as u64).div_ceil(2) as usize;
                prefix[cut.min(prefix.len() - 1)].clone()
            })
            .collect();
    }
    Ok((level[t as usize].clone(), total))
}

/// Direct enumeration of superincreasing sequences, for small inputs.
pub fn count_superincreasing_exhaustive(s: usize, t: u64) -> Result<(Nat, Nat)> {
    if s < 1 {
        return Err(Error::Param("s must be >= 1".into()));
    }
    let total = binomial(t + s as u64 - 1, s as u64 - 1);
    if total > EXACT_LIMIT.to_biguint().expect("fits") {
        return Err(Error::Mode(format!("C({}, {}) exceeds 10^8", t + s as u64 - 1, s - 1)));
    }
    fn walk(left: usize, prefix_sum: u64, first: bool, remaining: u64, hits: &mut u64) {
        if left == 1 {
            if first || remaining > prefix_sum {
                *hits += 1;
            }
            return;
        }
        let lo = if first { 0 } else { prefix_sum + 1 };
        for r in lo..=remaining {
            walk(left - 1, prefix_sum + r, false, remaining - r, hits);
        }
    }
    let mut hits = 0;
    walk(s, 0, true, t, &mut hits);
    Ok((Nat::from(hits), total))
}

/// Exact `S/C`.
pub fn superincreasing_ratio(s: usize, t: u64) -> Result<Rat> {
    let (sc, c) = count_superincreasing(s, t)?;
    Ok(Rat::new(sc.into(), c.into()))
}
