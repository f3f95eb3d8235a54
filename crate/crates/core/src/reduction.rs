//! Factoring a semiprime with a pseudo-key oracle.
//!
//! With `wᵢ = n + rᵢ` for a fixed superincreasing `r`, any `q′` leaving rests
//! `rᵢ` divides `n`. Adding one random entry `w_s ∈ (n/2, n)` whose rest must
//! stay in `[0, ⌊n/2⌋]` rules out `q′ = n`.

use std::fmt;
use std::sync::atomic::{AtomicUsize, Ordering};

use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::numeric::{Nat, RandomSource};
use crate::sis::is_superincreasing;

/// Find `q′` with `wᵢ mod q′ = rᵢ` for `i < s` and `w_s mod q′ ∈ [a, b]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Problem4Instance {
    w: Vec<Nat>,
    r: Vec<Nat>,
    a: Nat,
    b: Nat,
}

impl Problem4Instance {
    pub fn new(w: Vec<Nat>, r: Vec<Nat>, a: Nat, b: Nat) -> Result<Self> {
        if w.is_empty() || r.len() + 1 != w.len() {
            return Err(Error::Shape(format!("{} entries need {} rests, got {}", w.len(), w.len().saturating_sub(1), r.len())));
        }
        if r.windows(2).any(|p| p[0] >= p[1]) {
            return Err(Error::Param("prescribed rests must be strictly increasing".into()));
        }
        if a > b {
            return Err(Error::Param(format!("empty range [{a}, {b}]")));
        }
        Ok(Problem4Instance { w, r, a, b })
    }

    pub fn w(&self) -> &[Nat] {
        &self.w
    }

    pub fn r(&self) -> &[Nat] {
        &self.r
    }

    pub fn range(&self) -> (&Nat, &Nat) {
        (&self.a, &self.b)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct OracleAnswer {
    pub q: Option<Nat>,
    /// Candidates examined before returning.
    pub examined: u64,
    pub cancelled: bool,
}

pub trait Problem4Oracle: Sync {
    /// Searches `[2, q_max]`, polling `cancel` periodically.
    fn solve(&self, inst: &Problem4Instance, q_max: &Nat, cancel: &(dyn Fn() -> bool + Sync)) -> OracleAnswer;
}

/// Exhaustive ascending scan.
///
/// With `pseudo_key` set (the default), a candidate must also be a pseudo-key:
/// all rests sum below `q′` and form a superincreasing sequence once sorted.
/// Without it only the prescribed-rest and range conditions are checked.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BruteForceOracle {
    pub pseudo_key: bool,
}

impl Default for BruteForceOracle {
    fn default() -> Self {
        BruteForceOracle { pseudo_key: true }
    }
}

const POLL_EVERY: u64 = 4096;

impl BruteForceOracle {
    pub fn literal() -> Self {
        BruteForceOracle { pseudo_key: false }
    }

    fn accept_rests(&self, rests: &mut [u64], q: u64) -> bool {
        if !self.pseudo_key {
            return true;
        }
        let sum: u128 = rests.iter().map(|&r| r as u128).sum();
        if sum >= q as u128 {
            return false;
        }
        rests.sort_unstable();
        let mut acc: u128 = 0;
        for (i, &r) in rests.iter().enumerate() {
            if i > 0 && r as u128 <= acc {
                return false;
            }
            acc += r as u128;
        }
        true
    }

    fn solve_u64(&self, w: &[u64], r: &[u64], a: u64, b: u64, q_max: u64, cancel: &(dyn Fn() -> bool + Sync)) -> OracleAnswer {
        let s = w.len();
        let mut rests = vec![0u64; s];
        let mut examined = 0u64;
        for q in 2..=q_max {
            examined += 1;
            if examined % POLL_EVERY == 0 && cancel() {
                return OracleAnswer { q: None, examined, cancelled: true };
            }
            if w[..s - 1].iter().zip(r).any(|(&wi, &ri)| wi % q != ri) {
                continue;
            }
            let last = w[s - 1] % q;
            if last < a || last > b {
                continue;
            }
            rests[..s - 1].copy_from_slice(r);
            rests[s - 1] = last;
            if self.accept_rests(&mut rests, q) {
                return OracleAnswer { q: Some(q.into()), examined, cancelled: false };
            }
        }
        OracleAnswer { q: None, examined, cancelled: false }
    }

    fn solve_big(&self, inst: &Problem4Instance, q_max: &Nat, cancel: &(dyn Fn() -> bool + Sync)) -> OracleAnswer {
        let s = inst.w.len();
        let mut examined = 0u64;
        let mut q = Nat::from(2u32);
        while q <= *q_max {
            examined += 1;
            if examined % POLL_EVERY == 0 && cancel() {
                return OracleAnswer { q: None, examined, cancelled: true };
            }
            let prescribed = inst.w[..s - 1].iter().zip(&inst.r).all(|(wi, ri)| wi % &q == *ri);
            let last = &inst.w[s - 1] % &q;
            if prescribed && inst.a <= last && last <= inst.b {
                let ok = !self.pseudo_key || {
                    let mut rests: Vec<Nat> = inst.r.iter().cloned().chain([last]).collect();
                    let sum: Nat = rests.iter().sum();
                    rests.sort();
                    sum < q && is_superincreasing(&rests)
                };
                if ok {
                    return OracleAnswer { q: Some(q), examined, cancelled: false };
                }
            }
            q += 1u32;
        }
        OracleAnswer { q: None, examined, cancelled: false }
    }
}

impl Problem4Oracle for BruteForceOracle {
    fn solve(&self, inst: &Problem4Instance, q_max: &Nat, cancel: &(dyn Fn() -> bool + Sync)) -> OracleAnswer {
        let small = |v: &[Nat]| v.iter().map(ToPrimitive::to_u64).collect::<Option<Vec<u64>>>();
        match (small(&inst.w), small(&inst.r), inst.a.to_u64(), inst.b.to_u64(), q_max.to_u64()) {
            (Some(w), Some(r), Some(a), Some(b), Some(hi)) if hi < u64::MAX => self.solve_u64(&w, &r, a, b, hi, cancel),
            _ => self.solve_big(inst, q_max, cancel),
        }
    }
}

/// Runs the oracle without cancellation.
pub fn problem4_oracle(oracle: &dyn Problem4Oracle, inst: &Problem4Instance, q_max: &Nat) -> Result<Option<Nat>> {
    if *q_max < Nat::from(2u32) {
        return Err(Error::Param(format!("q_max must be >= 2, got {q_max}")));
    }
    Ok(oracle.solve(inst, q_max, &|| false).q)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stage {
    TrialDivision,
    Oracle,
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Stage::TrialDivision => "trial_division",
            Stage::Oracle => "oracle",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReductionReport {
    pub n: Nat,
    pub factor_found: Option<Nat>,
    pub stage: Stage,
    /// Index of the subproblem that produced the factor.
    pub subproblem_index: Option<usize>,
    pub subproblems: u32,
    /// Candidates examined across trial division and every oracle call.
    pub wall_steps: u64,
}

impl fmt::Display for ReductionReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let factor = self.factor_found.as_ref().map_or_else(|| "none".to_string(), Nat::to_string);
        write!(f, "n={} factor={} stage={} subproblems={}", self.n, factor, self.stage, self.subproblems)
    }
}

/// Smallest `ρ` with `(2/3)^ρ < η`.
pub fn subproblem_count(eta: f64) -> Result<u32> {
    if !(eta > 0.0 && eta < 1.0) {
        return Err(Error::Param(format!("η must be in (0, 1), got {eta}")));
    }
    let mut rho = 0u32;
    let mut pow = 1.0f64;
    while pow >= eta {
        pow *= 2.0 / 3.0;
        rho += 1;
    }
    Ok(rho)
}

/// Smallest divisor of `n` in `[2, bound]`, with the number of trials made.
pub fn trial_divide(n: &Nat, bound: &Nat) -> (Option<Nat>, u64) {
    let mut d = Nat::from(2u32);
    let mut tried = 0;
    while d <= *bound && &d * &d <= *n {
        tried += 1;
        if n.is_multiple_of(&d) {
            return (Some(d), tried);
        }
        d += 1u32;
    }
    (None, tried)
}

/// Prescribed rests `1, 2, 4, …, 2^{s−2}`.
pub fn power_rests(s: usize) -> Vec<Nat> {
    (0..s.saturating_sub(1)).map(|i| Nat::one() << i).collect()
}

/// Tries to split `n` by trial division up to `3Σrᵢ`, then by solving `ρ`
/// random Problem-4 instances, stopping at the first success.
pub fn factor_via_problem4(
    n: &Nat,
    s: usize,
    eta: f64,
    rng: &mut RandomSource,
    oracle: &dyn Problem4Oracle,
    exec: Execution,
) -> Result<ReductionReport> {
    if *n < Nat::from(4u32) {
        return Err(Error::Param(format!("n must be >= 4, got {n}")));
    }
    if s < 2 {
        return Err(Error::Param(format!("s must be >= 2, got {s}")));
    }
    let rho = subproblem_count(eta)?;
    let r = power_rests(s);
    let bound: Nat = r.iter().sum::<Nat>() * 3u32;
    let (small, tried) = trial_divide(n, &bound);
    if let Some(d) = small {
        return Ok(ReductionReport {
            n: n.clone(),
            factor_found: Some(d),
            stage: Stage::TrialDivision,
            subproblem_index: None,
            subproblems: 0,
            wall_steps: tried,
        });
    }

    let half = n >> 1u32;
    let lo = &half + 1u32;
    let hi = n - 1u32;
    let base: Vec<Nat> = r.iter().map(|ri| n + ri).collect();
    let instances: Vec<Problem4Instance> = (0..rho)
        .map(|_| {
            let mut w = base.clone();
            w.push(rng.uniform_nat(&lo, &hi));
            Problem4Instance::new(w, r.clone(), Nat::zero(), half.clone())
        })
        .collect::<Result<_>>()?;

    let best = AtomicUsize::new(usize::MAX);
    let answers = exec.map_indexed(instances.len(), |k| {
        let cancel = || best.load(Ordering::Relaxed) < k;
        let answer = oracle.solve(&instances[k], n, &cancel);
        if answer.q.is_some() {
            best.fetch_min(k, Ordering::Relaxed);
        }
        answer
    });

    let wall_steps = tried + answers.iter().map(|a| a.examined).sum::<u64>();
    for (k, answer) in answers.iter().enumerate() {
        if let Some(q) = &answer.q {
            if q.is_one() || q >= n || !n.is_multiple_of(q) {
                return Err(Error::Invariant(format!("oracle answer {q} on subproblem {k} is not a proper divisor of {n}")));
            }
            return Ok(ReductionReport {
                n: n.clone(),
                factor_found: Some(q.clone()),
                stage: Stage::Oracle,
                subproblem_index: Some(k),
                subproblems: rho,
                wall_steps,
            });
        }
    }
    Ok(ReductionReport { n: n.clone(), factor_found: None, stage: Stage::Oracle, subproblem_index: None, subproblems: rho, wall_steps })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn nats(v: &[u64]) -> Vec<Nat> {
        v.iter().map(|&x| Nat::from(x)).collect()
    }

    #[test]
    fn literal_oracle_small_cases() {
        let oracle = BruteForceOracle::literal();
        let inst = Problem4Instance::new(nats(&[17, 23]), nats(&[2]), 0u32.into(), 3u32.into()).unwrap();
        // 17 mod 3 = 2 and 23 mod 3 = 2, so the ascending scan stops at 3.
        assert_eq!(problem4_oracle(&oracle, &inst, &23u32.into()).unwrap(), Some(3u32.into()));
        let inst = Problem4Instance::new(nats(&[6]), vec![], 0u32.into(), 0u32.into()).unwrap();
        assert_eq!(problem4_oracle(&oracle, &inst, &6u32.into()).unwrap(), Some(2u32.into()));
        let inst = Problem4Instance::new(nats(&[5, 7]), nats(&[9]), 0u32.into(), 10u32.into()).unwrap();
        assert_eq!(problem4_oracle(&oracle, &inst, &7u32.into()).unwrap(), None);
    }

    #[test]
    fn pseudo_key_oracle_small_cases() {
        let oracle = BruteForceOracle::default();
        // Divisors of 15 leave rest 2 on 17; rests (2,2) at 3 and (2,3) at 5
        // both sum to at least the modulus, and 15 leaves 8 on 23.
        let inst = Problem4Instance::new(nats(&[17, 23]), nats(&[2]), 0u32.into(), 3u32.into()).unwrap();
        assert_eq!(problem4_oracle(&oracle, &inst, &23u32.into()).unwrap(), None);
        let inst = Problem4Instance::new(nats(&[6]), vec![], 0u32.into(), 0u32.into()).unwrap();
        assert_eq!(problem4_oracle(&oracle, &inst, &6u32.into()).unwrap(), Some(2u32.into()));
        // 101·103 + (1, 2) and a last entry leaving rest 40 at 101.
        let n = 10403u64;
        let inst = Problem4Instance::new(nats(&[n + 1, n + 2, 101 * 60 + 40]), nats(&[1, 2]), 0u32.into(), (n / 2).into()).unwrap();
        assert_eq!(problem4_oracle(&oracle, &inst, &n.into()).unwrap(), Some(101u32.into()));
    }

    #[test]
    fn big_path_agrees_with_small_path() {
        let oracle = BruteForceOracle::default();
        let inst = Problem4Instance::new(nats(&[10404, 10405, 6100]), nats(&[1, 2]), 0u32.into(), 5201u32.into()).unwrap();
        let fast = oracle.solve(&inst, &10403u32.into(), &|| false);
        let slow = oracle.solve_big(&inst, &10403u32.into(), &|| false);
        assert_eq!(fast, slow);
    }

    #[test]
    fn instance_validation() {
        assert!(Problem4Instance::new(nats(&[1, 2]), vec![], 0u32.into(), 1u32.into()).is_err());
        assert!(Problem4Instance::new(nats(&[1, 2, 3]), nats(&[2, 2]), 0u32.into(), 1u32.into()).is_err());
        assert!(Problem4Instance::new(nats(&[1]), vec![], 2u32.into(), 1u32.into()).is_err());
    }

    #[test]
    fn helper_values() {
        assert_eq!(subproblem_count(0.05).unwrap(), 8);
        assert_eq!(subproblem_count(0.5).unwrap(), 2);
        assert!(subproblem_count(1.0).is_err());
        assert_eq!(power_rests(4), nats(&[1, 2, 4]));
        assert_eq!(trial_divide(&15u32.into(), &9u32.into()).0, Some(3u32.into()));
        assert_eq!(trial_divide(&10403u32.into(), &9u32.into()).0, None);
    }

    #[test]
    fn small_semiprimes() {
        let oracle = BruteForceOracle::default();
        let mut rng = RandomSource::new(3);
        let rep = factor_via_problem4(&15u32.into(), 3, 0.01, &mut rng, &oracle, Execution::Sequential).unwrap();
        assert_eq!(rep.stage, Stage::TrialDivision);
        assert_eq!(rep.factor_found, Some(3u32.into()));
        let rep = factor_via_problem4(&4u32.into(), 3, 0.05, &mut rng, &oracle, Execution::Sequential).unwrap();
        assert_eq!(rep.factor_found, Some(2u32.into()));
        let rep = factor_via_problem4(&10403u32.into(), 3, 0.05, &mut rng, &oracle, Execution::Parallel).unwrap();
        assert_eq!(rep.stage, Stage::Oracle);
        let f = rep.factor_found.unwrap();
        assert!(f == Nat::from(101u32) || f == Nat::from(103u32));
        assert!(factor_via_problem4(&3u32.into(), 3, 0.05, &mut rng, &oracle, Execution::Sequential).is_err());
    }

    #[test]
    fn prime_input_reports_none() {
        let mut rng = RandomSource::new(8);
        let rep = factor_via_problem4(&10007u32.into(), 3, 0.05, &mut rng, &BruteForceOracle::default(), Execution::Sequential).unwrap();
        assert_eq!(rep.factor_found, None);
        assert_eq!(rep.subproblems, 8);
        assert_eq!(rep.to_string(), "n=10007 factor=none stage=oracle subproblems=8");
    }

    #[test]
    fn execution_modes_agree() {
        let n = Nat::from(211u32 * 307);
        for seed in 0..20 {
            let a = factor_via_problem4(&n, 4, 0.05, &mut RandomSource::new(seed), &BruteForceOracle::default(), Execution::Sequential).unwrap();
            let b = factor_via_problem4(&n, 4, 0.05, &mut RandomSource::new(seed), &BruteForceOracle::default(), Execution::Parallel).unwrap();
            assert_eq!(a.factor_found, b.factor_found);
            assert_eq!(a.subproblem_index, b.subproblem_index);
        }
    }
}
