//! Exact LLL reduction and the two lattice attacks on knapsack ciphertexts.

use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::numeric::{child_seed, dot_digits, nat_to_int, pow2, Int, IntMatrix, Nat, RandomSource, Rat};
use crate::systems::{Message, PublicKey};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LatticeBasis {
    rows: Vec<Vec<Rat>>,
}

impl LatticeBasis {
    /// Rows must share one length `m ≥ n`. Independence is checked by
    /// [`lll_reduce`].
    pub fn new(rows: Vec<Vec<Rat>>) -> Result<Self> {
        let n = rows.len();
        if n == 0 {
            return Err(Error::Shape("empty basis".into()));
        }
        let m = rows[0].len();
        if rows.iter().any(|r| r.len() != m) {
            return Err(Error::Shape("basis rows differ in length".into()));
        }
        if m < n {
            return Err(Error::Shape(format!("{n} rows in ambient dimension {m}")));
        }
        Ok(LatticeBasis { rows })
    }

    pub fn from_int_rows(rows: &[Vec<Int>]) -> Result<Self> {
        Self::new(rows.iter().map(|r| r.iter().map(|v| Rat::from_integer(v.clone())).collect()).collect())
    }

    pub fn rows(&self) -> &[Vec<Rat>] {
        &self.rows
    }

    pub fn dim(&self) -> usize {
        self.rows.len()
    }

    pub fn ambient_dim(&self) -> usize {
        self.rows[0].len()
    }

    pub fn scale(&self, rho: &Rat) -> LatticeBasis {
        LatticeBasis { rows: self.rows.iter().map(|r| r.iter().map(|v| v * rho).collect()).collect() }
    }

    /// Squared Euclidean norm of row `i`.
    pub fn norm2(&self, i: usize) -> Rat {
        dot_rat(&self.rows[i], &self.rows[i])
    }

    /// `T·B` for an integer matrix `T`.
    pub fn transform_by(&self, t: &IntMatrix) -> Result<LatticeBasis> {
        if t.cols() != self.dim() {
            return Err(Error::Shape(format!("transform has {} columns, basis has {} rows", t.cols(), self.dim())));
        }
        let m = self.ambient_dim();
        let rows = (0..t.rows())
            .map(|i| {
                (0..m)
                    .map(|j| {
                        (0..t.cols()).fold(Rat::zero(), |acc, k| acc + &self.rows[k][j] * Rat::from_integer(t.get(i, k).clone()))
                    })
                    .collect()
            })
            .collect();
        LatticeBasis::new(rows)
    }
}

fn dot_rat(a: &[Rat], b: &[Rat]) -> Rat {
    a.iter().zip(b).fold(Rat::zero(), |acc, (x, y)| acc + x * y)
}

fn dot_i(a: &[Int], b: &[Int]) -> Int {
    a.iter().zip(b).fold(Int::zero(), |acc, (x, y)| acc + x * y)
}

/// Gram–Schmidt coefficients `μ` (row-major, strictly lower part used) and
/// squared lengths `Bᵢ = ‖bᵢ*‖²`.
pub fn gram_schmidt(basis: &LatticeBasis) -> (Vec<Vec<Rat>>, Vec<Rat>) {
    let n = basis.dim();
    let mut star: Vec<Vec<Rat>> = Vec::with_capacity(n);
    let mut mu = vec![vec![Rat::zero(); n]; n];
    let mut b = Vec::with_capacity(n);
    for i in 0..n {
        let mut v = basis.rows[i].clone();
        for j in 0..i {
            if b[j] == Rat::zero() {
                continue;
            }
            let c = dot_rat(&basis.rows[i], &star[j]) / &b[j];
            for (vk, sk) in v.iter_mut().zip(&star[j]) {
                *vk -= &c * sk;
            }
            mu[i][j] = c;
        }
        b.push(dot_rat(&v, &v));
        star.push(v);
    }
    (mu, b)
}

/// Default reduction parameter `3/4`.
pub fn default_delta() -> Rat {
    Rat::new(3.into(), 4.into())
}

/// Size reduction `|μᵢⱼ| ≤ 1/2` and the Lovász condition for every
/// consecutive pair, recomputed from scratch.
pub fn is_lll_reduced(basis: &LatticeBasis, delta: &Rat) -> bool {
    let (mu, b) = gram_schmidt(basis);
    let half = Rat::new(1.into(), 2.into());
    for i in 0..basis.dim() {
        for j in 0..i {
            if mu[i][j].abs() > half {
                return false;
            }
        }
    }
    (1..basis.dim()).all(|k| {
        let m = &mu[k][k - 1];
        b[k] >= (delta - m * m) * &b[k - 1]
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LllResult {
    pub reduced: LatticeBasis,
    pub transform: IntMatrix,
    /// Iterations of the main loop.
    pub steps: u64,
    pub delta: Rat,
}

/// `⌊x + 1/2⌋`.
fn round_half_up(x: &Rat) -> Int {
    (x + Rat::new(1.into(), 2.into())).floor().to_integer()
}

/// LLL on integer rows with exact rational Gram–Schmidt data, tracking the
/// unimodular transform.
fn lll_integer(mut b: Vec<Vec<Int>>, delta: &Rat) -> Result<(Vec<Vec<Int>>, IntMatrix, u64)> {
    let n = b.len();
    let mut h = IntMatrix::identity(n);
    let mut mu = vec![vec![Rat::zero(); n]; n];
    let mut big_b: Vec<Rat> = Vec::with_capacity(n);
    // Gram–Schmidt from integer inner products: bᵢ* = bᵢ − Σ μᵢⱼ bⱼ*.
    for i in 0..n {
        for j in 0..i {
            let mut acc = Rat::from_integer(dot_i(&b[i], &b[j]));
            for k in 0..j {
                acc -= &mu[j][k] * &mu[i][k] * &big_b[k];
            }
            mu[i][j] = acc / &big_b[j];
        }
        let mut bi = Rat::from_integer(dot_i(&b[i], &b[i]));
        for k in 0..i {
            bi -= &mu[i][k] * &mu[i][k] * &big_b[k];
        }
        if bi.is_zero() {
            return Err(Error::Rank);
        }
        big_b.push(bi);
    }

    let half = Rat::new(1.into(), 2.into());
    let red = |k: usize, l: usize, b: &mut Vec<Vec<Int>>, h: &mut IntMatrix, mu: &mut Vec<Vec<Rat>>| {
        if mu[k][l].abs() > half {
            let r = round_half_up(&mu[k][l]);
            let (bl, hl) = (b[l].clone(), h.row(l).to_vec());
            for (x, y) in b[k].iter_mut().zip(&bl) {
                *x -= &r * y;
            }
            for (x, y) in h.row_mut(k).iter_mut().zip(&hl) {
                *x -= &r * y;
            }
            let rr = Rat::from_integer(r);
            for j in 0..l {
                let t = &rr * &mu[l][j];
                mu[k][j] -= t;
            }
            mu[k][l] -= rr;
        }
    };

    let mut steps = 0u64;
    let mut k = 1usize;
    while k < n {
        steps += 1;
        red(k, k - 1, &mut b, &mut h, &mut mu);
        let m = mu[k][k - 1].clone();
        if big_b[k] < (delta - &m * &m) * &big_b[k - 1] {
            b.swap(k, k - 1);
            h.swap_rows(k, k - 1);
            for j in 0..k - 1 {
                let t = mu[k][j].clone();
                mu[k][j] = std::mem::replace(&mut mu[k - 1][j], t);
            }
            let new_b = &big_b[k] + &m * &m * &big_b[k - 1];
            mu[k][k - 1] = &m * &big_b[k - 1] / &new_b;
            big_b[k] = &big_b[k - 1] * &big_b[k] / &new_b;
            big_b[k - 1] = new_b;
            for i in k + 1..n {
                let t = mu[i][k].clone();
                mu[i][k] = &mu[i][k - 1] - &m * &t;
                mu[i][k - 1] = t + &mu[k][k - 1] * &mu[i][k];
            }
            k = (k - 1).max(1);
        } else {
            for l in (0..k - 1).rev() {
                red(k, l, &mut b, &mut h, &mut mu);
            }
            k += 1;
        }
    }
    Ok((b, h, steps))
}

/// LLL reduction with exact arithmetic.
///
/// The rational input is cleared of denominators first; every decision of
/// the algorithm is invariant under positive scaling, so steps and transform
/// are those of the input itself.
pub fn lll_reduce(basis: &LatticeBasis, delta: &Rat) -> Result<LllResult> {
    let quarter = Rat::new(1.into(), 4.into());
    if *delta <= quarter || *delta >= Rat::one() {
        return Err(Error::Param(format!("δ must be in (1/4, 1), got {delta}")));
    }
    let lcm = basis
        .rows
        .iter()
        .flatten()
        .fold(Int::one(), |acc, v| acc.lcm(v.denom()));
    let ints: Vec<Vec<Int>> = basis
        .rows
        .iter()
        .map(|r| r.iter().map(|v| (v * Rat::from_integer(lcm.clone())).to_integer()).collect())
        .collect();
    let (_, transform, steps) = lll_integer(ints, delta)?;
    let reduced = basis.transform_by(&transform)?;
    Ok(LllResult { reduced, transform, steps, delta: delta.clone() })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AttackOutcome {
    /// The recovered message, or `None` on failure.
    pub result: Option<Message>,
    pub lll_steps: u64,
    pub which_row: Option<usize>,
    /// Transform found by LLL; `None` when no reduction was run.
    pub transform: Option<IntMatrix>,
}

impl AttackOutcome {
    pub fn succeeded(&self) -> bool {
        self.result.is_some()
    }
}

/// `λ = min(wᵢ)/2^{2s}`.
pub fn attack_lambda(key: &PublicKey) -> Rat {
    let s = key.dim() as u64;
    let min = key.entries().iter().min().cloned().unwrap_or_default();
    Rat::new(nat_to_int(&min), nat_to_int(&pow2(2 * s)))
}

/// Identity on the first `s` diagonal entries, zero elsewhere.
pub fn attack1_pattern(s: usize) -> Vec<Vec<Rat>> {
    (0..=s)
        .map(|i| (0..=s).map(|j| if i == j && i < s { Rat::one() } else { Rat::zero() }).collect())
        .collect()
}

/// `k/2^{20}` entries with `k` uniform in `[−2^{20}, 2^{20}]`.
pub fn random_dyadic_matrix(n: usize, rng: &mut RandomSource) -> Vec<Vec<Rat>> {
    let scale = 1i64 << 20;
    (0..n)
        .map(|_| (0..n).map(|_| Rat::new(rng.uniform_i64(-scale, scale).into(), scale.into())).collect())
        .collect()
}

fn zero_outcome(s: usize) -> AttackOutcome {
    AttackOutcome { result: Some(Message::zeros(s)), lll_steps: 0, which_row: None, transform: None }
}

/// Reads a 0/1 message from the first `s` transform coefficients of some row.
fn read_transform(key: &PublicKey, ct: &Nat, lll: LllResult) -> AttackOutcome {
    let s = key.dim();
    let one = Int::one();
    for i in 0..lll.transform.rows() {
        let row = &lll.transform.row(i)[..s];
        for sign in [one.clone(), -one.clone()] {
            let digits: Option<Vec<u32>> = row
                .iter()
                .map(|c| {
                    let v = c * &sign;
                    if v.is_zero() {
                        Some(0)
                    } else if v.is_one() {
                        Some(1)
                    } else {
                        None
                    }
                })
                .collect();
            if let Some(d) = digits {
                if dot_digits(key.entries(), &d).is_ok_and(|v| v == *ct) {
                    return AttackOutcome {
                        result: Some(Message(d)),
                        lll_steps: lll.steps,
                        which_row: Some(i),
                        transform: Some(lll.transform),
                    };
                }
            }
        }
    }
    AttackOutcome { result: None, lll_steps: lll.steps, which_row: None, transform: Some(lll.transform) }
}

fn attack_basis(key: &PublicKey, ct: &Nat, pert: &[Vec<Rat>]) -> Result<LatticeBasis> {
    let s = key.dim();
    let lambda = attack_lambda(key);
    let rows = (0..=s)
        .map(|i| {
            (0..=s)
                .map(|j| {
                    let x = if j == s {
                        nat_to_int(if i < s { &key.entries()[i] } else { ct })
                    } else {
                        Int::zero()
                    };
                    Rat::from_integer(x) + &lambda * &pert[i][j]
                })
                .collect()
        })
        .collect();
    LatticeBasis::new(rows)
}

/// Lattice with `λ` on the first `s` diagonal entries and last column
/// `(w, N)`.
pub fn attack1(key: &PublicKey, ct: &Nat) -> Result<AttackOutcome> {
    if ct.is_zero() {
        return Ok(zero_outcome(key.dim()));
    }
    let basis = attack_basis(key, ct, &attack1_pattern(key.dim()))?;
    let lll = lll_reduce(&basis, &default_delta())?;
    Ok(read_transform(key, ct, lll))
}

/// Lattice `X + λM` for a perturbation `M` with entries in `[−1, 1]`.
pub fn attack2(key: &PublicKey, ct: &Nat, pert: &[Vec<Rat>]) -> Result<AttackOutcome> {
    let n = key.dim() + 1;
    if pert.len() != n || pert.iter().any(|r| r.len() != n) {
        return Err(Error::Shape(format!("perturbation must be {n}x{n}")));
    }
    if pert.iter().flatten().any(|v| v.abs() > Rat::one()) {
        return Err(Error::Param("perturbation entries must lie in [-1, 1]".into()));
    }
    if ct.is_zero() {
        return Ok(zero_outcome(key.dim()));
    }
    let basis = attack_basis(key, ct, pert)?;
    let lll = lll_reduce(&basis, &default_delta())?;
    Ok(read_transform(key, ct, lll))
}

#[derive(Debug, Clone, PartialEq)]
pub struct StabilityRow {
    pub q: Nat,
    /// `‖ε‖₁ / q`.
    pub ratio: f64,
    pub samples: usize,
    pub steps_match: usize,
    pub result_match: usize,
    pub transform_match: usize,
    pub errors: usize,
}

impl StabilityRow {
    pub fn steps_fraction(&self) -> f64 {
        self.steps_match as f64 / self.samples as f64
    }

    pub fn result_fraction(&self) -> f64 {
        self.result_match as f64 / self.samples as f64
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
struct PairOutcome {
    steps: bool,
    result: bool,
    transform: bool,
}

/// Runs attack 2 on `N₀ = x₀·m` and on `N₁ = x₁·m` with `x₁ = q·x₀ + ε`,
/// using the same perturbation for both, and counts agreements per `q`.
pub fn stability_experiment(
    m: &Message,
    x0: &[Nat],
    q_list: &[Nat],
    eps: &[Nat],
    samples: usize,
    seed: u64,
    exec: Execution,
) -> Result<Vec<StabilityRow>> {
    let s = x0.len();
    if eps.len() != s || m.len() != s {
        return Err(Error::Shape(format!("x₀ has {s} entries, ε {}, m {}", eps.len(), m.len())));
    }
    if x0.iter().any(Zero::is_zero) {
        return Err(Error::Param("x₀ entries must be positive".into()));
    }
    if q_list.iter().any(Zero::is_zero) {
        return Err(Error::Param("q must be positive".into()));
    }
    let key0 = PublicKey::new(x0.to_vec(), 2)?;
    let n0 = dot_digits(x0, m.digits())?;
    let perts: Vec<Vec<Vec<Rat>>> = (0..samples)
        .map(|j| random_dyadic_matrix(s + 1, &mut RandomSource::new(child_seed(seed, j as u64))))
        .collect();
    let keys1: Vec<(PublicKey, Nat)> = q_list
        .iter()
        .map(|q| {
            let x1: Vec<Nat> = x0.iter().zip(eps).map(|(x, e)| q * x + e).collect();
            let n1 = dot_digits(&x1, m.digits())?;
            Ok((PublicKey::new(x1, 2)?, n1))
        })
        .collect::<Result<_>>()?;
    let base: Vec<Result<AttackOutcome>> = exec.map_slice(&perts, |pert| attack2(&key0, &n0, pert));
    let pairs: Vec<Option<PairOutcome>> = exec.map_indexed(samples * q_list.len(), |idx| {
        let (qi, j) = (idx / samples, idx % samples);
        let a = base[j].as_ref().ok()?;
        let (key1, n1) = &keys1[qi];
        let b = attack2(key1, n1, &perts[j]).ok()?;
        Some(PairOutcome {
            steps: a.lll_steps == b.lll_steps,
            result: a.result == b.result,
            transform: a.transform == b.transform,
        })
    });
    let eps_norm: Nat = eps.iter().sum();
    Ok(q_list
        .iter()
        .enumerate()
        .map(|(qi, q)| {
            let cells = &pairs[qi * samples..(qi + 1) * samples];
            let count = |f: fn(&PairOutcome) -> bool| cells.iter().flatten().filter(|c| f(c)).count();
            StabilityRow {
                q: q.clone(),
                ratio: Rat::new(nat_to_int(&eps_norm), nat_to_int(q)).to_f64().unwrap_or(f64::NAN),
                samples,
                steps_match: count(|c| c.steps),
                result_match: count(|c| c.result),
                transform_match: count(|c| c.transform),
                errors: cells.iter().filter(|c| c.is_none()).count(),
            }
        })
        .collect())
}
