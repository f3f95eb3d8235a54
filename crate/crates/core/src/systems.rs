//! Key generation, encryption and decryption for the three knapsack systems.
//!
//! All three publish a row `x` obtained from a random row `x₀` by one or more
//! steps `xᵢ = qᵢ·xᵢ₋₁ + pᵢ·εᵢ` with small `εᵢ`. A ciphertext is `x·m`.
//! Decryption peels the steps off by Euclidean division and then inverts the
//! secret `ε` structure.

use std::fmt;

use num_integer::Integer;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::numeric::{dot_digits, nat_to_int, pow2, Int, Nat, RandomSource};
use crate::sis::{
    as_nat_message, decode_superincreasing, gen_epsilon_matrix, gen_superincreasing,
    zero_weight_index, EpsilonMatrix, SuperincreasingRow,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum System {
    One,
    Two,
    Three,
}

impl System {
    pub fn id(self) -> u8 {
        match self {
            System::One => 1,
            System::Two => 2,
            System::Three => 3,
        }
    }

    pub fn from_id(id: u8) -> Result<Self> {
        match id {
            1 => Ok(System::One),
            2 => Ok(System::Two),
            3 => Ok(System::Three),
            other => Err(Error::Param(format!("unknown system {other}"))),
        }
    }
}

impl fmt::Display for System {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.id())
    }
}

/// Which range `x₀` is drawn from.
///
/// | system | variant 1  | variant 2 |
/// |--------|------------|-----------|
/// | 1      | `[0, 2^s]` | `[0, s⁵]` |
/// | 2      | `[0, p]`   | `[0, 2^s]`|
/// | 3      | `[0, p]`   | `[0, 2^s]`|
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum Variant {
    #[default]
    One,
    Two,
}

impl Variant {
    pub fn id(self) -> u8 {
        match self {
            Variant::One => 1,
            Variant::Two => 2,
        }
    }

    pub fn from_id(id: u8) -> Result<Self> {
        match id {
            1 => Ok(Variant::One),
            2 => Ok(Variant::Two),
            other => Err(Error::Param(format!("unknown variant {other}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Params {
    pub system: System,
    pub s: usize,
    pub p: Nat,
    /// Message alphabet size `M`; digits live in `0..M`.
    pub alphabet: u32,
    pub variant: Variant,
    pub seed: u64,
}

impl Params {
    pub fn new(system: System, s: usize, p: impl Into<Nat>) -> Self {
        Params { system, s, p: p.into(), alphabet: 2, variant: Variant::One, seed: 0 }
    }

    pub fn with_variant(mut self, variant: Variant) -> Self {
        self.variant = variant;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_alphabet(mut self, alphabet: u32) -> Self {
        self.alphabet = alphabet;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let min_s = if self.system == System::Two { 1 } else { 2 };
        if self.s < min_s {
            return Err(Error::Param(format!("system {} needs s >= {min_s}, got {}", self.system, self.s)));
        }
        if self.p < Nat::from(2u32) {
            return Err(Error::Param(format!("p must be >= 2, got {}", self.p)));
        }
        if Nat::from(self.s) > self.p {
            return Err(Error::Param(format!("s = {} exceeds p = {}", self.s, self.p)));
        }
        if self.alphabet < 2 {
            return Err(Error::Param(format!("alphabet must be >= 2, got {}", self.alphabet)));
        }
        if self.system != System::One && self.alphabet != 2 {
            return Err(Error::Param(format!(
                "system {} decodes binary messages only (alphabet {})",
                self.system, self.alphabet
            )));
        }
        if self.system == System::One && self.p < Nat::from(4 * self.s) {
            return Err(Error::Param(format!("system 1 needs p >= 4s = {}, got {}", 4 * self.s, self.p)));
        }
        Ok(())
    }
}

/// A plaintext: `s` digits in `0..M`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Message(pub Vec<u32>);

impl Message {
    pub fn zeros(s: usize) -> Self {
        Message(vec![0; s])
    }

    pub fn digits(&self) -> &[u32] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// The binary message whose bit `i` is bit `i` of `mask`.
    pub fn from_mask(s: usize, mask: u64) -> Self {
        Message((0..s).map(|i| ((mask >> i) & 1) as u32).collect())
    }

    pub fn random(s: usize, alphabet: u32, rng: &mut RandomSource) -> Self {
        Message((0..s).map(|_| rng.uniform_u64(0, alphabet as u64 - 1) as u32).collect())
    }
}

impl fmt::Display for Message {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.iter().all(|&d| d < 10) {
            for d in &self.0 {
                write!(f, "{d}")?;
            }
            Ok(())
        } else {
            let parts: Vec<String> = self.0.iter().map(u32::to_string).collect();
            write!(f, "{}", parts.join(","))
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PublicKey {
    entries: Vec<Nat>,
    alphabet: u32,
}

impl PublicKey {
    pub fn new(entries: Vec<Nat>, alphabet: u32) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::Param("public key has no entries".into()));
        }
        if alphabet < 2 {
            return Err(Error::Param(format!("alphabet must be >= 2, got {alphabet}")));
        }
        Ok(PublicKey { entries, alphabet })
    }

    pub fn entries(&self) -> &[Nat] {
        &self.entries
    }

    pub fn dim(&self) -> usize {
        self.entries.len()
    }

    pub fn alphabet(&self) -> u32 {
        self.alphabet
    }

    /// Total bit length of the entries.
    pub fn bit_size(&self) -> u64 {
        self.entries.iter().map(|e| e.bits()).sum()
    }
}

/// Secret data of the first system.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PrivateKey1 {
    pub epsilon: EpsilonMatrix,
    pub q: Vec<Nat>,
    pub p_mult: Vec<Nat>,
    pub x0: Vec<Nat>,
    pub alphabet: u32,
}

/// Secret data of the second system.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PrivateKey2 {
    pub row: SuperincreasingRow,
    pub q1: Nat,
    pub p1: Nat,
    pub x0: Vec<Nat>,
}

/// Secret data of the third system. `mu = eps2 − eps1` is superincreasing in
/// its own σ order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PrivateKey3 {
    pub eps1: Vec<Nat>,
    pub eps2: Vec<Nat>,
    pub mu: SuperincreasingRow,
    pub q1: Nat,
    pub p1: Nat,
    pub q2: Nat,
    pub p2: Nat,
    pub x0: Vec<Nat>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PrivateKey {
    One(PrivateKey1),
    Two(PrivateKey2),
    Three(PrivateKey3),
}

impl PrivateKey {
    pub fn system(&self) -> System {
        match self {
            PrivateKey::One(_) => System::One,
            PrivateKey::Two(_) => System::Two,
            PrivateKey::Three(_) => System::Three,
        }
    }

    pub fn dim(&self) -> usize {
        self.x0().len()
    }

    pub fn x0(&self) -> &[Nat] {
        match self {
            PrivateKey::One(k) => &k.x0,
            PrivateKey::Two(k) => &k.x0,
            PrivateKey::Three(k) => &k.x0,
        }
    }

    pub fn alphabet(&self) -> u32 {
        match self {
            PrivateKey::One(k) => k.alphabet,
            _ => 2,
        }
    }

    pub fn decrypt(&self, ct: &Nat) -> Result<Message> {
        match self {
            PrivateKey::One(k) => decrypt1(k, ct),
            PrivateKey::Two(k) => decrypt2(k, ct),
            PrivateKey::Three(k) => decrypt3(k, ct),
        }
    }

    /// Recomputes the public row from the secret chain.
    pub fn public_key(&self) -> PublicKey {
        let entries = match self {
            PrivateKey::One(k) => {
                let rows = k.epsilon.rows();
                let mut x = k.x0.clone();
                for (i, row) in rows.iter().enumerate() {
                    x = chain_step(&x, &k.q[i], &k.p_mult[i], row);
                }
                x
            }
            PrivateKey::Two(k) => chain_step(&k.x0, &k.q1, &k.p1, k.row.eps()),
            PrivateKey::Three(k) => {
                let x1 = chain_step(&k.x0, &k.q1, &k.p1, &k.eps1);
                chain_step(&x1, &k.q2, &k.p2, &k.eps2)
            }
        };
        PublicKey { entries, alphabet: self.alphabet() }
    }

    /// Checks `(M−1)·pᵢ·‖εᵢ‖₁ < qᵢ` for every step of the chain.
    pub fn lambda_condition_holds(&self) -> bool {
        let m1 = Nat::from(self.alphabet() - 1);
        let ok = |p: &Nat, eps: &[Nat], q: &Nat| -> bool {
            let norm: Nat = eps.iter().sum();
            &m1 * p * norm < *q
        };
        match self {
            PrivateKey::One(k) => k
                .epsilon
                .rows()
                .iter()
                .enumerate()
                .all(|(i, row)| ok(&k.p_mult[i], row, &k.q[i])),
            PrivateKey::Two(k) => ok(&k.p1, k.row.eps(), &k.q1),
            PrivateKey::Three(k) => ok(&k.p1, &k.eps1, &k.q1) && ok(&k.p2, &k.eps2, &k.q2),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KeyPair {
    pub params: Params,
    pub public: PublicKey,
    pub private: PrivateKey,
}

fn chain_step(prev: &[Nat], q: &Nat, p: &Nat, eps: &[Nat]) -> Vec<Nat> {
    let p_is_one = p.is_one();
    prev.iter()
        .zip(eps)
        .map(|(x, e)| if p_is_one { x * q + e } else { x * q + p * e })
        .collect()
}

fn draw_row(s: usize, hi: &Nat, rng: &mut RandomSource) -> Vec<Nat> {
    let zero = Nat::zero();
    (0..s).map(|_| rng.uniform_nat(&zero, hi)).collect()
}

/// Redraws `x₀` until no public entry would be zero (an entry is zero only if
/// both `x₀ⱼ` and every `εᵢⱼ` vanish).
fn draw_x0(s: usize, hi: &Nat, eps_column_zero: &[bool], rng: &mut RandomSource) -> Vec<Nat> {
    loop {
        let x0 = draw_row(s, hi, rng);
        if x0.iter().zip(eps_column_zero).all(|(x, &z)| !(z && x.is_zero())) {
            return x0;
        }
    }
}

fn x0_bound(params: &Params) -> Nat {
    let s = params.s;
    match (params.system, params.variant) {
        (System::One, Variant::One) => pow2(s as u64),
        (System::One, Variant::Two) => Nat::from(s).pow(5),
        (_, Variant::One) => params.p.clone(),
        (_, Variant::Two) => pow2(s as u64),
    }
}

fn require_system(params: &Params, system: System) -> Result<()> {
    if params.system != system {
        return Err(Error::Param(format!(
            "parameters are for system {}, not {system}",
            params.system
        )));
    }
    params.validate()
}

/// First system: `ε = ε(s, ⌊p/4s⌋)`, `pᵢ = 1`, `qᵢ ∈ [(M−1)p+1, 2(M−1)p]`.
pub fn keygen1(params: &Params) -> Result<(PublicKey, PrivateKey1)> {
    require_system(params, System::One)?;
    let s = params.s;
    let mut rng = RandomSource::new(params.seed);
    let x_bound = &params.p / Nat::from(4 * s);
    let epsilon = gen_epsilon_matrix(s, &x_bound, &mut rng)?;
    let scale = Nat::from(params.alphabet - 1);
    let q_lo = &scale * &params.p + 1u32;
    let q_hi = &scale * &params.p * 2u32;
    let q: Vec<Nat> = (0..s).map(|_| rng.uniform_nat(&q_lo, &q_hi)).collect();
    let p_mult = vec![Nat::one(); s];
    // ε is invertible, so no column vanishes.
    let x0 = draw_x0(s, &x0_bound(params), &vec![false; s], &mut rng);
    let key = PrivateKey1 { epsilon, q, p_mult, x0, alphabet: params.alphabet };

    let rows = key.epsilon.rows();
    let mut x = key.x0.clone();
    for (i, row) in rows.iter().enumerate() {
        let norm: Nat = row.iter().sum();
        if &scale * &key.p_mult[i] * norm >= key.q[i] {
            return Err(Error::Invariant(format!("lambda condition fails on row {i}")));
        }
        x = chain_step(&x, &key.q[i], &key.p_mult[i], row);
    }
    let last = s - 1;
    for (xj, ej) in x.iter().zip(&rows[last]) {
        if xj % &key.q[last] != &key.p_mult[last] * ej {
            return Err(Error::Invariant("x_s mod q_s differs from p_s·ε_s".into()));
        }
    }
    Ok((PublicKey { entries: x, alphabet: params.alphabet }, key))
}

/// Second system: superincreasing `ε`, `p₁ = 1`, `q₁ ∈ [2^s p, 2^{s+1} p]`.
pub fn keygen2(params: &Params) -> Result<(PublicKey, PrivateKey2)> {
    require_system(params, System::Two)?;
    let s = params.s;
    let mut rng = RandomSource::new(params.seed);
    let row = gen_superincreasing(s, &params.p, &mut rng)?;
    let q_lo = &params.p << s;
    let q_hi = &params.p << (s + 1);
    let q1 = rng.uniform_nat(&q_lo, &q_hi);
    let zero_cols: Vec<bool> = row.eps().iter().map(Zero::is_zero).collect();
    let x0 = draw_x0(s, &x0_bound(params), &zero_cols, &mut rng);
    let key = PrivateKey2 { row, q1, p1: Nat::one(), x0 };
    if key.row.l1_norm() >= key.q1 {
        return Err(Error::Invariant("‖ε‖₁ >= q₁".into()));
    }
    let entries = chain_step(&key.x0, &key.q1, &key.p1, key.row.eps());
    Ok((PublicKey { entries, alphabet: 2 }, key))
}

/// Third system: `ε₁` uniform in `[0, p)`, `μ` superincreasing, `ε₂ = ε₁ + μ`,
/// `q₁ ∈ [2^{s+1}p, 2^{s+2}p]`, `q₂ ∈ [2^{s+2}p, 2^{s+3}p]`.
pub fn keygen3(params: &Params) -> Result<(PublicKey, PrivateKey3)> {
    require_system(params, System::Three)?;
    let s = params.s;
    let mut rng = RandomSource::new(params.seed);
    let mu = gen_superincreasing(s, &params.p, &mut rng)?;
    let eps_hi = &params.p - 1u32;
    let eps1 = loop {
        let candidate = draw_row(s, &eps_hi, &mut rng);
        if rank_two(&candidate, mu.eps()) {
            break candidate;
        }
    };
    let eps2: Vec<Nat> = eps1.iter().zip(mu.eps()).map(|(a, b)| a + b).collect();
    let q1 = rng.uniform_nat(&(&params.p << (s + 1)), &(&params.p << (s + 2)));
    let q2 = rng.uniform_nat(&(&params.p << (s + 2)), &(&params.p << (s + 3)));
    let zero_cols: Vec<bool> = eps1.iter().zip(&eps2).map(|(a, b)| a.is_zero() && b.is_zero()).collect();
    let x0 = draw_x0(s, &x0_bound(params), &zero_cols, &mut rng);
    let key = PrivateKey3 { eps1, eps2, mu, q1, p1: Nat::one(), q2, p2: Nat::one(), x0 };
    let n1: Nat = key.eps1.iter().sum();
    let n2: Nat = key.eps2.iter().sum();
    if n1 >= key.q1 || n2 >= key.q2 {
        return Err(Error::Invariant("λ condition fails for system 3".into()));
    }
    let x1 = chain_step(&key.x0, &key.q1, &key.p1, &key.eps1);
    let entries = chain_step(&x1, &key.q2, &key.p2, &key.eps2);
    Ok((PublicKey { entries, alphabet: 2 }, key))
}

/// Rows `a` and `a + b` span a plane iff `a` and `b` are not parallel.
fn rank_two(a: &[Nat], b: &[Nat]) -> bool {
    // Some 2x2 minor a_i b_j − a_j b_i is nonzero.
    let first = match b.iter().position(|v| !v.is_zero()) {
        Some(i) => i,
        None => return false,
    };
    (0..a.len()).any(|j| &a[first] * &b[j] != &a[j] * &b[first])
}

pub fn keygen(params: &Params) -> Result<KeyPair> {
    let (public, private) = match params.system {
        System::One => keygen1(params).map(|(p, k)| (p, PrivateKey::One(k)))?,
        System::Two => keygen2(params).map(|(p, k)| (p, PrivateKey::Two(k)))?,
        System::Three => keygen3(params).map(|(p, k)| (p, PrivateKey::Three(k)))?,
    };
    Ok(KeyPair { params: params.clone(), public, private })
}

/// `x·m`.
pub fn encrypt(key: &PublicKey, m: &Message) -> Result<Nat> {
    if m.len() != key.dim() {
        return Err(Error::Shape(format!(
            "message has {} digits, key has {} entries",
            m.len(),
            key.dim()
        )));
    }
    if let Some((index, &value)) = m.0.iter().enumerate().find(|(_, &d)| d >= key.alphabet) {
        return Err(Error::Message { index, value, alphabet: key.alphabet });
    }
    dot_digits(&key.entries, &m.0)
}

/// One Euclidean peel: `(⌊N/q⌋, (N mod q)/p)`.
fn peel(n: &Nat, q: &Nat, p: &Nat, step: usize) -> Result<(Nat, Nat)> {
    let (prev, rem) = n.div_rem(q);
    if p.is_one() {
        return Ok((prev, rem));
    }
    let (o, r) = rem.div_rem(p);
    if !r.is_zero() {
        return Err(Error::InvalidCiphertext(format!("O_{step} is not an integer")));
    }
    Ok((prev, o))
}

fn check_x0(x0: &[Nat], m: &[u32], n0: &Nat) -> Result<()> {
    if dot_digits(x0, m)? != *n0 {
        return Err(Error::InvalidCiphertext("decoded message does not reproduce N₀".into()));
    }
    Ok(())
}

/// Resolves the bit carried by a zero-weight entry from `x₀·m = N₀`.
fn settle_zero_weight(row: &SuperincreasingRow, x0: &[Nat], m: &mut [u32], n0: &Nat) -> Result<()> {
    if let Some(j) = zero_weight_index(row) {
        let partial = dot_digits(x0, m)?;
        if partial != *n0 && partial + &x0[j] == *n0 {
            m[j] = 1;
        }
    }
    check_x0(x0, m, n0)
}

/// `Nᵢ₋₁ = ⌊Nᵢ/qᵢ⌋`, `Oᵢ = (Nᵢ − qᵢNᵢ₋₁)/pᵢ`, then `ε·m = O`.
///
/// The decoded message is accepted only if it also satisfies `x₀·m = N₀`,
/// which together with `ε·m = O` implies `x_s·m = N_s`.
pub fn decrypt1(key: &PrivateKey1, ct: &Nat) -> Result<Message> {
    let s = key.x0.len();
    let mut n = ct.clone();
    let mut o = vec![Int::zero(); s];
    for i in (0..s).rev() {
        let (prev, oi) = peel(&n, &key.q[i], &key.p_mult[i], i + 1)?;
        o[i] = nat_to_int(&oi);
        n = prev;
    }
    let m = key
        .epsilon
        .solve(&o)
        .map_err(|e| Error::InvalidCiphertext(e.to_string()))?;
    let digits = as_nat_message(&m)
        .filter(|d| d.iter().all(|&v| v < key.alphabet))
        .ok_or_else(|| Error::InvalidCiphertext("solution leaves the message alphabet".into()))?;
    check_x0(&key.x0, &digits, &n)?;
    Ok(Message(digits))
}

/// `N₀ = ⌊N₁/q₁⌋`, `O = (N₁ − q₁N₀)/p₁`, then greedy superincreasing decode.
pub fn decrypt2(key: &PrivateKey2, ct: &Nat) -> Result<Message> {
    let (n0, o) = peel(ct, &key.q1, &key.p1, 1)?;
    let mut m = decode_superincreasing(&key.row, &o).map_err(|e| Error::InvalidCiphertext(e.to_string()))?;
    settle_zero_weight(&key.row, &key.x0, &mut m, &n0)?;
    Ok(Message(m))
}

/// Two peels, `ω = O₂ − O₁`, then decode `ω` against `μ`.
pub fn decrypt3(key: &PrivateKey3, ct: &Nat) -> Result<Message> {
    let (n1, o2) = peel(ct, &key.q2, &key.p2, 2)?;
    let (n0, o1) = peel(&n1, &key.q1, &key.p1, 1)?;
    if o2 < o1 {
        return Err(Error::InvalidCiphertext("ω = O₂ − O₁ is negative".into()));
    }
    let omega = &o2 - &o1;
    let mut m = decode_superincreasing(&key.mu, &omega).map_err(|e| Error::InvalidCiphertext(e.to_string()))?;
    if let Some(j) = zero_weight_index(&key.mu) {
        // μⱼ = 0 means that bit only shows up in ε₁·m (and x₀·m).
        if dot_digits(&key.eps1, &m)? != o1 && dot_digits(&key.eps1, &m)? + &key.eps1[j] == o1 {
            m[j] = 1;
        }
    }
    if dot_digits(&key.eps1, &m)? != o1 {
        return Err(Error::InvalidCiphertext("decoded message does not reproduce O₁".into()));
    }
    check_x0(&key.x0, &m, &n0)?;
    Ok(Message(m))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sis::is_superincreasing;
    use std::collections::HashSet;

    fn exhaustive_roundtrip(kp: &KeyPair) {
        let s = kp.public.dim();
        let mut seen = HashSet::new();
        for mask in 0..(1u64 << s) {
            let m = Message::from_mask(s, mask);
            let ct = encrypt(&kp.public, &m).unwrap();
            assert!(seen.insert(ct.clone()), "ciphertext collision at mask {mask}");
            assert_eq!(kp.private.decrypt(&ct).unwrap(), m, "mask {mask}");
        }
    }

    #[test]
    fn system1_exhaustive_s8() {
        let kp = keygen(&Params::new(System::One, 8, 64u32).with_seed(1)).unwrap();
        exhaustive_roundtrip(&kp);
        assert_eq!(kp.private.public_key(), kp.public);
        assert!(kp.private.lambda_condition_holds());
    }

    #[test]
    fn system2_exhaustive_s10() {
        let kp = keygen(&Params::new(System::Two, 10, 1000u32).with_seed(2)).unwrap();
        exhaustive_roundtrip(&kp);
        let ones = Message(vec![1; 10]);
        let total: Nat = kp.public.entries().iter().sum();
        assert_eq!(kp.private.decrypt(&total).unwrap(), ones);
    }

    #[test]
    fn system3_exhaustive_s8() {
        let kp = keygen(&Params::new(System::Three, 8, 100u32).with_seed(3)).unwrap();
        exhaustive_roundtrip(&kp);
        let PrivateKey::Three(k) = &kp.private else { unreachable!() };
        assert!(is_superincreasing(&k.mu.ordered()));
        let m = Message::from_mask(8, 0b1011_0110);
        let ct = encrypt(&kp.public, &m).unwrap();
        let (n1, o2) = ct.div_rem(&k.q2);
        let o1 = n1 % &k.q1;
        assert_eq!(o2 - o1, dot_digits(k.mu.eps(), &m.0).unwrap());
    }

    #[test]
    fn zero_ciphertext_decrypts_to_zero() {
        for (sys, p) in [(System::One, 64u32), (System::Two, 50), (System::Three, 50)] {
            let kp = keygen(&Params::new(sys, 6, p).with_seed(9)).unwrap();
            assert_eq!(kp.private.decrypt(&Nat::zero()).unwrap(), Message::zeros(6));
        }
    }

    #[test]
    fn two_step_chain_matches_hand_expansion() {
        let kp = keygen(&Params::new(System::One, 2, 100u32).with_seed(4)).unwrap();
        let PrivateKey::One(k) = &kp.private else { unreachable!() };
        let rows = k.epsilon.rows();
        for j in 0..2 {
            let expect = &k.q[1] * (&k.q[0] * &k.x0[j] + &rows[0][j]) + &rows[1][j];
            assert_eq!(kp.public.entries()[j], expect);
        }
    }

    #[test]
    fn smallest_second_system() {
        let kp = keygen(&Params::new(System::Two, 1, 2u32).with_seed(5)).unwrap();
        for mask in 0..2 {
            let m = Message::from_mask(1, mask);
            let ct = encrypt(&kp.public, &m).unwrap();
            assert_eq!(kp.private.decrypt(&ct).unwrap(), m);
        }
    }

    #[test]
    fn ternary_alphabet_system1() {
        let params = Params::new(System::One, 5, 40u32).with_alphabet(3).with_seed(6);
        let kp = keygen(&params).unwrap();
        assert!(kp.private.lambda_condition_holds());
        for code in 0..3u32.pow(5) {
            let m = Message((0..5).map(|i| (code / 3u32.pow(i)) % 3).collect());
            let ct = encrypt(&kp.public, &m).unwrap();
            assert_eq!(kp.private.decrypt(&ct).unwrap(), m);
        }
        assert!(matches!(
            encrypt(&kp.public, &Message(vec![0, 3, 0, 0, 0])),
            Err(Error::Message { index: 1, value: 3, .. })
        ));
    }

    #[test]
    fn perturbed_ciphertexts_never_decode_wrongly() {
        for sys in [System::One, System::Two, System::Three] {
            let kp = keygen(&Params::new(sys, 8, 64u32).with_seed(7)).unwrap();
            let mut rng = RandomSource::new(70);
            for _ in 0..50 {
                let m = Message::random(8, 2, &mut rng);
                let ct = encrypt(&kp.public, &m).unwrap() + 1u32;
                if let Ok(m2) = kp.private.decrypt(&ct) {
                    assert_eq!(encrypt(&kp.public, &m2).unwrap(), ct);
                }
            }
        }
    }

    #[test]
    fn parameter_errors() {
        assert!(keygen(&Params::new(System::One, 10, 30u32)).is_err());
        assert!(keygen(&Params::new(System::Two, 10, 1u32)).is_err());
        assert!(keygen(&Params::new(System::Three, 1, 10u32)).is_err());
        assert!(keygen(&Params::new(System::Two, 4, 10u32).with_alphabet(3)).is_err());
        assert!(keygen1(&Params::new(System::Two, 4, 100u32)).is_err());
        let kp = keygen(&Params::new(System::Two, 4, 10u32)).unwrap();
        assert!(matches!(encrypt(&kp.public, &Message(vec![0; 3])), Err(Error::Shape(_))));
    }

    #[test]
    fn keygen_is_deterministic() {
        let p = Params::new(System::Three, 12, 1000u32).with_seed(99);
        assert_eq!(keygen(&p).unwrap(), keygen(&p).unwrap());
        assert_ne!(keygen(&p).unwrap().public, keygen(&p.clone().with_seed(100)).unwrap().public);
    }
}
