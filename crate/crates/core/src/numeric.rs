//! Scalar, vector and matrix plumbing shared by every other module.
//!
//! Naturals, integers and rationals are the `num` arbitrary-precision types;
//! [`Rat`] is always kept in lowest terms with a positive denominator by
//! `num_rational`.

use num_bigint::{BigInt, BigUint, RandBigInt, Sign};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::seq::SliceRandom;
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;

use crate::error::{Error, Result};

pub type Nat = BigUint;
pub type Int = BigInt;
pub type Rat = BigRational;

/// Euclidean division of naturals.
pub fn floor_div_rem(a: &Nat, b: &Nat) -> Result<(Nat, Nat)> {
    if b.is_zero() {
        return Err(Error::DivisionByZero);
    }
    Ok(a.div_rem(b))
}

/// `Σ xᵢ·mᵢ` over naturals.
pub fn dot(x: &[Nat], m: &[Nat]) -> Result<Nat> {
    if x.len() != m.len() {
        return Err(Error::Shape(format!(
            "dot of length {} with length {}",
            x.len(),
            m.len()
        )));
    }
    Ok(x.iter().zip(m).fold(Nat::zero(), |acc, (a, b)| acc + a * b))
}

/// `Σ xᵢ·mᵢ` where the right-hand side holds small digits. Binary digits only
/// cost an addition.
pub fn dot_digits(x: &[Nat], m: &[u32]) -> Result<Nat> {
    if x.len() != m.len() {
        return Err(Error::Shape(format!(
            "dot of length {} with length {}",
            x.len(),
            m.len()
        )));
    }
    let mut acc = Nat::zero();
    for (a, &d) in x.iter().zip(m) {
        match d {
            0 => {}
            1 => acc += a,
            d => acc += a * d,
        }
    }
    Ok(acc)
}

/// Signed variant of [`dot_digits`] used when verifying decoded messages.
pub fn dot_int(x: &[Int], m: &[Int]) -> Result<Int> {
    if x.len() != m.len() {
        return Err(Error::Shape(format!(
            "dot of length {} with length {}",
            x.len(),
            m.len()
        )));
    }
    Ok(x.iter().zip(m).fold(Int::zero(), |acc, (a, b)| acc + a * b))
}

/// `log₂ x` to double precision, for arbitrarily large `x > 0`.
pub fn log2_nat(x: &Nat) -> f64 {
    let bits = x.bits();
    if bits <= 64 {
        return x.to_u64().map(|v| (v as f64).log2()).unwrap_or(f64::NAN);
    }
    let shift = bits - 64;
    let top = (x >> shift).to_u64().unwrap_or(u64::MAX);
    (top as f64).log2() + shift as f64
}

pub fn nat_to_int(x: &Nat) -> Int {
    Int::from_biguint(Sign::Plus, x.clone())
}

/// Returns `None` for negative inputs.
pub fn int_to_nat(x: &Int) -> Option<Nat> {
    if x.is_negative() {
        None
    } else {
        Some(x.magnitude().clone())
    }
}

pub fn pow2(k: u64) -> Nat {
    Nat::one() << k
}

/// Which side a permutation matrix multiplies from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    /// `M_π · v`: entry `i` of the result is `v[π(i)]`.
    Left,
    /// `v · M_π`: entry `π(i)` of the result is `v[i]`.
    Right,
}

/// A bijection on `{0..n-1}`, stored as its image array. The permutation
/// matrix convention is `M[i][π(i)] = 1`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Permutation {
    images: Vec<usize>,
}

impl Permutation {
    pub fn new(images: Vec<usize>) -> Result<Self> {
        let n = images.len();
        let mut seen = vec![false; n];
        for &i in &images {
            if i >= n || seen[i] {
                return Err(Error::Param(format!("not a permutation of 0..{n}: {images:?}")));
            }
            seen[i] = true;
        }
        Ok(Permutation { images })
    }

    pub fn identity(n: usize) -> Self {
        Permutation { images: (0..n).collect() }
    }

    pub fn random(n: usize, rng: &mut RandomSource) -> Self {
        let mut images: Vec<usize> = (0..n).collect();
        images.shuffle(rng.rng_mut());
        Permutation { images }
    }

    pub fn len(&self) -> usize {
        self.images.len()
    }

    pub fn is_empty(&self) -> bool {
        self.images.is_empty()
    }

    #[inline]
    pub fn image(&self, i: usize) -> usize {
        self.images[i]
    }

    pub fn images(&self) -> &[usize] {
        &self.images
    }

    pub fn inverse(&self) -> Self {
        let mut inv = vec![0; self.images.len()];
        for (i, &j) in self.images.iter().enumerate() {
            inv[j] = i;
        }
        Permutation { images: inv }
    }

    /// `(self ∘ other)(i) = self(other(i))`.
    pub fn compose(&self, other: &Permutation) -> Result<Self> {
        if self.len() != other.len() {
            return Err(Error::Shape("composing permutations of different sizes".into()));
        }
        Ok(Permutation {
            images: other.images.iter().map(|&j| self.images[j]).collect(),
        })
    }

    pub fn is_identity(&self) -> bool {
        self.images.iter().enumerate().all(|(i, &j)| i == j)
    }

    /// Multiplies `v` by the permutation matrix `M_π` from the given side.
    pub fn apply<T: Clone>(&self, v: &[T], side: Side) -> Result<Vec<T>> {
        if v.len() != self.len() {
            return Err(Error::Shape(format!(
                "permutation of size {} applied to vector of length {}",
                self.len(),
                v.len()
            )));
        }
        Ok(match side {
            Side::Left => self.images.iter().map(|&j| v[j].clone()).collect(),
            Side::Right => {
                let mut out = v.to_vec();
                for (i, &j) in self.images.iter().enumerate() {
                    out[j] = v[i].clone();
                }
                out
            }
        })
    }
}

/// Dense row-major integer matrix.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IntMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Int>,
}

impl IntMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        IntMatrix { rows, cols, data: vec![Int::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = Int::one();
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<Int>>) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|row| row.len() != c) {
            return Err(Error::Shape("ragged rows".into()));
        }
        Ok(IntMatrix { rows: r, cols: c, data: rows.into_iter().flatten().collect() })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> &Int {
        &self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: Int) {
        self.data[i * self.cols + j] = v;
    }

    pub fn row(&self, i: usize) -> &[Int] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn row_mut(&mut self, i: usize) -> &mut [Int] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for j in 0..self.cols {
            self.data.swap(a * self.cols + j, b * self.cols + j);
        }
    }

    pub fn to_rows(&self) -> Vec<Vec<Int>> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn mul(&self, other: &IntMatrix) -> Result<IntMatrix> {
        if self.cols != other.rows {
            return Err(Error::Shape(format!(
                "{}x{} times {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = IntMatrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let v = a * other.get(k, j);
                    out.data[i * other.cols + j] += v;
                }
            }
        }
        Ok(out)
    }

    pub fn mul_vec(&self, v: &[Int]) -> Result<Vec<Int>> {
        if self.cols != v.len() {
            return Err(Error::Shape(format!(
                "{}x{} times vector of length {}",
                self.rows,
                self.cols,
                v.len()
            )));
        }
        Ok((0..self.rows).map(|i| dot_int(self.row(i), v).expect("shape checked")).collect())
    }

    /// Exact determinant by fraction-free (Bareiss) elimination.
    pub fn determinant(&self) -> Result<Int> {
        if self.rows != self.cols {
            return Err(Error::Shape("determinant of a non-square matrix".into()));
        }
        let n = self.rows;
        if n == 0 {
            return Ok(Int::one());
        }
        let mut a = self.clone();
        let mut sign = Int::one();
        let mut prev = Int::one();
        for k in 0..n - 1 {
            if a.get(k, k).is_zero() {
                match (k + 1..n).find(|&i| !a.get(i, k).is_zero()) {
                    Some(i) => {
                        a.swap_rows(k, i);
                        sign = -sign;
                    }
                    None => return Ok(Int::zero()),
                }
            }
            for i in k + 1..n {
                for j in k + 1..n {
                    let v = (a.get(i, j) * a.get(k, k) - a.get(i, k) * a.get(k, j)) / &prev;
                    a.set(i, j, v);
                }
            }
            prev = a.get(k, k).clone();
        }
        Ok(sign * a.get(n - 1, n - 1))
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seeded, reproducible random stream. Not cryptographically meaningful:
/// its job is to make every experiment replayable.
#[derive(Debug, Clone)]
pub struct RandomSource {
    seed: u64,
    rng: ChaCha20Rng,
}

impl RandomSource {
    pub fn new(seed: u64) -> Self {
        RandomSource { seed, rng: ChaCha20Rng::seed_from_u64(seed) }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Child stream for trial `index`. Depends only on `(seed, index)`, never
    /// on how much of the parent stream was consumed.
    pub fn child(&self, index: u64) -> RandomSource {
        RandomSource::new(child_seed(self.seed, index))
    }

    pub(crate) fn rng_mut(&mut self) -> &mut ChaCha20Rng {
        &mut self.rng
    }

    pub fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }

    /// Uniform in `[lo, hi]`, inclusive.
    pub fn uniform_u64(&mut self, lo: u64, hi: u64) -> u64 {
        assert!(lo <= hi, "empty range [{lo}, {hi}]");
        self.rng.gen_range(lo..=hi)
    }

    /// Uniform in `[lo, hi]`, inclusive.
    pub fn uniform_i64(&mut self, lo: i64, hi: i64) -> i64 {
        assert!(lo <= hi, "empty range [{lo}, {hi}]");
        self.rng.gen_range(lo..=hi)
    }

    /// Uniform in `[lo, hi]`, inclusive, by rejection sampling.
    pub fn uniform_nat(&mut self, lo: &Nat, hi: &Nat) -> Nat {
        assert!(lo <= hi, "empty range [{lo}, {hi}]");
        let upper = hi + 1u32;
        self.rng.gen_biguint_range(lo, &upper)
    }

    pub fn unit_f64(&mut self) -> f64 {
        self.rng.gen::<f64>()
    }
}

pub fn child_seed(seed: u64, index: u64) -> u64 {
    splitmix64(seed ^ splitmix64(index.wrapping_add(0xA076_1D64_78BD_642F)))
}
