//! Secret structures: the factored ε-matrix of the first system and the
//! superincreasing rows of the second and third.

use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::numeric::{nat_to_int, Int, IntMatrix, Nat, Permutation, RandomSource};

/// `ε = M_σ · L · U · N · M_τ`, kept factored.
///
/// `L` is unit lower-triangular with an all-ones first column, `N` is unit
/// lower-triangular with an all-ones last row, `U` is upper-triangular with
/// entries in `{0..x_bound}` and a nonzero diagonal (generated keys draw every
/// entry from `{1..x_bound}`). Both `L` and `N` are implicit.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EpsilonMatrix {
    s: usize,
    x_bound: Nat,
    sigma: Permutation,
    tau: Permutation,
    /// Upper triangle of `U`, row-major: row `i` holds `u[i][i..s]`.
    upper: Vec<Nat>,
}

impl EpsilonMatrix {
    pub fn from_parts(
        x_bound: Nat,
        sigma: Permutation,
        tau: Permutation,
        upper: Vec<Nat>,
    ) -> Result<Self> {
        let s = sigma.len();
        if s < 2 {
            return Err(Error::Param(format!("epsilon matrix needs s >= 2, got {s}")));
        }
        if tau.len() != s {
            return Err(Error::Shape("sigma and tau sizes differ".into()));
        }
        if upper.len() != s * (s + 1) / 2 {
            return Err(Error::Shape(format!(
                "upper triangle of a {s}x{s} matrix has {} entries, got {}",
                s * (s + 1) / 2,
                upper.len()
            )));
        }
        if x_bound.is_zero() {
            return Err(Error::Param("x_bound must be >= 1".into()));
        }
        let m = EpsilonMatrix { s, x_bound, sigma, tau, upper };
        for i in 0..s {
            if m.u_ref(i, i).is_zero() {
                return Err(Error::Param(format!("U[{i}][{i}] is zero, U must be invertible")));
            }
            for j in i..s {
                if m.u_ref(i, j) > &m.x_bound {
                    return Err(Error::Param(format!("U[{i}][{j}] exceeds x_bound {}", m.x_bound)));
                }
            }
        }
        Ok(m)
    }

    pub fn dim(&self) -> usize {
        self.s
    }

    pub fn x_bound(&self) -> &Nat {
        &self.x_bound
    }

    pub fn sigma(&self) -> &Permutation {
        &self.sigma
    }

    pub fn tau(&self) -> &Permutation {
        &self.tau
    }

    pub fn upper_entries(&self) -> &[Nat] {
        &self.upper
    }

    #[inline]
    fn offset(&self, i: usize) -> usize {
        // rows 0..i contribute s + (s-1) + ... + (s-i+1) entries
        i * self.s - i * (i.saturating_sub(1)) / 2
    }

    /// `U[i][j]`, zero below the diagonal.
    pub fn u(&self, i: usize, j: usize) -> Nat {
        if j < i {
            Nat::zero()
        } else {
            self.upper[self.offset(i) + (j - i)].clone()
        }
    }

    fn u_ref(&self, i: usize, j: usize) -> &Nat {
        debug_assert!(j >= i);
        &self.upper[self.offset(i) + (j - i)]
    }

    /// Dense rows `ε₁..ε_s` as naturals.
    pub fn rows(&self) -> Vec<Vec<Nat>> {
        let s = self.s;
        // A = L·U: row 0 is U's row 0, row i > 0 is U_i + U_0.
        let lu = |i: usize, j: usize| -> Nat {
            let mut v = if j >= i { self.u_ref(i, j).clone() } else { Nat::zero() };
            if i > 0 {
                v += self.u_ref(0, j);
            }
            v
        };
        // B = A·N: column j < s-1 is A_j + A_{s-1}, last column unchanged.
        let mut lun = vec![vec![Nat::zero(); s]; s];
        for (i, row) in lun.iter_mut().enumerate() {
            let last = lu(i, s - 1);
            for (j, cell) in row.iter_mut().enumerate().take(s - 1) {
                *cell = lu(i, j) + &last;
            }
            row[s - 1] = last;
        }
        // ε[i][j] = B[σ(i)][τ⁻¹(j)]
        let tau_inv = self.tau.inverse();
        (0..s)
            .map(|i| {
                let src = &lun[self.sigma.image(i)];
                (0..s).map(|j| src[tau_inv.image(j)].clone()).collect()
            })
            .collect()
    }

    /// The dense product `M_σ L U N M_τ`.
    pub fn densify(&self) -> IntMatrix {
        let rows = self.rows().into_iter().map(|r| r.iter().map(nat_to_int).collect()).collect();
        IntMatrix::from_rows(rows).expect("square by construction")
    }

    /// Solves `ε·m = O` through the factors, in O(s²) scalar operations.
    pub fn solve(&self, o: &[Int]) -> Result<Vec<Int>> {
        let s = self.s;
        if o.len() != s {
            return Err(Error::Shape(format!("right-hand side has length {}, expected {s}", o.len())));
        }
        // M_σ y = O  ⇒  y[σ(i)] = O[i]
        let mut y = vec![Int::zero(); s];
        for (i, v) in o.iter().enumerate() {
            y[self.sigma.image(i)] = v.clone();
        }
        // L z = y  ⇒  z₀ = y₀, zᵢ = yᵢ − y₀
        let head = y[0].clone();
        for v in y.iter_mut().skip(1) {
            *v -= &head;
        }
        // U w = z by back-substitution
        let mut w = vec![Int::zero(); s];
        for i in (0..s).rev() {
            let mut acc = std::mem::take(&mut y[i]);
            for (j, wj) in w.iter().enumerate().skip(i + 1) {
                if !wj.is_zero() {
                    acc -= nat_to_int(self.u_ref(i, j)) * wj;
                }
            }
            let d = nat_to_int(self.u_ref(i, i));
            let (q, r) = acc.div_rem(&d);
            if !r.is_zero() {
                return Err(Error::Decode(format!(
                    "row {i} of the triangular solve leaves remainder {r} modulo {d}"
                )));
            }
            w[i] = q;
        }
        // N v = w  ⇒  vᵢ = wᵢ (i < s−1), v_{s−1} = w_{s−1} − Σ_{i<s−1} wᵢ
        let partial: Int = w[..s - 1].iter().sum();
        w[s - 1] -= partial;
        // M_τ m = v  ⇒  m[τ(i)] = v[i]
        let mut m = vec![Int::zero(); s];
        for (i, v) in w.into_iter().enumerate() {
            m[self.tau.image(i)] = v;
        }
        Ok(m)
    }
}

/// Random `ε(s, x)`: U entries uniform in `{1..x_bound}`, σ and τ uniform.
pub fn gen_epsilon_matrix(s: usize, x_bound: &Nat, rng: &mut RandomSource) -> Result<EpsilonMatrix> {
    if s < 2 {
        return Err(Error::Param(format!("epsilon matrix needs s >= 2, got {s}")));
    }
    if x_bound.is_zero() {
        return Err(Error::Param("x_bound must be >= 1".into()));
    }
    let one = Nat::one();
    let upper = (0..s * (s + 1) / 2).map(|_| rng.uniform_nat(&one, x_bound)).collect();
    let sigma = Permutation::random(s, rng);
    let tau = Permutation::random(s, rng);
    EpsilonMatrix::from_parts(x_bound.clone(), sigma, tau, upper)
}

/// `ε` together with the order `σ` in which it is superincreasing:
/// `ε[σ(0)], ε[σ(1)], …` is superincreasing.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SuperincreasingRow {
    eps: Vec<Nat>,
    sigma: Permutation,
}

impl SuperincreasingRow {
    pub fn new(eps: Vec<Nat>, sigma: Permutation) -> Result<Self> {
        if eps.len() != sigma.len() {
            return Err(Error::Shape("row and permutation lengths differ".into()));
        }
        let row = SuperincreasingRow { eps, sigma };
        if !is_superincreasing(&row.ordered()) {
            return Err(Error::Param("row is not superincreasing in the given order".into()));
        }
        Ok(row)
    }

    pub fn eps(&self) -> &[Nat] {
        &self.eps
    }

    pub fn sigma(&self) -> &Permutation {
        &self.sigma
    }

    pub fn len(&self) -> usize {
        self.eps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eps.is_empty()
    }

    /// Entries in superincreasing order.
    pub fn ordered(&self) -> Vec<Nat> {
        (0..self.eps.len()).map(|k| self.eps[self.sigma.image(k)].clone()).collect()
    }

    pub fn l1_norm(&self) -> Nat {
        self.eps.iter().sum()
    }
}

/// Draws the k-th element (in σ order) uniformly from `[(2^k − 1)p, 2^k p)`.
pub fn gen_superincreasing(s: usize, p: &Nat, rng: &mut RandomSource) -> Result<SuperincreasingRow> {
    if s < 1 {
        return Err(Error::Param("superincreasing row needs s >= 1".into()));
    }
    if *p < Nat::from(2u32) {
        return Err(Error::Param(format!("p must be >= 2, got {p}")));
    }
    let sigma = Permutation::random(s, rng);
    let mut eps = vec![Nat::zero(); s];
    for k in 0..s {
        let top = p << k;
        let lo = &top - p;
        let hi = top - 1u32;
        eps[sigma.image(k)] = rng.uniform_nat(&lo, &hi);
    }
    Ok(SuperincreasingRow { eps, sigma })
}

/// Every element strictly exceeds the sum of all earlier ones.
pub fn is_superincreasing(seq: &[Nat]) -> bool {
    let mut sum = Nat::zero();
    for (i, v) in seq.iter().enumerate() {
        if i > 0 && v <= &sum {
            return false;
        }
        sum += v;
    }
    true
}

/// Greedy decoding of `O = ε·m` by decreasing σ-index.
///
/// A zero-weight entry (only possible in first σ position) carries no
/// information about its bit; it decodes to 0 and callers that have other
/// means of disambiguation (see the decryptors) fix it up.
pub fn decode_superincreasing(row: &SuperincreasingRow, o: &Nat) -> Result<Vec<u32>> {
    let mut residual = o.clone();
    let mut m = vec![0u32; row.len()];
    for k in (0..row.len()).rev() {
        let idx = row.sigma.image(k);
        let e = &row.eps[idx];
        if !e.is_zero() && residual >= *e {
            residual -= e;
            m[idx] = 1;
        }
    }
    if !residual.is_zero() {
        return Err(Error::Decode(format!("residual {residual} after greedy pass")));
    }
    Ok(m)
}

/// Index of the zero-weight entry of `row`, if any.
pub(crate) fn zero_weight_index(row: &SuperincreasingRow) -> Option<usize> {
    row.eps.iter().position(Zero::is_zero)
}

pub(crate) fn as_nat_message(m: &[Int]) -> Option<Vec<u32>> {
    m.iter()
        .map(|v| if v.is_negative() { None } else { u32::try_from(v).ok() })
        .collect()
}
