//! Slow reference implementations used to check the library.
#![allow(dead_code)]

use knapforge::numeric::{Int, Nat, RandomSource};
use num_traits::ToPrimitive;

/// Squared length of the shortest nonzero vector of the lattice spanned by
/// the integer rows of `b` (square, full rank).
///
/// Any lattice vector `x = cB` has `|cᵢ| ≤ ‖x‖·‖(B⁻¹)ᵢ‖` (column `i` of the
/// inverse), so with `R²` the smallest row norm every candidate shorter than
/// the rows lies in a finite box. Returns `None` if that box is too large.
pub fn shortest_vector_norm2(b: &[Vec<i64>], max_box: f64) -> Option<i128> {
    let n = b.len();
    let inv = invert(b)?;
    let r2 = b.iter().map(|row| row.iter().map(|&v| (v as i128) * (v as i128)).sum::<i128>()).min()?;
    let r = (r2 as f64).sqrt();
    let bounds: Vec<i64> = (0..n)
        .map(|i| {
            let col: f64 = (0..n).map(|k| inv[k][i] * inv[k][i]).sum::<f64>().sqrt();
            (r * col + 1e-9).floor() as i64
        })
        .collect();
    let volume: f64 = bounds.iter().map(|&k| (2 * k + 1) as f64).product();
    if volume > max_box {
        return None;
    }
    let mut best = r2;
    let mut c = vec![0i64; n];
    let mut v = vec![0i128; b[0].len()];
    fn walk(i: usize, b: &[Vec<i64>], bounds: &[i64], c: &mut Vec<i64>, v: &mut Vec<i128>, best: &mut i128) {
        if i == b.len() {
            if c.iter().any(|&x| x != 0) {
                let norm: i128 = v.iter().map(|x| x * x).sum();
                *best = (*best).min(norm);
            }
            return;
        }
        for ci in -bounds[i]..=bounds[i] {
            c[i] = ci;
            for (vk, &bk) in v.iter_mut().zip(&b[i]) {
                *vk += ci as i128 * bk as i128;
            }
            walk(i + 1, b, bounds, c, v, best);
            for (vk, &bk) in v.iter_mut().zip(&b[i]) {
                *vk -= ci as i128 * bk as i128;
            }
        }
        c[i] = 0;
    }
    walk(0, b, &bounds, &mut c, &mut v, &mut best);
    Some(best)
}

/// Gauss–Jordan inverse in floating point; `None` if singular.
fn invert(b: &[Vec<i64>]) -> Option<Vec<Vec<f64>>> {
    let n = b.len();
    let mut a: Vec<Vec<f64>> = b
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let mut r: Vec<f64> = row.iter().map(|&v| v as f64).collect();
            r.extend((0..n).map(|j| if i == j { 1.0 } else { 0.0 }));
            r
        })
        .collect();
    for col in 0..n {
        let piv = (col..n).max_by(|&x, &y| a[x][col].abs().total_cmp(&a[y][col].abs()))?;
        if a[piv][col].abs() < 1e-9 {
            return None;
        }
        a.swap(col, piv);
        let d = a[col][col];
        a[col].iter_mut().for_each(|v| *v /= d);
        for r in 0..n {
            if r != col {
                let f = a[r][col];
                let pivot_row = a[col].clone();
                a[r].iter_mut().zip(&pivot_row).for_each(|(v, p)| *v -= f * p);
            }
        }
    }
    Some(a.into_iter().map(|r| r[n..].to_vec()).collect())
}

/// Random full-rank integer basis with entries in `[-bound, bound]`.
pub fn random_basis(n: usize, bound: i64, rng: &mut RandomSource) -> Vec<Vec<i64>> {
    loop {
        let b: Vec<Vec<i64>> = (0..n).map(|_| (0..n).map(|_| rng.uniform_i64(-bound, bound)).collect()).collect();
        if invert(&b).is_some() && det_exact(&b) != 0 {
            return b;
        }
    }
}

/// Integer determinant by cofactor expansion.
pub fn det_exact(b: &[Vec<i64>]) -> i128 {
    let n = b.len();
    if n == 1 {
        return b[0][0] as i128;
    }
    (0..n)
        .map(|j| {
            let minor: Vec<Vec<i64>> = b[1..].iter().map(|r| r.iter().enumerate().filter(|(k, _)| *k != j).map(|(_, &v)| v).collect()).collect();
            let sign = if j % 2 == 0 { 1 } else { -1 };
            sign * b[0][j] as i128 * det_exact(&minor)
        })
        .sum()
}

pub fn to_int_rows(b: &[Vec<i64>]) -> Vec<Vec<Int>> {
    b.iter().map(|r| r.iter().map(|&v| Int::from(v)).collect()).collect()
}

/// Counts of rest vectors in `{0..q−1}^s` by their sum, for sums `< q`,
/// by walking every vector.
pub fn rest_sum_counts_by_enumeration(q: u64, s: usize) -> Vec<u64> {
    let mut counts = vec![0u64; q as usize];
    let mut digits = vec![0u64; s];
    loop {
        let sum: u64 = digits.iter().sum();
        if sum < q {
            counts[sum as usize] += 1;
        }
        let mut i = 0;
        loop {
            if i == s {
                return counts;
            }
            digits[i] += 1;
            if digits[i] < q {
                break;
            }
            digits[i] = 0;
            i += 1;
        }
    }
}

/// Number of length-`s` nonnegative sequences summing to `t` in which every
/// term after the first exceeds the sum of the terms before it, and the
/// number of all length-`s` sequences summing to `t`.
pub fn superincreasing_by_enumeration(s: usize, t: u64) -> (u64, u64) {
    fn compositions(s: usize, t: u64, prefix: &mut Vec<u64>, out: &mut (u64, u64)) {
        if s == 1 {
            prefix.push(t);
            out.1 += 1;
            let mut acc = 0u64;
            let ok = prefix.iter().enumerate().all(|(i, &r)| {
                let fine = i == 0 || r > acc;
                acc += r;
                fine
            });
            if ok {
                out.0 += 1;
            }
            prefix.pop();
            return;
        }
        for r in 0..=t {
            prefix.push(r);
            compositions(s - 1, t - r, prefix, out);
            prefix.pop();
        }
    }
    let mut out = (0, 0);
    compositions(s, t, &mut Vec::new(), &mut out);
    out
}

/// Every `q′ ∈ [2, q_max]` whose rests sum below `q′` and are superincreasing
/// in some order, found by trying all orders.
pub fn pseudokeys_by_scan(w: &[u64], q_max: u64) -> Vec<u64> {
    (2..=q_max)
        .filter(|&q| {
            let rests: Vec<u64> = w.iter().map(|x| x % q).collect();
            rests.iter().sum::<u64>() < q && any_superincreasing_order(&rests)
        })
        .collect()
}

fn any_superincreasing_order(r: &[u64]) -> bool {
    fn permute(rest: &mut Vec<u64>, acc: u64, first: bool) -> bool {
        if rest.is_empty() {
            return true;
        }
        for i in 0..rest.len() {
            let v = rest[i];
            if first || v > acc {
                rest.remove(i);
                let ok = permute(rest, acc + v, false);
                rest.insert(i, v);
                if ok {
                    return true;
                }
            }
        }
        false
    }
    permute(&mut r.to_vec(), 0, true)
}

pub fn is_prime(n: u64) -> bool {
    n >= 2 && (2..).take_while(|d| d * d <= n).all(|d| n % d != 0)
}

pub fn primes_in(lo: u64, hi: u64) -> Vec<u64> {
    (lo..=hi).filter(|&n| is_prime(n)).collect()
}

pub fn nat_u64(n: &Nat) -> u64 {
    n.to_u64().expect("fits in u64")
}

/// Size reduction and the Lovász condition with `δ = num/den`, checked with
/// a separate exact Gram–Schmidt.
pub fn lll_conditions_hold(b: &[Vec<i64>], (num, den): (i64, i64)) -> bool {
    use knapforge::numeric::Rat;
    use num_traits::Signed;
    let n = b.len();
    let dot = |x: &[Rat], y: &[Rat]| x.iter().zip(y).map(|(a, c)| a * c).fold(Rat::from_integer(0.into()), |s, v| s + v);
    let rows: Vec<Vec<Rat>> = b.iter().map(|r| r.iter().map(|&v| Rat::from_integer(v.into())).collect()).collect();
    let mut star: Vec<Vec<Rat>> = Vec::new();
    let mut mu = vec![vec![Rat::from_integer(0.into()); n]; n];
    for i in 0..n {
        let mut v = rows[i].clone();
        for j in 0..i {
            mu[i][j] = dot(&rows[i], &star[j]) / dot(&star[j], &star[j]);
            for (vk, sk) in v.iter_mut().zip(&star[j]) {
                *vk -= &mu[i][j] * sk;
            }
        }
        star.push(v);
    }
    let half = Rat::new(1.into(), 2.into());
    let delta = Rat::new(num.into(), den.into());
    let size_reduced = (0..n).all(|i| (0..i).all(|j| mu[i][j].abs() <= half));
    let lovasz = (1..n).all(|i| {
        dot(&star[i], &star[i]) >= (&delta - &mu[i][i - 1] * &mu[i][i - 1]) * dot(&star[i - 1], &star[i - 1])
    });
    size_reduced && lovasz
}
