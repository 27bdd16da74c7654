//! Exact counts of the induced-subgraph classes of the K_n bunkbed.
//!
//! Fix `u` = bottom column 0 and `v` = bottom column 1. A class `(x, y, z)`
//! collects the vertex sets containing `u` with `x` bottom vertices, `y` top
//! vertices and `z` columns present on both levels. `C1` counts the members
//! that also contain `v`, `C2` those that contain `v'`, and `B` is the number
//! of bunkbed edges leaving any member.
//!
//! Every closed form is evaluated with indicator semantics: a factorial of a
//! negative argument makes its whole term vanish.

use std::cmp::Ordering;
use std::sync::OnceLock;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::rational::Rational;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct Triplet {
    pub x: u32,
    pub y: u32,
    pub z: u32,
}

impl Triplet {
    pub const fn new(x: u32, y: u32, z: u32) -> Self {
        Self { x, y, z }
    }

    pub fn is_valid(&self, n: u32) -> bool {
        self.x >= 1 && self.z <= self.x.min(self.y) && self.x + self.y - self.z <= n
    }

    pub fn validate(&self, n: u32) -> Result<()> {
        if self.is_valid(n) {
            Ok(())
        } else {
            Err(Error::InvalidTriplet { n, x: self.x, y: self.y, z: self.z })
        }
    }

    /// The same class with the two levels swapped.
    pub fn mirrored(&self) -> Self {
        Self { x: self.y, y: self.x, z: self.z }
    }

    /// Every valid triplet for `n`, ordered by `z`, then `x`, then `y`.
    pub fn all(n: u32) -> Vec<Triplet> {
        let mut out = Vec::new();
        for z in 0..=n {
            for x in z.max(1)..=n {
                for y in z..=n {
                    let t = Triplet::new(x, y, z);
                    if t.is_valid(n) {
                        out.push(t);
                    }
                }
            }
        }
        out
    }
}

impl std::fmt::Display for Triplet {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "({},{},{})", self.x, self.y, self.z)
    }
}

const FACTORIAL_CACHE: usize = 512;

fn factorial_table() -> &'static [BigInt] {
    static TABLE: OnceLock<Vec<BigInt>> = OnceLock::new();
    TABLE.get_or_init(|| {
        let mut t = Vec::with_capacity(FACTORIAL_CACHE);
        let mut acc = BigInt::one();
        t.push(acc.clone());
        for k in 1..FACTORIAL_CACHE {
            acc *= k;
            t.push(acc.clone());
        }
        t
    })
}

/// `k!`, or `None` for negative `k`.
pub fn factorial(k: i64) -> Option<BigInt> {
    if k < 0 {
        return None;
    }
    let k = k as usize;
    let table = factorial_table();
    if k < table.len() {
        return Some(table[k].clone());
    }
    let mut acc = table[table.len() - 1].clone();
    for j in table.len()..=k {
        acc *= j;
    }
    Some(acc)
}

pub fn binomial(n: i64, k: i64) -> BigInt {
    if k < 0 || n < 0 || k > n {
        return BigInt::zero();
    }
    factorial_ratio(BigInt::one(), n, &[k, n - k])
}

/// `factor * top! / prod(bottom!)`, zero as soon as any argument is negative.
fn factorial_ratio(factor: BigInt, top: i64, bottom: &[i64]) -> BigInt {
    if factor.is_zero() || top < 0 || bottom.iter().any(|&b| b < 0) {
        return BigInt::zero();
    }
    let mut den = BigInt::one();
    for &b in bottom {
        den *= factorial(b).expect("checked non-negative");
    }
    let num = factor * factorial(top).expect("checked non-negative");
    let (q, r) = num.div_rem(&den);
    debug_assert!(r.is_zero(), "closed form is not an integer");
    q
}

fn signed(t: &Triplet) -> (i64, i64, i64) {
    (t.x as i64, t.y as i64, t.z as i64)
}

fn check_n(n: u32) -> Result<()> {
    if n < 2 {
        return Err(Error::InvalidParameter(format!("counts need n >= 2 (u != v), got {n}")));
    }
    Ok(())
}

/// `B(x,y,z) = (x+y)n - x^2 + x - y^2 + y - 2z`.
pub fn boundary_count(n: u32, t: Triplet) -> Result<u64> {
    t.validate(n)?;
    let (x, y, z) = signed(&t);
    let n = n as i64;
    let b = (x + y) * n - x * x + x - y * y + y - 2 * z;
    debug_assert!(b >= 0);
    Ok(b as u64)
}

/// `C1` without validation; zero outside the valid region.
pub(crate) fn c1_raw(n: u32, t: Triplet) -> BigInt {
    if n < 2 || !t.is_valid(n) {
        return BigInt::zero();
    }
    let (x, y, z) = signed(&t);
    let n = n as i64;
    factorial_ratio(BigInt::from(x * (x - 1)), n - 2, &[x - z, z, n - x - y + z, y - z])
}

/// `C2` without validation; zero outside the valid region.
pub(crate) fn c2_raw(n: u32, t: Triplet) -> BigInt {
    if n < 2 || !t.is_valid(n) {
        return BigInt::zero();
    }
    let (x, y, z) = signed(&t);
    let n = n as i64;
    factorial_ratio(BigInt::from(x * y - z), n - 2, &[x - z, z, n - x - y + z, y - z])
}

/// `C1(x,y,z)`: class members containing `u` and `v`.
pub fn count_c1(n: u32, t: Triplet) -> Result<BigInt> {
    check_n(n)?;
    t.validate(n)?;
    Ok(c1_raw(n, t))
}

/// `C2(x,y,z)`: class members containing `u` and `v'`.
pub fn count_c2(n: u32, t: Triplet) -> Result<BigInt> {
    check_n(n)?;
    t.validate(n)?;
    Ok(c2_raw(n, t))
}

/// Total class size (only `u` required).
pub fn count_total(n: u32, t: Triplet) -> Result<BigInt> {
    t.validate(n)?;
    let (x, y, z) = signed(&t);
    let n = n as i64;
    Ok(binomial(n - 1, x - 1) * binomial(x, z) * binomial(n - x, y - z))
}

/// `C1 - C2` over the pair `(x,y,z)`, `(y,x,z)`, counted once when `x = y`.
/// Mirrored triplets outside the valid region contribute zero.
pub(crate) fn cdiff_raw(n: u32, t: Triplet) -> BigInt {
    let own = c1_raw(n, t) - c2_raw(n, t);
    if t.x == t.y {
        return own;
    }
    let m = t.mirrored();
    own + c1_raw(n, m) - c2_raw(n, m)
}

/// The signed polynomial closed form: `(x-y)^2 - (x+y) + 2z` over the common
/// factorial denominator when `x != y`, and `(z - x)` when `x = y`.
pub fn cdiff_closed_form(n: u32, t: Triplet) -> Result<BigInt> {
    check_n(n)?;
    t.validate(n)?;
    if t.y < t.z || t.z == 0 {
        return Err(Error::InvalidParameter(format!("closed form needs y >= z >= 1, got {t}")));
    }
    let (x, y, z) = signed(&t);
    let n = n as i64;
    let factor = if x == y { z - x } else { x * x - 2 * x * y + y * y - x - y + 2 * z };
    let sign = factor.signum();
    let mag = factorial_ratio(BigInt::from(factor.abs()), n - 2, &[x - z, y - z, z, n - x - y + z]);
    Ok(if sign < 0 { -mag } else { mag })
}

/// Triplet `(k + i + eps, k - i, z)` of the regrouped sum.
fn cdiff_triplet(n: u32, k: u32, i: u32, eps: u32, z: u32) -> Result<Triplet> {
    check_n(n)?;
    if eps > 1 {
        return Err(Error::InvalidParameter(format!("eps must be 0 or 1, got {eps}")));
    }
    if i > k {
        return Err(Error::InvalidParameter(format!("i = {i} exceeds k = {k}")));
    }
    let t = Triplet::new(k + i + eps, k - i, z);
    if z == 0 || t.y < z {
        return Err(Error::InvalidParameter(format!("need k - i >= z >= 1, got k={k} i={i} z={z}")));
    }
    t.validate(n)?;
    Ok(t)
}

/// `C_diff(k+i+eps, k-i, z)` assembled from the four definitional counts.
pub fn count_cdiff(n: u32, k: u32, i: u32, eps: u32, z: u32) -> Result<BigInt> {
    let t = cdiff_triplet(n, k, i, eps, z)?;
    Ok(cdiff_raw(n, t))
}

/// Sign of `C_diff(k+i+eps, k-i, z)` from `(2i+eps)^2 - (2k+eps) + 2z`.
pub fn cdiff_sign(n: u32, k: u32, i: u32, eps: u32, z: u32) -> Result<i8> {
    cdiff_triplet(n, k, i, eps, z)?;
    Ok(sign_polynomial(k, i, eps, z).signum() as i8)
}

fn sign_polynomial(k: u32, i: u32, eps: u32, z: u32) -> i64 {
    let d = 2 * i as i64 + eps as i64;
    d * d - (2 * k as i64 + eps as i64) + 2 * z as i64
}

/// Smallest `i >= 0` with `(2i+eps)^2 >= 2k + eps - 2z`; below it `C_diff`
/// is negative, from it on non-negative.
pub fn find_i0(k: u32, eps: u32, z: u32) -> Result<u32> {
    if eps > 1 {
        return Err(Error::InvalidParameter(format!("eps must be 0 or 1, got {eps}")));
    }
    if z == 0 || k < z {
        return Err(Error::InvalidParameter(format!("need k >= z >= 1, got k={k} z={z}")));
    }
    let target = 2 * k as i64 + eps as i64 - 2 * z as i64;
    let mut i = 0u32;
    loop {
        let d = 2 * i as i64 + eps as i64;
        if d * d >= target {
            return Ok(i);
        }
        i += 1;
    }
}

fn check_kz(k: u32, z: u32) -> Result<()> {
    if z == 0 || k < z {
        return Err(Error::InvalidParameter(format!("need k >= z >= 1, got k={k} z={z}")));
    }
    Ok(())
}

fn inv_factorials(a: i64, b: i64) -> Rational {
    Rational::new(BigInt::one(), factorial(a).unwrap() * factorial(b).unwrap())
}

/// Checks `sum_{i=0}^{k-z} C_diff(k+i, k-i, z) = 0` in the n-free reduced
/// form and as a full count sum at `n = 2k + 1 - z`.
pub fn check_identity_even(k: u32, z: u32) -> Result<bool> {
    check_kz(k, z)?;
    let m = (k - z) as i64;
    let (k64, z64) = (k as i64, z as i64);
    let lhs = (1..=m).fold(Rational::zero(), |acc, i| {
        acc + Rational::from_integer(BigInt::from(4 * i * i - 2 * k64 + 2 * z64)) * inv_factorials(m + i, m - i)
    });
    let rhs = Rational::from_integer(BigInt::from(m)) * inv_factorials(m, m);
    let n = 2 * k + 1 - z;
    let full = (0..=k - z).try_fold(BigInt::zero(), |acc, i| Ok::<_, Error>(acc + count_cdiff(n, k, i, 0, z)?))?;
    Ok(lhs == rhs && full.is_zero())
}

/// Checks `sum_{i=0}^{k-z} C_diff(k+i+1, k-i, z) = 0` in the n-free reduced
/// form and as a full count sum at `n = 2k + 1 - z`.
pub fn check_identity_odd(k: u32, z: u32) -> Result<bool> {
    check_kz(k, z)?;
    let m = (k - z) as i64;
    let (k64, z64) = (k as i64, z as i64);
    let lhs = (1..=m).fold(Rational::zero(), |acc, i| {
        acc + Rational::from_integer(BigInt::from(2 * i * i + 2 * i - k64 + z64)) * inv_factorials(m + i + 1, m - i)
    });
    let rhs = Rational::from_integer(BigInt::from(m)) * inv_factorials(m + 1, m);
    let n = 2 * k + 1 - z;
    let full = (0..=k - z).try_fold(BigInt::zero(), |acc, i| Ok::<_, Error>(acc + count_cdiff(n, k, i, 1, z)?))?;
    Ok(lhs == rhs && full.is_zero())
}

pub fn sign_of(v: &BigInt) -> i8 {
    match v.cmp(&BigInt::zero()) {
        Ordering::Less => -1,
        Ordering::Equal => 0,
        Ordering::Greater => 1,
    }
}

/// Brute-force class counts by enumerating every vertex set of the K_n
/// bunkbed that contains `u`. Shares nothing with the closed forms above.
pub mod brute {
    use std::collections::BTreeMap;

    use super::Triplet;
    use crate::error::{Error, Result};
    use crate::graph::{BunkbedGraph, Network};

    #[derive(Debug, Clone, Default, PartialEq, Eq)]
    pub struct ClassTally {
        pub total: u64,
        pub with_v: u64,
        pub with_v_prime: u64,
        /// Distinct cut sizes seen among the members (must be a single value).
        pub cut_sizes: Vec<u64>,
    }

    pub const MAX_N: u32 = 10;

    pub fn signature(n: usize, set: u64) -> Triplet {
        let bottom = set & ((1u64 << n) - 1);
        let top = set >> n;
        Triplet::new(bottom.count_ones(), top.count_ones(), (bottom & top).count_ones())
    }

    pub fn tally(n: u32) -> Result<BTreeMap<Triplet, ClassTally>> {
        if n == 0 || n > MAX_N {
            return Err(Error::Capacity {
                what: "brute-force class enumeration n",
                size: n as usize,
                limit: MAX_N as usize,
            });
        }
        let g = BunkbedGraph::complete(n as usize)?;
        let n = n as usize;
        let mut out: BTreeMap<Triplet, ClassTally> = BTreeMap::new();
        for rest in 0u64..1 << (2 * n - 1) {
            let set = (rest << 1) | 1;
            let t = signature(n, set);
            let cut = g.edges().iter().filter(|&&(a, b)| (set >> a & 1) != (set >> b & 1)).count() as u64;
            let entry = out.entry(t).or_default();
            entry.total += 1;
            if n >= 2 && set >> 1 & 1 == 1 {
                entry.with_v += 1;
            }
            if n >= 2 && set >> (n + 1) & 1 == 1 {
                entry.with_v_prime += 1;
            }
            if !entry.cut_sizes.contains(&cut) {
                entry.cut_sizes.push(cut);
            }
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn t(x: u32, y: u32, z: u32) -> Triplet {
        Triplet::new(x, y, z)
    }

    #[test]
    fn boundary_examples() {
        assert_eq!(boundary_count(3, t(1, 0, 0)).unwrap(), 3);
        assert_eq!(boundary_count(3, t(2, 1, 1)).unwrap(), 5);
        // bottom {0,1}, top {0,2}: 4 bottom + 4 top + 2 vertical cut edges
        assert_eq!(boundary_count(4, t(2, 2, 1)).unwrap(), 10);
        assert!(boundary_count(3, t(3, 3, 2)).is_err());
    }

    #[test]
    fn c1_examples() {
        assert_eq!(count_c1(3, t(2, 1, 1)).unwrap(), BigInt::from(2));
        assert_eq!(count_c1(4, t(3, 1, 1)).unwrap(), BigInt::from(6));
        for n in 2..8 {
            for y in 0..n {
                for z in 0..=y.min(1) {
                    if t(1, y, z).is_valid(n) {
                        assert!(count_c1(n, t(1, y, z)).unwrap().is_zero());
                    }
                }
            }
        }
    }

    #[test]
    fn c2_examples() {
        assert_eq!(count_c2(3, t(2, 1, 1)).unwrap(), BigInt::from(1));
        assert_eq!(count_c2(4, t(3, 1, 1)).unwrap(), BigInt::from(2));
        assert_eq!(count_c2(4, t(2, 2, 1)).unwrap(), BigInt::from(6));
        assert!(count_c2(1, t(1, 1, 1)).is_err());
    }

    #[test]
    fn total_examples() {
        assert_eq!(count_total(2, t(2, 1, 1)).unwrap(), BigInt::from(2));
        assert_eq!(count_total(2, t(1, 1, 0)).unwrap(), BigInt::from(1));
        for n in 1..6 {
            assert_eq!(count_total(n, t(1, 0, 0)).unwrap(), BigInt::from(1));
        }
    }

    #[test]
    fn cdiff_examples() {
        assert_eq!(count_cdiff(4, 2, 0, 0, 1).unwrap(), BigInt::from(-2));
        assert_eq!(count_cdiff(4, 2, 1, 0, 1).unwrap(), BigInt::from(2));
        for n in 2..9 {
            for z in 1..=n / 2 {
                if 2 * z - z <= n {
                    assert!(count_cdiff(n, z, 0, 0, z).unwrap().is_zero());
                }
            }
        }
        assert!(count_cdiff(4, 2, 2, 0, 1).is_err());
        assert!(count_cdiff(4, 2, 0, 2, 1).is_err());
    }

    #[test]
    fn sign_examples() {
        assert_eq!(cdiff_sign(6, 3, 0, 0, 3).unwrap(), 0);
        assert_eq!(cdiff_sign(4, 2, 0, 0, 1).unwrap(), -1);
        assert_eq!(cdiff_sign(4, 2, 1, 0, 1).unwrap(), 1);
    }

    #[test]
    fn i0_examples() {
        assert_eq!(find_i0(3, 0, 3).unwrap(), 0);
        assert_eq!(find_i0(2, 0, 1).unwrap(), 1);
        assert_eq!(find_i0(8, 0, 1).unwrap(), 2);
        assert!(find_i0(1, 0, 2).is_err());
        assert!(find_i0(2, 3, 1).is_err());
    }

    #[test]
    fn identity_small_cells() {
        assert!(check_identity_even(2, 1).unwrap());
        assert!(check_identity_odd(2, 1).unwrap());
        for z in 1..6 {
            assert!(check_identity_even(z, z).unwrap());
            assert!(check_identity_odd(z, z).unwrap());
        }
        assert!(check_identity_even(1, 2).is_err());
    }

    #[test]
    fn factorial_indicator() {
        assert_eq!(factorial(-1), None);
        assert_eq!(factorial(0), Some(BigInt::one()));
        assert_eq!(factorial(5), Some(BigInt::from(120)));
        assert_eq!(factorial(600).unwrap(), factorial(599).unwrap() * 600);
        assert_eq!(binomial(5, 2), BigInt::from(10));
        assert!(binomial(2, 5).is_zero());
        assert!(binomial(3, -1).is_zero());
    }

    #[test]
    fn triplet_enumeration_for_n2() {
        let all = Triplet::all(2);
        assert_eq!(all.len(), 7);
        assert!(all.contains(&t(2, 2, 2)));
        assert!(all.contains(&t(1, 1, 0)));
    }
}
