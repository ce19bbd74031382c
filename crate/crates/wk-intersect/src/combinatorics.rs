//! Partitions, correlator keys and the integer arithmetic every other module
//! leans on.

use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};
use smallvec::SmallVec;

use crate::error::{Result, WkError};

/// Exact rational scalar, always in lowest terms with positive denominator.
pub type Rational = BigRational;

type Parts = SmallVec<[u16; 16]>;

pub fn rat(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

pub fn rat_int<T: Into<BigInt>>(n: T) -> Rational {
    Rational::from_integer(n.into())
}

/// Formats as `p/q`, denominator included even when it is 1.
pub fn rational_pq(r: &Rational) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

/// Parses `p`, `p/q` or `-p/q`.
pub fn parse_rational(s: &str) -> Result<Rational> {
    let s = s.trim();
    let bad = || WkError::Domain(format!("not a rational number: {s:?}"));
    match s.split_once('/') {
        None => Ok(rat_int(s.parse::<BigInt>().map_err(|_| bad())?)),
        Some((p, q)) => {
            let p: BigInt = p.parse().map_err(|_| bad())?;
            let q: BigInt = q.parse().map_err(|_| bad())?;
            if q.is_zero() {
                return Err(bad());
            }
            Ok(Rational::new(p, q))
        }
    }
}

/// A weakly decreasing tuple of positive integers.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Partition(Parts);

impl Partition {
    pub fn empty() -> Self {
        Partition(Parts::new())
    }

    /// Sorts the input descending and drops zeros.
    pub fn new<I: IntoIterator<Item = u32>>(parts: I) -> Self {
        let mut v: Parts = parts
            .into_iter()
            .filter(|&p| p > 0)
            .map(|p| u16::try_from(p).expect("partition part exceeds u16"))
            .collect();
        v.sort_unstable_by(|a, b| b.cmp(a));
        Partition(v)
    }

    pub(crate) fn from_sorted(parts: Parts) -> Self {
        debug_assert!(parts.windows(2).all(|w| w[0] >= w[1]));
        debug_assert!(parts.iter().all(|&p| p > 0));
        Partition(parts)
    }

    pub fn parts(&self) -> impl Iterator<Item = u32> + '_ {
        self.0.iter().map(|&p| p as u32)
    }

    pub fn to_vec(&self) -> Vec<u32> {
        self.parts().collect()
    }

    pub fn size(&self) -> u32 {
        self.0.iter().map(|&p| p as u32).sum()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Largest part, 0 for the empty partition.
    pub fn first(&self) -> u32 {
        self.0.first().map_or(0, |&p| p as u32)
    }

    pub fn part(&self, i: usize) -> u32 {
        self.0[i] as u32
    }

    /// Multiplicity of the part `k`.
    pub fn mult(&self, k: u32) -> usize {
        self.0.iter().filter(|&&p| p as u32 == k).count()
    }

    /// (value, multiplicity) pairs in decreasing value order.
    pub fn multiplicities(&self) -> Vec<(u32, usize)> {
        let mut out: Vec<(u32, usize)> = Vec::new();
        for p in self.parts() {
            match out.last_mut() {
                Some((v, m)) if *v == p => *m += 1,
                _ => out.push((p, 1)),
            }
        }
        out
    }

    pub fn conjugate(&self) -> Partition {
        let first = self.first() as usize;
        let mut out = Parts::with_capacity(first);
        for j in 1..=first {
            out.push(self.0.iter().filter(|&&p| p as usize >= j).count() as u16);
        }
        Partition(out)
    }

    /// Multiset union.
    pub fn union(&self, other: &Partition) -> Partition {
        let mut v: Parts = self.0.iter().chain(other.0.iter()).copied().collect();
        v.sort_unstable_by(|a, b| b.cmp(a));
        Partition(v)
    }

    pub fn with_part(&self, k: u32) -> Partition {
        self.union(&Partition::new([k]))
    }

    /// Appends `r` parts equal to 1.
    pub fn pad_ones(&self, r: u32) -> Partition {
        let mut v = self.0.clone();
        v.extend(std::iter::repeat(1).take(r as usize));
        Partition(v)
    }

    /// Removes every part equal to 1.
    pub fn without_ones(&self) -> Partition {
        Partition(self.0.iter().copied().filter(|&p| p > 1).collect())
    }

    /// Removes the first occurrence of `k`; `None` when absent.
    pub fn remove_part(&self, k: u32) -> Option<Partition> {
        let i = self.0.iter().position(|&p| p as u32 == k)?;
        let mut v = self.0.clone();
        v.remove(i);
        Some(Partition(v))
    }

    /// Adds one to the part at index `j`, keeping the order valid.
    pub fn bump(&self, j: usize) -> Partition {
        let mut v = self.0.clone();
        v[j] += 1;
        v.sort_unstable_by(|a, b| b.cmp(a));
        Partition(v)
    }

    /// Compact text form: `(3,2,2)` or `()`.
    pub fn tuple_string(&self) -> String {
        let inner: Vec<String> = self.parts().map(|p| p.to_string()).collect();
        format!("({})", inner.join(","))
    }
}

impl fmt::Debug for Partition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.tuple_string())
    }
}

impl fmt::Display for Partition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_empty() {
            write!(f, "∅")
        } else {
            write!(f, "{}", self.tuple_string())
        }
    }
}

impl Serialize for Partition {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_vec().serialize(s)
    }
}

impl<'de> Deserialize<'de> for Partition {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        Ok(Partition::new(Vec::<u32>::deserialize(d)?))
    }
}

/// Genus plus degree multiset of a correlator ⟨τ_{d1}…τ_{dn}⟩_g.
///
/// Degrees are kept sorted descending with zeros stored explicitly, since the
/// number of marked points matters.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CorrelatorKey {
    genus: u32,
    degrees: Parts,
}

impl CorrelatorKey {
    pub fn new(genus: u32, degrees: &[u32]) -> Result<Self> {
        let n = degrees.len();
        if 2 * genus as i64 - 2 + n as i64 <= 0 {
            return Err(WkError::Unstable { g: genus, n });
        }
        let mut d: Parts = degrees
            .iter()
            .map(|&x| u16::try_from(x).map_err(|_| WkError::Domain(format!("degree {x} too large"))))
            .collect::<Result<_>>()?;
        d.sort_unstable_by(|a, b| b.cmp(a));
        Ok(CorrelatorKey { genus, degrees: d })
    }

    pub(crate) fn from_sorted_unchecked(genus: u32, degrees: Parts) -> Self {
        CorrelatorKey { genus, degrees }
    }

    pub fn genus(&self) -> u32 {
        self.genus
    }

    pub fn n(&self) -> usize {
        self.degrees.len()
    }

    pub fn degrees(&self) -> Vec<u32> {
        self.degrees.iter().map(|&d| d as u32).collect()
    }

    pub(crate) fn raw(&self) -> &[u16] {
        &self.degrees
    }

    pub fn degree_sum(&self) -> u32 {
        self.degrees.iter().map(|&d| d as u32).sum()
    }

    /// Σd_i = 3g − 3 + n.
    pub fn is_dimensional(&self) -> bool {
        self.degree_sum() as i64 == 3 * self.genus as i64 - 3 + self.n() as i64
    }
}

impl fmt::Debug for CorrelatorKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "<")?;
        for (i, d) in self.degrees.iter().enumerate() {
            if i > 0 {
                write!(f, " ")?;
            }
            write!(f, "t{d}")?;
        }
        write!(f, ">_{}", self.genus)
    }
}

/// Partitions of `size` with parts ≤ `max_part` and at most `max_len` parts,
/// in descending lexicographic order.
pub fn partition_iter(size: u32, max_part: u32, max_len: u32) -> PartitionIter {
    PartitionIter::new(size, max_part, max_len)
}

pub struct PartitionIter {
    current: Option<Vec<u32>>,
    max_len: u32,
}

impl PartitionIter {
    fn new(size: u32, max_part: u32, max_len: u32) -> Self {
        let current = fill(size, max_part.min(size.max(1)), max_len);
        PartitionIter { current, max_len }
    }
}

/// Greedy lexicographically largest filling of `rem` with parts ≤ `cap` and
/// at most `slots` parts.
fn fill(rem: u32, cap: u32, slots: u32) -> Option<Vec<u32>> {
    if rem == 0 {
        return Some(Vec::new());
    }
    if cap == 0 || (cap as u64) * (slots as u64) < rem as u64 {
        return None;
    }
    let mut v = Vec::with_capacity((rem / cap + 1) as usize);
    let mut r = rem;
    while r > 0 {
        let p = r.min(cap);
        v.push(p);
        r -= p;
    }
    Some(v)
}

impl Iterator for PartitionIter {
    type Item = Partition;

    fn next(&mut self) -> Option<Partition> {
        let cur = self.current.take()?;
        let out = Partition::new(cur.iter().copied());
        let mut tail: u32 = 0;
        for i in (0..cur.len()).rev() {
            let p = cur[i];
            if p >= 2 {
                let slots = self.max_len - i as u32 - 1;
                if let Some(rest) = fill(tail + 1, p - 1, slots) {
                    let mut nxt = cur[..i].to_vec();
                    nxt.push(p - 1);
                    nxt.extend(rest);
                    self.current = Some(nxt);
                    break;
                }
            }
            tail += p;
        }
        Some(out)
    }
}

/// Partitions μ with every part ≥ `min_part` and |μ| ≤ `max_size`, ordered by
/// size and then descending lexicographically.
pub fn partitions_min_part(max_size: u32, min_part: u32) -> Vec<Partition> {
    let mut out = Vec::new();
    for s in 0..=max_size {
        out.extend(partition_iter(s, s.max(1), s.max(1)).filter(|p| p.parts().all(|x| x >= min_part)));
    }
    out
}

/// The index set Q_g = {μ : parts ≥ 2, |μ| ≤ 3g − 3}.
pub fn q_set(g: u32) -> Vec<Partition> {
    if g == 0 {
        return Vec::new();
    }
    partitions_min_part(3 * g - 3, 2)
}

pub fn factorial(n: u32) -> BigInt {
    (1..=n).fold(BigInt::one(), |acc, k| acc * k)
}

/// k!! for k ≥ −1, with (−1)!! = 0!! = 1.
pub fn double_factorial(k: i64) -> Result<BigInt> {
    if k < -1 {
        return Err(WkError::Domain(format!("double factorial of {k}")));
    }
    let mut acc = BigInt::one();
    let mut j = k;
    while j > 1 {
        acc *= j;
        j -= 2;
    }
    Ok(acc)
}

pub fn binomial(n: u32, k: u32) -> BigInt {
    if k > n {
        return BigInt::zero();
    }
    let k = k.min(n - k);
    let mut acc = BigInt::one();
    for i in 0..k {
        acc = acc * (n - i) / (i + 1);
    }
    acc
}

/// Π_k mult_k(λ)!
pub fn zstab(lambda: &Partition) -> BigInt {
    lambda
        .multiplicities()
        .into_iter()
        .fold(BigInt::one(), |acc, (_, m)| acc * factorial(m as u32))
}

/// (Σ k_i)! / Π k_i!
pub fn multinomial(ks: &[u32]) -> BigInt {
    let total: u32 = ks.iter().sum();
    ks.iter()
        .fold(factorial(total), |acc, &k| acc / factorial(k))
}

/// x^k as a signed power of a small integer base.
pub fn pow_i(base: i64, k: u32) -> BigInt {
    num_traits::pow(BigInt::from(base), k as usize)
}

pub fn is_negative(r: &Rational) -> bool {
    r.is_negative()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;

    fn p(v: &[u32]) -> Partition {
        Partition::new(v.iter().copied())
    }

    #[test]
    fn enumerates_in_descending_lex_order() {
        let got: Vec<_> = partition_iter(4, 4, 4).collect();
        assert_eq!(got, vec![p(&[4]), p(&[3, 1]), p(&[2, 2]), p(&[2, 1, 1]), p(&[1, 1, 1, 1])]);
        assert_eq!(partition_iter(0, 5, 5).collect::<Vec<_>>(), vec![Partition::empty()]);
        assert_eq!(partition_iter(5, 2, 2).count(), 0);
        assert_eq!(partition_iter(6, 3, 2).collect::<Vec<_>>(), vec![p(&[3, 3])]);
    }

    #[test]
    fn counts_match_partition_numbers() {
        // p(n) for n = 0..=15
        let known = [1, 1, 2, 3, 5, 7, 11, 15, 22, 30, 42, 56, 77, 101, 135, 176];
        for (n, &c) in known.iter().enumerate() {
            let n = n as u32;
            assert_eq!(partition_iter(n, n.max(1), n.max(1)).count(), c, "n = {n}");
        }
    }

    #[test]
    fn q4_has_thirty_elements() {
        assert_eq!(q_set(4).len(), 30);
        assert_eq!(q_set(1), vec![Partition::empty()]);
    }

    #[test]
    fn double_factorials() {
        assert_eq!(double_factorial(-1).unwrap(), BigInt::from(1));
        assert_eq!(double_factorial(0).unwrap(), BigInt::from(1));
        assert_eq!(double_factorial(5).unwrap(), BigInt::from(15));
        assert_eq!(double_factorial(7).unwrap(), BigInt::from(105));
        assert!(double_factorial(-2).is_err());
    }

    #[test]
    fn zstab_examples() {
        // 2!·3!
        assert_eq!(zstab(&p(&[5, 5, 2, 2, 2])), BigInt::from(12));
        assert_eq!(zstab(&Partition::empty()), BigInt::from(1));
        assert_eq!(zstab(&p(&[3, 2, 1])), BigInt::from(1));
    }

    #[test]
    fn conjugate_is_involution() {
        for q in partition_iter(9, 9, 9) {
            assert_eq!(q.conjugate().conjugate(), q);
            assert_eq!(q.conjugate().size(), 9);
            assert_eq!(q.conjugate().first() as usize, q.len());
        }
    }

    #[test]
    fn rational_text_round_trip() {
        let r = rat(-29, 5760);
        assert_eq!(rational_pq(&r), "-29/5760");
        assert_eq!(parse_rational("-29/5760").unwrap(), r);
        assert_eq!(parse_rational("6/4").unwrap(), rat(3, 2));
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational("x").is_err());
    }

    #[test]
    fn key_rejects_unstable() {
        assert!(CorrelatorKey::new(0, &[0, 0]).is_err());
        assert!(CorrelatorKey::new(1, &[]).is_err());
        let k = CorrelatorKey::new(2, &[2, 3]).unwrap();
        assert_eq!(k.degrees(), vec![3, 2]);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn iter_is_exhaustive_and_unique(size in 0u32..14, mp in 1u32..8, ml in 1u32..8) {
                let all: Vec<_> = partition_iter(size, mp, ml).collect();
                let set: HashSet<_> = all.iter().cloned().collect();
                prop_assert_eq!(set.len(), all.len());
                let brute: Vec<_> = partition_iter(size, size.max(1), size.max(1))
                    .filter(|q| q.first() <= mp && q.len() as u32 <= ml)
                    .collect();
                prop_assert_eq!(brute, all.clone());
                for w in all.windows(2) {
                    prop_assert!(w[0] > w[1]);
                }
            }

            #[test]
            fn zstab_divides_length_factorial(v in proptest::collection::vec(1u32..5, 0..9)) {
                let q = Partition::new(v);
                let f = factorial(q.len() as u32);
                prop_assert!((f % zstab(&q)).is_zero());
            }

            #[test]
            fn rational_add_sub_round_trip(a in any::<i64>(), b in 1i64..i64::MAX, c in any::<i64>(), d in 1i64..i64::MAX) {
                let x = rat(a, b);
                let y = rat(c, d);
                prop_assert_eq!(&(&x + &y) - &y, x.clone());
                prop_assert_eq!(&(&x - &y) + &y, x.clone());
                if c != 0 {
                    prop_assert_eq!(&(&x * &y) / &y, x);
                }
            }
        }
    }
}
