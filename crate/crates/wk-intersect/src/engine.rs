//! ⟨τ_{d1}…τ_{dn}⟩_g from the string and dilaton equations and the L_m
//! Virasoro constraints, memoised.

use std::collections::HashMap;
use std::sync::atomic::{AtomicU64, Ordering};

use num_bigint::BigInt;
use num_traits::{One, Zero};
use parking_lot::RwLock;
use smallvec::SmallVec;

use crate::combinatorics::{double_factorial, multinomial, rat, rat_int, CorrelatorKey, Rational};
use crate::error::{Result, WkError};

type Degrees = SmallVec<[u16; 16]>;

/// Memo store with hit/miss counters. Only dimensional keys are stored.
#[derive(Default)]
pub struct CorrelatorCache {
    store: RwLock<HashMap<CorrelatorKey, Rational>>,
    hits: AtomicU64,
    misses: AtomicU64,
}

impl CorrelatorCache {
    pub fn len(&self) -> usize {
        self.store.read().len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn hits(&self) -> u64 {
        self.hits.load(Ordering::Relaxed)
    }

    pub fn misses(&self) -> u64 {
        self.misses.load(Ordering::Relaxed)
    }

    pub fn reset_counters(&self) {
        self.hits.store(0, Ordering::Relaxed);
        self.misses.store(0, Ordering::Relaxed);
    }

    fn get(&self, key: &CorrelatorKey) -> Option<Rational> {
        let v = self.store.read().get(key).cloned();
        match v {
            Some(_) => self.hits.fetch_add(1, Ordering::Relaxed),
            None => self.misses.fetch_add(1, Ordering::Relaxed),
        };
        v
    }

    /// Idempotent insert: a second writer of the same key must agree.
    fn put(&self, key: CorrelatorKey, value: Rational) {
        let mut w = self.store.write();
        if let Some(prev) = w.get(&key) {
            debug_assert_eq!(prev, &value, "cache conflict at {key:?}");
            return;
        }
        w.insert(key, value);
    }

    /// All entries in canonical (genus, degrees) order.
    pub fn snapshot(&self) -> Vec<(CorrelatorKey, Rational)> {
        let mut v: Vec<_> = self.store.read().iter().map(|(k, x)| (k.clone(), x.clone())).collect();
        v.sort_by(|a, b| a.0.cmp(&b.0));
        v
    }
}

/// The recursion engine. Cheap to share behind `&`; all methods take `&self`.
pub struct Engine {
    cache: CorrelatorCache,
    // odd[j] = (2j − 1)!!, so odd[0] = (−1)!! = 1
    odd: RwLock<Vec<BigInt>>,
}

impl Default for Engine {
    fn default() -> Self {
        Engine::new()
    }
}

impl Engine {
    pub fn new() -> Self {
        Self::with_double_factorial_bound(64)
    }

    /// Precomputes (2j − 1)!! for 2j − 1 ≤ `bound`.
    pub fn with_double_factorial_bound(bound: usize) -> Self {
        let e = Engine { cache: CorrelatorCache::default(), odd: RwLock::new(vec![BigInt::one()]) };
        e.odd_df(bound as i64 | 1);
        e
    }

    pub fn cache(&self) -> &CorrelatorCache {
        &self.cache
    }

    /// k!! for odd k ≥ −1.
    fn odd_df(&self, k: i64) -> BigInt {
        debug_assert!(k >= -1 && k % 2 != 0);
        let j = ((k + 1) / 2) as usize;
        if let Some(v) = self.odd.read().get(j) {
            return v.clone();
        }
        let mut w = self.odd.write();
        while w.len() <= j {
            let i = w.len() as i64;
            let next = w.last().unwrap() * BigInt::from(2 * i - 1);
            w.push(next);
        }
        w[j].clone()
    }

    /// Seeds the memo with a known value, rejecting non-dimensional keys and
    /// conflicts with an already stored value.
    pub fn insert_known(&self, key: CorrelatorKey, value: Rational) -> Result<()> {
        if !key.is_dimensional() {
            return Err(WkError::Integrity(format!("{key:?} violates the dimension constraint")));
        }
        if let Some(prev) = self.cache.store.read().get(&key) {
            if prev != &value {
                return Err(WkError::Integrity(format!("conflicting values for {key:?}")));
            }
            return Ok(());
        }
        self.cache.put(key, value);
        Ok(())
    }

    /// The intersection number ⟨τ_{d1}…τ_{dn}⟩_g; zero off the dimension
    /// 3g − 3 + n.
    pub fn correlator(&self, g: u32, d: &[u32]) -> Result<Rational> {
        let key = CorrelatorKey::new(g, d)?;
        Ok(self.correlator_key(&key))
    }

    pub fn correlator_key(&self, key: &CorrelatorKey) -> Rational {
        if !key.is_dimensional() {
            return Rational::zero();
        }
        self.eval(key.genus(), key.raw())
    }

    fn eval(&self, g: u32, d: &[u16]) -> Rational {
        let key = CorrelatorKey::from_sorted_unchecked(g, d.iter().copied().collect());
        if let Some(v) = self.cache.get(&key) {
            return v;
        }
        let v = self.compute(g, d);
        self.cache.put(key, v.clone());
        v
    }

    /// Value for a possibly non-dimensional or unstable argument list
    /// (unsorted is fine); unstable or non-dimensional give 0.
    fn sub(&self, g: i64, d: &mut Degrees) -> Rational {
        let n = d.len() as i64;
        if g < 0 || 2 * g - 2 + n <= 0 {
            return Rational::zero();
        }
        let s: i64 = d.iter().map(|&x| x as i64).sum();
        if s != 3 * g - 3 + n {
            return Rational::zero();
        }
        d.sort_unstable_by(|a, b| b.cmp(a));
        self.eval(g as u32, d)
    }

    fn compute(&self, g: u32, d: &[u16]) -> Rational {
        let n = d.len();
        if g == 0 && d == [0, 0, 0] {
            return Rational::one();
        }
        if g == 1 && d == [1] {
            return rat(1, 24);
        }
        // string
        if n >= 2 && *d.last().unwrap() == 0 {
            let rest = &d[..n - 1];
            let mut acc = Rational::zero();
            for (i, &x) in rest.iter().enumerate() {
                if x == 0 || (i > 0 && rest[i - 1] == x) {
                    continue;
                }
                let m = rest.iter().filter(|&&y| y == x).count();
                let mut nd: Degrees = rest.iter().copied().collect();
                nd[i] -= 1;
                acc += self.sub(g as i64, &mut nd) * rat(m as i64, 1);
            }
            return acc;
        }
        // dilaton
        if let Some(pos) = d.iter().position(|&x| x == 1) {
            if !(g == 1 && n == 1) {
                let mut nd: Degrees = d.iter().copied().collect();
                nd.remove(pos);
                let factor = 2 * g as i64 - 3 + n as i64;
                return self.sub(g as i64, &mut nd) * rat(factor, 1);
            }
        }
        self.virasoro(g, d)
    }

    /// L_m with the largest degree m + 1 as pivot; every degree is ≥ 2 here.
    fn virasoro(&self, g: u32, d: &[u16]) -> Rational {
        let m = d[0] as i64 - 1;
        debug_assert!(m >= 1);
        let rest: Degrees = d[1..].iter().copied().collect();
        let gi = g as i64;
        let mut acc = Rational::zero();

        // degree shifts
        for (i, &x) in rest.iter().enumerate() {
            if i > 0 && rest[i - 1] == x {
                continue;
            }
            let mult = rest.iter().filter(|&&y| y == x).count();
            let x = x as i64;
            let ratio = self.odd_df(2 * x + 2 * m + 1) / self.odd_df(2 * x - 1);
            let mut nd = rest.clone();
            nd[i] = (x + m) as u16;
            acc += self.sub(gi, &mut nd) * rat_int(ratio * mult);
        }

        // genus drop and splittings; the factor ½ with the symmetric sum
        let mut half = Rational::zero();
        for a in 0..m {
            let b = m - 1 - a;
            let w = self.odd_df(2 * a + 1) * self.odd_df(2 * b + 1);
            let mut nd = rest.clone();
            nd.push(a as u16);
            nd.push(b as u16);
            let mut term = self.sub(gi - 1, &mut nd);
            term += self.splittings(gi, &rest, a as u16, b as u16);
            half += term * rat_int(w);
        }
        acc += half / rat(2, 1);

        acc / rat_int(self.odd_df(2 * m + 3))
    }

    /// Σ over I ⊔ J = rest and g1 + g2 = g of ⟨τ_I τ_a⟩_{g1} ⟨τ_J τ_b⟩_{g2},
    /// counting labelled splittings of the multiset.
    fn splittings(&self, g: i64, rest: &[u16], a: u16, b: u16) -> Rational {
        let mut groups: Vec<(u16, usize)> = Vec::new();
        for &x in rest {
            match groups.last_mut() {
                Some((v, c)) if *v == x => *c += 1,
                _ => groups.push((x, 1)),
            }
        }
        let mut acc = Rational::zero();
        let mut take = vec![0usize; groups.len()];
        loop {
            let mut left: Degrees = SmallVec::new();
            let mut right: Degrees = SmallVec::new();
            let mut weight = BigInt::one();
            let mut sum_left: i64 = 0;
            for (gi, &(v, c)) in groups.iter().enumerate() {
                let t = take[gi];
                left.extend(std::iter::repeat(v).take(t));
                right.extend(std::iter::repeat(v).take(c - t));
                weight *= crate::combinatorics::binomial(c as u32, t as u32);
                sum_left += v as i64 * t as i64;
            }
            left.push(a);
            right.push(b);
            // genus fixed by the dimension constraint on the left factor
            let nl = left.len() as i64;
            let num = sum_left + a as i64 + 3 - nl;
            if num >= 0 && num % 3 == 0 {
                let g1 = num / 3;
                let g2 = g - g1;
                if g2 >= 0 {
                    let l = self.sub(g1, &mut left);
                    if !l.is_zero() {
                        let r = self.sub(g2, &mut right);
                        if !r.is_zero() {
                            acc += l * r * rat_int(weight);
                        }
                    }
                }
            }
            // next sub-multiset
            let mut i = 0;
            loop {
                if i == groups.len() {
                    return acc;
                }
                if take[i] < groups[i].1 {
                    take[i] += 1;
                    break;
                }
                take[i] = 0;
                i += 1;
            }
        }
    }
}

/// Genus-0 multinomial (n − 3 choose d1, …, dn); zero off dimension.
pub fn genus0_closed(d: &[u32]) -> Rational {
    let n = d.len();
    if n < 3 || d.iter().sum::<u32>() as usize != n - 3 {
        return Rational::zero();
    }
    rat_int(multinomial(d))
}

/// k!! re-exported for callers that only need the engine module.
pub fn dfact(k: i64) -> Result<BigInt> {
    double_factorial(k)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::combinatorics::partition_iter;
    use proptest::prelude::*;

    #[test]
    fn known_values() {
        let e = Engine::new();
        assert_eq!(e.correlator(0, &[0, 0, 0]).unwrap(), rat(1, 1));
        assert_eq!(e.correlator(2, &[4]).unwrap(), rat(1, 1152));
        assert_eq!(e.correlator(2, &[3, 2]).unwrap(), rat(29, 5760));
        assert_eq!(e.correlator(2, &[2, 3]).unwrap(), rat(29, 5760));
        assert_eq!(e.correlator(1, &[1, 1]).unwrap(), rat(1, 24));
        assert_eq!(e.correlator(1, &[1, 0]).unwrap(), rat(0, 1));
        // 1/(24^g g!) for the one-point function
        assert_eq!(e.correlator(3, &[7]).unwrap(), rat(1, 82944));
        assert_eq!(e.correlator(2, &[2, 2, 2]).unwrap(), rat(7, 240));
        assert_eq!(e.correlator(3, &[2, 2, 2, 2, 2, 2]).unwrap(), rat(1225, 144));
    }

    #[test]
    fn unstable_is_an_error() {
        let e = Engine::new();
        assert!(matches!(e.correlator(0, &[0, 0]), Err(WkError::Unstable { .. })));
        assert!(e.correlator(1, &[]).is_err());
    }

    #[test]
    fn genus0_examples() {
        assert_eq!(genus0_closed(&[0, 0, 0]), rat(1, 1));
        assert_eq!(genus0_closed(&[1, 0, 0, 0]), rat(1, 1));
        assert_eq!(genus0_closed(&[2, 1, 0, 0, 0, 0]), rat(3, 1));
        assert_eq!(genus0_closed(&[2, 0, 0]), rat(0, 1));
    }

    #[test]
    fn engine_matches_genus0_multinomial() {
        let e = Engine::new();
        for n in 3..=8u32 {
            for p in partition_iter(n - 3, n, n) {
                let mut d = p.to_vec();
                d.resize(n as usize, 0);
                assert_eq!(e.correlator(0, &d).unwrap(), genus0_closed(&d), "{d:?}");
            }
        }
    }

    #[test]
    fn cache_replay_hits() {
        let e = Engine::new();
        let v = e.correlator(3, &[4, 3, 2, 0]).unwrap();
        e.cache().reset_counters();
        assert_eq!(e.correlator(3, &[4, 3, 2, 0]).unwrap(), v);
        assert_eq!(e.cache().misses(), 0);
        assert!(e.cache().snapshot().iter().all(|(k, _)| k.is_dimensional()));
    }

    fn stable_key() -> impl Strategy<Value = (u32, Vec<u32>)> {
        (0u32..=4, 1usize..=5).prop_flat_map(|(g, n)| {
            let n = if 2 * g as usize + n <= 2 { 3 } else { n };
            let dim = 3 * g as usize + n - 3;
            (Just(g), proptest::collection::vec(0..=dim as u32, n - 1)).prop_map(move |(g, mut v)| {
                // spread the remaining dimension greedily to keep keys nonzero-ish
                let s: u32 = v.iter().sum();
                let total = dim as u32;
                if s > total {
                    for x in v.iter_mut() {
                        *x = 0;
                    }
                    v[0] = 0;
                }
                let s: u32 = v.iter().sum();
                v.push(total - s.min(total));
                (g, v)
            })
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]
        #[test]
        fn string_identity((g, d) in stable_key()) {
            let e = Engine::new();
            let mut with0 = d.clone();
            with0.push(0);
            let lhs = e.correlator(g, &with0).unwrap();
            let mut rhs = Rational::zero();
            for i in 0..d.len() {
                if d[i] > 0 {
                    let mut dd = d.clone();
                    dd[i] -= 1;
                    rhs += e.correlator(g, &dd).unwrap();
                }
            }
            prop_assert_eq!(lhs, rhs);
        }

        #[test]
        fn dilaton_identity((g, d) in stable_key()) {
            let e = Engine::new();
            let mut with1 = d.clone();
            with1.push(1);
            let n = d.len() as i64;
            prop_assert_eq!(e.correlator(g, &with1).unwrap(), e.correlator(g, &d).unwrap() * rat(2 * g as i64 - 2 + n, 1));
        }

        #[test]
        fn permutation_invariance((g, d) in stable_key(), rot in 0usize..6) {
            let e = Engine::new();
            let mut r = d.clone();
            let k = rot % r.len();
            r.rotate_left(k);
            prop_assert_eq!(e.correlator(g, &d).unwrap(), e.correlator(g, &r).unwrap());
        }
    }
}
