//! Symmetric polynomials in the elementary basis e_Λ = e_{Λ1}⋯e_{Λℓ}.

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use smallvec::SmallVec;

use crate::combinatorics::{factorial, rat_int, zstab, Partition, Rational};
use crate::error::{Result, WkError};
use crate::poly::MPoly;
use crate::scalar::Scalar;

/// Sparse map Partition → scalar, read as Σ c_Λ e_Λ.
#[derive(Clone, PartialEq)]
pub struct EPolynomial<S: Scalar = Rational> {
    terms: BTreeMap<Partition, S>,
    nvars_hint: Option<usize>,
}

impl<S: Scalar> Default for EPolynomial<S> {
    fn default() -> Self {
        EPolynomial { terms: BTreeMap::new(), nvars_hint: None }
    }
}

impl<S: Scalar> EPolynomial<S> {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_nvars(mut self, n: usize) -> Self {
        self.nvars_hint = Some(n);
        self
    }

    pub fn nvars_hint(&self) -> Option<usize> {
        self.nvars_hint
    }

    pub fn constant(c: S) -> Self {
        let mut p = Self::new();
        p.add_term(Partition::empty(), c);
        p
    }

    /// c·e_Λ
    pub fn term(lambda: Partition, c: S) -> Self {
        let mut p = Self::new();
        p.add_term(lambda, c);
        p
    }

    pub fn from_terms<I: IntoIterator<Item = (Partition, S)>>(it: I) -> Self {
        let mut p = Self::new();
        for (k, c) in it {
            p.add_term(k, c);
        }
        p
    }

    pub fn terms(&self) -> &BTreeMap<Partition, S> {
        &self.terms
    }

    pub fn into_terms(self) -> BTreeMap<Partition, S> {
        self.terms
    }

    pub fn coeff(&self, lambda: &Partition) -> S {
        self.terms.get(lambda).cloned().unwrap_or_else(S::zero)
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn add_term(&mut self, lambda: Partition, c: S) {
        if c.is_zero() {
            return;
        }
        match self.terms.get_mut(&lambda) {
            Some(e) => {
                *e = e.clone() + &c;
                if e.is_zero() {
                    self.terms.remove(&lambda);
                }
            }
            None => {
                self.terms.insert(lambda, c);
            }
        }
    }

    /// Weight when every key has the same size.
    pub fn homogeneous_weight(&self) -> Option<u32> {
        let mut it = self.terms.keys().map(|k| k.size());
        let w = it.next().unwrap_or(0);
        it.all(|x| x == w).then_some(w)
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (k, c) in &other.terms {
            out.add_term(k.clone(), c.clone());
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (k, c) in &other.terms {
            out.add_term(k.clone(), -c.clone());
        }
        out
    }

    pub fn scale(&self, r: &Rational) -> Self {
        Self::from_terms(self.terms.iter().map(|(k, c)| (k.clone(), c.scale(r))))
            .with_hint(self.nvars_hint)
    }

    fn with_hint(mut self, h: Option<usize>) -> Self {
        self.nvars_hint = h;
        self
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut out = Self::new();
        for (a, x) in &self.terms {
            for (b, y) in &other.terms {
                out.add_term(a.union(b), x.clone() * y);
            }
        }
        out
    }

    pub fn pow(&self, k: u32) -> Self {
        let mut out = Self::constant(S::one());
        for _ in 0..k {
            out = out.mul(self);
        }
        out
    }

    /// Drops keys with a part larger than `n` (e_k vanishes in n variables).
    pub fn truncate_vars(&self, n: usize) -> Self {
        Self::from_terms(
            self.terms
                .iter()
                .filter(|(k, _)| k.first() as usize <= n)
                .map(|(k, c)| (k.clone(), c.clone())),
        )
        .with_nvars(n)
    }

    /// Monomial-basis coefficients in `n` variables, keyed by exponent partition.
    pub fn to_monomials(&self, n: usize) -> BTreeMap<Partition, S> {
        let mut out: BTreeMap<Partition, S> = BTreeMap::new();
        for (lam, c) in &self.terms {
            for (kappa, m) in expand_e(lam, n) {
                let v = c.scale_int(&m);
                let e = out.entry(kappa).or_insert_with(S::zero);
                *e = e.clone() + &v;
            }
        }
        out.retain(|_, c| !c.is_zero());
        out
    }

    pub fn map<T: Scalar>(&self, f: impl Fn(&S) -> T) -> EPolynomial<T> {
        EPolynomial::from_terms(self.terms.iter().map(|(k, c)| (k.clone(), f(c)))).with_hint(self.nvars_hint)
    }
}

impl<S: Scalar> fmt::Debug for EPolynomial<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_map().entries(self.terms.iter()).finish()
    }
}

/// Display ordering: by length of the non-1 part, then its size, then
/// descending lexicographic.
pub fn display_order(a: &Partition, b: &Partition) -> std::cmp::Ordering {
    let (sa, sb) = (a.without_ones(), b.without_ones());
    (sa.len(), sa.size())
        .cmp(&(sb.len(), sb.size()))
        .then_with(|| sb.cmp(&sa))
        .then_with(|| b.cmp(a))
}

/// Renders `e2 e1^3` style factors.
pub fn e_monomial_text(lambda: &Partition) -> String {
    let mut parts = Vec::new();
    for (v, m) in lambda.multiplicities() {
        if m == 1 {
            parts.push(format!("e{v}"));
        } else {
            parts.push(format!("e{v}^{m}"));
        }
    }
    parts.join(" ")
}

impl fmt::Display for EPolynomial<Rational> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let mut keys: Vec<&Partition> = self.terms.keys().collect();
        keys.sort_by(|a, b| display_order(a, b));
        for (i, k) in keys.iter().enumerate() {
            let c = &self.terms[*k];
            let neg = c.is_negative();
            let a = c.abs();
            if i == 0 {
                if neg {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {} ", if neg { "-" } else { "+" })?;
            }
            let mono = e_monomial_text(k);
            let coef = if a.is_integer() { a.numer().to_string() } else { format!("{}/{}", a.numer(), a.denom()) };
            match (a.is_one(), mono.is_empty()) {
                (_, true) => write!(f, "{coef}")?,
                (true, false) => write!(f, "{mono}")?,
                (false, false) => write!(f, "{coef} {mono}")?,
            }
        }
        Ok(())
    }
}

/// Values e_0(x), …, e_m(x) with m = len(x).
pub fn elementary_values<S: Scalar>(x: &[S]) -> Vec<S> {
    let mut e = vec![S::zero(); x.len() + 1];
    e[0] = S::one();
    for (i, xi) in x.iter().enumerate() {
        for k in (1..=i + 1).rev() {
            e[k] = e[k].clone() + &(e[k - 1].clone() * xi);
        }
    }
    e
}

/// Substitutes e_k(x); e_k = 0 when k exceeds the number of variables.
pub fn e_eval<S: Scalar>(p: &EPolynomial<S>, x: &[S]) -> S {
    let e = elementary_values(x);
    let mut acc = S::zero();
    'terms: for (lam, c) in p.terms() {
        let mut t = c.clone();
        for part in lam.parts() {
            match e.get(part as usize) {
                Some(v) => t = t * v,
                None => continue 'terms,
            }
        }
        acc = acc + &t;
    }
    acc
}

type Key = SmallVec<[u16; 16]>;

/// Multiplies a monomial-basis element m_ρ (n variables) by e_k, calling
/// `emit(κ, coefficient)` for every resulting m_κ.
fn pieri_e(rho: &[u16], k: usize, n: usize, emit: &mut impl FnMut(Key, u64)) {
    if rho.len() + k > n + rho.iter().filter(|&&p| p > 0).count() && k > n {
        return;
    }
    // Groups of equal values, zeros included as the last group.
    let mut groups: SmallVec<[(u16, usize); 16]> = SmallVec::new();
    for &p in rho {
        match groups.last_mut() {
            Some((v, m)) if *v == p => *m += 1,
            _ => groups.push((p, 1)),
        }
    }
    let zeros = n - rho.len();
    if zeros > 0 {
        groups.push((0, zeros));
    }
    let mut picks: SmallVec<[usize; 16]> = SmallVec::from_elem(0, groups.len());
    fn rec(
        groups: &[(u16, usize)],
        picks: &mut [usize],
        idx: usize,
        left: usize,
        emit: &mut impl FnMut(Key, u64),
    ) {
        if idx == groups.len() {
            if left > 0 {
                return;
            }
            let mut kappa: Key = SmallVec::new();
            let mut coef: u64 = 1;
            // Value v+1 receives picks[i] bumped entries; it also keeps the
            // un-picked entries of the group with value v+1 (index i−1).
            for i in 0..groups.len() {
                let (v, m) = groups[i];
                let up = picks[i];
                if up > 0 {
                    let stay_above = if i > 0 && groups[i - 1].0 == v + 1 {
                        groups[i - 1].1 - picks[i - 1]
                    } else {
                        0
                    };
                    coef *= binom_u64(stay_above + up, up);
                    kappa.extend(std::iter::repeat(v + 1).take(up));
                }
                if v > 0 {
                    kappa.extend(std::iter::repeat(v).take(m - up));
                }
            }
            kappa.sort_unstable_by(|a, b| b.cmp(a));
            emit(kappa, coef);
            return;
        }
        let m = groups[idx].1;
        for take in 0..=m.min(left) {
            picks[idx] = take;
            rec(groups, picks, idx + 1, left - take, emit);
        }
        picks[idx] = 0;
    }
    rec(&groups, &mut picks, 0, k, emit);
}

fn binom_u64(n: usize, k: usize) -> u64 {
    let mut acc: u64 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u64 / (i + 1) as u64;
    }
    acc
}

/// Monomial expansion of e_Λ in `n` variables: κ ↦ [x^κ] e_Λ.
pub fn expand_e(lambda: &Partition, n: usize) -> HashMap<Partition, BigInt> {
    if lambda.first() as usize > n {
        return HashMap::new();
    }
    let mut cur: HashMap<Key, BigInt> = HashMap::new();
    cur.insert(Key::new(), BigInt::one());
    for k in lambda.parts() {
        let mut next: HashMap<Key, BigInt> = HashMap::with_capacity(cur.len() * 2);
        for (rho, c) in &cur {
            pieri_e(rho, k as usize, n, &mut |kappa, m| {
                let e = next.entry(kappa).or_insert_with(BigInt::zero);
                *e += c * m;
            });
        }
        cur = next;
    }
    cur.into_iter().map(|(k, v)| (Partition::from_sorted(k), v)).collect()
}

fn validate_input<'a>(keys: impl Iterator<Item = &'a Partition>, n: usize) -> Result<()> {
    let mut weight = None;
    for k in keys {
        if k.len() > n {
            return Err(WkError::Integrity(format!(
                "monomial {k:?} needs more than {n} variables"
            )));
        }
        match weight {
            None => weight = Some(k.size()),
            Some(w) if w != k.size() => {
                return Err(WkError::Domain(format!(
                    "input is not homogeneous: weights {w} and {}",
                    k.size()
                )))
            }
            _ => {}
        }
    }
    Ok(())
}

/// Converts monomial-basis data in `n` variables to the e-basis by repeatedly
/// eliminating the lexicographically leading exponent ν with e_{ν′}.
pub fn monomials_to_e<S: Scalar>(coeffs: &BTreeMap<Partition, S>, n: usize) -> Result<EPolynomial<S>> {
    validate_input(coeffs.keys(), n)?;
    let mut residual: BTreeMap<Partition, S> =
        coeffs.iter().filter(|(_, c)| !c.is_zero()).map(|(k, c)| (k.clone(), c.clone())).collect();
    let mut out = EPolynomial::new().with_nvars(n);
    while let Some((nu, c)) = residual.pop_last() {
        if c.is_zero() {
            continue;
        }
        let lam = nu.conjugate();
        for (kappa, m) in expand_e(&lam, n) {
            if kappa == nu {
                if !m.is_one() {
                    return Err(WkError::Integrity(format!("leading coefficient of e_{lam:?} is {m}")));
                }
                continue;
            }
            if kappa > nu {
                return Err(WkError::Integrity(format!(
                    "e_{lam:?} has a term {kappa:?} above its leading monomial"
                )));
            }
            let e = residual.entry(kappa).or_insert_with(S::zero);
            *e = e.clone() - &c.scale_int(&m);
        }
        out.add_term(lam, c);
    }
    Ok(out)
}

/// Rational specialisation of [`monomials_to_e`] that clears denominators
/// first and eliminates over the integers.
pub fn monomials_to_e_rational(coeffs: &BTreeMap<Partition, Rational>, n: usize) -> Result<EPolynomial<Rational>> {
    validate_input(coeffs.keys(), n)?;
    let lcm = coeffs.values().fold(BigInt::one(), |acc, c| acc.lcm(c.denom()));
    let mut residual: BTreeMap<Partition, BigInt> = coeffs
        .iter()
        .filter(|(_, c)| !c.is_zero())
        .map(|(k, c)| (k.clone(), c.numer() * (&lcm / c.denom())))
        .collect();
    let mut out = EPolynomial::new().with_nvars(n);
    while let Some((nu, c)) = residual.pop_last() {
        if c.is_zero() {
            continue;
        }
        let lam = nu.conjugate();
        for (kappa, m) in expand_e(&lam, n) {
            if kappa == nu {
                continue;
            }
            if kappa > nu {
                return Err(WkError::Integrity(format!(
                    "e_{lam:?} has a term {kappa:?} above its leading monomial"
                )));
            }
            *residual.entry(kappa).or_insert_with(BigInt::zero) -= &c * m;
        }
        out.add_term(lam, Rational::new(c, lcm.clone()));
    }
    Ok(out)
}

/// Converts an explicit polynomial, checking symmetry first.
pub fn mpoly_to_e<S: Scalar>(p: &MPoly<S>) -> Result<EPolynomial<S>> {
    let coeffs = p.symmetric_coefficients()?;
    let mut by_weight: BTreeMap<u32, BTreeMap<Partition, S>> = BTreeMap::new();
    for (k, c) in coeffs {
        by_weight.entry(k.size()).or_default().insert(k, c);
    }
    let mut out = EPolynomial::new().with_nvars(p.nvars());
    for (_, part) in by_weight {
        out = out.add(&monomials_to_e(&part, p.nvars())?);
    }
    Ok(out.with_nvars(p.nvars()))
}

/// m_λ in a fixed number of variables.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MonomialSymmetric {
    lambda: Partition,
    nvars: usize,
}

impl MonomialSymmetric {
    pub fn new(lambda: Partition, nvars: usize) -> Result<Self> {
        if lambda.len() > nvars {
            return Err(WkError::Domain(format!("{lambda:?} has more than {nvars} parts")));
        }
        Ok(MonomialSymmetric { lambda, nvars })
    }

    pub fn lambda(&self) -> &Partition {
        &self.lambda
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    /// Distinct exponent vectors of m_λ.
    pub fn exponents(&self) -> Vec<Vec<u32>> {
        let mut base: Vec<u32> = self.lambda.to_vec();
        base.resize(self.nvars, 0);
        base.sort_unstable();
        let mut out = vec![base.clone()];
        while next_permutation(&mut base) {
            out.push(base.clone());
        }
        out
    }

    pub fn to_mpoly<S: Scalar>(&self) -> MPoly<S> {
        let mut p = MPoly::zero(self.nvars);
        for e in self.exponents() {
            p.add_term(e, S::one());
        }
        p
    }
}

fn next_permutation(v: &mut [u32]) -> bool {
    if v.len() < 2 {
        return false;
    }
    let mut i = v.len() - 1;
    while i > 0 && v[i - 1] >= v[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = v.len() - 1;
    while v[j] <= v[i - 1] {
        j -= 1;
    }
    v.swap(i - 1, j);
    v[i..].reverse();
    true
}

/// Σ_{σ ∈ S_n} Π_i args_i^{λ_σ(i)} with λ padded by zeros; equals
/// 𝒵_λ (n − ℓ)! m_λ(args).
pub fn augmented_monomial<S: Scalar>(lambda: &Partition, args: &[S]) -> Result<S> {
    let n = args.len();
    if lambda.len() > n {
        return Err(WkError::Domain(format!(
            "augmented monomial of {lambda:?} needs at least {} arguments",
            lambda.len()
        )));
    }
    let parts = lambda.to_vec();
    let mut used = vec![false; n];
    fn rec<S: Scalar>(parts: &[u32], args: &[S], used: &mut [bool], acc: S) -> S {
        let Some((&p, rest)) = parts.split_first() else {
            return acc;
        };
        let mut total = S::zero();
        for i in 0..args.len() {
            if used[i] {
                continue;
            }
            used[i] = true;
            let mut t = acc.clone();
            for _ in 0..p {
                t = t * &args[i];
            }
            total = total + &rec(rest, args, used, t);
            used[i] = false;
        }
        total
    }
    let s = rec(&parts, args, &mut used, S::one());
    Ok(s.scale_int(&factorial((n - lambda.len()) as u32)))
}

/// Res Π dv_i/v_i · m_λ(v) m_μ(1/v) = δ_{λμ} n!/(𝒵_λ (n − ℓ(λ))!).
pub fn pairing_residue(lambda: &Partition, mu: &Partition, n: usize) -> Rational {
    if lambda != mu || lambda.len() > n {
        return Rational::zero();
    }
    rat_int(factorial(n as u32)) / rat_int(zstab(lambda) * factorial((n - lambda.len()) as u32))
}

/// e_k as an EPolynomial.
pub fn e_k<S: Scalar>(k: u32) -> EPolynomial<S> {
    EPolynomial::term(Partition::new([k]), S::one())
}

/// Coefficient of a single monomial x^κ (sorted) in e_Λ, computed from the
/// 0/1-matrix count; used as a check on the Pieri expansion.
pub fn e_monomial_coefficient(lambda: &Partition, kappa: &Partition, n: usize) -> BigInt {
    let mut col: Vec<u32> = kappa.to_vec();
    col.resize(n, 0);
    fn rec(rows: &[u32], col: &mut [u32]) -> BigInt {
        let Some((&r, rest)) = rows.split_first() else {
            return if col.iter().all(|&c| c == 0) { BigInt::one() } else { BigInt::zero() };
        };
        let mut total = BigInt::zero();
        let n = col.len();
        let mut pick = Vec::new();
        fn choose(start: usize, left: u32, n: usize, pick: &mut Vec<usize>, col: &mut [u32], rest: &[u32], total: &mut BigInt) {
            if left == 0 {
                *total += rec(rest, col);
                return;
            }
            for i in start..n {
                if col[i] > 0 {
                    col[i] -= 1;
                    pick.push(i);
                    choose(i + 1, left - 1, n, pick, col, rest, total);
                    pick.pop();
                    col[i] += 1;
                }
            }
        }
        choose(0, r, n, &mut pick, col, rest, &mut total);
        total
    }
    let rows = lambda.to_vec();
    rec(&rows, &mut col)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::combinatorics::{partition_iter, rat};
    use proptest::prelude::*;

    fn p(v: &[u32]) -> Partition {
        Partition::new(v.iter().copied())
    }

    fn monos(entries: &[(&[u32], Rational)]) -> BTreeMap<Partition, Rational> {
        entries.iter().map(|(k, c)| (p(k), c.clone())).collect()
    }

    #[test]
    fn eval_examples() {
        let e1sq = EPolynomial::term(p(&[1, 1]), rat(1, 1));
        assert_eq!(e_eval(&e1sq, &[rat(1, 1), rat(1, 1)]), rat(4, 1));
        let e2 = e_k::<Rational>(2);
        assert_eq!(e_eval(&e2, &[rat(5, 1)]), rat(0, 1));
        // Newton: e1^3 − 3e1e2 + 3e3 = p3
        let p3 = EPolynomial::from_terms([
            (p(&[1, 1, 1]), rat(1, 1)),
            (p(&[2, 1]), rat(-3, 1)),
            (p(&[3]), rat(3, 1)),
        ]);
        let (a, b, c) = (rat(2, 3), rat(-5, 1), rat(7, 2));
        let direct = &a * &a * &a + &b * &b * &b + &c * &c * &c;
        assert_eq!(e_eval(&p3, &[a, b, c]), direct);
    }

    #[test]
    fn conversion_examples() {
        let sq = monos(&[(&[2], rat(1, 1)), (&[1, 1], rat(2, 1))]);
        assert_eq!(monomials_to_e(&sq, 2).unwrap(), EPolynomial::term(p(&[1, 1]), rat(1, 1)).with_nvars(2));
        let h2 = monos(&[(&[2], rat(1, 1)), (&[1, 1], rat(1, 1))]);
        let got = monomials_to_e(&h2, 2).unwrap();
        assert_eq!(got.to_string(), "e1^2 - e2");
        // 24·A_{1,3} from ⟨τ3τ0²⟩ = 1/24, ⟨τ2τ1τ0⟩ = ⟨τ1³⟩ = 2/24
        let a13 = monos(&[(&[3], rat(1, 1)), (&[2, 1], rat(2, 1)), (&[1, 1, 1], rat(2, 1))]);
        let got = monomials_to_e(&a13, 3).unwrap();
        assert_eq!(got.to_string(), "e1^3 - e2 e1 - e3");
    }

    #[test]
    fn rational_fast_path_agrees() {
        let a = monos(&[(&[3], rat(1, 3)), (&[2, 1], rat(5, 7)), (&[1, 1, 1], rat(-2, 1))]);
        assert_eq!(monomials_to_e(&a, 3).unwrap(), monomials_to_e_rational(&a, 3).unwrap());
    }

    #[test]
    fn rejects_bad_input() {
        let a = monos(&[(&[1, 1, 1], rat(1, 1))]);
        assert!(matches!(monomials_to_e(&a, 2), Err(WkError::Integrity(_))));
        let b = monos(&[(&[2], rat(1, 1)), (&[1], rat(1, 1))]);
        assert!(monomials_to_e(&b, 2).is_err());
        let x = MPoly::<Rational>::var(2, 0);
        assert!(matches!(mpoly_to_e(&x), Err(WkError::Integrity(_))));
    }

    #[test]
    fn augmented_examples() {
        let (a, b) = (rat(3, 1), rat(5, 1));
        assert_eq!(augmented_monomial(&p(&[1]), &[a.clone(), b.clone()]).unwrap(), &a + &b);
        let v = rat(2, 1);
        assert_eq!(augmented_monomial(&p(&[2, 2]), &[v.clone(), v.clone()]).unwrap(), rat(32, 1));
        assert_eq!(
            augmented_monomial(&p(&[2, 1]), &[a.clone(), b.clone()]).unwrap(),
            &a * &a * &b + &a * &b * &b
        );
        assert!(augmented_monomial(&p(&[1, 1, 1]), &[a]).is_err());
    }

    #[test]
    fn pairing_examples() {
        assert_eq!(pairing_residue(&p(&[2, 2]), &p(&[2, 2]), 2), rat(1, 1));
        assert_eq!(pairing_residue(&p(&[2]), &p(&[3]), 4), rat(0, 1));
        assert_eq!(pairing_residue(&p(&[1]), &p(&[1]), 3), rat(3, 1));
    }

    #[test]
    fn pairing_matches_brute_force_residue() {
        for n in 1..=4usize {
            for s in 0..=6u32 {
                for t in 0..=6u32 {
                    for lam in partition_iter(s, s.max(1), n as u32) {
                        for mu in partition_iter(t, t.max(1), n as u32) {
                            let a = MonomialSymmetric::new(lam.clone(), n).unwrap().exponents();
                            let b = MonomialSymmetric::new(mu.clone(), n).unwrap().exponents();
                            let count = a.iter().filter(|x| b.contains(x)).count();
                            assert_eq!(pairing_residue(&lam, &mu, n), rat(count as i64, 1));
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn pieri_expansion_matches_matrix_count() {
        for n in 1..=5usize {
            for s in 0..=7u32 {
                for lam in partition_iter(s, n as u32, s.max(1)) {
                    let exp = expand_e(&lam, n);
                    for kappa in partition_iter(s, s.max(1), n as u32) {
                        let want = e_monomial_coefficient(&lam, &kappa, n);
                        let got = exp.get(&kappa).cloned().unwrap_or_default();
                        assert_eq!(got, want, "e_{lam:?} at {kappa:?}, n = {n}");
                    }
                }
            }
        }
    }

    fn small_rat() -> impl Strategy<Value = Rational> {
        (-20i64..20, 1i64..6).prop_map(|(a, b)| rat(a, b))
    }

    proptest! {
        #[test]
        fn round_trip_through_monomials(n in 1usize..5, w in 0u32..8, cs in proptest::collection::vec(small_rat(), 30)) {
            let keys: Vec<_> = partition_iter(w, n as u32, w.max(1)).collect();
            let poly = EPolynomial::from_terms(keys.into_iter().zip(cs)).with_nvars(n);
            let m = poly.to_monomials(n);
            prop_assert_eq!(monomials_to_e(&m, n).unwrap(), poly.clone());
            prop_assert_eq!(monomials_to_e_rational(&m, n).unwrap(), poly);
        }

        #[test]
        fn eval_agrees_with_direct(n in 1usize..6, w in 0u32..9, cs in proptest::collection::vec(small_rat(), 40), xs in proptest::collection::vec(small_rat(), 5)) {
            let keys: Vec<_> = partition_iter(w, w.max(1), n as u32).collect();
            let m: BTreeMap<_, _> = keys.into_iter().zip(cs).collect();
            let e = monomials_to_e(&m, n).unwrap();
            let x = &xs[..n];
            let mut direct = Rational::zero();
            for (k, c) in &m {
                let mp: MPoly<Rational> = MonomialSymmetric::new(k.clone(), n).unwrap().to_mpoly();
                direct += c * mp.eval(x);
            }
            prop_assert_eq!(e_eval(&e, x), direct);
        }
    }
}
