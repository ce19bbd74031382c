//! Plain multivariate polynomials over explicit variables, used for
//! brute-force cross-checks and for the exact division in the three-point
//! formula.

use std::collections::BTreeMap;

use num_traits::Zero;

use crate::combinatorics::{Partition, Rational};
use crate::error::{Result, WkError};
use crate::scalar::Scalar;

/// Sparse polynomial in `nvars` variables keyed by exponent vectors.
#[derive(Clone, Debug, PartialEq)]
pub struct MPoly<S: Scalar = Rational> {
    nvars: usize,
    terms: BTreeMap<Vec<u32>, S>,
}

impl<S: Scalar> MPoly<S> {
    pub fn zero(nvars: usize) -> Self {
        MPoly { nvars, terms: BTreeMap::new() }
    }

    pub fn constant(nvars: usize, c: S) -> Self {
        let mut p = Self::zero(nvars);
        p.add_term(vec![0; nvars], c);
        p
    }

    /// The variable x_i.
    pub fn var(nvars: usize, i: usize) -> Self {
        let mut e = vec![0; nvars];
        e[i] = 1;
        let mut p = Self::zero(nvars);
        p.add_term(e, S::one());
        p
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn terms(&self) -> &BTreeMap<Vec<u32>, S> {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn add_term(&mut self, exp: Vec<u32>, c: S) {
        debug_assert_eq!(exp.len(), self.nvars);
        if c.is_zero() {
            return;
        }
        match self.terms.get_mut(&exp) {
            Some(e) => {
                *e = e.clone() + &c;
                if e.is_zero() {
                    self.terms.remove(&exp);
                }
            }
            None => {
                self.terms.insert(exp, c);
            }
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (e, c) in &other.terms {
            out.add_term(e.clone(), c.clone());
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (e, c) in &other.terms {
            out.add_term(e.clone(), -c.clone());
        }
        out
    }

    pub fn scale(&self, c: &S) -> Self {
        let mut out = Self::zero(self.nvars);
        for (e, x) in &self.terms {
            out.add_term(e.clone(), x.clone() * c);
        }
        out
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut out = Self::zero(self.nvars);
        for (a, x) in &self.terms {
            for (b, y) in &other.terms {
                let e: Vec<u32> = a.iter().zip(b).map(|(p, q)| p + q).collect();
                out.add_term(e, x.clone() * y);
            }
        }
        out
    }

    pub fn pow(&self, k: u32) -> Self {
        let mut out = Self::constant(self.nvars, S::one());
        for _ in 0..k {
            out = out.mul(self);
        }
        out
    }

    /// e_k(x_1, …, x_n) as an explicit polynomial.
    pub fn elementary(nvars: usize, k: usize) -> Self {
        let mut out = Self::zero(nvars);
        if k > nvars {
            return out;
        }
        let mut pick = vec![false; nvars];
        fn rec<S: Scalar>(out: &mut MPoly<S>, pick: &mut Vec<bool>, start: usize, left: usize) {
            if left == 0 {
                out.add_term(pick.iter().map(|&b| b as u32).collect(), S::one());
                return;
            }
            for i in start..pick.len() {
                pick[i] = true;
                rec(out, pick, i + 1, left - 1);
                pick[i] = false;
            }
        }
        rec(&mut out, &mut pick, 0, k);
        out
    }

    pub fn eval(&self, x: &[S]) -> S {
        let mut acc = S::zero();
        for (e, c) in &self.terms {
            let mut t = c.clone();
            for (xi, &k) in x.iter().zip(e) {
                for _ in 0..k {
                    t = t * xi;
                }
            }
            acc = acc + &t;
        }
        acc
    }

    /// Exact division by x_1 + … + x_n; errors when the remainder is nonzero.
    pub fn div_by_e1(&self) -> Result<Self> {
        // Lex-leading terms divide by x_1.
        let mut rem = self.clone();
        let mut q = Self::zero(self.nvars);
        while let Some((lead, c)) = rem.terms.iter().next_back().map(|(e, c)| (e.clone(), c.clone())) {
            if lead[0] == 0 {
                return Err(WkError::Integrity(
                    "polynomial is not divisible by e1".into(),
                ));
            }
            let mut qe = lead.clone();
            qe[0] -= 1;
            for i in 0..self.nvars {
                let mut e = qe.clone();
                e[i] += 1;
                rem.add_term(e, -c.clone());
            }
            q.add_term(qe, c);
        }
        Ok(q)
    }

    /// Monomial-basis coefficients keyed by sorted exponent partition,
    /// checking that the polynomial is symmetric.
    pub fn symmetric_coefficients(&self) -> Result<BTreeMap<Partition, S>> {
        let mut out: BTreeMap<Partition, S> = BTreeMap::new();
        let mut counts: BTreeMap<Partition, usize> = BTreeMap::new();
        for (e, c) in &self.terms {
            let p = Partition::new(e.iter().copied());
            match out.get(&p) {
                Some(prev) if prev != c => {
                    return Err(WkError::Integrity(format!(
                        "non-symmetric input: coefficients differ on arrangements of {p:?}"
                    )))
                }
                Some(_) => {}
                None => {
                    out.insert(p.clone(), c.clone());
                }
            }
            *counts.entry(p).or_default() += 1;
        }
        for (p, &cnt) in &counts {
            if cnt != arrangements(p, self.nvars) {
                return Err(WkError::Integrity(format!(
                    "non-symmetric input: {cnt} of {} arrangements of {p:?} present",
                    arrangements(p, self.nvars)
                )));
            }
        }
        Ok(out)
    }
}

/// Number of distinct exponent vectors that sort to `p` in `n` variables.
pub fn arrangements(p: &Partition, n: usize) -> usize {
    use crate::combinatorics::{factorial, zstab};
    use num_traits::ToPrimitive;
    if p.len() > n {
        return 0;
    }
    let v = factorial(n as u32) / (zstab(p) * factorial((n - p.len()) as u32));
    v.to_usize().unwrap_or(usize::MAX)
}

impl<S: Scalar> Zero for MPoly<S> {
    fn zero() -> Self {
        MPoly::zero(0)
    }
    fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }
}

impl<S: Scalar> std::ops::Add for MPoly<S> {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        MPoly::add(&self, &rhs)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::combinatorics::rat;

    #[test]
    fn division_by_e1() {
        let x = MPoly::<Rational>::var(3, 0);
        let y = MPoly::<Rational>::var(3, 1);
        let z = MPoly::<Rational>::var(3, 2);
        let e1 = x.add(&y).add(&z);
        let f = x.mul(&y).add(&z.pow(2)).scale(&rat(3, 2));
        assert_eq!(e1.mul(&f).div_by_e1().unwrap(), f);
        assert!(x.div_by_e1().is_err());
    }

    #[test]
    fn symmetry_detection() {
        let x = MPoly::<Rational>::var(2, 0);
        let y = MPoly::<Rational>::var(2, 1);
        assert!(x.add(&y).symmetric_coefficients().is_ok());
        assert!(x.symmetric_coefficients().is_err());
        assert!(x.scale(&rat(2, 1)).add(&y).symmetric_coefficients().is_err());
    }
}
