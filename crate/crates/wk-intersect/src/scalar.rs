//! The ring abstraction shared by rational and π²-polynomial coefficients.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_traits::{One, Zero};

use crate::combinatorics::{rat_int, rational_pq, Rational};

/// Commutative ring with rational scalars.
pub trait Scalar:
    Clone
    + PartialEq
    + fmt::Debug
    + Send
    + Sync
    + Zero
    + One
    + Neg<Output = Self>
    + for<'a> Add<&'a Self, Output = Self>
    + for<'a> Sub<&'a Self, Output = Self>
    + for<'a> Mul<&'a Self, Output = Self>
{
    fn from_rational(r: Rational) -> Self;

    fn scale(&self, r: &Rational) -> Self;

    fn scale_int(&self, k: &BigInt) -> Self {
        self.scale(&rat_int(k.clone()))
    }

    /// Multiplicative inverse when one exists in the ring.
    fn try_inverse(&self) -> Option<Self>;

    /// The constant part, if the value is a pure rational.
    fn as_rational(&self) -> Option<Rational>;
}

impl Scalar for Rational {
    fn from_rational(r: Rational) -> Self {
        r
    }

    fn scale(&self, r: &Rational) -> Self {
        self * r
    }

    fn scale_int(&self, k: &BigInt) -> Self {
        Rational::new(self.numer() * k, self.denom().clone())
    }

    fn try_inverse(&self) -> Option<Self> {
        if self.is_zero() {
            None
        } else {
            Some(self.recip())
        }
    }

    fn as_rational(&self) -> Option<Rational> {
        Some(self.clone())
    }
}

/// Polynomial in the formal symbol π² with rational coefficients.
#[derive(Clone, PartialEq, Eq, Default, Hash)]
pub struct PiScalar {
    coeffs: BTreeMap<u32, Rational>,
}

impl PiScalar {
    /// c·(π²)^k
    pub fn monomial(c: Rational, k: u32) -> Self {
        let mut coeffs = BTreeMap::new();
        if !c.is_zero() {
            coeffs.insert(k, c);
        }
        PiScalar { coeffs }
    }

    pub fn pi2() -> Self {
        Self::monomial(Rational::one(), 1)
    }

    /// Coefficient of (π²)^k.
    pub fn coeff(&self, k: u32) -> Rational {
        self.coeffs.get(&k).cloned().unwrap_or_else(Rational::zero)
    }

    /// (power, coefficient) pairs, increasing power.
    pub fn terms(&self) -> impl Iterator<Item = (u32, &Rational)> {
        self.coeffs.iter().map(|(k, c)| (*k, c))
    }

    pub fn degree(&self) -> Option<u32> {
        self.coeffs.keys().next_back().copied()
    }

    fn add_term(&mut self, k: u32, c: Rational) {
        if c.is_zero() {
            return;
        }
        let e = self.coeffs.entry(k).or_insert_with(Rational::zero);
        *e += c;
        if e.is_zero() {
            self.coeffs.remove(&k);
        }
    }
}

impl fmt::Debug for PiScalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for PiScalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.coeffs.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (k, c) in self.coeffs.iter().rev() {
            let neg = c < &Rational::zero();
            let a = if neg { -c.clone() } else { c.clone() };
            if first {
                if neg {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {} ", if neg { "-" } else { "+" })?;
            }
            first = false;
            let coef = if a.is_integer() { a.numer().to_string() } else { rational_pq(&a) };
            match k {
                0 => write!(f, "{coef}")?,
                _ => {
                    if !a.is_one() {
                        write!(f, "{coef}*")?;
                    }
                    if *k == 1 {
                        write!(f, "pi^2")?;
                    } else {
                        write!(f, "pi^{}", 2 * k)?;
                    }
                }
            }
        }
        Ok(())
    }
}

impl Zero for PiScalar {
    fn zero() -> Self {
        PiScalar::default()
    }
    fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }
}

impl One for PiScalar {
    fn one() -> Self {
        PiScalar::monomial(Rational::one(), 0)
    }
}

impl Add for PiScalar {
    type Output = PiScalar;
    fn add(self, rhs: PiScalar) -> PiScalar {
        self + &rhs
    }
}

impl<'a> Add<&'a PiScalar> for PiScalar {
    type Output = PiScalar;
    fn add(mut self, rhs: &'a PiScalar) -> PiScalar {
        for (k, c) in &rhs.coeffs {
            self.add_term(*k, c.clone());
        }
        self
    }
}

impl<'a> Sub<&'a PiScalar> for PiScalar {
    type Output = PiScalar;
    fn sub(mut self, rhs: &'a PiScalar) -> PiScalar {
        for (k, c) in &rhs.coeffs {
            self.add_term(*k, -c.clone());
        }
        self
    }
}

impl Mul for PiScalar {
    type Output = PiScalar;
    fn mul(self, rhs: PiScalar) -> PiScalar {
        self * &rhs
    }
}

impl<'a> Mul<&'a PiScalar> for PiScalar {
    type Output = PiScalar;
    fn mul(self, rhs: &'a PiScalar) -> PiScalar {
        let mut out = PiScalar::default();
        for (a, x) in &self.coeffs {
            for (b, y) in &rhs.coeffs {
                out.add_term(a + b, x * y);
            }
        }
        out
    }
}

impl Neg for PiScalar {
    type Output = PiScalar;
    fn neg(mut self) -> PiScalar {
        for c in self.coeffs.values_mut() {
            *c = -c.clone();
        }
        self
    }
}

impl Scalar for PiScalar {
    fn from_rational(r: Rational) -> Self {
        PiScalar::monomial(r, 0)
    }

    fn scale(&self, r: &Rational) -> Self {
        if r.is_zero() {
            return PiScalar::zero();
        }
        PiScalar {
            coeffs: self.coeffs.iter().map(|(k, c)| (*k, c * r)).collect(),
        }
    }

    /// Only nonzero constants are units.
    fn try_inverse(&self) -> Option<Self> {
        match self.as_rational() {
            Some(c) if !c.is_zero() => Some(PiScalar::from_rational(c.recip())),
            _ => None,
        }
    }

    fn as_rational(&self) -> Option<Rational> {
        match self.coeffs.len() {
            0 => Some(Rational::zero()),
            1 => self.coeffs.get(&0).cloned(),
            _ => None,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::combinatorics::rat;

    #[test]
    fn pi_ring_arithmetic() {
        let a = PiScalar::pi2().scale(&rat(2, 1)) + &PiScalar::one();
        let b = a.clone() * &a;
        assert_eq!(b.coeff(0), rat(1, 1));
        assert_eq!(b.coeff(1), rat(4, 1));
        assert_eq!(b.coeff(2), rat(4, 1));
        assert!((b.clone() - &b).is_zero());
        assert_eq!(a.to_string(), "2*pi^2 + 1");
        assert!(a.try_inverse().is_none());
        assert_eq!(PiScalar::from_rational(rat(2, 3)).try_inverse().unwrap().coeff(0), rat(3, 2));
    }
}
