//! A_{g,n} in the e-basis: D_{g,n}(Λ), and C_{g,n}(λ) after stripping 1-parts.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_traits::Zero;
use rayon::prelude::*;
use serde::Serialize;

use crate::combinatorics::{factorial, partition_iter, pow_i, rat_int, Partition, Rational};
use crate::engine::Engine;
use crate::error::{Result, WkError};
use crate::symmetric::{monomials_to_e_rational, EPolynomial};

/// 24^g · g!
pub fn normalization(g: u32) -> BigInt {
    pow_i(24, g) * factorial(g)
}

/// d_{g,n} = 3g − 3 + n, checking stability.
pub fn dimension(g: u32, n: usize) -> Result<u32> {
    if 2 * g as i64 - 2 + n as i64 <= 0 {
        return Err(WkError::Unstable { g, n });
    }
    Ok(3 * g + n as u32 - 3)
}

/// Decomposition A_{g,n} = Σ D_{g,n}(Λ) e_Λ.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AmplitudeDecomposition {
    pub g: u32,
    pub n: usize,
    pub normalized: bool,
    #[serde(serialize_with = "ser_coeffs")]
    pub dcoeffs: BTreeMap<Partition, Rational>,
}

fn ser_coeffs<S: serde::Serializer>(m: &BTreeMap<Partition, Rational>, s: S) -> std::result::Result<S::Ok, S::Error> {
    use serde::ser::SerializeSeq;
    let mut seq = s.serialize_seq(Some(m.len()))?;
    for (k, v) in m {
        #[derive(Serialize)]
        struct Row {
            lambda: Vec<u32>,
            coeff: String,
        }
        seq.serialize_element(&Row { lambda: k.to_vec(), coeff: crate::combinatorics::rational_pq(v) })?;
    }
    seq.end()
}

impl AmplitudeDecomposition {
    /// Builds from e-basis data, dropping keys with parts > n.
    pub fn from_epoly(g: u32, n: usize, normalized: bool, p: &EPolynomial<Rational>) -> Result<Self> {
        let d = dimension(g, n)?;
        let mut dcoeffs = BTreeMap::new();
        for (k, c) in p.terms() {
            if k.first() as usize > n || c.is_zero() {
                continue;
            }
            if k.size() != d {
                return Err(WkError::Integrity(format!("key {k:?} has weight {} not {d}", k.size())));
            }
            dcoeffs.insert(k.clone(), c.clone());
        }
        Ok(AmplitudeDecomposition { g, n, normalized, dcoeffs })
    }

    pub fn dimension(&self) -> u32 {
        3 * self.g + self.n as u32 - 3
    }

    pub fn d_coeff(&self, big_lambda: &Partition) -> Rational {
        self.dcoeffs.get(big_lambda).cloned().unwrap_or_else(Rational::zero)
    }

    /// C_{g,n}(λ) for λ with parts ≥ 2; zero when λ does not fit.
    pub fn c_coeff(&self, lambda: &Partition) -> Rational {
        let d = self.dimension();
        if lambda.size() > d {
            return Rational::zero();
        }
        self.d_coeff(&pad_ones(lambda, d))
    }

    /// Every nonzero C_{g,n}(λ), keyed by λ with the 1-parts removed.
    pub fn c_coeffs(&self) -> BTreeMap<Partition, Rational> {
        self.dcoeffs.iter().map(|(k, v)| (k.without_ones(), v.clone())).collect()
    }

    pub fn to_normalized(&self) -> Self {
        if self.normalized {
            return self.clone();
        }
        self.rescaled(rat_int(normalization(self.g)), true)
    }

    pub fn to_raw(&self) -> Self {
        if !self.normalized {
            return self.clone();
        }
        self.rescaled(rat_int(normalization(self.g)).recip(), false)
    }

    fn rescaled(&self, f: Rational, normalized: bool) -> Self {
        AmplitudeDecomposition {
            g: self.g,
            n: self.n,
            normalized,
            dcoeffs: self.dcoeffs.iter().map(|(k, v)| (k.clone(), v * &f)).collect(),
        }
    }

    pub fn to_epoly(&self) -> EPolynomial<Rational> {
        EPolynomial::from_terms(self.dcoeffs.iter().map(|(k, v)| (k.clone(), v.clone()))).with_nvars(self.n)
    }
}

/// Removes all 1-parts of Λ (|Λ| = 3g − 3 + n).
pub fn strip_ones(big_lambda: &Partition) -> Partition {
    big_lambda.without_ones()
}

/// λ ⊔ 1^{d − |λ|}.
pub fn pad_ones(lambda: &Partition, d: u32) -> Partition {
    lambda.pad_ones(d - lambda.size())
}

/// Assembles A_{g,n} from the engine and decomposes it in the e-basis.
pub fn amplitude(engine: &Engine, g: u32, n: usize, normalized: bool) -> Result<AmplitudeDecomposition> {
    let d = dimension(g, n)?;
    let keys: Vec<Partition> = partition_iter(d, d.max(1), n as u32).collect();
    let values: Vec<(Partition, Rational)> = keys
        .into_par_iter()
        .map(|nu| {
            let mut deg = nu.to_vec();
            deg.resize(n, 0);
            let v = engine.correlator(g, &deg)?;
            Ok((nu, v))
        })
        .collect::<Result<_>>()?;
    let scale = if normalized { rat_int(normalization(g)) } else { Rational::from_integer(1.into()) };
    let mono: BTreeMap<Partition, Rational> =
        values.into_iter().filter(|(_, v)| !v.is_zero()).map(|(k, v)| (k, v * &scale)).collect();
    let e = monomials_to_e_rational(&mono, n)?;
    AmplitudeDecomposition::from_epoly(g, n, normalized, &e)
}
