//! Weil–Petersson volumes V_{g,n}(L): from κ₁-deformed correlators and from
//! the residue representation with Bessel factors.

use std::collections::BTreeMap;
use std::fmt;

use num_traits::{One, Zero};
use rayon::prelude::*;
use serde::ser::{SerializeMap, SerializeSeq};
use serde::{Serialize, Serializer};

use crate::amplitude::dimension;
use crate::combinatorics::{factorial, partition_iter, pow_i, rat_int, rational_pq, Partition, Rational};
use crate::engine::Engine;
use crate::error::{Result, WkError};
use crate::residue::{pair_with_kernel, times_correlator, wp_times, BFunction, LaurentSeries, Sectors};
use crate::scalar::{PiScalar, Scalar};

/// Series coefficient of (x/2)^{2j+m} in J_m(x): (−1)^j/(j!(j+m)!), with
/// 1/(negative)! = 0 so that J_{−m} = (−1)^m J_m.
pub fn bessel_j_coeff(m: i32, j: u32) -> Rational {
    let sign = if j % 2 == 0 { 1 } else { -1 };
    bessel_i_coeff(m, j) * rat_int(sign)
}

/// Series coefficient of (x/2)^{2j+m} in I_m(x): 1/(j!(j+m)!).
pub fn bessel_i_coeff(m: i32, j: u32) -> Rational {
    let top = j as i32 + m;
    if top < 0 {
        return Rational::zero();
    }
    rat_int(factorial(j) * factorial(top as u32)).recip()
}

/// F(u, v) at WP times from its Bessel form
/// −e_1 + Σ_k e_k (−1)^{k+1} (π√2/√u)^{k−1} J_{k−1}(2π√(2u)),
/// expanded as Σ_j (−1)^j (2π²)^{j+k−1} u^j/(j!(j+k−1)!) per e_k.
pub fn f_bessel_series(g: u32, u_cap: i32, v_caps: Vec<u32>, v_total: u32) -> LaurentSeries<PiScalar> {
    let mut f = LaurentSeries::zero(v_caps, v_total).with_cap(u_cap);
    let nv = g as usize;
    for k in 0..=g as i32 {
        let outer = if (k + 1) % 2 == 0 { 1 } else { -1 };
        for j in 0..=u_cap.max(0) as u32 {
            let pw = j as i32 + k - 1;
            if pw < 0 {
                continue;
            }
            let c = bessel_j_coeff(k - 1, j) * rat_int(outer * pow_i(2, pw as u32));
            let c = PiScalar::monomial(c, pw as u32);
            for v in e_support(nv, k as usize) {
                f.add_term(j as i32, v, c.clone());
            }
        }
    }
    for v in e_support(nv, 1) {
        f.add_term(0, v, -PiScalar::one());
    }
    f
}

fn e_support(nv: usize, k: usize) -> Vec<Vec<u32>> {
    fn rec(start: usize, left: usize, cur: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if left == 0 {
            out.push(cur.clone());
            return;
        }
        for i in start..cur.len() {
            cur[i] = 1;
            rec(i + 1, left - 1, cur, out);
            cur[i] = 0;
        }
    }
    let mut out = Vec::new();
    rec(0, k, &mut vec![0; nv], &mut out);
    out
}

/// Σ_k e_k(v) (L/√(2u))^k I_k(L√(2u)), coefficient of L^{2D}:
/// Σ_k e_k(v) u^{D−k} [I_k]_{D−k}/2^D.
fn bessel_factor(big_d: u32, g: u32, v_caps: &[u32], v_total: u32) -> LaurentSeries<PiScalar> {
    let mut p = LaurentSeries::zero(v_caps.to_vec(), v_total);
    let two_d = rat_int(pow_i(2, big_d));
    for k in 0..=big_d.min(g) {
        let c = PiScalar::from_rational(bessel_i_coeff(k as i32, big_d - k) / &two_d);
        for v in e_support(g as usize, k as usize) {
            p.add_term((big_d - k) as i32, v, c.clone());
        }
    }
    p
}

/// V_{g,n}(L) as a polynomial in L_i² with coefficients in ℚ[π²].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WPVolume {
    pub g: u32,
    pub n: usize,
    pub coefficients: BTreeMap<Vec<u32>, PiScalar>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum WpPath {
    Kappa,
    Residue,
}

impl WPVolume {
    fn new(g: u32, n: usize) -> Self {
        WPVolume { g, n, coefficients: BTreeMap::new() }
    }

    fn insert(&mut self, exps: Vec<u32>, c: PiScalar) {
        if !c.is_zero() {
            self.coefficients.insert(exps, c);
        }
    }

    pub fn coeff(&self, exps: &[u32]) -> PiScalar {
        self.coefficients.get(exps).cloned().unwrap_or_default()
    }

    /// Flattened (L²-exponents, π²-power, coefficient) terms, highest L-degree first.
    pub fn flat_terms(&self) -> Vec<(Vec<u32>, u32, Rational)> {
        let mut out: Vec<(Vec<u32>, u32, Rational)> = Vec::new();
        for (e, c) in &self.coefficients {
            for (k, r) in c.terms() {
                out.push((e.clone(), k, r.clone()));
            }
        }
        out.sort_by(|a, b| {
            let da: u32 = a.0.iter().sum();
            let db: u32 = b.0.iter().sum();
            db.cmp(&da).then_with(|| b.0.cmp(&a.0)).then_with(|| a.1.cmp(&b.1))
        });
        out
    }

    /// Every term has L²-degree plus π²-power equal to 3g − 3 + n.
    pub fn is_graded(&self) -> bool {
        let dim = 3 * self.g + self.n as u32 - 3;
        self.flat_terms().iter().all(|(e, k, _)| e.iter().sum::<u32>() + k == dim)
    }

    /// Invariant under permuting the boundary lengths.
    pub fn is_symmetric(&self) -> bool {
        self.coefficients.iter().all(|(e, c)| {
            let mut s = e.clone();
            s.sort_unstable();
            let mut ok = true;
            permutations_of(&s, &mut |p| ok &= &self.coeff(p) == c);
            ok
        })
    }
}

impl fmt::Display for WPVolume {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let terms = self.flat_terms();
        if terms.is_empty() {
            return write!(f, "0");
        }
        for (i, (e, k, c)) in terms.iter().enumerate() {
            let neg = c < &Rational::zero();
            let a = if neg { -c.clone() } else { c.clone() };
            if i == 0 {
                if neg {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {} ", if neg { "-" } else { "+" })?;
            }
            let mut factors = Vec::new();
            if !a.is_one() {
                factors.push(rational_pq(&a).trim_end_matches("/1").to_string());
            }
            match k {
                0 => {}
                1 => factors.push("pi^2".into()),
                _ => factors.push(format!("pi^{}", 2 * k)),
            }
            for (j, x) in e.iter().enumerate() {
                if *x > 0 {
                    factors.push(format!("L{}^{}", j + 1, 2 * x));
                }
            }
            if factors.is_empty() {
                factors.push("1".into());
            }
            write!(f, "{}", factors.join("*"))?;
        }
        Ok(())
    }
}

struct Term<'a>(&'a [u32], u32, &'a Rational);

impl Serialize for Term<'_> {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut m = s.serialize_map(Some(3))?;
        m.serialize_entry("L2exp", self.0)?;
        m.serialize_entry("pi2pow", &self.1)?;
        m.serialize_entry("coeff", &rational_pq(self.2))?;
        m.end()
    }
}

struct Terms<'a>(&'a [(Vec<u32>, u32, Rational)]);

impl Serialize for Terms<'_> {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut seq = s.serialize_seq(Some(self.0.len()))?;
        for (e, k, c) in self.0 {
            seq.serialize_element(&Term(e, *k, c))?;
        }
        seq.end()
    }
}

impl Serialize for WPVolume {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let flat = self.flat_terms();
        let mut m = s.serialize_map(Some(3))?;
        m.serialize_entry("g", &self.g)?;
        m.serialize_entry("n", &self.n)?;
        m.serialize_entry("terms", &Terms(&flat))?;
        m.end()
    }
}

fn permutations_of(sorted: &[u32], f: &mut impl FnMut(&[u32])) {
    let mut v = sorted.to_vec();
    loop {
        f(&v);
        let mut i = v.len();
        if i < 2 {
            return;
        }
        i -= 1;
        while i > 0 && v[i - 1] >= v[i] {
            i -= 1;
        }
        if i == 0 {
            return;
        }
        let mut j = v.len() - 1;
        while v[j] <= v[i - 1] {
            j -= 1;
        }
        v.swap(i - 1, j);
        v[i..].reverse();
    }
}

/// Sorted (ascending) exponent vectors of length n with sum ≤ dim.
fn sorted_exponents(n: usize, dim: u32) -> Vec<Vec<u32>> {
    let mut out = Vec::new();
    for s in 0..=dim {
        let parts: Vec<Partition> =
            if s == 0 { vec![Partition::empty()] } else { partition_iter(s, s, n as u32).collect() };
        for p in parts {
            let mut v = p.to_vec();
            v.resize(n, 0);
            v.reverse();
            out.push(v);
        }
    }
    out
}

fn assemble(g: u32, n: usize, values: Vec<(Vec<u32>, PiScalar)>) -> WPVolume {
    let mut vol = WPVolume::new(g, n);
    for (e, c) in values {
        permutations_of(&e, &mut |p| vol.insert(p.to_vec(), c.clone()));
    }
    vol
}

/// Σ_d ⟨e^{2π²κ₁} Π τ_{d_i}⟩_g Π L_i^{2d_i}/(2^{d_i} d_i!), with the κ₁
/// class traded for the times t_k = −(−2π²)^k/k!.
pub fn wp_volume_kappa(engine: &Engine, g: u32, n: usize) -> Result<WPVolume> {
    let dim = dimension(g, n)?;
    let t = wp_times();
    let values = sorted_exponents(n, dim)
        .into_par_iter()
        .map(|d| {
            let v = times_correlator(engine, g, &d, &t)?;
            let w: num_bigint::BigInt = d.iter().map(|&x| pow_i(2, x) * factorial(x)).product();
            Ok((d, v.scale(&rat_int(w).recip())))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(assemble(g, n, values))
}

fn residue_coefficient(b: &BFunction, big_d: &[u32], extra_window: i32) -> Result<PiScalar> {
    let g = b.g;
    let rest = |v_caps: &[u32], v_total: u32| {
        let mut r = LaurentSeries::one(v_caps.to_vec(), v_total);
        for &x in big_d {
            r = r.mul(&bessel_factor(x, g, v_caps, v_total));
        }
        let val = big_d.iter().map(|&x| x as i32 - x.min(g) as i32).sum();
        (r, val)
    };
    pair_with_kernel(b, &wp_times(), big_d.iter().sum(), rest, extra_window, Sectors::Full)
}

/// Res_v Res_u B(F, v)/F^{3g−2+n} Π_i Σ_k e_k(v) (L_i/√(2u))^k I_k(L_i√(2u))
/// at WP times. The u-window is computed from the pole order; one term is
/// recomputed with the window enlarged by 2 as a check.
pub fn wp_volume_residue(b: &BFunction) -> Result<WPVolume> {
    let (g, n) = (b.g, b.n);
    let dim = dimension(g, n)?;
    let exps = sorted_exponents(n, dim);
    let values = exps
        .par_iter()
        .map(|e| Ok((e.clone(), residue_coefficient(b, e, 0)?)))
        .collect::<Result<Vec<_>>>()?;
    let probe = &exps[0];
    if residue_coefficient(b, probe, 2)? != values[0].1 {
        return Err(WkError::Window(format!(
            "enlarging the u-window changed the coefficient of L^{probe:?}"
        )));
    }
    Ok(assemble(g, n, values))
}
