//! Residue representation of correlators: the kernel B⁻_{g,n}, the deformed
//! function F(t; u, v) and coefficient extraction in (u, v).

use std::collections::BTreeMap;
use std::fmt;

use num_traits::Zero;
use serde::Serialize;

use crate::amplitude::{dimension, normalization};
use crate::coefficients::ClosedFormSet;
use crate::combinatorics::{binomial, factorial, partition_iter, rat_int, zstab, Partition, Rational};
use crate::engine::Engine;
use crate::error::{Result, WkError};
use crate::scalar::{PiScalar, Scalar};

/// Truncated Laurent series in u with polynomial coefficients in v_1..v_g.
///
/// Coefficients of u^e with e ≤ `u_cap` are exact; higher ones have been
/// dropped. `u_cap = None` marks an exact (finite) expression. v-monomials
/// beyond the per-variable caps or the total cap are always dropped, which is
/// exact since no factor carries negative v powers.
#[derive(Clone, PartialEq)]
pub struct LaurentSeries<S: Scalar = Rational> {
    v_caps: Vec<u32>,
    v_total: u32,
    u_min: i32,
    u_cap: Option<i32>,
    terms: BTreeMap<(i32, Vec<u32>), S>,
}

fn min_cap(a: Option<i32>, b: Option<i32>) -> Option<i32> {
    match (a, b) {
        (Some(x), Some(y)) => Some(x.min(y)),
        (x, None) => x,
        (None, y) => y,
    }
}

impl<S: Scalar> LaurentSeries<S> {
    pub fn zero(v_caps: Vec<u32>, v_total: u32) -> Self {
        LaurentSeries { v_caps, v_total, u_min: 0, u_cap: None, terms: BTreeMap::new() }
    }

    pub fn one(v_caps: Vec<u32>, v_total: u32) -> Self {
        let mut s = Self::zero(v_caps, v_total);
        let nv = s.nvars();
        s.add_term(0, vec![0; nv], S::one());
        s
    }

    pub fn nvars(&self) -> usize {
        self.v_caps.len()
    }

    pub fn u_min(&self) -> i32 {
        self.u_min
    }

    /// Highest u exponent known exactly; `None` for exact expressions.
    pub fn u_cap(&self) -> Option<i32> {
        self.u_cap
    }

    pub fn terms(&self) -> &BTreeMap<(i32, Vec<u32>), S> {
        &self.terms
    }

    pub fn with_cap(mut self, cap: i32) -> Self {
        self.u_cap = min_cap(self.u_cap, Some(cap));
        self.terms.retain(|(e, _), _| *e <= cap);
        self
    }

    fn admits(&self, u: i32, v: &[u32]) -> bool {
        if self.u_cap.is_some_and(|c| u > c) {
            return false;
        }
        v.iter().zip(&self.v_caps).all(|(a, b)| a <= b) && v.iter().sum::<u32>() <= self.v_total
    }

    pub fn add_term(&mut self, u: i32, v: Vec<u32>, c: S) {
        if c.is_zero() || !self.admits(u, &v) {
            return;
        }
        if self.terms.is_empty() || u < self.u_min {
            self.u_min = u;
        }
        let key = (u, v);
        match self.terms.get_mut(&key) {
            Some(x) => {
                let s = std::mem::replace(x, S::zero()) + &c;
                if s.is_zero() {
                    self.terms.remove(&key);
                } else {
                    *x = s;
                }
            }
            None => {
                self.terms.insert(key, c);
            }
        }
    }

    /// Coefficient of u^e v^a; an error if e lies beyond the exact range.
    pub fn coeff(&self, u: i32, v: &[u32]) -> Result<S> {
        if let Some(c) = self.u_cap {
            if u > c {
                return Err(WkError::Window(format!(
                    "coefficient of u^{u} requested but the series is exact only through u^{c}"
                )));
            }
        }
        Ok(self.terms.get(&(u, v.to_vec())).cloned().unwrap_or_else(S::zero))
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        out.u_min = self.u_min.min(other.u_min);
        out = out.with_cap_opt(other.u_cap);
        for ((u, v), c) in &other.terms {
            out.add_term(*u, v.clone(), c.clone());
        }
        out
    }

    fn with_cap_opt(self, cap: Option<i32>) -> Self {
        match cap {
            Some(c) => self.with_cap(c),
            None => self,
        }
    }

    pub fn scale(&self, c: &S) -> Self {
        let mut out = Self { terms: BTreeMap::new(), ..self.clone() };
        for ((u, v), x) in &self.terms {
            out.add_term(*u, v.clone(), x.clone() * c);
        }
        out
    }

    /// Multiplies by u^k.
    pub fn shift(&self, k: i32) -> Self {
        LaurentSeries {
            v_caps: self.v_caps.clone(),
            v_total: self.v_total,
            u_min: self.u_min + k,
            u_cap: self.u_cap.map(|c| c + k),
            terms: self.terms.iter().map(|((u, v), c)| ((u + k, v.clone()), c.clone())).collect(),
        }
    }

    pub fn mul(&self, other: &Self) -> Self {
        let cap = min_cap(self.u_cap.map(|c| c + other.u_min), other.u_cap.map(|c| c + self.u_min));
        let mut out = LaurentSeries {
            v_caps: self.v_caps.clone(),
            v_total: self.v_total,
            u_min: self.u_min + other.u_min,
            u_cap: cap,
            terms: BTreeMap::new(),
        };
        for ((ua, va), a) in &self.terms {
            for ((ub, vb), b) in &other.terms {
                let u = ua + ub;
                if cap.is_some_and(|c| u > c) {
                    continue;
                }
                let v: Vec<u32> = va.iter().zip(vb).map(|(x, y)| x + y).collect();
                if out.admits(u, &v) {
                    out.add_term(u, v, a.clone() * b);
                }
            }
        }
        out
    }

    pub fn pow(&self, k: u32) -> Self {
        let mut out = Self::one(self.v_caps.clone(), self.v_total);
        for _ in 0..k {
            out = out.mul(self);
        }
        out
    }

    /// The v-independent part.
    pub fn v0_part(&self) -> Self {
        let mut out = Self { terms: BTreeMap::new(), ..self.clone() };
        for ((u, v), c) in &self.terms {
            if v.iter().all(|&x| x == 0) {
                out.add_term(*u, v.clone(), c.clone());
            }
        }
        out
    }

    /// Inverse of a v-free power series with invertible constant term.
    fn inverse_power_series(&self, cap: i32) -> Result<Self> {
        let cap = self.u_cap.map_or(cap, |c| c.min(cap));
        let zero = vec![0; self.nvars()];
        let h0 = self.coeff(0, &zero)?;
        let h0inv = h0.try_inverse().ok_or_else(|| {
            WkError::Domain("leading coefficient of the series is not invertible".into())
        })?;
        let mut inv: Vec<S> = vec![h0inv.clone()];
        for m in 1..=cap.max(0) {
            let mut s = S::zero();
            for j in 1..=m {
                s = s + &(self.coeff(j, &zero)? * &inv[(m - j) as usize]);
            }
            inv.push(-(s * &h0inv));
        }
        let mut out = Self::zero(self.v_caps.clone(), self.v_total).with_cap(cap);
        for (m, c) in inv.into_iter().enumerate() {
            out.add_term(m as i32, zero.clone(), c);
        }
        Ok(out)
    }
}

impl<S: Scalar> fmt::Debug for LaurentSeries<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("LaurentSeries")
            .field("u_min", &self.u_min)
            .field("u_cap", &self.u_cap)
            .field("terms", &self.terms)
            .finish()
    }
}

/// Times t_k, k ≥ 0, in the convention where t_k multiplies τ_{k+1}.
#[derive(Clone, Debug)]
pub struct TimesVector<S: Scalar = Rational> {
    explicit: BTreeMap<u32, S>,
    rule: Option<fn(u32) -> S>,
    scale: Option<S>,
}

impl<S: Scalar> Default for TimesVector<S> {
    fn default() -> Self {
        TimesVector { explicit: BTreeMap::new(), rule: None, scale: None }
    }
}

impl<S: Scalar> TimesVector<S> {
    pub fn zero() -> Self {
        Self::default()
    }

    /// Sets the coefficient of τ_a in the exponential. τ_0 makes the
    /// expansion infinite and is rejected.
    pub fn with_tau(mut self, a: u32, c: S) -> Result<Self> {
        if a == 0 {
            return Err(WkError::Domain("tau_0 in the exponential is ill-defined".into()));
        }
        if !c.is_zero() {
            self.explicit.insert(a - 1, c);
        }
        Ok(self)
    }

    /// Sets t_k directly (multiplies τ_{k+1}).
    pub fn with_time(self, k: u32, c: S) -> Self {
        self.with_tau(k + 1, c).expect("k + 1 >= 1")
    }

    pub fn generated(rule: fn(u32) -> S) -> Self {
        TimesVector { explicit: BTreeMap::new(), rule: Some(rule), scale: None }
    }

    pub fn get(&self, k: u32) -> S {
        let base = match self.explicit.get(&k) {
            Some(c) => c.clone(),
            None => self.rule.map(|r| r(k)).unwrap_or_else(S::zero),
        };
        match &self.scale {
            Some(s) => base * s,
            None => base,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.rule.is_none() && self.explicit.values().all(|c| c.is_zero())
    }

    /// Largest nonzero index for finitely supported times.
    pub fn max_index(&self) -> Option<Option<u32>> {
        if self.rule.is_some() {
            return None;
        }
        Some(self.explicit.keys().next_back().copied())
    }

    /// Removes t_0 by the dilaton substitution t_k → t_k/(1 − t_0); returns the
    /// base (1 − t_0)^{−1} of the prefactor and the reduced times.
    pub fn absorb_dilaton(&self) -> Result<(S, TimesVector<S>)> {
        let t0 = self.get(0);
        if t0.is_zero() {
            return Ok((S::one(), self.clone()));
        }
        let base = (S::one() - &t0)
            .try_inverse()
            .ok_or_else(|| WkError::Domain("1 - t_0 is not invertible".into()))?;
        let mut out = self.clone();
        out.explicit.remove(&0);
        if out.rule.is_some() {
            let rule = out.rule.unwrap();
            if !rule(0).is_zero() {
                return Err(WkError::Domain("generated times with t_0 != 0 are not supported".into()));
            }
        }
        out.scale = Some(match &self.scale {
            Some(s) => s.clone() * &base,
            None => base.clone(),
        });
        Ok((base, out))
    }
}

/// t_k = −(−2π²)^k/k!.
pub fn wp_time(k: u32) -> PiScalar {
    if k == 0 {
        return PiScalar::zero();
    }
    let c = -rat_int(crate::combinatorics::pow_i(-2, k)) / rat_int(factorial(k));
    PiScalar::monomial(c, k)
}

pub fn wp_times() -> TimesVector<PiScalar> {
    TimesVector::generated(wp_time)
}

/// Kernel B⁻_{g,n}: coefficient b_λ of m̃_λ(1/v) ξ^{|λ|}, with
/// b_λ = (d_{g,n} − |λ|)! C_g(λ)/g!.
///
/// `upper` holds C_g(λ)/g! for d_{g,n} < |λ| ≤ 2 d_{g,n}, the sector that
/// only matters when F(t; 0, v) ≠ 0.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BFunction {
    pub g: u32,
    pub n: usize,
    pub normalized: bool,
    #[serde(serialize_with = "serialize_b_terms")]
    pub terms: BTreeMap<Partition, Rational>,
    #[serde(serialize_with = "serialize_b_terms")]
    pub upper: BTreeMap<Partition, Rational>,
}

fn serialize_b_terms<Ser: serde::Serializer>(
    terms: &BTreeMap<Partition, Rational>,
    s: Ser,
) -> std::result::Result<Ser::Ok, Ser::Error> {
    use serde::ser::SerializeSeq;
    let mut seq = s.serialize_seq(Some(terms.len()))?;
    for (lam, c) in terms {
        seq.serialize_element(&serde_json::json!({
            "lambda": lam.to_vec(),
            "coeff": crate::combinatorics::rational_pq(c),
        }))?;
    }
    seq.end()
}

impl BFunction {
    pub fn dimension(&self) -> u32 {
        3 * self.g + self.n as u32 - 3
    }

    pub fn coeff(&self, lambda: &Partition) -> Rational {
        self.terms.get(lambda).cloned().unwrap_or_else(Rational::zero)
    }

    /// Coefficient of ξ^{|λ|} Π v_i^{−λ_i} for one fixed arrangement of λ.
    pub fn monomial_coeff(&self, lambda: &Partition) -> Rational {
        if lambda.len() > self.g as usize {
            return Rational::zero();
        }
        self.coeff(lambda) * rat_int(zstab(lambda) * factorial(self.g - lambda.len() as u32))
    }

    /// Drops the terms with a part larger than `cap`.
    pub fn with_part_cap(&self, cap: u32) -> BFunction {
        let mut out = self.clone();
        out.terms.retain(|lam, _| lam.is_empty() || lam.first() <= cap);
        out
    }

    pub fn to_raw(&self) -> BFunction {
        if !self.normalized {
            return self.clone();
        }
        let f = rat_int(normalization(self.g)).recip();
        BFunction {
            normalized: false,
            terms: self.terms.iter().map(|(l, c)| (l.clone(), c * &f)).collect(),
            upper: self.upper.iter().map(|(l, c)| (l.clone(), c * &f)).collect(),
            ..self.clone()
        }
    }
}

/// Partitions with parts ≥ 2, at most g parts and size ≤ d.
pub fn kernel_partitions(g: u32, d: u32) -> Vec<Partition> {
    let mut out = Vec::new();
    for s in 0..=d {
        if s == 0 {
            out.push(Partition::empty());
            continue;
        }
        if g == 0 {
            break;
        }
        out.extend(partition_iter(s, s, g).filter(|p| p.parts().all(|x| x >= 2)));
    }
    out
}

/// Assembles B⁻_{g,n} from fitted families.
pub fn build_b_minus(set: &ClosedFormSet, n: usize, normalized: bool) -> Result<BFunction> {
    let g = set.g;
    let d = dimension(g, n)?;
    let gfact = rat_int(factorial(g));
    let mut terms = BTreeMap::new();
    let mut upper = BTreeMap::new();
    for lam in kernel_partitions(g, 2 * d) {
        let c = if normalized { set.c_value(&lam)? } else { set.c_value_raw(&lam)? };
        if c.is_zero() {
            continue;
        }
        if lam.size() <= d {
            terms.insert(lam.clone(), rat_int(factorial(d - lam.size())) * c / &gfact);
        } else {
            upper.insert(lam, c / &gfact);
        }
    }
    Ok(BFunction { g, n, normalized, terms, upper })
}

fn subsets(nv: usize, r: usize) -> Vec<Vec<u32>> {
    let mut out = Vec::new();
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
    rec(0, r, &mut vec![0; nv], &mut out);
    out
}

/// Adds c·u^j·e_k(v) to `s`.
fn add_e_term<S: Scalar>(s: &mut LaurentSeries<S>, j: i32, k: usize, c: &S) {
    if c.is_zero() {
        return;
    }
    for v in subsets(s.nvars(), k) {
        s.add_term(j, v, c.clone());
    }
}

/// F(t; u, v) = u − Σ_{j+k ≥ 2} t_{k+j−1} u^j/j! e_k(v), exact through u^{u_cap}.
pub fn f_series<S: Scalar>(t: &TimesVector<S>, g: u32, u_cap: i32, v_caps: Vec<u32>, v_total: u32) -> LaurentSeries<S> {
    assert_eq!(v_caps.len(), g as usize);
    let exact = match t.max_index() {
        Some(None) => true,
        Some(Some(m)) => u_cap > m as i32 + 1,
        None => false,
    };
    let mut f = LaurentSeries::zero(v_caps, v_total);
    if !exact {
        f = f.with_cap(u_cap);
    }
    f.add_term(1, vec![0; g as usize], S::one());
    for k in 0..=g as usize {
        for j in 0..=u_cap.max(0) as u32 {
            if j as usize + k < 2 {
                continue;
            }
            let tk = t.get(j + k as u32 - 1);
            if tk.is_zero() {
                continue;
            }
            let c = -tk.scale(&rat_int(factorial(j)).recip());
            add_e_term(&mut f, j as i32, k, &c);
        }
    }
    f
}

/// F^{−N} through u^{cap}, as u^{−N} h^{−N} (1 + W)^{−N} with F_0 = u h.
fn f_inverse_power<S: Scalar>(f: &LaurentSeries<S>, n_pow: u32, cap: i32) -> Result<LaurentSeries<S>> {
    let f0 = f.v0_part();
    let zero = vec![0; f.nvars()];
    if f0.u_min() < 0 || f0.terms().keys().any(|(u, _)| *u < 1) || f0.coeff(1, &zero)? != S::one() {
        return Err(WkError::Domain(
            "times fail the origin valuation check: F|_{v=0} must be u + O(u^2)".into(),
        ));
    }
    let h = f0.shift(-1);
    let hinv = h.inverse_power_series(cap)?;
    let mut fv = f.clone();
    for ((u, v), c) in f0.terms() {
        fv.add_term(*u, v.clone(), -c.clone());
    }
    let w = fv.shift(-1).mul(&hinv);
    let m_max = f.v_total;
    let mut sum = LaurentSeries::one(f.v_caps.clone(), f.v_total);
    let mut wm = sum.clone();
    for m in 1..=m_max {
        wm = wm.mul(&w);
        if wm.terms().is_empty() && wm.u_cap().is_none() {
            break;
        }
        let mut c = rat_int(binomial(n_pow + m - 1, m));
        if m % 2 == 1 {
            c = -c;
        }
        sum = sum.add(&wm.scale(&S::from_rational(c)));
    }
    Ok(hinv.pow(n_pow).mul(&sum).shift(-(n_pow as i32)))
}

/// Π_i Σ_{r ≤ min(d_i, g)} e_r(v) u^{−r}/(d_i − r)!.
fn insertion_product<S: Scalar>(d: &[u32], g: u32, v_caps: &[u32], v_total: u32) -> LaurentSeries<S> {
    let mut out = LaurentSeries::one(v_caps.to_vec(), v_total);
    for &di in d {
        let mut p = LaurentSeries::zero(v_caps.to_vec(), v_total);
        for r in 0..=di.min(g) {
            let c = S::from_rational(rat_int(factorial(di - r)).recip());
            add_e_term(&mut p, -(r as i32), r as usize, &c);
        }
        out = out.mul(&p);
    }
    out
}

/// The u-window used for F: pole order plus v-degree plus the need of the
/// insertion factor.
fn window_for(n_pow: u32, v_total: u32, rest_val: i32) -> i32 {
    -1 - rest_val + v_total as i32 + n_pow as i32
}

/// v-caps for extraction against a kernel, optionally including the upper sector.
fn kernel_caps(b: &BFunction, with_upper: bool) -> (Vec<u32>, u32) {
    let keys = b.terms.keys().chain(b.upper.keys().filter(|_| with_upper));
    let per = keys.clone().map(|l| if l.is_empty() { 0 } else { l.first() }).max().unwrap_or(0);
    let total = keys.map(|l| l.size()).max().unwrap_or(0);
    (vec![per; b.g as usize], total)
}

/// True when F(t; 0, v) vanishes identically, i.e. t_1 = … = t_{g−1} = 0.
/// Only then is the origin the sole zero of F and B⁻ alone reproduces the
/// correlators; otherwise the sector |λ| > d_{g,n} contributes as well.
pub fn b_minus_suffices<S: Scalar>(t: &TimesVector<S>, g: u32) -> bool {
    (1..g).all(|k| t.get(k).is_zero())
}

/// Which kernel sectors enter the pairing.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Sectors {
    /// B⁻ plus the sector |λ| > d_{g,n} whenever F(t; 0, v) ≠ 0.
    Full,
    /// B⁻ only; rejected with a domain error when F(t; 0, v) ≠ 0.
    MinusOnly,
    /// B⁻ only, without the check (for diagnostics).
    MinusUnchecked,
}

/// ⟨exp(Σ t_{k−1} τ_k) τ_{d_1}…τ_{d_n}⟩_g from the kernel:
/// Σ_λ b_λ g! [u^{−1} v^λ] u^{Σd} F^{|λ|−d_{g,n}−1} Π_i Σ_r e_r(v) u^{−r}/(d_i − r)!,
/// plus the upper sector when the times require it.
///
/// `extra_window` enlarges the computed u-window; a negative value shrinks
/// it and may produce a window error.
pub fn residue_times_correlator<S: Scalar>(
    b: &BFunction,
    d: &[u32],
    t: &TimesVector<S>,
    extra_window: i32,
) -> Result<S> {
    residue_times_correlator_with(b, d, t, extra_window, Sectors::Full)
}

pub fn residue_times_correlator_with<S: Scalar>(
    b: &BFunction,
    d: &[u32],
    t: &TimesVector<S>,
    extra_window: i32,
    sectors: Sectors,
) -> Result<S> {
    if d.len() != b.n {
        return Err(WkError::Domain(format!("kernel is for n = {}, got {} insertions", b.n, d.len())));
    }
    let g = b.g;
    let rest = |v_caps: &[u32], v_total: u32| {
        let sd: u32 = d.iter().sum();
        let r = insertion_product::<S>(d, g, v_caps, v_total).shift(sd as i32);
        let val = sd as i32 - d.iter().map(|&x| x.min(g) as i32).sum::<i32>();
        (r, val)
    };
    pair_with_kernel(b, t, d.iter().sum(), rest, extra_window, sectors)
}

/// Pairs the kernel with an insertion factor of total τ-degree `sd`;
/// `rest` builds the factor (and its u-valuation) for given v-caps.
pub(crate) fn pair_with_kernel<S: Scalar>(
    b: &BFunction,
    t: &TimesVector<S>,
    sd: u32,
    rest: impl Fn(&[u32], u32) -> (LaurentSeries<S>, i32),
    extra_window: i32,
    sectors: Sectors,
) -> Result<S> {
    let (base, t) = t.absorb_dilaton()?;
    let prefactor = base.pow_u(2 * b.g + b.n as u32 - 2);
    let raw = b.to_raw();
    let dim = raw.dimension();
    if sd > dim || (t.is_zero() && sd != dim) {
        return Ok(S::zero());
    }
    let upper = !b_minus_suffices(&t, raw.g);
    if upper && sectors == Sectors::MinusOnly {
        return Err(WkError::Domain(format!(
            "F(t; 0, v) does not vanish at genus {}: the origin is not the only zero of F and B-minus alone is incomplete",
            raw.g
        )));
    }
    let with_upper = upper && sectors == Sectors::Full;
    let (v_caps, v_total) = kernel_caps(&raw, with_upper);
    let (rest, rest_val) = rest(&v_caps, v_total);
    let mut total = extract(&raw, &t, &rest, rest_val, &v_caps, v_total, extra_window)?;
    if with_upper {
        total = total + &upper_sector(&raw, &t, &rest, rest_val, dim - sd, &v_caps, v_total, extra_window)?;
    }
    Ok(total * &prefactor)
}

/// Contribution of |λ| > d_{g,n}, from the series over ℓ before resummation:
/// Σ_λ C_g(λ) Σ_ℓ (d + ℓ − |λ|)!/ℓ! [u^{d+ℓ−|λ|} v^λ] (u − F)^ℓ·rest.
/// Each power of (u − F) carries one extra insertion, so ℓ ≤ d_{g,n} − Σd.
#[allow(clippy::too_many_arguments)]
fn upper_sector<S: Scalar>(
    raw: &BFunction,
    t: &TimesVector<S>,
    rest: &LaurentSeries<S>,
    rest_val: i32,
    max_l: u32,
    v_caps: &[u32],
    v_total: u32,
    extra_window: i32,
) -> Result<S> {
    let g = raw.g;
    let dim = raw.dimension();
    let gfact = rat_int(factorial(g));
    let cap = (dim + max_l) as i32 - rest_val + extra_window;
    let f = f_series(t, g, cap, v_caps.to_vec(), v_total);
    let mut u_minus_f = LaurentSeries::zero(v_caps.to_vec(), v_total);
    u_minus_f.add_term(1, vec![0; g as usize], S::one());
    let u_minus_f = u_minus_f.add(&f.scale(&-S::one()));
    let mut powers = vec![rest.clone()];
    for l in 1..=max_l as usize {
        powers.push(powers[l - 1].mul(&u_minus_f));
    }
    let mut total = S::zero();
    for (lam, c) in &raw.upper {
        let s = lam.size();
        if s > dim + max_l {
            continue;
        }
        let mut v = lam.to_vec();
        v.resize(g as usize, 0);
        for l in (s - dim)..=max_l {
            let e = (dim + l - s) as i32;
            let w = rat_int(factorial(dim + l - s)) / rat_int(factorial(l)) * c * &gfact;
            total = total + &powers[l as usize].coeff(e, &v)?.scale(&w);
        }
    }
    Ok(total)
}

/// Shared extraction Σ_λ b_λ g! [u^{−1} v^λ] F^{|λ|−d−1}·rest.
fn extract<S: Scalar>(
    raw: &BFunction,
    t: &TimesVector<S>,
    rest: &LaurentSeries<S>,
    rest_val: i32,
    v_caps: &[u32],
    v_total: u32,
    extra_window: i32,
) -> Result<S> {
    let g = raw.g;
    let dim = raw.dimension();
    let gfact = rat_int(factorial(g));
    let mut by_size: BTreeMap<u32, Vec<(&Partition, &Rational)>> = BTreeMap::new();
    for (lam, c) in &raw.terms {
        by_size.entry(lam.size()).or_default().push((lam, c));
    }
    let mut total = S::zero();
    for (s, lams) in by_size {
        let n_pow = dim + 1 - s;
        let cap = window_for(n_pow, v_total, rest_val) + extra_window;
        let f = f_series(t, g, cap + 1, v_caps.to_vec(), v_total);
        let x = f_inverse_power(&f, n_pow, cap)?.mul(rest);
        if x.u_cap().is_some_and(|c| c < -1) {
            return Err(WkError::Window(format!(
                "u-window too small: exact through u^{} but u^-1 is needed (|lambda| = {s})",
                x.u_cap().unwrap()
            )));
        }
        for (lam, c) in lams {
            let mut v = lam.to_vec();
            v.resize(g as usize, 0);
            let coeff = x.coeff(-1, &v)?;
            total = total + &coeff.scale(&(c * &gfact));
        }
    }
    Ok(total)
}

/// ⟨τ_{d_1}…τ_{d_n}⟩_g from the kernel at t = 0.
pub fn correlator_from_residue(b: &BFunction, d: &[u32]) -> Result<Rational> {
    residue_times_correlator(b, d, &TimesVector::zero(), 0)
}

/// ⟨exp(Σ t_{k−1} τ_k) Π τ_{d_i}⟩_g by expanding the exponential: a finite
/// sum over multisets {k_i ≥ 1} with Σ k_i = d_{g,n} − Σ d.
pub fn times_correlator<S: Scalar>(engine: &Engine, g: u32, d: &[u32], t: &TimesVector<S>) -> Result<S> {
    let n = d.len();
    let dim = dimension(g, n)?;
    let (base, t) = t.absorb_dilaton()?;
    let prefactor = base.pow_u(2 * g + n as u32 - 2);
    let sd: u32 = d.iter().sum();
    if sd > dim {
        return Ok(S::zero());
    }
    let rem = dim - sd;
    let kappas: Vec<Partition> =
        if rem == 0 { vec![Partition::empty()] } else { partition_iter(rem, rem, rem).collect() };
    let mut total = S::zero();
    for kappa in kappas {
        let mut w = S::one();
        for k in kappa.parts() {
            w = w * &t.get(k);
        }
        if w.is_zero() {
            continue;
        }
        let mult: num_bigint::BigInt = kappa.multiplicities().iter().map(|&(_, m)| factorial(m as u32)).product();
        let mut ins: Vec<u32> = d.to_vec();
        ins.extend(kappa.parts().map(|k| k + 1));
        let val = engine.correlator(g, &ins)?;
        total = total + &w.scale(&(val / rat_int(mult)));
    }
    Ok(total * &prefactor)
}

/// Integer powers for scalars.
pub trait PowU: Scalar {
    fn pow_u(&self, k: u32) -> Self {
        let mut out = Self::one();
        for _ in 0..k {
            out = out * self;
        }
        out
    }
}

impl<S: Scalar> PowU for S {}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coefficients::fit_closed_form_engine;
    use crate::combinatorics::rat;
    use num_traits::One;

    fn kernel(e: &Engine, g: u32, n: usize, normalized: bool) -> BFunction {
        let set = fit_closed_form_engine(e, g, None).unwrap();
        build_b_minus(&set, n, normalized).unwrap()
    }

    #[test]
    fn genus_zero_kernel() {
        let e = Engine::new();
        for n in 3..8 {
            let b = kernel(&e, 0, n, true);
            assert_eq!(b.terms, BTreeMap::from([(Partition::empty(), rat_int(factorial(n as u32 - 3)))]));
        }
    }

    #[test]
    fn genus_one_kernel() {
        let e = Engine::new();
        for n in 1..7u32 {
            let b = kernel(&e, 1, n as usize, true);
            assert_eq!(b.monomial_coeff(&Partition::empty()), rat_int(factorial(n)));
            for k in 2..=n + 1 {
                let want = if k <= n { -rat_int(factorial(n - k) * factorial(k - 2)) } else { rat(0, 1) };
                assert_eq!(b.monomial_coeff(&Partition::new([k])), want, "n = {n}, k = {k}");
            }
        }
    }

    #[test]
    fn genus_two_kernel_sectors() {
        let e = Engine::new();
        for n in 1..6u32 {
            let b = kernel(&e, 2, n as usize, true);
            assert_eq!(b.monomial_coeff(&Partition::empty()), rat_int(factorial(n + 3)));
            assert_eq!(b.monomial_coeff(&Partition::new([2])), -rat_int(factorial(n + 1)));
            assert_eq!(b.monomial_coeff(&Partition::new([3])), rat(-9, 5) * rat_int(factorial(n)));
            if n >= 1 {
                assert_eq!(b.monomial_coeff(&Partition::new([2, 2])), rat(9, 5) * rat_int(factorial(n - 1)));
            }
            if n >= 2 {
                assert_eq!(b.monomial_coeff(&Partition::new([3, 2])), rat(9, 5) * rat_int(factorial(n - 2)));
            }
            for k in 4..=n + 3 {
                let kk = k as i64;
                let want = -rat_int(factorial(n + 3 - k) * factorial(k - 3)) / rat(60, 1)
                    * rat(kk * kk * kk + 21 * kk * kk - 70 * kk + 96, 1);
                assert_eq!(b.monomial_coeff(&Partition::new([k])), want);
            }
        }
    }

    #[test]
    fn residue_examples() {
        let e = Engine::new();
        assert_eq!(correlator_from_residue(&kernel(&e, 0, 3, false), &[0, 0, 0]).unwrap(), rat(1, 1));
        assert_eq!(correlator_from_residue(&kernel(&e, 0, 4, false), &[1, 0, 0, 0]).unwrap(), rat(1, 1));
        assert_eq!(correlator_from_residue(&kernel(&e, 2, 2, false), &[3, 2]).unwrap(), rat(29, 5760));
        assert_eq!(correlator_from_residue(&kernel(&e, 1, 1, true), &[1]).unwrap(), rat(1, 24));
    }

    #[test]
    fn residue_matches_engine_small() {
        let e = Engine::new();
        for g in 0..=2u32 {
            for n in 1..=3usize {
                if 2 * g + n as u32 <= 2 {
                    continue;
                }
                let b = kernel(&e, g, n, false);
                let dim = 3 * g + n as u32 - 3;
                for d in partition_iter(dim, dim.max(1), n as u32).chain((dim == 0).then(Partition::empty)) {
                    let mut dv = d.to_vec();
                    dv.resize(n, 0);
                    assert_eq!(correlator_from_residue(&b, &dv).unwrap(), e.correlator(g, &dv).unwrap(), "g = {g}, d = {dv:?}");
                }
            }
        }
    }

    #[test]
    fn f_series_basics() {
        let f = f_series(&TimesVector::<Rational>::zero(), 2, 6, vec![3, 3], 6);
        assert_eq!(f.terms().len(), 1);
        assert_eq!(f.u_cap(), None);
        let f = f_series(&wp_times(), 0, 4, vec![], 0);
        let want = [(1, PiScalar::one()), (2, -PiScalar::pi2()), (3, PiScalar::monomial(rat(1, 3), 2))];
        for (u, c) in want {
            assert_eq!(f.coeff(u, &[]).unwrap(), c);
        }
        let f = f_series(&wp_times(), 1, 3, vec![2], 2);
        assert_eq!(f.coeff(0, &[1]).unwrap(), PiScalar::zero());
        // v (J_0(2π√(2u)) − 1) = v (−2π² u + π⁴ u² − …)
        assert_eq!(f.coeff(1, &[1]).unwrap(), PiScalar::monomial(rat(-2, 1), 1));
        assert_eq!(f.coeff(2, &[1]).unwrap(), PiScalar::monomial(rat(1, 1), 2));
        assert!(f.coeff(5, &[0]).is_err());
    }

    #[test]
    fn times_examples() {
        let e = Engine::new();
        let t = TimesVector::zero().with_time(1, PiScalar::monomial(rat(2, 1), 1));
        assert_eq!(times_correlator(&e, 0, &[0, 0, 0, 0], &t).unwrap(), PiScalar::monomial(rat(2, 1), 1));
        let v = times_correlator(&e, 1, &[0], &wp_times()).unwrap();
        assert_eq!(v, PiScalar::monomial(rat(1, 12), 1));
        assert!(TimesVector::<Rational>::zero().with_tau(0, rat(1, 1)).is_err());
        assert_eq!(times_correlator(&e, 2, &[3, 2], &TimesVector::<Rational>::zero()).unwrap(), rat(29, 5760));
    }

    #[test]
    fn dilaton_absorption_matches_direct_expansion() {
        // ⟨exp(t_0 τ_1) τ_2 τ_0⟩_1 = Σ_m t_0^m/m! ⟨τ_1^m τ_2 τ_0⟩_1 = (1 − t_0)^{−2}/24 by dilaton
        let e = Engine::new();
        let t = TimesVector::zero().with_time(0, rat(1, 3));
        let v = times_correlator(&e, 1, &[2, 0], &t).unwrap();
        assert_eq!(v, rat(9, 4) / rat(24, 1));
        let b = kernel(&e, 1, 2, false);
        assert_eq!(residue_times_correlator(&b, &[2, 0], &t, 0).unwrap(), v);
    }

    #[test]
    fn residue_times_agree_with_expansion() {
        let e = Engine::new();
        let t = TimesVector::zero().with_time(1, rat(1, 2)).with_time(2, rat(-3, 1)).with_time(4, rat(5, 7));
        for (g, n) in [(0, 4), (0, 5), (1, 1), (1, 2), (2, 1)] {
            let b = kernel(&e, g, n, false);
            let dim = 3 * g + n as u32 - 3;
            for s in 0..=dim {
                for d in partition_iter(s, s.max(1), n as u32).chain((s == 0).then(Partition::empty)) {
                    if d.len() > n {
                        continue;
                    }
                    let mut dv = d.to_vec();
                    dv.resize(n, 0);
                    let want = times_correlator(&e, g, &dv, &t).unwrap();
                    let got = residue_times_correlator(&b, &dv, &t, 0).unwrap();
                    assert_eq!(got, want, "g = {g}, d = {dv:?}");
                }
            }
        }
    }

    #[test]
    fn b_minus_alone_fails_when_f_moves_off_the_origin() {
        let e = Engine::new();
        let b = kernel(&e, 2, 1, false);
        assert!(!b_minus_suffices(&wp_times(), 2));
        assert!(b_minus_suffices(&wp_times(), 1));
        let minus = residue_times_correlator_with(&b, &[0], &wp_times(), 0, Sectors::MinusUnchecked).unwrap();
        let full = residue_times_correlator(&b, &[0], &wp_times(), 0).unwrap();
        assert_eq!(minus, PiScalar::monomial(rat(-47, 576), 4));
        assert_eq!(full, PiScalar::monomial(rat(29, 192), 4));
        assert_eq!(full, times_correlator(&e, 2, &[0], &wp_times()).unwrap());
        assert!(residue_times_correlator_with(&b, &[0], &wp_times(), 0, Sectors::MinusOnly).is_err());
    }

    #[test]
    fn part_cap_does_not_change_extraction() {
        let e = Engine::new();
        for (g, n) in [(1, 2), (2, 2), (2, 3), (3, 2)] {
            let b = kernel(&e, g, n, false);
            let capped = b.with_part_cap(n as u32);
            assert!(g < 2 || capped.terms.len() < b.terms.len());
            let dim = 3 * g + n as u32 - 3;
            for d in partition_iter(dim, dim, n as u32) {
                let mut dv = d.to_vec();
                dv.resize(n, 0);
                assert_eq!(correlator_from_residue(&b, &dv).unwrap(), correlator_from_residue(&capped, &dv).unwrap());
            }
        }
    }

    #[test]
    fn small_window_is_an_error() {
        let e = Engine::new();
        let b = kernel(&e, 1, 1, false);
        let r = residue_times_correlator(&b, &[0], &wp_times(), -3);
        assert!(matches!(r, Err(WkError::Window(_))), "{r:?}");
    }
}
