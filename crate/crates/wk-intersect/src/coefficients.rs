//! The n-independent coefficients C_g(λ): seed tables, polynomial families
//! C_g(k, μ) = (k + |μ| − g − 1)!·Q(k), and the checks built on them.

use std::collections::BTreeMap;

use num_traits::{One, Signed, Zero};
use rayon::prelude::*;
use serde::Serialize;

use crate::amplitude::{amplitude, dimension, normalization, pad_ones, AmplitudeDecomposition};
use crate::combinatorics::{factorial, q_set, rat, rat_int, rational_pq, Partition, Rational};
use crate::engine::Engine;
use crate::error::{Result, WkError};

/// Threshold k0 = 3g − 2 − |μ| + μ1 − δ_{|μ|,3g−3}, with μ1 read as 2 for μ = ∅.
pub fn k0(g: u32, mu: &Partition) -> u32 {
    let size = mu.size();
    let mu1 = if mu.is_empty() { 2 } else { mu.first() };
    let delta = u32::from(size == 3 * g - 3);
    3 * g - 2 - size + mu1 - delta
}

/// deg Q = 3g − 3 − |μ|.
pub fn family_degree(g: u32, mu: &Partition) -> u32 {
    3 * g - 3 - mu.size()
}

/// n_min(g) = 6g − 3 − δ_{g,1}.
pub fn n_min(g: u32) -> usize {
    (6 * g - 3 - u32::from(g == 1)) as usize
}

/// Default largest n used for fitting: n_min plus the consistency point.
pub fn default_seed_max_n(g: u32) -> usize {
    n_min(g) + 1
}

/// Factorial shift |μ| − g − 1.
pub fn factorial_shift(g: u32, mu: &Partition) -> i64 {
    mu.size() as i64 - g as i64 - 1
}

/// (k + shift)!, erroring below zero.
fn shifted_factorial(k: u32, shift: i64) -> Result<Rational> {
    let a = k as i64 + shift;
    if a < 0 {
        return Err(WkError::Domain(format!("factorial of negative argument {a}")));
    }
    Ok(rat_int(factorial(a as u32)))
}

/// Evaluates Σ c_i k^i.
pub fn eval_poly(coeffs: &[Rational], k: &Rational) -> Rational {
    coeffs.iter().rev().fold(Rational::zero(), |acc, c| acc * k + c)
}

/// Exact interpolation through (x_i, y_i); coefficients in increasing degree.
pub fn lagrange(xs: &[Rational], ys: &[Rational]) -> Vec<Rational> {
    assert_eq!(xs.len(), ys.len());
    let m = xs.len();
    // Newton divided differences, then expand the Newton form.
    let mut dd = ys.to_vec();
    for j in 1..m {
        for i in (j..m).rev() {
            dd[i] = (&dd[i] - &dd[i - 1]) / (&xs[i] - &xs[i - j]);
        }
    }
    let mut poly = vec![Rational::zero(); m.max(1)];
    for i in (0..m).rev() {
        // poly = poly·(k − x_i) + dd_i
        let mut next = vec![Rational::zero(); m.max(1)];
        for (p, c) in poly.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            if p + 1 < next.len() {
                next[p + 1] += c;
            }
            next[p] -= c * &xs[i];
        }
        next[0] += &dd[i];
        poly = next;
    }
    poly
}

/// C_g(k, μ) = (k + shift)!·Q(k) for k ≥ k0.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ClosedFormFamily {
    pub g: u32,
    pub mu: Partition,
    pub k0: u32,
    pub shift: i64,
    /// Q in increasing powers of k.
    #[serde(serialize_with = "ser_rats")]
    pub qpoly: Vec<Rational>,
}

fn ser_rats<S: serde::Serializer>(v: &[Rational], s: S) -> std::result::Result<S::Ok, S::Error> {
    s.collect_seq(v.iter().map(rational_pq))
}

impl ClosedFormFamily {
    pub fn eval(&self, k: u32) -> Result<Rational> {
        Ok(shifted_factorial(k, self.shift)? * eval_poly(&self.qpoly, &rat(k as i64, 1)))
    }

    pub fn is_zero(&self) -> bool {
        self.qpoly.iter().all(|c| c.is_zero())
    }
}

/// Normalized C̃_g((k) ⊔ μ) for μ ∈ Q_g and max(2, μ1) ≤ k ≤ k_max(μ), plus C̃_g(∅).
#[derive(Clone, Debug, PartialEq)]
pub struct SeedTable {
    pub g: u32,
    pub c_empty: Rational,
    pub entries: BTreeMap<(u32, Partition), Rational>,
    pub max_n: usize,
}

impl SeedTable {
    /// Pulls each C̃_g((k) ⊔ μ) from the amplitude at n = k.
    pub fn build(engine: &Engine, g: u32, max_n: usize) -> Result<Self> {
        if g == 0 {
            let a = amplitude(engine, 0, 3, true)?;
            return Ok(SeedTable { g, c_empty: a.c_coeff(&Partition::empty()), entries: BTreeMap::new(), max_n });
        }
        let amps: Vec<AmplitudeDecomposition> =
            (1..=max_n).into_par_iter().map(|n| amplitude(engine, g, n, true)).collect::<Result<_>>()?;
        Ok(Self::from_amplitudes(g, &amps, max_n))
    }

    /// `amps[i]` must be the normalized amplitude at n = i + 1.
    pub fn from_amplitudes(g: u32, amps: &[AmplitudeDecomposition], max_n: usize) -> Self {
        let mut entries = BTreeMap::new();
        for mu in q_set(g) {
            let lo = mu.first().max(2);
            for k in lo..=max_n as u32 {
                let lam = mu.with_part(k);
                let n = k.max(lam.size().saturating_sub(3 * g - 3)) as usize;
                if let Some(a) = amps.get(n - 1) {
                    entries.insert((k, mu.clone()), a.c_coeff(&lam));
                }
            }
        }
        SeedTable { g, c_empty: amps[0].c_coeff(&Partition::empty()), entries, max_n }
    }

    /// C̃_g(λ) when the table covers λ; Lemma-1 zeros are always covered.
    pub fn lookup(&self, lambda: &Partition) -> Option<Rational> {
        if lambda.is_empty() {
            return Some(self.c_empty.clone());
        }
        let k = lambda.first();
        let mu = lambda.remove_part(k).unwrap();
        if self.g == 0 || mu.size() > 3 * self.g - 3 {
            return Some(Rational::zero());
        }
        self.entries.get(&(k, mu)).cloned()
    }
}

/// Fitted families plus the verbatim values below each threshold.
#[derive(Clone, Debug, PartialEq)]
pub struct ClosedFormSet {
    pub g: u32,
    pub c_empty: Rational,
    pub families: BTreeMap<Partition, ClosedFormFamily>,
    pub exceptional: BTreeMap<(u32, Partition), Rational>,
}

impl ClosedFormSet {
    /// Normalized C̃_g(λ) for λ with parts ≥ 2.
    pub fn c_value(&self, lambda: &Partition) -> Result<Rational> {
        if lambda.is_empty() {
            return Ok(self.c_empty.clone());
        }
        let k = lambda.first();
        let mu = lambda.remove_part(k).unwrap();
        if self.g == 0 || mu.size() > 3 * self.g - 3 {
            return Ok(Rational::zero());
        }
        let fam = self
            .families
            .get(&mu)
            .ok_or_else(|| WkError::Coverage(format!("no family for mu = {mu:?}")))?;
        if k >= fam.k0 {
            return fam.eval(k);
        }
        self.exceptional
            .get(&(k, mu.clone()))
            .cloned()
            .ok_or_else(|| WkError::Coverage(format!("no value for k = {k}, mu = {mu:?}")))
    }

    pub fn c_value_raw(&self, lambda: &Partition) -> Result<Rational> {
        Ok(self.c_value(lambda)? / rat_int(normalization(self.g)))
    }
}

/// Fits every family of Q_g from a seed table and checks one point past each
/// fit window.
pub fn fit_closed_form(table: &SeedTable) -> Result<ClosedFormSet> {
    let g = table.g;
    let mut families = BTreeMap::new();
    let mut exceptional = BTreeMap::new();
    for mu in q_set(g) {
        let start = k0(g, &mu);
        let deg = family_degree(g, &mu);
        let shift = factorial_shift(g, &mu);
        let get = |k: u32| {
            table.entries.get(&(k, mu.clone())).cloned().ok_or_else(|| {
                WkError::Coverage(format!(
                    "seed C({k}, {mu:?}) missing; raise seed-max-n above {}",
                    table.max_n
                ))
            })
        };
        let mut xs = Vec::new();
        let mut ys = Vec::new();
        for k in start..=start + deg {
            xs.push(rat(k as i64, 1));
            ys.push(get(k)? / shifted_factorial(k, shift)?);
        }
        let qpoly = lagrange(&xs, &ys);
        let fam = ClosedFormFamily { g, mu: mu.clone(), k0: start, shift, qpoly };
        let extra = start + deg + 1;
        let got = get(extra)?;
        let expected = fam.eval(extra)?;
        if got != expected {
            return Err(WkError::FitIntegrity {
                mu: format!("{mu:?}"),
                k: extra,
                got: rational_pq(&got),
                expected: rational_pq(&expected),
            });
        }
        for k in mu.first().max(2)..start {
            exceptional.insert((k, mu.clone()), get(k)?);
        }
        families.insert(mu, fam);
    }
    Ok(ClosedFormSet { g, c_empty: table.c_empty.clone(), families, exceptional })
}

/// Builds the seed table up to `seed_max_n` (default n_min + 1) and fits.
pub fn fit_closed_form_engine(engine: &Engine, g: u32, seed_max_n: Option<usize>) -> Result<ClosedFormSet> {
    let max_n = if g == 0 { 3 } else { seed_max_n.unwrap_or_else(|| default_seed_max_n(g)) };
    fit_closed_form(&SeedTable::build(engine, g, max_n)?)
}

/// Assembles Ã_{g,n} from the families alone.
pub fn closed_form_amplitude(set: &ClosedFormSet, n: usize) -> Result<AmplitudeDecomposition> {
    let g = set.g;
    let d = dimension(g, n)?;
    let mut dcoeffs = BTreeMap::new();
    let mut put = |lam: Partition, v: Rational| {
        if !v.is_zero() && lam.size() <= d {
            dcoeffs.insert(pad_ones(&lam, d), v);
        }
    };
    put(Partition::empty(), set.c_empty.clone());
    for mu in q_set(g) {
        for k in mu.first().max(2)..=n as u32 {
            let lam = mu.with_part(k);
            put(lam.clone(), set.c_value(&lam)?);
        }
    }
    Ok(AmplitudeDecomposition { g, n, normalized: true, dcoeffs })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Violation {
    pub kind: String,
    pub lambda: Partition,
    pub lhs: String,
    pub rhs: String,
}

fn violation(kind: &str, lambda: &Partition, lhs: &Rational, rhs: &Rational) -> Violation {
    Violation { kind: kind.into(), lambda: lambda.clone(), lhs: rational_pq(lhs), rhs: rational_pq(rhs) }
}

/// Lemma-1 zeros: C_{g,n}(λ) = 0 when |λ| − λ1 > 3g − 3.
pub fn lemma1_violations(a: &AmplitudeDecomposition) -> Vec<Violation> {
    let bound = 3 * a.g as i64 - 3;
    a.c_coeffs()
        .iter()
        .filter(|(lam, v)| !lam.is_empty() && (lam.size() - lam.first()) as i64 > bound && !v.is_zero())
        .map(|(lam, v)| violation("lemma1", lam, v, &Rational::zero()))
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StringReport {
    pub g: u32,
    pub n: usize,
    pub overlap_checked: usize,
    pub boundary_checked: usize,
    pub lemma1_checked: usize,
    pub violations: Vec<Violation>,
}

/// Compares the decompositions at n and n + 1.
pub fn check_string_relations(engine: &Engine, g: u32, n: usize) -> Result<StringReport> {
    let a = amplitude(engine, g, n, true)?;
    let b = amplitude(engine, g, n + 1, true)?;
    Ok(string_report(&a, &b))
}

pub fn string_report(a: &AmplitudeDecomposition, b: &AmplitudeDecomposition) -> StringReport {
    let (g, n) = (a.g, a.n);
    let mut violations = Vec::new();
    let mut keys: Vec<Partition> = a.c_coeffs().into_keys().chain(b.c_coeffs().into_keys()).collect();
    keys.sort();
    keys.dedup();
    let mut overlap = 0;
    let mut boundary = 0;
    for lam in &keys {
        let (ca, cb) = (a.c_coeff(lam), b.c_coeff(lam));
        if lam.size() <= a.dimension() && lam.first() as usize <= n {
            overlap += 1;
            if ca != cb {
                violations.push(violation("overlap", lam, &cb, &ca));
            }
        }
        for amp in [a, b] {
            if !lam.is_empty() && lam.size() == amp.dimension() && (lam.first() as usize) < amp.n {
                boundary += 1;
                let v = amp.c_coeff(lam);
                if !v.is_zero() {
                    violations.push(violation("boundary", lam, &v, &Rational::zero()));
                }
            }
        }
    }
    violations.extend(lemma1_violations(a));
    violations.extend(lemma1_violations(b));
    StringReport {
        g,
        n,
        overlap_checked: overlap,
        boundary_checked: boundary,
        lemma1_checked: a.dcoeffs.len() + b.dcoeffs.len(),
        violations,
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DilatonReport {
    pub g: u32,
    pub checked: usize,
    pub skipped: usize,
    pub violations: Vec<Violation>,
}

/// Left-hand side of
/// Σ_{j∈step(λ)} (m_{λj+1}(λ)+1) C(λ+(1)_j) + (m_2(λ)+1) C(λ⊔(2)) + (g−|λ|) C(λ),
/// which must vanish.
pub fn dilaton_residual(table: &SeedTable, lambda: &Partition) -> Result<Rational> {
    let g = table.g as i64;
    let need = |l: &Partition| {
        table.lookup(l).ok_or_else(|| WkError::Coverage(format!("C({l:?}) not in the seed table")))
    };
    let mut acc = Rational::zero();
    for j in 0..lambda.len() {
        if j > 0 && lambda.part(j) == lambda.part(j - 1) {
            continue;
        }
        let m = lambda.mult(lambda.part(j) + 1) as i64;
        acc += need(&lambda.bump(j))? * rat(m + 1, 1);
    }
    acc += need(&lambda.with_part(2))? * rat(lambda.mult(2) as i64 + 1, 1);
    acc += need(lambda)? * rat(g - lambda.size() as i64, 1);
    Ok(acc)
}

/// Runs the dilaton relation on every λ whose references the table covers,
/// including C(2, ∅) = −g·C(∅).
pub fn verify_dilaton_recursion(table: &SeedTable) -> DilatonReport {
    let g = table.g;
    let mut lambdas = vec![Partition::empty()];
    for (k, mu) in table.entries.keys() {
        lambdas.push(mu.with_part(*k));
    }
    let mut checked = 0;
    let mut skipped = 0;
    let mut violations = Vec::new();
    for lam in &lambdas {
        match dilaton_residual(table, lam) {
            Ok(r) => {
                checked += 1;
                if !r.is_zero() {
                    violations.push(violation("dilaton", lam, &r, &Rational::zero()));
                }
            }
            Err(_) => skipped += 1,
        }
    }
    let two = Partition::new([2]);
    if let (Some(c2), Some(c0)) = (table.lookup(&two), table.lookup(&Partition::empty())) {
        let rhs = -(c0 * rat(g as i64, 1));
        if c2 != rhs {
            violations.push(violation("dilaton_empty", &two, &c2, &rhs));
        }
    }
    DilatonReport { g, checked, skipped, violations }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConjectureReport {
    pub g: u32,
    pub checked_n: usize,
    pub violations: Vec<Violation>,
}

/// C_g(λ) = 0 for ℓ(λ) > g, checked at n = 2g − 1, with the Lemma-1 zeros
/// re-verified first.
pub fn check_conjecture(engine: &Engine, g: u32) -> Result<ConjectureReport> {
    if g == 0 {
        return Err(WkError::Domain("the conjecture is stated for g >= 1".into()));
    }
    let n = 2 * g as usize - 1;
    let a = amplitude(engine, g, n, true)?;
    let mut violations = lemma1_violations(&a);
    for (lam, v) in a.c_coeffs() {
        if lam.len() > g as usize && !v.is_zero() {
            violations.push(violation("length", &lam, &v, &Rational::zero()));
        }
    }
    Ok(ConjectureReport { g, checked_n: n, violations })
}

/// Splits Q into sign, N/D content and a primitive integer polynomial with
/// positive leading coefficient, as printed tables do.
fn primitive_form(q: &[Rational]) -> (Rational, Vec<num_bigint::BigInt>) {
    use num_integer::Integer;
    let mut lcm = num_bigint::BigInt::one();
    for c in q {
        lcm = lcm.lcm(c.denom());
    }
    let ints: Vec<num_bigint::BigInt> = q.iter().map(|c| c.numer() * (&lcm / c.denom())).collect();
    let mut gcd = num_bigint::BigInt::zero();
    for c in &ints {
        gcd = gcd.gcd(c);
    }
    if gcd.is_zero() {
        return (Rational::zero(), vec![]);
    }
    let lead_neg = ints.iter().rev().find(|c| !c.is_zero()).map_or(false, |c| c.is_negative());
    if lead_neg {
        gcd = -gcd;
    }
    let prim = ints.iter().map(|c| c / &gcd).collect();
    (Rational::new(gcd, lcm), prim)
}

fn poly_text(p: &[num_bigint::BigInt]) -> String {
    let mut out = String::new();
    for (i, c) in p.iter().enumerate().rev() {
        if c.is_zero() {
            continue;
        }
        let neg = c.is_negative();
        let a = c.abs();
        if out.is_empty() {
            if neg {
                out.push('-');
            }
        } else {
            out.push_str(if neg { " - " } else { " + " });
        }
        let mono = match i {
            0 => String::new(),
            1 => "k".into(),
            _ => format!("k^{i}"),
        };
        if mono.is_empty() {
            out.push_str(&a.to_string());
        } else if a.is_one() {
            out.push_str(&mono);
        } else {
            out.push_str(&format!("{a} {mono}"));
        }
    }
    out
}

fn shifted_text(shift: i64) -> String {
    match shift {
        0 => "k!".into(),
        s if s > 0 => format!("(k + {s})!"),
        s => format!("(k - {})!", -s),
    }
}

fn mu_text(mu: &Partition) -> String {
    if mu.is_empty() {
        "∅".into()
    } else {
        mu.tuple_string()
    }
}

/// One line per family in the form `C_4(k,(9)) = -11 (k + 4)!/159250`.
pub fn family_text(f: &ClosedFormFamily) -> String {
    let (content, prim) = primitive_form(&f.qpoly);
    let lhs = format!("C_{}(k,{})", f.g, mu_text(&f.mu));
    if content.is_zero() {
        return format!("{lhs} = 0");
    }
    let sign = if content.is_negative() { "-" } else { "" };
    let num = content.numer().abs();
    let den = content.denom();
    let mut rhs = String::from(sign);
    if !num.is_one() {
        rhs.push_str(&format!("{num} "));
    }
    rhs.push_str(&shifted_text(f.shift));
    if !den.is_one() {
        rhs.push_str(&format!("/{den}"));
    }
    if prim.len() > 1 {
        rhs.push_str(&format!(" ({})", poly_text(&prim)));
    }
    format!("{lhs} = {rhs}")
}

/// Closed formula text: exceptional values, then the k-families with their
/// thresholds.
pub fn formula_text(set: &ClosedFormSet) -> String {
    let g = set.g;
    let mut out = vec![format!("C_{g}(∅) = {}", set.c_empty)];
    for fam in set.families.values() {
        for ((k, m), v) in &set.exceptional {
            if m == &fam.mu {
                out.push(format!("C_{g}({k},{}) = {v}", mu_text(m)));
            }
        }
        out.push(format!("{}    for k >= {}", family_text(fam), fam.k0));
    }
    out.join("\n")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(v: &[u32]) -> Partition {
        Partition::new(v.iter().copied())
    }

    #[test]
    fn lagrange_recovers_polynomial() {
        let q = vec![rat(3, 2), rat(-7, 1), rat(0, 1), rat(5, 9)];
        let xs: Vec<Rational> = (4..8).map(|k| rat(k, 1)).collect();
        let ys: Vec<Rational> = xs.iter().map(|x| eval_poly(&q, x)).collect();
        assert_eq!(lagrange(&xs, &ys), q);
        assert_eq!(lagrange(&[rat(2, 1)], &[rat(5, 1)]), vec![rat(5, 1)]);
    }

    #[test]
    fn thresholds() {
        assert_eq!(k0(4, &p(&[9])), 9);
        assert_eq!(k0(4, &p(&[2])), 10);
        assert_eq!(k0(4, &p(&[2, 2])), 8);
        assert_eq!(k0(4, &Partition::empty()), 12);
        assert_eq!(k0(1, &Partition::empty()), 2);
        assert_eq!(n_min(1), 2);
        assert_eq!(n_min(4), 21);
    }

    #[test]
    fn genus_one_and_two_families() {
        let e = Engine::new();
        let one = fit_closed_form_engine(&e, 1, None).unwrap();
        let f = &one.families[&Partition::empty()];
        for k in 2..12 {
            assert_eq!(f.eval(k).unwrap(), -rat_int(factorial(k - 2)));
        }
        let two = fit_closed_form_engine(&e, 2, None).unwrap();
        let f = &two.families[&Partition::empty()];
        assert_eq!(f.qpoly, vec![rat(-96, 30), rat(70, 30), rat(-21, 30), rat(-1, 30)]);
        assert_eq!(two.c_value(&p(&[2])).unwrap(), rat(-2, 1));
        assert_eq!(two.c_value(&p(&[3])).unwrap(), rat(-18, 5));
        assert_eq!(family_text(f), "C_2(k,∅) = -(k - 3)!/30 (k^3 + 21 k^2 - 70 k + 96)");
    }

    #[test]
    fn closed_form_matches_engine_genus_two() {
        let e = Engine::new();
        let set = fit_closed_form_engine(&e, 2, None).unwrap();
        for n in 1..=9 {
            assert_eq!(closed_form_amplitude(&set, n).unwrap(), amplitude(&e, 2, n, true).unwrap(), "n = {n}");
        }
    }

    #[test]
    fn dilaton_relation_genus_one_to_three() {
        let e = Engine::new();
        for g in 1..=3 {
            let t = SeedTable::build(&e, g, default_seed_max_n(g)).unwrap();
            let r = verify_dilaton_recursion(&t);
            assert!(r.violations.is_empty(), "{r:?}");
            assert!(r.checked > 0);
        }
    }

    #[test]
    fn missing_entry_is_a_coverage_error() {
        let e = Engine::new();
        let t = SeedTable::build(&e, 2, 4).unwrap();
        assert!(matches!(dilaton_residual(&t, &p(&[9])), Err(WkError::Coverage(_))));
        assert!(matches!(fit_closed_form(&t), Err(WkError::Coverage(_))));
    }

    #[test]
    fn string_relations_hold() {
        let e = Engine::new();
        for (g, n) in [(0, 4), (1, 3), (2, 3), (3, 4)] {
            let r = check_string_relations(&e, g, n).unwrap();
            assert!(r.violations.is_empty(), "{r:?}");
        }
    }

    #[test]
    fn conjecture_genus_three() {
        let e = Engine::new();
        let r = check_conjecture(&e, 3).unwrap();
        assert_eq!(r.checked_n, 5);
        assert!(r.violations.is_empty());
    }
}
