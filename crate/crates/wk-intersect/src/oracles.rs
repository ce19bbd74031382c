//! Independent closed forms: one- and two-point functions, the three-point
//! formula, and the one-part Hurwitz polynomials.

use std::collections::BTreeMap;

use num_traits::{One, Zero};

use crate::amplitude::normalization;
use crate::combinatorics::{binomial, double_factorial, factorial, partition_iter, pow_i, rat, rat_int, Partition, Rational};
use crate::error::{Result, WkError};
use crate::poly::MPoly;
use crate::symmetric::{mpoly_to_e, EPolynomial};

fn e1_pow(k: u32) -> Partition {
    Partition::empty().pad_ones(k)
}

/// A_{g,1} = e1^{3g−2}/(24^g g!).
pub fn one_point(g: u32) -> Result<EPolynomial> {
    if g == 0 {
        return Err(WkError::Unstable { g, n: 1 });
    }
    Ok(EPolynomial::term(e1_pow(3 * g - 2), rat_int(normalization(g)).recip()).with_nvars(1))
}

/// C_g((2)^m) = binom(g, m)(−3)^m/((2m + 1)·24^g g!); zero for m > g.
pub fn two_point_coeff(g: u32, m: u32) -> Rational {
    if m > g {
        return Rational::zero();
    }
    rat_int(binomial(g, m) * pow_i(-3, m)) / rat_int(normalization(g) * (2 * m + 1))
}

/// A_{g,2} = Σ_m C_g((2)^m) e2^m e1^{3g−1−2m}.
pub fn two_point(g: u32) -> Result<EPolynomial> {
    if g == 0 {
        return Err(WkError::Unstable { g, n: 2 });
    }
    let mut p = EPolynomial::new().with_nvars(2);
    for m in 0..=g {
        let lam = Partition::new(std::iter::repeat(2).take(m as usize)).pad_ones(3 * g - 1 - 2 * m);
        p.add_term(lam, two_point_coeff(g, m));
    }
    Ok(p)
}

/// Σ_k (−4)^k m!/(m−k)!·k!/(2k+1)! = 1/(2m+1).
pub fn two_point_identity(m: u32) -> bool {
    let mut s = Rational::zero();
    for k in 0..=m {
        s += rat_int(pow_i(-4, k) * factorial(m) / factorial(m - k) * factorial(k)) / rat_int(factorial(2 * k + 1));
    }
    s == rat(1, 2 * m as i64 + 1)
}

/// Polynomial in t with e-basis coefficients.
type TPoly = Vec<EPolynomial>;

fn tmul(a: &TPoly, b: &TPoly, cap: usize) -> TPoly {
    let mut out = vec![EPolynomial::new(); cap + 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            if i + j <= cap && !x.is_empty() && !y.is_empty() {
                out[i + j] = out[i + j].add(&x.mul(y));
            }
        }
    }
    out
}

fn e(k: u32) -> EPolynomial {
    EPolynomial::term(Partition::new([k]), Rational::one())
}

fn e_const(c: Rational) -> EPolynomial {
    EPolynomial::constant(c)
}

/// Removes one factor of e1 from every term; errors if some term lacks it.
fn divide_by_e1(p: &EPolynomial) -> Result<EPolynomial> {
    let mut out = EPolynomial::new();
    for (k, c) in p.terms() {
        let q = k
            .remove_part(1)
            .ok_or_else(|| WkError::Integrity(format!("term e_{k:?} of the three-point residue is not divisible by e1")))?;
        out.add_term(q, c.clone());
    }
    Ok(out)
}

/// T_r = 4^r (2r+1)!! P_r, from the residue form
/// −(3r+2)(−1)^{r+1} e3^r + Σ_k [t^r] (e3^{r−k}/k)(r + t/e1)(e1 − t)^r (t e2 − t² e1 + t³)^k.
pub fn zagier_three_point(r: u32) -> Result<EPolynomial> {
    let cap = r as usize;
    let sign = if r % 2 == 0 { -1 } else { 1 };
    let mut out = e(3).pow(r).scale(&rat(-(3 * r as i64 + 2) * sign, 1));
    // (e1 − t)^r
    let base: TPoly = vec![e(1), e_const(rat(-1, 1))];
    let mut pw: TPoly = vec![e_const(Rational::one())];
    for _ in 0..r {
        pw = tmul(&pw, &base, cap);
    }
    let cubic: TPoly = vec![EPolynomial::new(), e(2), e(1).scale(&rat(-1, 1)), e_const(Rational::one())];
    let mut cub_k: TPoly = vec![e_const(Rational::one())];
    let mut pending = EPolynomial::new();
    for k in 1..=r {
        cub_k = tmul(&cub_k, &cubic, cap);
        let prod = tmul(&pw, &cub_k, cap);
        let pref = e(3).pow(r - k).scale(&rat(1, k as i64));
        let get = |i: usize| prod.get(i).cloned().unwrap_or_default();
        // r·[t^r] + (1/e1)·[t^{r−1}]
        out = out.add(&pref.mul(&get(cap)).scale(&rat(r as i64, 1)));
        if cap >= 1 {
            pending = pending.add(&pref.mul(&get(cap - 1)));
        }
    }
    Ok(out.add(&divide_by_e1(&pending)?).with_nvars(3))
}

/// T_r from the defining sum (1/e1) Σ_{i<j} (x_i + x_j)^{r+1}(x_i x_j)^r.
pub fn zagier_three_point_direct(r: u32) -> Result<EPolynomial> {
    let x: Vec<MPoly> = (0..3).map(|i| MPoly::var(3, i)).collect();
    let mut s = MPoly::zero(3);
    for i in 0..3 {
        for j in i + 1..3 {
            s = s.add(&x[i].add(&x[j]).pow(r + 1).mul(&x[i].mul(&x[j]).pow(r)));
        }
    }
    mpoly_to_e(&s.div_by_e1()?)
}

/// A_{g,3} from T_r via P_r = T_r/(4^r (2r+1)!!), the weights
/// (2r)!!/(4^{h−r}(2h+2)!!) and the factor exp(p3/24).
pub fn three_point(g: u32) -> Result<EPolynomial> {
    let p3 = EPolynomial::from_terms([
        (e1_pow(3), rat(1, 1)),
        (Partition::new([2, 1]), rat(-3, 1)),
        (Partition::new([3]), rat(3, 1)),
    ]);
    let q = EPolynomial::from_terms([(Partition::new([2, 1]), rat(1, 1)), (Partition::new([3]), rat(-1, 1))]);
    let mut p = Vec::new();
    for r in 0..=g {
        let norm = rat_int(pow_i(4, r) * double_factorial(2 * r as i64 + 1)?);
        p.push(zagier_three_point(r)?.scale(&norm.recip()));
    }
    let mut total = EPolynomial::new();
    for l in 0..=g {
        let h = g - l;
        let mut b = EPolynomial::new();
        for r in 0..=h {
            let w = rat_int(double_factorial(2 * r as i64)?)
                / rat_int(pow_i(4, h - r) * double_factorial(2 * h as i64 + 2)?);
            b = b.add(&p[r as usize].mul(&q.pow(h - r)).scale(&w));
        }
        let ex = p3.pow(l).scale(&rat_int(pow_i(24, l) * factorial(l)).recip());
        total = total.add(&ex.mul(&b));
    }
    Ok(total.truncate_vars(3))
}

/// Coefficients of S(x) = sinh(x/2)/(x/2) in x^{2k}, k ≤ order.
pub fn s_series(order: usize) -> Vec<Rational> {
    (0..=order as u32).map(|k| rat_int(pow_i(4, k) * factorial(2 * k + 1)).recip()).collect()
}

/// Bernoulli numbers B_0..B_m (B_1 = −1/2).
pub fn bernoulli(m: usize) -> Vec<Rational> {
    let mut b = vec![Rational::one()];
    for n in 1..=m as u32 {
        let mut s = Rational::zero();
        for k in 0..n {
            s += rat_int(binomial(n + 1, k)) * &b[k as usize];
        }
        b.push(-s / rat(n as i64 + 1, 1));
    }
    b
}

/// Coefficients of 1/S(x) in x^{2k}: (2^{1−2k} − 1) B_{2k}/(2k)!.
pub fn inv_s_series(order: usize) -> Vec<Rational> {
    let b = bernoulli(2 * order);
    (0..=order as u32)
        .map(|k| {
            let f = rat(2, 1) / rat_int(pow_i(4, k));
            (f - Rational::one()) * &b[2 * k as usize] / rat_int(factorial(2 * k))
        })
        .collect()
}

/// P_{g,n} = [t^{2g}] Π S(t x_i)/S(t) in the monomial basis of x_i²:
/// partition ρ ↦ coefficient of m_ρ(x²).
#[derive(Clone, Debug, PartialEq)]
pub struct HurwitzPoly {
    pub g: u32,
    pub n: usize,
    pub terms: BTreeMap<Partition, Rational>,
}

impl HurwitzPoly {
    /// Explicit polynomial in x_1..x_n (exponents doubled).
    pub fn to_mpoly(&self) -> MPoly {
        let mut p = MPoly::zero(self.n);
        for (rho, c) in &self.terms {
            let m = crate::symmetric::MonomialSymmetric::new(rho.clone(), self.n).unwrap();
            for ex in m.exponents() {
                p.add_term(ex.iter().map(|x| 2 * x).collect(), c.clone());
            }
        }
        p
    }
}

pub fn gjv_onepart_poly(g: u32, n: usize) -> HurwitzPoly {
    let s = s_series(g as usize);
    let inv = inv_s_series(g as usize);
    let mut terms = BTreeMap::new();
    for j in 0..=g {
        let rhos: Vec<Partition> =
            if j == 0 { vec![Partition::empty()] } else { partition_iter(j, j, n as u32).collect() };
        for rho in rhos {
            if rho.len() > n {
                continue;
            }
            let w = rho.parts().fold(Rational::one(), |acc, p| acc * &s[p as usize]);
            let c = w * &inv[(g - j) as usize];
            if !c.is_zero() {
                terms.insert(rho, c);
            }
        }
    }
    HurwitzPoly { g, n, terms }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::amplitude::amplitude;
    use crate::engine::Engine;

    #[test]
    fn one_point_values() {
        assert!(one_point(0).is_err());
        assert_eq!(one_point(1).unwrap().coeff(&e1_pow(1)), rat(1, 24));
        assert_eq!(one_point(2).unwrap().coeff(&e1_pow(4)), rat(1, 1152));
        assert_eq!(one_point(3).unwrap().coeff(&e1_pow(7)), rat(1, 82944));
    }

    #[test]
    fn two_point_values() {
        assert_eq!(two_point_coeff(1, 1), rat(-1, 24));
        assert_eq!(two_point_coeff(2, 2) * rat_int(normalization(2)), rat(9, 5));
        assert_eq!(two_point_coeff(4, 1) * rat_int(normalization(4)), rat(-4, 1));
        assert_eq!(two_point_coeff(2, 3), rat(0, 1));
        for m in 0..=12 {
            assert!(two_point_identity(m));
        }
    }

    #[test]
    fn three_point_routes_agree() {
        assert_eq!(zagier_three_point(0).unwrap(), EPolynomial::constant(rat(2, 1)).with_nvars(3));
        assert_eq!(zagier_three_point(1).unwrap().to_string(), "e2 e1 - 5 e3");
        for r in 0..=5 {
            assert_eq!(zagier_three_point(r).unwrap(), zagier_three_point_direct(r).unwrap(), "r = {r}");
        }
    }

    #[test]
    fn three_point_matches_engine_low_genus() {
        let e = Engine::new();
        for g in 0..=3 {
            let a = amplitude(&e, g, 3, false).unwrap();
            assert_eq!(three_point(g).unwrap(), a.to_epoly(), "g = {g}");
        }
    }

    #[test]
    fn s_and_inverse() {
        let s = s_series(6);
        let inv = inv_s_series(6);
        assert_eq!(&inv[..3], &[rat(1, 1), rat(-1, 24), rat(7, 5760)]);
        for m in 0..=6 {
            let mut c = Rational::zero();
            for k in 0..=m {
                c += &s[k] * &inv[m - k];
            }
            assert_eq!(c, if m == 0 { rat(1, 1) } else { rat(0, 1) });
        }
    }

    #[test]
    fn hurwitz_examples() {
        let p0 = gjv_onepart_poly(0, 3);
        assert_eq!(p0.terms, BTreeMap::from([(Partition::empty(), rat(1, 1))]));
        let p1 = gjv_onepart_poly(1, 1);
        assert_eq!(p1.terms, BTreeMap::from([(Partition::empty(), rat(-1, 24)), (Partition::new([1]), rat(1, 24))]));
        for (g, n) in [(2, 3), (3, 2), (4, 4)] {
            let m = gjv_onepart_poly(g, n).to_mpoly();
            let deg = m.terms().keys().map(|e| e.iter().sum::<u32>()).max().unwrap();
            assert_eq!(deg, 2 * g);
            assert!(m.terms().keys().all(|e| e.iter().all(|x| x % 2 == 0)));
        }
    }
}
