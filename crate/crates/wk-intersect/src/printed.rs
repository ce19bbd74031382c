//! Closed formulas for Ã_{2,n}, Ã_{3,n} and the genus-four C_4(k, μ) table,
//! transcribed as data.

use std::collections::BTreeMap;

use num_traits::Zero;

use crate::amplitude::{dimension, AmplitudeDecomposition};
use crate::coefficients::{eval_poly, ClosedFormFamily};
use crate::combinatorics::{factorial, parse_rational, rat, rat_int, Partition, Rational};
use crate::error::{Result, WkError};

/// scale·(k + shift)!·P(k), P given by integer coefficients, highest first.
#[derive(Clone, Debug)]
struct KCoeff {
    scale: Rational,
    shift: i64,
    poly: Vec<i64>,
}

impl KCoeff {
    fn eval(&self, k: u32) -> Rational {
        let a = k as i64 + self.shift;
        assert!(a >= 0, "negative factorial in a printed family");
        let asc: Vec<Rational> = self.poly.iter().rev().map(|&c| rat(c, 1)).collect();
        &self.scale * rat_int(factorial(a as u32)) * eval_poly(&asc, &rat(k as i64, 1))
    }

    fn qpoly(&self) -> Vec<Rational> {
        self.poly.iter().rev().map(|&c| rat(c, 1) * &self.scale).collect()
    }
}

/// coeff·e_λ·e1^{n+c}, or Σ_{k ≥ lo} f(k)·e_k·e_μ·e1^{n+c−k}.
#[derive(Clone, Debug)]
enum Term {
    Single { coeff: Rational, lambda: Partition, c: i64 },
    Family { f: KCoeff, mu: Partition, lo: u32, c: i64 },
}

fn single(coeff: &str, lambda: &[u32], c: i64) -> Term {
    Term::Single { coeff: parse_rational(coeff).unwrap(), lambda: Partition::new(lambda.iter().copied()), c }
}

fn family(scale: &str, shift: i64, poly: &[i64], mu: &[u32], lo: u32, c: i64) -> Term {
    Term::Family {
        f: KCoeff { scale: parse_rational(scale).unwrap(), shift, poly: poly.to_vec() },
        mu: Partition::new(mu.iter().copied()),
        lo,
        c,
    }
}

fn genus2() -> Vec<Term> {
    vec![
        single("1", &[], 3),
        single("-2", &[2], 1),
        single("-18/5", &[3], 0),
        family("-1/30", -3, &[1, 21, -70, 96], &[], 4, 3),
        single("9/5", &[2, 2], -1),
        // printed with e1^{n-1}, which breaks homogeneity
        single("18/5", &[3, 2], -2),
        family("1/10", -1, &[1, 16], &[2], 4, 1),
        // printed from k = 4; the k = 3 term -3/5 e3^2 e1^{n-3} is needed
        family("-1/10", 0, &[1], &[3], 3, 0),
    ]
}

fn genus3() -> Vec<Term> {
    let mut t = vec![
        family("1/8400", -2, &[17, 814, 9391, -12142, 53904], &[2], 7, 4),
        family("-1/2100", -1, &[2, 39, -1523, -480], &[3], 7, 3),
        family("-1/1400", 0, &[5, 199, 2282], &[2, 2], 5, 2),
        family("-1/700", 0, &[3, 79, 596], &[4], 7, 2),
        family("1/350", 1, &[1, 37], &[5], 7, 1),
        family("1/700", 1, &[5, 102], &[3, 2], 5, 1),
        family("1/175", 2, &[1], &[4, 2], 4, 0),
        family("-9/1400", 2, &[1], &[3, 3], 3, 0),
        family("-1/350", 2, &[1], &[6], 6, 0),
        family("-1/50400", -4, &[17, 885, 9347, -83577, 338972, -912492, 970272], &[], 7, 6),
    ];
    // a_{3,n}
    let a3: [(&str, &[u32], i64); 25] = [
        ("-27/7", &[2, 2, 2], 0),
        ("1692/35", &[4, 2], 0),
        ("153/35", &[3, 3], 0),
        ("-1872/5", &[6], 0),
        ("3024/5", &[6, 5], -5),
        ("-8496/7", &[6, 4], -4),
        ("432/5", &[5, 5], -4),
        ("108/5", &[4, 3, 2], -3),
        ("15552/35", &[6, 3], -3),
        ("-5904/35", &[5, 4], -3),
        ("-54", &[4, 2, 2], -2),
        ("27/7", &[3, 3, 2], -2),
        ("51696/35", &[6, 2], -2),
        ("2844/35", &[5, 3], -2),
        ("-1152/35", &[4, 4], -2),
        ("-81/7", &[3, 2, 2], -1),
        ("8532/35", &[5, 2], -1),
        ("324/35", &[4, 3], -1),
        ("594/35", &[3, 2], 1),
        ("-2286/35", &[5], 1),
        ("27/5", &[2, 2], 2),
        ("-594/35", &[4], 2),
        ("-39/5", &[3], 3),
        ("-3", &[2], 4),
        ("1", &[], 6),
    ];
    t.extend(a3.iter().map(|(c, l, e)| single(c, l, *e)));
    t
}

/// One printed genus-four family: μ, the first k where it is printed to
/// hold, and its coefficient.
#[derive(Clone, Debug)]
pub struct PrintedFamily {
    pub mu: Partition,
    pub k_start: u32,
    pub family: ClosedFormFamily,
}

// (μ, scale, shift, P highest first)
const G4_FAMILIES: &[(&[u32], &str, i64, &[i64])] = &[
    (&[], "-1/2270268000", -5, &[3717, 345264, 10022652, 51871810, -1143710229, 8585898070, -52358293308, 196752773416, -387514181568, 314153693568]),
    (&[2], "1/756756000", -3, &[11151, 998761, 29709011, 269630259, -712790674, 5966416652, -20766829960, 26179474464]),
    (&[3], "1/756756000", -2, &[723, 199787, 16387577, 413083225, -51459908, 3514829748, -1065697776]),
    (&[4], "-1/378378000", -1, &[25569, 1771714, 37277747, 274984058, 184540456, 1946520576]),
    (&[5], "1/378378000", 0, &[12093, 930010, 14966271, -218527846, -287488200]),
    (&[6], "1/15765750", 1, &[513, 78137, 2328884, 15061740]),
    (&[7], "-1/7882875", 2, &[2011, 66173, 1154393]),
    (&[8], "1/1433250", 3, &[99, 9868]),
    (&[9], "-11/159250", 4, &[1]),
    (&[2, 2], "-1/29106000", -1, &[1515, 125102, 3592493, 38382106, 33387016, 313049088]),
    (&[3, 2], "1/7276500", 0, &[450, 24362, 67239, -7592459, -8017332]),
    (&[4, 2], "1/1212750", 1, &[371, 20182, 325180, 2519512]),
    (&[3, 3], "-1/882000", 1, &[69, 3077, -14, 233736]),
    (&[5, 2], "-1/2425500", 2, &[389, 29593, 509174]),
    (&[4, 3], "-1/220500", 2, &[27, 671, 5292]),
    (&[6, 2], "1/1212750", 3, &[191, -2532]),
    (&[5, 3], "1/110250", 3, &[38, 1673]),
    (&[4, 4], "-2/55125", 3, &[7, 188]),
    (&[7, 2], "107/242550", 4, &[1]),
    (&[6, 3], "-11/18375", 4, &[1]),
    (&[5, 4], "2/7875", 4, &[1]),
    (&[2, 2, 2], "1/529200", 1, &[35, 2499, 65830, 651864]),
    (&[4, 2, 2], "-1/22050", 3, &[7, 188]),
    (&[3, 2, 2], "-1/176400", 2, &[35, 1701, 22788]),
    (&[3, 3, 2], "1/19600", 3, &[7, 180]),
    (&[5, 2, 2], "-1/11025", 4, &[1]),
    (&[4, 3, 2], "1/2450", 4, &[1]),
    (&[3, 3, 3], "-1/3920", 4, &[1]),
    (&[2, 2, 2, 2], "0", 0, &[0, 0]),
    (&[3, 2, 2, 2], "0", 1, &[0]),
];

// "k (μ) value" rows below each family's start
const G4_VALUES: &str = "
2 () -4
3 () -68/5
4 () -1144/35
5 () -21816/175
6 () -141264/175
7 () -1106064/175
8 () -9988992/175
9 () -102117888/175
2 (2) 54/5
3 (2) 324/7
4 (2) 21816/175
5 (2) 17064/25
6 (2) 117648/25
7 (2) 266832/7
8 (2) 12432384/35
9 (2) 93011328/25
3 (3) 4842/175
4 (3) 14184/175
5 (3) 105768/175
6 (3) 104112/25
7 (3) 227952/7
8 (3) 51469056/175
9 (3) 521255808/175
4 (4) -27648/175
5 (4) -182592/175
6 (4) -36288/5
7 (4) -11405952/175
8 (4) -22470912/35
9 (4) -176332032/25
5 (5) -9792/35
6 (5) -51264/175
7 (5) -269568/25
8 (5) -10245888/175
9 (5) -47778048/175
6 (6) 1787904/175
7 (6) 14375808/175
8 (6) 157378176/175
9 (6) 49168512/5
7 (7) -13825152/175
8 (7) -28266624/35
9 (7) -339110784/35
8 (8) 2078208/7
9 (8) 24938496/7
2 (2,2) -108/7
3 (2,2) -468/7
4 (2,2) -1800/7
5 (2,2) -57096/35
6 (2,2) -410544/35
7 (2,2) -3450672/35
3 (3,2) -180/7
4 (3,2) -1584/35
5 (3,2) -24624/35
6 (3,2) -31392/7
7 (3,2) -5870304/175
4 (4,2) 2880/7
5 (4,2) 91008/35
6 (4,2) 3836736/175
7 (4,2) 34399872/175
3 (3,3) -36/5
4 (3,3) -216/5
5 (3,3) -8712/35
6 (3,3) -51408/25
5 (5,2) -242496/175
6 (5,2) -409536/35
7 (5,2) -19225728/175
4 (4,3) -1152/35
5 (4,3) -22464/175
6 (4,3) -333504/175
6 (6,2) -10368/25
7 (6,2) -13824/7
5 (5,3) 119232/175
6 (5,3) 211392/35
4 (4,4) -6912/175
5 (4,4) -55296/175
2 (2,2,2) 9
3 (2,2,2) 36
4 (2,2,2) 216
5 (2,2,2) 7128/5
3 (3,2,2) -18
4 (3,2,2) -648/5
5 (3,2,2) -32184/35
4 (4,2,2) -1728/35
5 (4,2,2) -2880/7
3 (3,3,2) 36/5
4 (3,3,2) 1944/35
";

fn parse_mu(s: &str) -> Partition {
    let inner = s.trim().trim_start_matches('(').trim_end_matches(')');
    Partition::new(inner.split(',').filter(|x| !x.is_empty()).map(|x| x.trim().parse::<u32>().unwrap()))
}

/// The printed genus-four values C̃_4(k, μ) below each family's start.
pub fn genus4_values() -> BTreeMap<(u32, Partition), Rational> {
    G4_VALUES
        .lines()
        .filter(|l| !l.trim().is_empty())
        .map(|l| {
            let mut it = l.split_whitespace();
            let k: u32 = it.next().unwrap().parse().unwrap();
            let mu = parse_mu(it.next().unwrap());
            let v = parse_rational(it.next().unwrap()).unwrap();
            ((k, mu), v)
        })
        .collect()
}

/// The printed genus-four families, each starting right after its last
/// listed exceptional value.
pub fn genus4_families() -> Vec<PrintedFamily> {
    let values = genus4_values();
    G4_FAMILIES
        .iter()
        .map(|(mu, scale, shift, poly)| {
            let mu = Partition::new(mu.iter().copied());
            let kc = KCoeff { scale: parse_rational(scale).unwrap(), shift: *shift, poly: poly.to_vec() };
            let last = values.keys().filter(|(_, m)| m == &mu).map(|(k, _)| *k).max();
            let k_start = last.map_or(mu.first().max(2), |k| k + 1);
            PrintedFamily {
                family: ClosedFormFamily { g: 4, mu: mu.clone(), k0: k_start, shift: *shift, qpoly: kc.qpoly() },
                mu,
                k_start,
            }
        })
        .collect()
}

/// C̃_4(∅) = 1
pub const GENUS4_C_EMPTY: i64 = 1;

fn genus4_terms() -> Vec<Term> {
    let mut t = vec![single("1", &[], 9)];
    for ((k, mu), v) in genus4_values() {
        let lam = mu.with_part(k);
        t.push(Term::Single { coeff: v, c: 9 - lam.size() as i64, lambda: lam });
    }
    for pf in genus4_families() {
        let (_, scale, shift, poly) = G4_FAMILIES.iter().find(|f| Partition::new(f.0.iter().copied()) == pf.mu).unwrap();
        let c = 9 - pf.mu.size() as i64;
        t.push(family(scale, *shift, poly, &pf.mu.to_vec(), pf.k_start, c));
    }
    t
}

/// Evaluates the printed normalized formula for Ã_{g,n}, g ∈ {2, 3, 4},
/// with e1^m = 0 for m < 0 and e_k = 0 for k > n.
pub fn printed_formula(g: u32, n: usize) -> Result<AmplitudeDecomposition> {
    let terms = match g {
        2 => genus2(),
        3 => genus3(),
        4 => genus4_terms(),
        _ => return Err(WkError::Domain(format!("no printed formula for genus {g}"))),
    };
    if n == 0 {
        return Err(WkError::Domain("printed formulas need n >= 1".into()));
    }
    let d = dimension(g, n)?;
    let mut dcoeffs: BTreeMap<Partition, Rational> = BTreeMap::new();
    let mut put = |lam: Partition, e1: i64, v: Rational| {
        if e1 < 0 || lam.first() as usize > n || v.is_zero() {
            return;
        }
        let key = lam.pad_ones(e1 as u32);
        assert_eq!(key.size(), d, "printed term is not homogeneous");
        let e = dcoeffs.entry(key.clone()).or_insert_with(Rational::zero);
        *e += v;
        if e.is_zero() {
            dcoeffs.remove(&key);
        }
    };
    let n_i = n as i64;
    for t in terms {
        match t {
            Term::Single { coeff, lambda, c } => put(lambda, n_i + c, coeff),
            Term::Family { f, mu, lo, c } => {
                let mut k = lo;
                while n_i + c - k as i64 >= 0 && k as usize <= n {
                    put(mu.with_part(k), n_i + c - k as i64, f.eval(k));
                    k += 1;
                }
            }
        }
    }
    Ok(AmplitudeDecomposition { g, n, normalized: true, dcoeffs })
}
