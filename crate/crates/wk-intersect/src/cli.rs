//! The `wkcalc` command line: argument parsing, dispatch and output in
//! json, csv or text.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use crate::amplitude::amplitude;
use crate::cache::{self, CacheLock};
use crate::coefficients::{check_conjecture, check_string_relations, family_text, fit_closed_form_engine, formula_text};
use crate::combinatorics::rational_pq;
use crate::engine::Engine;
use crate::error::{Result, WkError};
use crate::oracles::{gjv_onepart_poly, one_point, three_point, two_point};
use crate::residue::build_b_minus;
use crate::wp::{wp_volume_kappa, wp_volume_residue, WPVolume};

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
    Text,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum PathChoice {
    Kappa,
    Residue,
    Both,
}

#[derive(Debug, Parser)]
#[command(name = "wkcalc", version, about = "Witten-Kontsevich intersection numbers and their e-basis coefficients")]
pub struct Cli {
    /// Output format.
    #[arg(long, global = true, value_enum, default_value = "text")]
    pub format: Format,
    /// Correlator cache file (WK_CACHE takes precedence).
    #[arg(long, global = true)]
    pub cache: Option<PathBuf>,
    /// Worker threads for parallel sections.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Largest n used when fitting closed forms.
    #[arg(long, global = true)]
    pub seed_max_n: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// One intersection number <tau_d1 ... tau_dn>_g.
    Correlator {
        #[arg(short = 'g')]
        g: u32,
        #[arg(short = 'd', value_delimiter = ',', required = true)]
        d: Vec<u32>,
    },
    /// The amplitude A_{g,n} in the elementary symmetric basis.
    Amplitude {
        #[arg(short = 'g')]
        g: u32,
        #[arg(short = 'n')]
        n: usize,
        #[arg(long)]
        normalized: bool,
    },
    /// Fitted closed-form families C_g(k, mu).
    Coeffs {
        #[arg(short = 'g')]
        g: u32,
    },
    /// The genus-g closed formula as text.
    Formula {
        #[arg(short = 'g')]
        g: u32,
    },
    /// Checks C_g(lambda) = 0 for l(lambda) > g at n = 2g - 1.
    Conjecture {
        #[arg(short = 'g')]
        g: u32,
    },
    /// Checks the string-equation relations between A_{g,n} and A_{g,n+1}.
    StringCheck {
        #[arg(short = 'g')]
        g: u32,
        #[arg(short = 'n')]
        n: usize,
    },
    /// Weil-Petersson volume V_{g,n}(L).
    Wp {
        #[arg(short = 'g')]
        g: u32,
        #[arg(short = 'n')]
        n: usize,
        #[arg(long, value_enum, default_value = "kappa")]
        path: PathChoice,
    },
    /// One-part double Hurwitz polynomial.
    HurwitzOnepart {
        #[arg(short = 'g')]
        g: u32,
        #[arg(short = 'n')]
        n: usize,
    },
    /// Compares the engine amplitude with a closed form (n = 1, 2, 3).
    OracleCompare {
        #[arg(short = 'g')]
        g: u32,
        #[arg(short = 'n')]
        n: usize,
    },
}

/// A command result in all three renderings.
struct Rendered {
    json: Value,
    csv_header: Vec<&'static str>,
    csv_rows: Vec<Vec<String>>,
    text: String,
}

fn parts_text(p: &[u32]) -> String {
    p.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(" ")
}

fn run_command(cli: &Cli, engine: &Engine) -> Result<Rendered> {
    match &cli.command {
        Command::Correlator { g, d } => {
            let v = engine.correlator(*g, d)?;
            Ok(Rendered {
                json: json!({"g": g, "degrees": d, "value": rational_pq(&v)}),
                csv_header: vec!["g", "degrees", "value"],
                csv_rows: vec![vec![g.to_string(), parts_text(d), rational_pq(&v)]],
                text: if v.is_integer() { v.numer().to_string() } else { rational_pq(&v) },
            })
        }
        Command::Amplitude { g, n, normalized } => {
            let a = amplitude(engine, *g, *n, *normalized)?;
            let rows = a.dcoeffs.iter().map(|(l, c)| vec![parts_text(&l.to_vec()), rational_pq(c)]).collect();
            Ok(Rendered {
                json: serde_json::to_value(&a).unwrap(),
                csv_header: vec!["lambda", "coeff"],
                csv_rows: rows,
                text: a.to_epoly().to_string(),
            })
        }
        Command::Coeffs { g } => {
            let set = fit_closed_form_engine(engine, *g, cli.seed_max_n)?;
            let fams: Vec<Value> = set
                .families
                .values()
                .map(|f| {
                    let mut v = serde_json::to_value(f).unwrap();
                    v["text"] = json!(family_text(f));
                    v
                })
                .collect();
            let exc: Vec<Value> = set
                .exceptional
                .iter()
                .map(|((k, mu), v)| json!({"k": k, "mu": mu, "value": rational_pq(v)}))
                .collect();
            let rows = set
                .families
                .values()
                .map(|f| {
                    let q: Vec<String> = f.qpoly.iter().map(rational_pq).collect();
                    vec![parts_text(&f.mu.to_vec()), f.k0.to_string(), f.shift.to_string(), q.join(" ")]
                })
                .collect();
            let text: Vec<String> = set.families.values().map(|f| format!("{}    for k >= {}", family_text(f), f.k0)).collect();
            Ok(Rendered {
                json: json!({"g": g, "c_empty": rational_pq(&set.c_empty), "families": fams, "exceptional": exc}),
                csv_header: vec!["mu", "k0", "shift", "qpoly"],
                csv_rows: rows,
                text: text.join("\n"),
            })
        }
        Command::Formula { g } => {
            let set = fit_closed_form_engine(engine, *g, cli.seed_max_n)?;
            let text = formula_text(&set);
            Ok(Rendered {
                json: json!({"g": g, "formula": text}),
                csv_header: vec!["g", "formula"],
                csv_rows: vec![vec![g.to_string(), text.clone()]],
                text,
            })
        }
        Command::Conjecture { g } => {
            let r = check_conjecture(engine, *g)?;
            let rows = violation_rows(&r.violations);
            Ok(Rendered {
                json: serde_json::to_value(&r).unwrap(),
                csv_header: vec!["kind", "lambda", "lhs", "rhs"],
                csv_rows: rows,
                text: format!("g = {}, n = {}: {} violations", r.g, r.checked_n, r.violations.len()),
            })
        }
        Command::StringCheck { g, n } => {
            let r = check_string_relations(engine, *g, *n)?;
            Ok(Rendered {
                json: serde_json::to_value(&r).unwrap(),
                csv_header: vec!["kind", "lambda", "lhs", "rhs"],
                csv_rows: violation_rows(&r.violations),
                text: format!(
                    "g = {}, n = {}: {} overlap, {} boundary, {} vanishing checks; {} violations",
                    r.g,
                    r.n,
                    r.overlap_checked,
                    r.boundary_checked,
                    r.lemma1_checked,
                    r.violations.len()
                ),
            })
        }
        Command::Wp { g, n, path } => {
            let residue = || -> Result<WPVolume> {
                let set = fit_closed_form_engine(engine, *g, cli.seed_max_n)?;
                wp_volume_residue(&build_b_minus(&set, *n, false)?)
            };
            let v = match path {
                PathChoice::Kappa => wp_volume_kappa(engine, *g, *n)?,
                PathChoice::Residue => residue()?,
                PathChoice::Both => {
                    let a = wp_volume_kappa(engine, *g, *n)?;
                    let b = residue()?;
                    if a != b {
                        return Err(WkError::Integrity(wp_mismatch(&a, &b)));
                    }
                    a
                }
            };
            let rows = v
                .flat_terms()
                .into_iter()
                .map(|(e, k, c)| vec![parts_text(&e), k.to_string(), rational_pq(&c)])
                .collect();
            Ok(Rendered {
                json: serde_json::to_value(&v).unwrap(),
                csv_header: vec!["L2exp", "pi2pow", "coeff"],
                csv_rows: rows,
                text: v.to_string(),
            })
        }
        Command::HurwitzOnepart { g, n } => {
            if *n == 0 {
                return Err(WkError::Domain("n must be positive".into()));
            }
            let h = gjv_onepart_poly(*g, *n);
            let terms: Vec<Value> =
                h.terms.iter().map(|(r, c)| json!({"rho": r, "coeff": rational_pq(c)})).collect();
            let rows = h.terms.iter().map(|(r, c)| vec![parts_text(&r.to_vec()), rational_pq(c)]).collect();
            Ok(Rendered {
                json: json!({"g": g, "n": n, "terms": terms}),
                csv_header: vec!["rho", "coeff"],
                csv_rows: rows,
                text: hurwitz_text(&h),
            })
        }
        Command::OracleCompare { g, n } => {
            let (name, oracle) = match n {
                1 => ("one-point", one_point(*g)?),
                2 => ("two-point", two_point(*g)?),
                3 => ("three-point", three_point(*g)?),
                _ => return Err(WkError::Domain(format!("closed forms exist for n = 1, 2, 3; got n = {n}"))),
            };
            let a = amplitude(engine, *g, *n, false)?.to_epoly();
            let agree = a == oracle.truncate_vars(*n);
            if !agree {
                return Err(WkError::Integrity(format!(
                    "{name} closed form disagrees with the engine at g = {g}: {oracle} vs {a}"
                )));
            }
            Ok(Rendered {
                json: json!({"g": g, "n": n, "oracle": name, "agree": agree, "amplitude": a.to_string()}),
                csv_header: vec!["g", "n", "oracle", "agree"],
                csv_rows: vec![vec![g.to_string(), n.to_string(), name.to_string(), agree.to_string()]],
                text: format!("{name} oracle agrees at g = {g}: {a}"),
            })
        }
    }
}

fn violation_rows(v: &[crate::coefficients::Violation]) -> Vec<Vec<String>> {
    v.iter().map(|x| vec![x.kind.clone(), parts_text(&x.lambda.to_vec()), x.lhs.clone(), x.rhs.clone()]).collect()
}

fn wp_mismatch(a: &WPVolume, b: &WPVolume) -> String {
    let mut keys: Vec<&Vec<u32>> = a.coefficients.keys().chain(b.coefficients.keys()).collect();
    keys.sort();
    keys.dedup();
    let diffs: Vec<String> = keys
        .into_iter()
        .filter(|k| a.coeff(k) != b.coeff(k))
        .map(|k| format!("L^{k:?}: kappa {} vs residue {}", a.coeff(k), b.coeff(k)))
        .collect();
    format!("kappa and residue paths disagree: {}", diffs.join("; "))
}

fn hurwitz_text(h: &crate::oracles::HurwitzPoly) -> String {
    let p = h.to_mpoly();
    let mut terms: Vec<(&Vec<u32>, &crate::combinatorics::Rational)> = p.terms().iter().collect();
    terms.sort_by(|a, b| b.0.iter().sum::<u32>().cmp(&a.0.iter().sum::<u32>()).then_with(|| b.0.cmp(a.0)));
    if terms.is_empty() {
        return "0".into();
    }
    let mut out = String::new();
    for (i, (e, c)) in terms.iter().enumerate() {
        let neg = c.numer() < &num_bigint::BigInt::from(0);
        let a = if neg { -(*c).clone() } else { (*c).clone() };
        if i == 0 {
            if neg {
                out.push('-');
            }
        } else {
            out.push_str(if neg { " - " } else { " + " });
        }
        let mut f = Vec::new();
        let vars: Vec<String> =
            e.iter().enumerate().filter(|(_, x)| **x > 0).map(|(j, x)| format!("x{}^{}", j + 1, x)).collect();
        if a != crate::combinatorics::rat(1, 1) || vars.is_empty() {
            f.push(if a.is_integer() { a.numer().to_string() } else { rational_pq(&a) });
        }
        f.extend(vars);
        out.push_str(&f.join("*"));
    }
    out
}

fn emit(r: &Rendered, format: Format, out: &mut dyn Write) -> std::io::Result<()> {
    match format {
        Format::Json => writeln!(out, "{}", r.json),
        Format::Text => writeln!(out, "{}", r.text),
        Format::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record(&r.csv_header)?;
            for row in &r.csv_rows {
                w.write_record(row)?;
            }
            let bytes = w.into_inner().map_err(|e| std::io::Error::other(e.to_string()))?;
            out.write_all(&bytes)
        }
    }
}

fn error_json(e: &WkError) -> String {
    json!({"error": e.kind(), "message": e.to_string()}).to_string()
}

/// Loads the cache, runs the command and flushes the cache on success.
fn execute(cli: &Cli, cache_path: Option<PathBuf>) -> Result<Rendered> {
    let engine = Engine::new();
    let lock = match &cache_path {
        Some(p) => {
            let l = CacheLock::acquire(p)?;
            cache::load_into(&engine, p)?;
            Some(l)
        }
        None => None,
    };
    let r = run_command(cli, &engine)?;
    if let Some(p) = &cache_path {
        cache::flush(&engine, p)?;
    }
    drop(lock);
    Ok(r)
}

/// Runs the CLI on `args` (including the program name); returns the exit code.
/// Usage errors exit 2, library errors exit 1 with a JSON object on `err`.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let text = e.render().to_string();
            let _ = if code == 0 { write!(out, "{text}") } else { write!(err, "{text}") };
            return code;
        }
    };
    let cache_path = std::env::var_os("WK_CACHE").filter(|v| !v.is_empty()).map(PathBuf::from).or(cli.cache.clone());
    let result = match cli.threads {
        Some(k) => match rayon::ThreadPoolBuilder::new().num_threads(k).build() {
            Ok(pool) => pool.install(|| execute(&cli, cache_path)),
            Err(e) => Err(WkError::Domain(format!("cannot start {k} threads: {e}"))),
        },
        None => execute(&cli, cache_path),
    };
    match result.and_then(|r| Ok(emit(&r, cli.format, out)?)) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(err, "{}", error_json(&e));
            1
        }
    }
}
