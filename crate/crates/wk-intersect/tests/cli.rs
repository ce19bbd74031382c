use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn wkcalc(args: &[&str], cache_env: Option<&Path>) -> Output {
    let mut c = Command::new(env!("CARGO_BIN_EXE_wkcalc"));
    c.args(args).env_remove("WK_CACHE");
    if let Some(p) = cache_env {
        c.env("WK_CACHE", p);
    }
    c.output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn schema(name: &str) -> jsonschema::Validator {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("schemas").join(format!("{name}.json"));
    let s: Value = serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap();
    jsonschema::validator_for(&s).unwrap()
}

const COMMANDS: &[(&str, &[&str])] = &[
    ("correlator", &["correlator", "-g", "2", "-d", "3,2"]),
    ("amplitude", &["amplitude", "-g", "2", "-n", "3"]),
    ("coeffs", &["coeffs", "-g", "2"]),
    ("formula", &["formula", "-g", "3"]),
    ("conjecture", &["conjecture", "-g", "3"]),
    ("string-check", &["string-check", "-g", "2", "-n", "3"]),
    ("wp", &["wp", "-g", "1", "-n", "2", "--path", "both"]),
    ("hurwitz-onepart", &["hurwitz-onepart", "-g", "2", "-n", "3"]),
    ("oracle-compare", &["oracle-compare", "-g", "3", "-n", "2"]),
];

#[test]
fn json_output_matches_schemas() {
    for (name, args) in COMMANDS {
        let mut a = args.to_vec();
        a.extend(["--format", "json"]);
        let o = wkcalc(&a, None);
        assert!(o.status.success(), "{name}: {}", String::from_utf8_lossy(&o.stderr));
        let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
        let errs: Vec<String> = schema(name).iter_errors(&v).map(|e| e.to_string()).collect();
        assert!(errs.is_empty(), "{name}: {errs:?}");
    }
}

#[test]
fn csv_output_parses_with_consistent_widths() {
    for (name, args) in COMMANDS {
        let mut a = args.to_vec();
        a.extend(["--format", "csv"]);
        let o = wkcalc(&a, None);
        assert!(o.status.success(), "{name}");
        let mut r = csv::Reader::from_reader(o.stdout.as_slice());
        let width = r.headers().unwrap().len();
        for row in r.records() {
            assert_eq!(row.unwrap().len(), width, "{name}");
        }
    }
    // the formula text has newlines and must come back intact
    let o = wkcalc(&["formula", "-g", "2", "--format", "csv"], None);
    let mut r = csv::Reader::from_reader(o.stdout.as_slice());
    let row = r.records().next().unwrap().unwrap();
    let text = stdout(&wkcalc(&["formula", "-g", "2"], None));
    assert_eq!(format!("{}\n", &row[1]), text);
}

#[test]
fn documented_examples() {
    assert_eq!(stdout(&wkcalc(&["correlator", "-g", "2", "-d", "3,2", "--format", "text"], None)), "29/5760\n");
    assert_eq!(
        stdout(&wkcalc(&["conjecture", "-g", "3", "--format", "json"], None)),
        "{\"g\":3,\"checked_n\":5,\"violations\":[]}\n"
    );
    assert_eq!(
        stdout(&wkcalc(&["amplitude", "-g", "1", "-n", "2", "--normalized", "--format", "text"], None)),
        "e1^2 - e2\n"
    );
}

#[test]
fn errors_and_exit_codes() {
    let o = wkcalc(&["amplitude", "-g", "1", "--nonsense"], None);
    assert_eq!(o.status.code(), Some(2));
    assert!(o.stdout.is_empty());

    let o = wkcalc(&["correlator", "-g", "0", "-d", "0,0"], None);
    assert_eq!(o.status.code(), Some(1));
    let v: Value = serde_json::from_slice(&o.stderr).unwrap();
    assert!(schema("error").is_valid(&v));
    assert_eq!(v["error"], "unstable");

    let o = wkcalc(&["oracle-compare", "-g", "2", "-n", "5"], None);
    assert_eq!(o.status.code(), Some(1));

    assert_eq!(wkcalc(&["--help"], None).status.code(), Some(0));
}

#[test]
fn warm_cache_replays_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let cache = dir.path().join("wk.cache");
    let c = cache.to_str().unwrap();
    for (_, args) in COMMANDS {
        let cold = wkcalc(args, None);
        let mut a = args.to_vec();
        a.extend(["--cache", c]);
        let first = wkcalc(&a, None);
        let warm = wkcalc(&a, None);
        assert_eq!(cold.stdout, first.stdout);
        assert_eq!(cold.stdout, warm.stdout);
    }
    let text = std::fs::read_to_string(&cache).unwrap();
    assert!(text.starts_with("WKCACHE 1\n"));
    assert!(text.lines().count() > 10);
}

#[test]
fn env_overrides_cache_flag() {
    let dir = tempfile::tempdir().unwrap();
    let flag = dir.path().join("flag.cache");
    let env = dir.path().join("env.cache");
    let o = wkcalc(&["correlator", "-g", "1", "-d", "1", "--cache", flag.to_str().unwrap()], Some(&env));
    assert!(o.status.success());
    assert!(env.exists());
    assert!(!flag.exists());
}

#[test]
fn corrupt_cache_is_reported() {
    let dir = tempfile::tempdir().unwrap();
    let cache = dir.path().join("bad.cache");
    std::fs::write(&cache, "WKCACHE 1\n2;4;1/1152\n2;x;1\n").unwrap();
    let o = wkcalc(&["correlator", "-g", "1", "-d", "1", "--cache", cache.to_str().unwrap()], None);
    assert_eq!(o.status.code(), Some(1));
    let v: Value = serde_json::from_slice(&o.stderr).unwrap();
    assert!(v["message"].as_str().unwrap().contains("line 3"), "{v}");
    std::fs::write(&cache, "WKCACHE 9\n").unwrap();
    let o = wkcalc(&["correlator", "-g", "1", "-d", "1", "--cache", cache.to_str().unwrap()], None);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn threads_and_seed_flags() {
    let base = stdout(&wkcalc(&["coeffs", "-g", "2", "--format", "json"], None));
    let threaded = stdout(&wkcalc(&["coeffs", "-g", "2", "--format", "json", "--threads", "2"], None));
    assert_eq!(base, threaded);
    let o = wkcalc(&["coeffs", "-g", "2", "--seed-max-n", "2"], None);
    assert_eq!(o.status.code(), Some(1));
}
