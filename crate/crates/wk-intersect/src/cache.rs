//! Plain-text correlator cache: a `WKCACHE 1` header followed by one
//! `g;d1,d2,…;p/q` record per line, degrees descending.

use std::collections::HashSet;
use std::fs::{self, File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use crate::combinatorics::{parse_rational, rational_pq, CorrelatorKey, Rational};
use crate::engine::Engine;
use crate::error::{Result, WkError};

pub const CACHE_MAGIC: &str = "WKCACHE";
pub const CACHE_VERSION: u32 = 1;

/// Formats one record line (without newline).
pub fn format_record(key: &CorrelatorKey, value: &Rational) -> String {
    let d: Vec<String> = key.degrees().iter().map(|x| x.to_string()).collect();
    format!("{};{};{}", key.genus(), d.join(","), rational_pq(value))
}

/// Parses one record line; `line` is used for error messages only.
pub fn parse_record(text: &str, path: &str, line: usize) -> Result<(CorrelatorKey, Rational)> {
    let bad = |msg: String| WkError::CacheFormat { path: path.to_string(), line, msg };
    let fields: Vec<&str> = text.split(';').collect();
    if fields.len() != 3 {
        return Err(bad(format!("expected 3 ';'-separated fields, found {}", fields.len())));
    }
    let g: u32 = fields[0].trim().parse().map_err(|_| bad(format!("bad genus {:?}", fields[0])))?;
    let degrees = fields[1]
        .split(',')
        .map(|s| s.trim().parse::<u32>())
        .collect::<std::result::Result<Vec<u32>, _>>()
        .map_err(|_| bad(format!("bad degree list {:?}", fields[1])))?;
    if degrees.windows(2).any(|w| w[0] < w[1]) {
        return Err(bad("degrees must be sorted in descending order".into()));
    }
    let key = CorrelatorKey::new(g, &degrees).map_err(|e| bad(e.to_string()))?;
    if !key.is_dimensional() {
        return Err(bad("record violates the dimension constraint".into()));
    }
    let value = parse_rational(fields[2]).map_err(|e| bad(e.to_string()))?;
    Ok((key, value))
}

/// Reads all records. An absent or empty file is an empty cache.
pub fn load_records(path: &Path) -> Result<Vec<(CorrelatorKey, Rational)>> {
    let shown = path.display().to_string();
    let file = match File::open(path) {
        Ok(f) => f,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(Vec::new()),
        Err(e) => return Err(e.into()),
    };
    let mut out = Vec::new();
    let mut seen = HashSet::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line?;
        let no = i + 1;
        if no == 1 {
            check_header(&line, &shown)?;
            continue;
        }
        if line.trim().is_empty() {
            continue;
        }
        let (key, value) = parse_record(&line, &shown, no)?;
        if !seen.insert(key.clone()) {
            return Err(WkError::CacheFormat { path: shown, line: no, msg: "duplicate key".into() });
        }
        out.push((key, value));
    }
    Ok(out)
}

fn check_header(line: &str, path: &str) -> Result<()> {
    let mut it = line.split_whitespace();
    match (it.next(), it.next(), it.next()) {
        (Some(CACHE_MAGIC), Some(v), None) => {
            if v == CACHE_VERSION.to_string() {
                Ok(())
            } else {
                Err(WkError::CacheVersion { path: path.to_string(), found: v.to_string(), expected: CACHE_VERSION })
            }
        }
        _ => Err(WkError::CacheFormat {
            path: path.to_string(),
            line: 1,
            msg: format!("expected header \"{CACHE_MAGIC} {CACHE_VERSION}\""),
        }),
    }
}

/// Loads the file into the engine memo; returns the number of records.
pub fn load_into(engine: &Engine, path: &Path) -> Result<usize> {
    let records = load_records(path)?;
    let n = records.len();
    for (key, value) in records {
        engine.insert_known(key, value)?;
    }
    Ok(n)
}

/// Writes every memoized correlator in sorted order, via a temporary file and
/// rename. Returns the number of records.
pub fn flush(engine: &Engine, path: &Path) -> Result<usize> {
    let records = engine.cache().snapshot();
    let tmp = path.with_extension("tmp");
    {
        let mut w = std::io::BufWriter::new(File::create(&tmp)?);
        writeln!(w, "{CACHE_MAGIC} {CACHE_VERSION}")?;
        for (key, value) in &records {
            writeln!(w, "{}", format_record(key, value))?;
        }
        w.flush()?;
    }
    fs::rename(&tmp, path)?;
    Ok(records.len())
}

/// Exclusive advisory lock on `<cache>.lock`, held until dropped.
#[derive(Debug)]
pub struct CacheLock {
    file: File,
    path: PathBuf,
}

impl CacheLock {
    pub fn acquire(cache_path: &Path) -> Result<Self> {
        let mut name = cache_path.as_os_str().to_owned();
        name.push(".lock");
        let path = PathBuf::from(name);
        let file = OpenOptions::new().create(true).truncate(false).write(true).open(&path)?;
        match file.try_lock() {
            Ok(()) => Ok(CacheLock { file, path }),
            Err(fs::TryLockError::WouldBlock) => Err(WkError::Io(format!(
                "cache {} is locked by another process",
                cache_path.display()
            ))),
            Err(fs::TryLockError::Error(e)) => Err(e.into()),
        }
    }

    pub fn path(&self) -> &Path {
        &self.path
    }
}

impl Drop for CacheLock {
    fn drop(&mut self) {
        let _ = self.file.unlock();
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::amplitude::amplitude;
    use crate::combinatorics::rat;

    #[test]
    fn absent_and_empty() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("c.txt");
        assert_eq!(load_records(&p).unwrap().len(), 0);
        fs::write(&p, "").unwrap();
        assert_eq!(load_records(&p).unwrap().len(), 0);
    }

    #[test]
    fn one_point_record() {
        let (k, v) = parse_record("2;4;1/1152", "x", 2).unwrap();
        assert_eq!(k, CorrelatorKey::new(2, &[4]).unwrap());
        assert_eq!(v, rat(1, 1152));
        assert_eq!(format_record(&k, &v), "2;4;1/1152");
    }

    #[test]
    fn malformed_lines_report_position() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("c.txt");
        for (body, line) in [
            ("WKCACHE 1\n2;4;1/1152\n2;4\n", 3),
            ("WKCACHE 1\n2;2,3;29/5760\n", 2),
            ("WKCACHE 1\n2;4;1/1152\n2;4;1/1152\n", 3),
            ("WKCACHE 1\n2;5;1/2\n", 2),
            ("hello\n", 1),
        ] {
            fs::write(&p, body).unwrap();
            match load_records(&p) {
                Err(WkError::CacheFormat { line: l, .. }) => assert_eq!(l, line, "{body:?}"),
                other => panic!("{body:?}: {other:?}"),
            }
        }
        fs::write(&p, "WKCACHE 2\n").unwrap();
        let err = load_records(&p).unwrap_err();
        assert!(matches!(err, WkError::CacheVersion { .. }));
        assert!(err.to_string().contains("rebuild"));
    }

    #[test]
    fn round_trip_replays_without_misses() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("c.txt");
        let e = Engine::new();
        let a = amplitude(&e, 2, 2, false).unwrap();
        let n = flush(&e, &p).unwrap();
        assert!(n > 0);
        let text = fs::read_to_string(&p).unwrap();
        assert!(text.starts_with("WKCACHE 1\n"));
        let lines: Vec<&str> = text.lines().skip(1).collect();
        let mut sorted = lines.clone();
        sorted.sort_by_key(|l| parse_record(l, "", 0).unwrap().0);
        assert_eq!(lines, sorted);

        let warm = Engine::new();
        assert_eq!(load_into(&warm, &p).unwrap(), n);
        warm.cache().reset_counters();
        assert_eq!(amplitude(&warm, 2, 2, false).unwrap(), a);
        assert_eq!(warm.cache().misses(), 0);
        assert!(warm.cache().hits() > 0);
        let p2 = dir.path().join("d.txt");
        flush(&warm, &p2).unwrap();
        assert_eq!(fs::read(&p).unwrap(), fs::read(&p2).unwrap());
    }

    #[test]
    fn lock_is_exclusive() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("c.txt");
        let a = CacheLock::acquire(&p).unwrap();
        assert!(CacheLock::acquire(&p).is_err());
        drop(a);
        CacheLock::acquire(&p).unwrap();
    }
}
