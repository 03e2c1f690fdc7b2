//! Deterministic, atomic artifact writing.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};

/// Shortest decimal string that parses back to the same `f64`.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:?}")
}

/// Writes `bytes` to `path` through a temporary file in the same directory.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir).with_context(|| format!("temp file in {}", dir.display()))?;
    tmp.write_all(bytes)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).with_context(|| format!("renaming into {}", path.display()))?;
    Ok(())
}

/// A CSV table with a fixed header.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    header: Vec<String>,
    rows: Vec<Vec<String>>,
}

/// A CSV cell.
pub enum Cell {
    F(f64),
    I(i64),
    U(usize),
    S(String),
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::F(v)
    }
}
impl From<i64> for Cell {
    fn from(v: i64) -> Self {
        Cell::I(v)
    }
}
impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::U(v)
    }
}
impl From<bool> for Cell {
    fn from(v: bool) -> Self {
        Cell::U(v as usize)
    }
}
impl From<String> for Cell {
    fn from(v: String) -> Self {
        Cell::S(v)
    }
}
impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::S(v.to_string())
    }
}

impl Cell {
    fn render(&self) -> String {
        match self {
            Cell::F(v) => fmt_f64(*v),
            Cell::I(v) => v.to_string(),
            Cell::U(v) => v.to_string(),
            Cell::S(v) => v.clone(),
        }
    }
}

impl Table {
    pub fn new<S: AsRef<str>>(header: impl IntoIterator<Item = S>) -> Self {
        Self { header: header.into_iter().map(|s| s.as_ref().to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        assert_eq!(row.len(), self.header.len(), "row width differs from the header");
        self.rows.push(row.iter().map(Cell::render).collect());
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn to_bytes(&self) -> Result<Vec<u8>> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.header)?;
        for r in &self.rows {
            w.write_record(r)?;
        }
        Ok(w.into_inner()?)
    }
}

/// A lattice point as `a;b;c`, for CSV columns.
pub fn fmt_point(k: &[i64]) -> String {
    k.iter().map(i64::to_string).collect::<Vec<_>>().join(";")
}

/// An output directory whose summary marks a completed run.
#[derive(Debug, Clone)]
pub struct OutputDir {
    root: PathBuf,
}

pub const SUMMARY: &str = "summary.json";
pub const INCOMPLETE: &str = "incomplete.json";
pub const TIMING: &str = "timing.json";

impl OutputDir {
    /// Creates `root` and removes any completion markers of an earlier run.
    pub fn prepare(root: &Path) -> Result<Self> {
        fs::create_dir_all(root).with_context(|| format!("creating {}", root.display()))?;
        for name in [SUMMARY, INCOMPLETE, TIMING] {
            let p = root.join(name);
            if p.exists() {
                fs::remove_file(&p).with_context(|| format!("removing stale {}", p.display()))?;
            }
        }
        Ok(Self { root: root.to_path_buf() })
    }

    pub fn path(&self) -> &Path {
        &self.root
    }

    pub fn write_csv(&self, name: &str, table: &Table) -> Result<()> {
        write_atomic(&self.root.join(name), &table.to_bytes()?)
    }

    pub fn write_json<T: serde::Serialize>(&self, name: &str, value: &T) -> Result<()> {
        let mut s = serde_json::to_string_pretty(value)?;
        s.push('\n');
        write_atomic(&self.root.join(name), s.as_bytes())
    }
}

/// Reads `dir/summary.json`, refusing directories of interrupted runs.
pub fn read_summary(dir: &Path) -> Result<serde_json::Value> {
    let p = dir.join(SUMMARY);
    if !p.exists() {
        if dir.join(INCOMPLETE).exists() {
            bail!("{} holds an incomplete run", dir.display());
        }
        bail!("{} has no {SUMMARY}", dir.display());
    }
    let text = fs::read_to_string(&p).with_context(|| format!("reading {}", p.display()))?;
    Ok(serde_json::from_str(&text).with_context(|| format!("parsing {}", p.display()))?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn table_has_header_and_fixed_columns() {
        let mut t = Table::new(["t", "k", "v"]);
        t.push(vec![0.1.into(), fmt_point(&[1, -2]).into(), 3usize.into()]);
        assert_eq!(String::from_utf8(t.to_bytes().unwrap()).unwrap(), "t,k,v\n0.1,1;-2,3\n");
    }

    #[test]
    fn stale_markers_are_removed() {
        let dir = tempfile::tempdir().unwrap();
        fs::write(dir.path().join(SUMMARY), "{}").unwrap();
        let out = OutputDir::prepare(dir.path()).unwrap();
        assert!(!out.path().join(SUMMARY).exists());
        assert!(read_summary(dir.path()).is_err());
        out.write_json(SUMMARY, &serde_json::json!({"a": 1})).unwrap();
        assert_eq!(read_summary(dir.path()).unwrap()["a"], 1);
    }

    proptest! {
        #[test]
        fn floats_round_trip(x in proptest::num::f64::NORMAL | proptest::num::f64::SUBNORMAL | proptest::num::f64::ZERO) {
            prop_assert_eq!(fmt_f64(x).parse::<f64>().unwrap().to_bits(), x.to_bits());
        }
    }
}
