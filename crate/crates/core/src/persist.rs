//! Textual table format and an on-disk cache keyed by content hash.
//!
//! ```text
//! tiltwalk-tables 1
//! model end-fixed-tree:k=4
//! weight saw
//! n_max 12
//! method transfer
//! t0_units 1
//! section walks 27
//! 0 0 0 1
//! 1 1 0 1
//! ...
//! section a 13
//! ...
//! end
//! ```
//!
//! Each section holds `n m key count` rows with decimal counts. Sections are
//! `walks`, `a`, `d`, `h`, `r` in that order, and the declared row counts and
//! the closing `end` line let a reader reject truncated files.

use std::fs;
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use num_bigint::BigUint;
use sha2::{Digest, Sha256};

use crate::descriptor::{ModelSpec, WeightSpec};
use crate::enumerate::{
    compute_tables, BridgeTables, CountTable, HeightResolvedTable, Method, WalkTables,
};
use crate::error::{Error, Result};

pub const FORMAT_VERSION: u32 = 1;
const MAGIC: &str = "tiltwalk-tables";
const SECTIONS: [&str; 5] = ["walks", "a", "d", "h", "r"];

/// Environment variable overriding the cache directory.
pub const CACHE_DIR_ENV: &str = "TILTWALK_CACHE_DIR";

pub fn write_tables(out: &mut impl Write, tables: &WalkTables) -> Result<()> {
    let w = &tables.walks;
    writeln!(out, "{MAGIC} {FORMAT_VERSION}")?;
    writeln!(out, "model {}", w.model)?;
    writeln!(out, "weight {}", w.weight)?;
    writeln!(out, "n_max {}", w.n_max)?;
    writeln!(out, "method {}", w.method)?;
    writeln!(out, "t0_units {}", tables.bridges.t0_units)?;
    let b = &tables.bridges;
    for (name, table) in SECTIONS.iter().zip([&w.counts, &b.a, &b.d, &b.h, &b.r]) {
        writeln!(out, "section {name} {}", table.entries().count())?;
        for (n, m, key, v) in table.entries() {
            writeln!(out, "{n} {m} {key} {v}")?;
        }
    }
    writeln!(out, "end")?;
    Ok(())
}

fn format_err(line: usize, msg: impl std::fmt::Display) -> Error {
    Error::Format(format!("line {line}: {msg}"))
}

struct Lines<R> {
    inner: std::io::Lines<R>,
    number: usize,
}

impl<R: BufRead> Lines<R> {
    fn next_line(&mut self) -> Result<String> {
        self.number += 1;
        match self.inner.next() {
            Some(line) => Ok(line?),
            None => Err(format_err(self.number, "unexpected end of file")),
        }
    }

    fn field(&mut self, name: &str) -> Result<String> {
        let line = self.next_line()?;
        match line.split_once(' ') {
            Some((k, v)) if k == name => Ok(v.to_string()),
            _ => Err(format_err(
                self.number,
                format!("expected `{name} ...`, got `{line}`"),
            )),
        }
    }
}

fn parse<T: std::str::FromStr>(s: &str, line: usize) -> Result<T>
where
    T::Err: std::fmt::Display,
{
    s.parse()
        .map_err(|e| format_err(line, format!("`{s}`: {e}")))
}

pub fn read_tables(input: impl BufRead) -> Result<WalkTables> {
    let mut lines = Lines {
        inner: input.lines(),
        number: 0,
    };
    let header = lines.next_line()?;
    let version = header
        .strip_prefix(MAGIC)
        .map(str::trim)
        .ok_or_else(|| format_err(1, "not a table file"))?;
    if parse::<u32>(version, 1)? != FORMAT_VERSION {
        return Err(format_err(
            1,
            format!("unsupported format version {version}"),
        ));
    }
    let model: ModelSpec = parse(&lines.field("model")?, lines.number)?;
    let weight: WeightSpec = parse(&lines.field("weight")?, lines.number)?;
    let n_max: usize = parse(&lines.field("n_max")?, lines.number)?;
    let method: Method = parse(&lines.field("method")?, lines.number)?;
    let t0_units: u32 = parse(&lines.field("t0_units")?, lines.number)?;
    let mut tables = Vec::with_capacity(SECTIONS.len());
    for name in SECTIONS {
        let head = lines.field("section")?;
        let (got, rows) = head
            .split_once(' ')
            .ok_or_else(|| format_err(lines.number, "section needs a name and a row count"))?;
        if got != name {
            return Err(format_err(
                lines.number,
                format!("expected section `{name}`, got `{got}`"),
            ));
        }
        let rows: usize = parse(rows, lines.number)?;
        let mut table = CountTable::new(n_max);
        for _ in 0..rows {
            let line = lines.next_line()?;
            let parts: Vec<&str> = line.split(' ').collect();
            if parts.len() != 4 {
                return Err(format_err(
                    lines.number,
                    format!("expected 4 fields, got `{line}`"),
                ));
            }
            let n: usize = parse(parts[0], lines.number)?;
            if n > n_max {
                return Err(format_err(lines.number, format!("length {n} beyond n_max")));
            }
            let count: BigUint = parse(parts[3], lines.number)?;
            table.add(
                n,
                parse(parts[1], lines.number)?,
                parse(parts[2], lines.number)?,
                count,
            );
        }
        tables.push(table);
    }
    if lines.next_line()? != "end" {
        return Err(format_err(lines.number, "missing `end`"));
    }
    let [walks, a, d, h, r]: [CountTable; 5] = tables.try_into().expect("five sections");
    Ok(WalkTables {
        walks: HeightResolvedTable {
            model,
            weight,
            n_max,
            method,
            counts: walks,
        },
        bridges: BridgeTables {
            model,
            weight,
            n_max,
            t0_units,
            a,
            d,
            h,
            r,
        },
    })
}

/// Hex SHA-256 of the canonical `(model, weight, n_max)` descriptor.
pub fn cache_key(model: ModelSpec, weight: WeightSpec, n_max: usize) -> String {
    let mut h = Sha256::new();
    h.update(format!(
        "{MAGIC} {FORMAT_VERSION}\nmodel {model}\nweight {weight}\nn_max {n_max}\n"
    ));
    hex::encode(h.finalize())
}

/// Hex SHA-256 of a byte string.
pub fn content_hash(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Whether a lookup reused a cached file.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum CacheStatus {
    Hit,
    Miss,
    /// A cached file existed but could not be read.
    Corrupt,
    Disabled,
}

/// Directory of cached tables, one file per key.
#[derive(Debug, Clone)]
pub struct TableCache {
    dir: PathBuf,
}

impl TableCache {
    pub fn new(dir: impl Into<PathBuf>) -> Self {
        TableCache { dir: dir.into() }
    }

    /// `$TILTWALK_CACHE_DIR` if set, else `fallback`.
    pub fn from_env_or(fallback: Option<PathBuf>) -> Option<Self> {
        std::env::var_os(CACHE_DIR_ENV)
            .map(PathBuf::from)
            .or(fallback)
            .map(TableCache::new)
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn path_for(&self, model: ModelSpec, weight: WeightSpec, n_max: usize) -> PathBuf {
        self.dir
            .join(format!("{}.tables", cache_key(model, weight, n_max)))
    }

    /// Read a cached table; unreadable entries are reported as corrupt, not as errors.
    pub fn lookup(
        &self,
        model: ModelSpec,
        weight: WeightSpec,
        n_max: usize,
    ) -> (Option<WalkTables>, CacheStatus) {
        let path = self.path_for(model, weight, n_max);
        let file = match fs::File::open(&path) {
            Ok(f) => f,
            Err(_) => return (None, CacheStatus::Miss),
        };
        match read_tables(BufReader::new(file)) {
            Ok(t)
                if t.walks.model == model && t.walks.weight == weight && t.walks.n_max == n_max =>
            {
                (Some(t), CacheStatus::Hit)
            }
            Ok(_) => {
                log::warn!(
                    "cache entry {} describes different parameters; recomputing",
                    path.display()
                );
                (None, CacheStatus::Corrupt)
            }
            Err(e) => {
                log::warn!("ignoring corrupt cache entry {}: {e}", path.display());
                (None, CacheStatus::Corrupt)
            }
        }
    }

    /// Write atomically: a temporary file in the cache directory renamed into place.
    pub fn store(&self, tables: &WalkTables) -> Result<PathBuf> {
        fs::create_dir_all(&self.dir)?;
        let w = &tables.walks;
        let path = self.path_for(w.model, w.weight, w.n_max);
        let mut tmp = tempfile::NamedTempFile::new_in(&self.dir)?;
        {
            let mut out = std::io::BufWriter::new(tmp.as_file_mut());
            write_tables(&mut out, tables)?;
            out.flush()?;
        }
        tmp.persist(&path).map_err(|e| Error::Io(e.error))?;
        Ok(path)
    }
}

/// Tables from the cache when present, computed (and stored) otherwise.
pub fn cached_tables(
    cache: Option<&TableCache>,
    model: ModelSpec,
    weight: WeightSpec,
    n_max: usize,
    method: Option<Method>,
) -> Result<(WalkTables, CacheStatus)> {
    let Some(cache) = cache else {
        return Ok((
            compute_tables(model, weight, n_max, method)?,
            CacheStatus::Disabled,
        ));
    };
    let (found, status) = cache.lookup(model, weight, n_max);
    if let Some(t) = found {
        return Ok((t, status));
    }
    let tables = compute_tables(model, weight, n_max, method)?;
    cache.store(&tables)?;
    Ok((tables, status))
}
