//! File-per-solution checkpoint tree.
//!
//! Every accepted witness point is written as soon as it is found to
//! `run/_completed_smooth_solutions/depth_<d>/<name>`, where the file name
//! encodes the lineage of the point (see [`NodeId`]) and the body holds one
//! `re im` coordinate pair per line. Failed and singular path endpoints go to
//! `run/_failed_paths/` with the same naming plus a status suffix.

use std::collections::{BTreeMap, HashSet};
use std::fmt;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::sync::Mutex;

use num_complex::Complex64;
use rand::Rng;

use crate::error::{Error, ParseError, Result};

pub const COMPLETED_DIR: &str = "_completed_smooth_solutions";
pub const FAILED_DIR: &str = "_failed_paths";

const POINT_ID_MIN: u64 = 100_000_000_000;
const POINT_ID_MAX: u64 = 999_999_999_999;

/// A random 12-digit point identifier.
pub fn fresh_point_id<R: Rng + ?Sized>(rng: &mut R) -> String {
    rng.random_range(POINT_ID_MIN..=POINT_ID_MAX).to_string()
}

/// Lineage of a persisted point.
///
/// Rendered as
/// `depth_<d>_gens_<g...>_dim_<e...>_varGroup_<j>_regenLinear_<s>_pointId_<parent>_<self>`.
/// `var_group` and `regen_linear` are 1-based; both are `0` when the point
/// passed the membership test unchanged.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct NodeId {
    pub depth: usize,
    pub gens: Vec<usize>,
    pub dim: Vec<usize>,
    pub var_group: usize,
    pub regen_linear: usize,
    pub parent_point_id: String,
    pub point_id: String,
}

fn join(v: &[usize]) -> String {
    v.iter().map(usize::to_string).collect::<Vec<_>>().join("_")
}

impl NodeId {
    pub fn render(&self) -> String {
        format!(
            "depth_{}_gens_{}_dim_{}_varGroup_{}_regenLinear_{}_pointId_{}_{}",
            self.depth,
            join(&self.gens),
            join(&self.dim),
            self.var_group,
            self.regen_linear,
            self.parent_point_id,
            self.point_id
        )
    }

    pub fn parse(name: &str) -> Result<Self, ParseError> {
        let bad = |m: &str| ParseError::new(1, format!("bad solution file name {name:?}: {m}"));
        let mut tok = name.split('_').peekable();
        let expect = |kw: &str, tok: &mut std::iter::Peekable<std::str::Split<'_, char>>| {
            if tok.next() == Some(kw) {
                Ok(())
            } else {
                Err(bad(&format!("expected {kw}")))
            }
        };
        let num = |s: Option<&str>| -> Result<usize, ParseError> {
            s.and_then(|s| s.parse().ok()).ok_or_else(|| bad("expected a number"))
        };
        let list = |tok: &mut std::iter::Peekable<std::str::Split<'_, char>>, stop: &str| {
            let mut v = Vec::new();
            while let Some(&t) = tok.peek() {
                if t == stop {
                    break;
                }
                v.push(t.parse::<usize>().map_err(|_| bad("expected a number"))?);
                tok.next();
            }
            Ok::<_, ParseError>(v)
        };
        let id = |s: Option<&str>| -> Result<String, ParseError> {
            match s {
                Some(s) if s.len() == 12 && s.bytes().all(|b| b.is_ascii_digit()) && !s.starts_with('0') => {
                    Ok(s.to_string())
                }
                _ => Err(bad("expected a 12-digit point id")),
            }
        };

        expect("depth", &mut tok)?;
        let depth = num(tok.next())?;
        expect("gens", &mut tok)?;
        let gens = list(&mut tok, "dim")?;
        expect("dim", &mut tok)?;
        let dim = list(&mut tok, "varGroup")?;
        expect("varGroup", &mut tok)?;
        let var_group = num(tok.next())?;
        expect("regenLinear", &mut tok)?;
        let regen_linear = num(tok.next())?;
        expect("pointId", &mut tok)?;
        let parent_point_id = id(tok.next())?;
        let point_id = id(tok.next())?;
        if tok.next().is_some() {
            return Err(bad("trailing fields"));
        }
        if dim.is_empty() {
            return Err(bad("empty dim"));
        }
        Ok(Self {
            depth,
            gens,
            dim,
            var_group,
            regen_linear,
            parent_point_id,
            point_id,
        })
    }
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render())
    }
}

impl FromStr for NodeId {
    type Err = ParseError;
    fn from_str(s: &str) -> Result<Self, ParseError> {
        Self::parse(s)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolutionRecord {
    pub id: NodeId,
    /// Flattened coordinates in variable order.
    pub coordinates: Vec<Complex64>,
}

pub fn format_coordinates(x: &[Complex64]) -> String {
    let mut s = String::new();
    for z in x {
        s.push_str(&format!("{:.15e} {:.15e}\n", z.re, z.im));
    }
    s
}

pub fn parse_coordinates(text: &str) -> Result<Vec<Complex64>, ParseError> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let mut parts = line.split_whitespace();
        let mut next = || {
            parts
                .next()
                .and_then(|p| p.parse::<f64>().ok())
                .ok_or_else(|| ParseError::new(i + 1, "expected two real numbers"))
        };
        let re = next()?;
        let im = next()?;
        if parts.next().is_some() {
            return Err(ParseError::new(i + 1, "expected two real numbers"));
        }
        out.push(Complex64::new(re, im));
    }
    Ok(out)
}

pub fn read_solution(path: &Path) -> Result<SolutionRecord> {
    let name = path
        .file_name()
        .and_then(|n| n.to_str())
        .unwrap_or_default()
        .to_string();
    let file = path.display().to_string();
    let id = NodeId::parse(&name).map_err(|source| Error::Parse {
        file: file.clone(),
        source,
    })?;
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let coordinates = parse_coordinates(&text).map_err(|source| Error::Parse { file, source })?;
    Ok(SolutionRecord { id, coordinates })
}

fn write_atomic(dir: &Path, name: &str, body: &str) -> Result<PathBuf> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let path = dir.join(name);
    let tmp = dir.join(format!(".{name}.tmp"));
    let mut f = fs::File::create(&tmp).map_err(|e| Error::io(&tmp, e))?;
    f.write_all(body.as_bytes()).map_err(|e| Error::io(&tmp, e))?;
    f.sync_all().map_err(|e| Error::io(&tmp, e))?;
    drop(f);
    fs::rename(&tmp, &path).map_err(|e| Error::io(&path, e))?;
    Ok(path)
}

/// Writes `rec` under `run_dir` without duplicate tracking.
pub fn save_solution(run_dir: &Path, rec: &SolutionRecord) -> Result<PathBuf> {
    let dir = run_dir.join(COMPLETED_DIR).join(format!("depth_{}", rec.id.depth));
    write_atomic(&dir, &rec.id.render(), &format_coordinates(&rec.coordinates))
}

/// The checkpoint tree of one run. Point ids are unique per store.
#[derive(Debug)]
pub struct SolutionStore {
    run_dir: PathBuf,
    ids: Mutex<HashSet<String>>,
}

impl SolutionStore {
    /// Opens `run_dir` for a fresh run, discarding output of earlier runs.
    pub fn create(run_dir: &Path) -> Result<Self> {
        for sub in [COMPLETED_DIR, FAILED_DIR] {
            let d = run_dir.join(sub);
            if d.exists() {
                fs::remove_dir_all(&d).map_err(|e| Error::io(&d, e))?;
            }
        }
        fs::create_dir_all(run_dir.join(COMPLETED_DIR)).map_err(|e| Error::io(run_dir, e))?;
        Ok(Self {
            run_dir: run_dir.to_path_buf(),
            ids: Mutex::new(HashSet::new()),
        })
    }

    pub fn run_dir(&self) -> &Path {
        &self.run_dir
    }

    pub fn save_solution(&self, rec: &SolutionRecord) -> Result<PathBuf> {
        if !self.ids.lock().unwrap().insert(rec.id.point_id.clone()) {
            return Err(Error::DuplicatePointId(rec.id.point_id.clone()));
        }
        save_solution(&self.run_dir, rec)
    }

    pub fn save_failure(&self, rec: &SolutionRecord, status: &str) -> Result<PathBuf> {
        let dir = self.run_dir.join(FAILED_DIR);
        let name = format!("{}_{}", rec.id.render(), status);
        write_atomic(&dir, &name, &format_coordinates(&rec.coordinates))
    }
}

/// Solution counts found on disk, by depth and slice type.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct RunStatus {
    pub depths: BTreeMap<usize, BTreeMap<Vec<usize>, usize>>,
    /// Files in the tree whose names do not parse.
    pub unrecognized: usize,
}

impl RunStatus {
    pub fn total(&self, depth: usize) -> usize {
        self.depths.get(&depth).map_or(0, |m| m.values().sum())
    }
}

impl fmt::Display for RunStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.depths.is_empty() {
            writeln!(f, "no completed solutions")?;
        }
        for (d, dims) in &self.depths {
            writeln!(f, "depth_{d}: {} solutions", dims.values().sum::<usize>())?;
            for (e, n) in dims.iter().rev() {
                writeln!(f, "  dim {}: {n}", join(e))?;
            }
        }
        if self.unrecognized > 0 {
            writeln!(f, "{} unrecognized files", self.unrecognized)?;
        }
        Ok(())
    }
}

/// Scans the checkpoint tree under `run_dir`. A missing tree reports zero.
pub fn status(run_dir: &Path) -> Result<RunStatus> {
    let mut out = RunStatus::default();
    let root = run_dir.join(COMPLETED_DIR);
    if !root.is_dir() {
        return Ok(out);
    }
    for entry in fs::read_dir(&root).map_err(|e| Error::io(&root, e))? {
        let entry = entry.map_err(|e| Error::io(&root, e))?;
        if !entry.path().is_dir() {
            continue;
        }
        for file in fs::read_dir(entry.path()).map_err(|e| Error::io(entry.path(), e))? {
            let file = file.map_err(|e| Error::io(entry.path(), e))?;
            let name = file.file_name().to_string_lossy().into_owned();
            if name.starts_with('.') {
                continue;
            }
            match NodeId::parse(&name) {
                Ok(id) => {
                    *out.depths.entry(id.depth).or_default().entry(id.dim).or_default() += 1;
                }
                Err(_) => out.unrecognized += 1,
            }
        }
    }
    Ok(out)
}
