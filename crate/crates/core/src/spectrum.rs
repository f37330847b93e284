//! Global dimensions over every nonempty subset of indecomposables.
//!
//! Subset index `mask` selects the real vertices whose position (in
//! ascending id order) has its bit set, so indices run over `1..2^n`. Work
//! is split into half-open ranges of indices, evaluated in parallel and
//! folded into one report; the fold is order independent, so the report does
//! not depend on the job count.

use std::collections::BTreeSet;
use std::collections::BTreeMap;
use std::fs::{File, OpenOptions};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ladder::Budgets;
use crate::quiver::{TranslationQuiver, VertexId, VertexSet};
use crate::resolution::{GlobalDimension, ResolveError, Resolver};

pub const CHECKPOINT_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum SpectrumError {
    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("corrupted checkpoint: {0}")]
    Corrupt(String),
    #[error("checkpoint version {found} is not supported (expected {CHECKPOINT_VERSION})")]
    Version { found: u32 },
    #[error("checkpoint belongs to quiver {found}, not {expected}")]
    QuiverMismatch { expected: String, found: String },
    #[error("--resume needs a checkpoint path")]
    ResumeWithoutCheckpoint,
    #[error("bad range: {0}")]
    BadRange(String),
    #[error("quiver has {0} real vertices; at most 63 can be enumerated")]
    TooLarge(usize),
    #[error("report is incomplete: {done} of {total} subsets done")]
    Incomplete { done: u64, total: u64 },
    #[error("report has {0} subsets of unknown global dimension")]
    Unknowns(u64),
    #[error(transparent)]
    Resolve(#[from] ResolveError),
    #[error("thread pool: {0}")]
    Pool(String),
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> SpectrumError + '_ {
    move |source| SpectrumError::Io {
        path: path.to_path_buf(),
        source,
    }
}

#[derive(Clone, Debug)]
pub struct SpectrumOptions {
    /// Worker threads; 0 lets rayon decide.
    pub jobs: usize,
    pub budgets: Budgets,
    pub checkpoint: Option<PathBuf>,
    pub resume: bool,
    /// Half-open range of subset indices; defaults to every subset.
    pub range: Option<(u64, u64)>,
    /// CSV with one `mask,set,gldim` line per subset.
    pub dump: Option<PathBuf>,
    /// Subsets per work unit.
    pub chunk_size: u64,
}

impl Default for SpectrumOptions {
    fn default() -> Self {
        Self {
            jobs: 0,
            budgets: Budgets::default(),
            checkpoint: None,
            resume: false,
            range: None,
            dump: None,
            chunk_size: 4096,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SpectrumReport {
    pub quiver_id: String,
    pub histogram: BTreeMap<u32, u64>,
    pub infinite_count: u64,
    pub unknown_count: u64,
    pub total_subsets: u64,
    pub completed_ranges: Vec<(u64, u64)>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Checkpoint {
    version: u32,
    quiver_id: String,
    completed_ranges: Vec<(u64, u64)>,
    histogram: BTreeMap<u32, u64>,
    infinite_count: u64,
    unknown_count: u64,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
struct Tally {
    histogram: BTreeMap<u32, u64>,
    infinite: u64,
    unknown: u64,
}

impl Tally {
    fn record(&mut self, g: GlobalDimension) {
        match g {
            GlobalDimension::Finite(d) => *self.histogram.entry(d as u32).or_insert(0) += 1,
            GlobalDimension::Infinite => self.infinite += 1,
            GlobalDimension::Unknown => self.unknown += 1,
        }
    }
}

impl SpectrumReport {
    fn empty(q: &TranslationQuiver, n: usize) -> Self {
        Self {
            quiver_id: q.content_hash(),
            histogram: BTreeMap::new(),
            infinite_count: 0,
            unknown_count: 0,
            total_subsets: (1u64 << n) - 1,
            completed_ranges: Vec::new(),
        }
    }

    pub fn classified(&self) -> u64 {
        self.histogram.values().sum::<u64>() + self.infinite_count + self.unknown_count
    }

    pub fn done(&self) -> u64 {
        self.completed_ranges.iter().map(|(a, b)| b - a).sum()
    }

    pub fn is_complete(&self) -> bool {
        self.completed_ranges == [(1, self.total_subsets + 1)]
    }

    pub fn finite_count(&self) -> u64 {
        self.histogram.values().sum()
    }

    fn absorb(&mut self, range: (u64, u64), t: &Tally) {
        for (&d, &c) in &t.histogram {
            *self.histogram.entry(d).or_insert(0) += c;
        }
        self.infinite_count += t.infinite;
        self.unknown_count += t.unknown;
        self.completed_ranges.push(range);
        self.completed_ranges = coalesce(std::mem::take(&mut self.completed_ranges));
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// `gldim,count` rows, then `infinite` and `unknown`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("gldim,count\n");
        for (d, c) in &self.histogram {
            out.push_str(&format!("{d},{c}\n"));
        }
        out.push_str(&format!("infinite,{}\n", self.infinite_count));
        out.push_str(&format!("unknown,{}\n", self.unknown_count));
        out
    }

    pub fn to_markdown(&self) -> String {
        let mut out = String::from("| gl.dim | count |\n|---|---|\n");
        for (d, c) in &self.histogram {
            out.push_str(&format!("| {d} | {c} |\n"));
        }
        out.push_str(&format!("| infinite | {} |\n", self.infinite_count));
        out.push_str(&format!("| unknown | {} |\n", self.unknown_count));
        out.push_str(&format!(
            "| total | {} of {} |\n",
            self.classified(),
            self.total_subsets
        ));
        out
    }
}

fn coalesce(mut ranges: Vec<(u64, u64)>) -> Vec<(u64, u64)> {
    ranges.retain(|(a, b)| a < b);
    ranges.sort_unstable();
    let mut out: Vec<(u64, u64)> = Vec::with_capacity(ranges.len());
    for (a, b) in ranges {
        match out.last_mut() {
            Some(last) if a <= last.1 => last.1 = last.1.max(b),
            _ => out.push((a, b)),
        }
    }
    out
}

/// Parts of `range` not covered by `done` (which must be coalesced).
fn subtract(range: (u64, u64), done: &[(u64, u64)]) -> Vec<(u64, u64)> {
    let mut out = Vec::new();
    let mut cur = range.0;
    for &(a, b) in done {
        if b <= cur || a >= range.1 {
            continue;
        }
        if a > cur {
            out.push((cur, a));
        }
        cur = cur.max(b);
    }
    if cur < range.1 {
        out.push((cur, range.1));
    }
    out
}

/// Vertex set selected by subset index `mask`.
pub fn subset_of(real: &[VertexId], mask: u64) -> VertexSet {
    VertexSet::from_ids(
        real.iter()
            .enumerate()
            .filter(|(i, _)| mask >> i & 1 == 1)
            .map(|(_, &v)| v),
    )
}

/// Global dimension of End_R(⊕S) for the subset with index `mask`.
pub fn classify(
    q: &TranslationQuiver,
    real: &[VertexId],
    mask: u64,
    budgets: Budgets,
) -> Result<GlobalDimension, ResolveError> {
    Resolver::new(q, subset_of(real, mask), budgets).global_dimension()
}

fn run_chunk(
    q: &TranslationQuiver,
    real: &[VertexId],
    (a, b): (u64, u64),
    budgets: Budgets,
    dump: bool,
) -> Result<(Tally, String), ResolveError> {
    let mut tally = Tally::default();
    let mut lines = String::new();
    for mask in a..b {
        let g = classify(q, real, mask, budgets)?;
        tally.record(g);
        if dump {
            let labels = q.set_labels(subset_of(real, mask)).join(";");
            lines.push_str(&format!("{mask},{labels},{g}\n"));
        }
    }
    Ok((tally, lines))
}

pub fn checkpoint_write(path: &Path, r: &SpectrumReport) -> Result<(), SpectrumError> {
    let cp = Checkpoint {
        version: CHECKPOINT_VERSION,
        quiver_id: r.quiver_id.clone(),
        completed_ranges: r.completed_ranges.clone(),
        histogram: r.histogram.clone(),
        infinite_count: r.infinite_count,
        unknown_count: r.unknown_count,
    };
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(io_err(path))?;
    serde_json::to_writer_pretty(&mut tmp, &cp).map_err(|e| SpectrumError::Io {
        path: path.to_path_buf(),
        source: e.into(),
    })?;
    tmp.write_all(b"\n").map_err(io_err(path))?;
    tmp.persist(path).map_err(|e| SpectrumError::Io {
        path: path.to_path_buf(),
        source: e.error,
    })?;
    Ok(())
}

/// Reads a checkpoint written for `q`.
pub fn checkpoint_read(path: &Path, q: &TranslationQuiver) -> Result<SpectrumReport, SpectrumError> {
    let text = std::fs::read_to_string(path).map_err(io_err(path))?;
    let cp: Checkpoint =
        serde_json::from_str(&text).map_err(|e| SpectrumError::Corrupt(e.to_string()))?;
    if cp.version != CHECKPOINT_VERSION {
        return Err(SpectrumError::Version { found: cp.version });
    }
    let expected = q.content_hash();
    if cp.quiver_id != expected {
        return Err(SpectrumError::QuiverMismatch {
            expected,
            found: cp.quiver_id,
        });
    }
    let n = q.real_vertices().len();
    let total = (1u64 << n) - 1;
    let ranges = coalesce(cp.completed_ranges.clone());
    if ranges.len() != cp.completed_ranges.len()
        || ranges.iter().any(|&(a, b)| a < 1 || b > total + 1)
    {
        return Err(SpectrumError::Corrupt("invalid completed ranges".into()));
    }
    let report = SpectrumReport {
        quiver_id: cp.quiver_id,
        histogram: cp.histogram,
        infinite_count: cp.infinite_count,
        unknown_count: cp.unknown_count,
        total_subsets: total,
        completed_ranges: ranges,
    };
    if report.classified() != report.done() {
        return Err(SpectrumError::Corrupt(format!(
            "counts sum to {} but ranges cover {}",
            report.classified(),
            report.done()
        )));
    }
    Ok(report)
}

/// Classifies every subset in the requested range, resuming from and
/// writing to the checkpoint when one is configured.
pub fn enumerate_spectrum(
    q: &TranslationQuiver,
    opts: &SpectrumOptions,
) -> Result<SpectrumReport, SpectrumError> {
    let real = q.real_vertices();
    let n = real.len();
    if n > 63 {
        return Err(SpectrumError::TooLarge(n));
    }
    let full = (1u64, 1u64 << n);
    let range = opts.range.unwrap_or(full);
    if range.0 >= range.1 || range.0 < full.0 || range.1 > full.1 {
        return Err(SpectrumError::BadRange(format!(
            "{}..{} is not a nonempty part of {}..{}",
            range.0, range.1, full.0, full.1
        )));
    }
    if opts.resume && opts.checkpoint.is_none() {
        return Err(SpectrumError::ResumeWithoutCheckpoint);
    }

    let mut report = match (&opts.checkpoint, opts.resume) {
        (Some(path), true) => checkpoint_read(path, q)?,
        _ => SpectrumReport::empty(q, n),
    };

    let mut dump = match &opts.dump {
        Some(path) => {
            let file = if opts.resume {
                OpenOptions::new().create(true).append(true).open(path)
            } else {
                File::create(path)
            }
            .map_err(io_err(path))?;
            let mut w = BufWriter::new(file);
            if !opts.resume {
                w.write_all(b"mask,set,gldim\n").map_err(io_err(path))?;
            }
            Some((path.clone(), w))
        }
        None => None,
    };

    let chunk = opts.chunk_size.max(1);
    let units: Vec<(u64, u64)> = subtract(range, &report.completed_ranges)
        .into_iter()
        .flat_map(|(a, b)| {
            (a..b)
                .step_by(chunk as usize)
                .map(move |s| (s, (s + chunk).min(b)))
        })
        .collect();

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(opts.jobs)
        .build()
        .map_err(|e| SpectrumError::Pool(e.to_string()))?;
    let threads = pool.current_num_threads().max(1);
    for batch in units.chunks(threads * 4) {
        let results: Vec<_> = pool.install(|| {
            batch
                .par_iter()
                .map(|&u| run_chunk(q, &real, u, opts.budgets, dump.is_some()))
                .collect()
        });
        for (&unit, res) in batch.iter().zip(results) {
            let (tally, lines) = res?;
            report.absorb(unit, &tally);
            if let Some((path, w)) = dump.as_mut() {
                w.write_all(lines.as_bytes()).map_err(io_err(path))?;
            }
        }
        if let Some((path, w)) = dump.as_mut() {
            w.flush().map_err(io_err(path))?;
        }
        if let Some(path) = &opts.checkpoint {
            checkpoint_write(path, &report)?;
        }
    }
    Ok(report)
}

/// The global spectrum: finite global dimensions that occur.
pub fn spectrum_support(r: &SpectrumReport) -> Result<BTreeSet<u32>, SpectrumError> {
    if !r.is_complete() {
        return Err(SpectrumError::Incomplete {
            done: r.done(),
            total: r.total_subsets,
        });
    }
    if r.unknown_count > 0 {
        return Err(SpectrumError::Unknowns(r.unknown_count));
    }
    Ok(r.histogram
        .iter()
        .filter(|(_, &c)| c > 0)
        .map(|(&d, _)| d)
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn range_arithmetic() {
        assert_eq!(coalesce(vec![(5, 9), (1, 3), (3, 5), (12, 12)]), vec![(1, 9)]);
        assert_eq!(subtract((1, 20), &[(3, 5), (8, 30)]), vec![(1, 3), (5, 8)]);
        assert_eq!(subtract((4, 6), &[(1, 3)]), vec![(4, 6)]);
        assert!(subtract((4, 6), &[(1, 10)]).is_empty());
    }

    #[test]
    fn subset_indexing() {
        let real = [0, 1, 3];
        assert_eq!(subset_of(&real, 0b101), VertexSet::from_ids([0, 3]));
    }
}
