//! Knitting on the level-wise cover of the AR quiver.
//!
//! Level 0 holds the target with number 1. Level n holds every vertex with an
//! arrow into level n−1, numbered by the sum over its successors minus the
//! number of its τ⁻¹ two levels down. Vertices of S, negative vertices and
//! zeros stop contributing; S-vertices accumulate into the middle term and
//! negative numbers into the kernel.

use std::collections::BTreeMap;

use serde::Serialize;
use thiserror::Error;

use crate::quiver::{ModuleVector, TranslationQuiver, VertexId, VertexSet};

pub const DEFAULT_MAX_LEVELS: usize = 10_000;
pub const DEFAULT_MAX_STEPS: usize = 10_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Budgets {
    /// Levels per knit.
    pub max_levels: usize,
    /// Splicing steps per resolution.
    pub max_steps: usize,
}

impl Default for Budgets {
    fn default() -> Self {
        Self {
            max_levels: DEFAULT_MAX_LEVELS,
            max_steps: DEFAULT_MAX_STEPS,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Initial,
    Live,
    InS,
    Negative,
    Zero,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Entry {
    pub raw: i64,
    pub status: Status,
}

impl Entry {
    /// Number passed on to neighbours.
    pub fn eff(self) -> i64 {
        match self.status {
            Status::Initial | Status::Live => self.raw,
            _ => 0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CoverLevel {
    pub index: usize,
    pub entries: BTreeMap<VertexId, Entry>,
}

/// `0 → kernel → middle → target`, minimal right add(S)-approximation (or
/// add(S)-almost split map when the target lies in S).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Approximation {
    pub target: VertexId,
    pub set: VertexSet,
    pub middle: ModuleVector,
    pub kernel: ModuleVector,
    pub levels_used: usize,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum KnitError {
    #[error("target {0} is not a real vertex")]
    BadTarget(VertexId),
    #[error("vertex set is empty")]
    EmptySet,
    #[error("vertex set contains vertex {0}, which is not a real vertex")]
    BadSet(VertexId),
    #[error("knit of target {} did not terminate within {budget} levels", partial.target)]
    BudgetExhausted {
        budget: usize,
        partial: Box<Approximation>,
    },
}

/// Runs the ladder for `target` against `s`. The quiver is expected to pass
/// [`crate::validate`].
pub fn knit(
    q: &TranslationQuiver,
    target: VertexId,
    s: VertexSet,
    max_levels: usize,
) -> Result<Approximation, KnitError> {
    run(q, target, s, max_levels, None)
}

/// Like [`knit`], also returning every cover level.
pub fn knit_traced(
    q: &TranslationQuiver,
    target: VertexId,
    s: VertexSet,
    max_levels: usize,
) -> Result<(Approximation, Vec<CoverLevel>), KnitError> {
    let mut levels = Vec::new();
    let approx = run(q, target, s, max_levels, Some(&mut levels))?;
    Ok((approx, levels))
}

fn run(
    q: &TranslationQuiver,
    target: VertexId,
    s: VertexSet,
    max_levels: usize,
    mut trace: Option<&mut Vec<CoverLevel>>,
) -> Result<Approximation, KnitError> {
    let n = q.len();
    if target >= n || !q.is_real(target) {
        return Err(KnitError::BadTarget(target));
    }
    if s.is_empty() {
        return Err(KnitError::EmptySet);
    }
    if let Some(v) = s.iter().find(|&v| v >= n || !q.is_real(v)) {
        return Err(KnitError::BadSet(v));
    }

    let mut middle = vec![0u64; n];
    let mut kernel = vec![0u64; n];
    let mut eff2 = vec![0i64; n];
    let mut eff1 = vec![0i64; n];
    let mut eff0 = vec![0i64; n];
    let mut sum = vec![0i64; n];
    let mut seen = vec![false; n];
    let mut present1 = vec![target];
    let mut present0 = Vec::new();
    eff1[target] = 1;
    if let Some(t) = trace.as_deref_mut() {
        t.push(CoverLevel {
            index: 0,
            entries: BTreeMap::from([(
                target,
                Entry {
                    raw: 1,
                    status: Status::Initial,
                },
            )]),
        });
    }

    let finish = |middle: &[u64], kernel: &[u64], levels_used| Approximation {
        target,
        set: s,
        middle: ModuleVector::from_pairs(middle.iter().copied().enumerate()),
        kernel: ModuleVector::from_pairs(kernel.iter().copied().enumerate()),
        levels_used,
    };

    let mut level = 0;
    loop {
        level += 1;
        if level > max_levels {
            return Err(KnitError::BudgetExhausted {
                budget: max_levels,
                partial: Box::new(finish(&middle, &kernel, max_levels)),
            });
        }

        present0.clear();
        for &w in &present1 {
            let e = eff1[w];
            for &(u, m) in q.preds(w) {
                if !q.is_real(u) {
                    continue;
                }
                if !seen[u] {
                    seen[u] = true;
                    sum[u] = 0;
                    present0.push(u);
                }
                sum[u] += m as i64 * e;
            }
        }
        present0.sort_unstable();

        let mut entries = trace.as_ref().map(|_| BTreeMap::new());
        let mut quiet = true;
        for &u in &present0 {
            seen[u] = false;
            let back = q.tau_inv(u).map_or(0, |t| eff2[t]);
            let k = sum[u] - back;
            let status = if k < 0 {
                kernel[u] += k.unsigned_abs();
                Status::Negative
            } else if s.contains(u) {
                middle[u] += k as u64;
                Status::InS
            } else if k == 0 {
                Status::Zero
            } else {
                Status::Live
            };
            if status == Status::Live {
                eff0[u] = k;
                quiet = false;
            }
            if let Some(e) = entries.as_mut() {
                e.insert(u, Entry { raw: k, status });
            }
        }
        if let (Some(t), Some(entries)) = (trace.as_deref_mut(), entries) {
            t.push(CoverLevel {
                index: level,
                entries,
            });
        }

        let prev_quiet = present1.iter().all(|&w| eff1[w] == 0);
        if quiet && prev_quiet {
            return Ok(finish(&middle, &kernel, level));
        }

        // Rotate n−1 → n−2 and n → n−1; the old n−2 buffer is wiped so that
        // absent vertices read as 0.
        std::mem::swap(&mut eff2, &mut eff1);
        std::mem::swap(&mut eff1, &mut eff0);
        eff0.fill(0);
        std::mem::swap(&mut present1, &mut present0);
    }
}
