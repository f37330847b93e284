#![allow(dead_code)]

use mcm_spectra::catalog;
use mcm_spectra::{ModuleVector, TranslationQuiver, VertexSet};

pub fn quiver(key: &str) -> TranslationQuiver {
    catalog::lookup(key)
        .unwrap_or_else(|e| panic!("{key}: {e}"))
        .quiver
}

pub fn set(q: &TranslationQuiver, labels: &[&str]) -> VertexSet {
    q.lookup_set(labels).expect("labels resolve")
}

/// Reads `"2*X1 A"` as 2·X1 + A. Tokens are space separated because labels
/// such as `D+` contain plus signs.
pub fn vector(q: &TranslationQuiver, text: &str) -> ModuleVector {
    let mut v = ModuleVector::new();
    for tok in text.split_whitespace() {
        let (m, label) = match tok.split_once('*') {
            Some((m, l)) => (m.parse().expect("multiplicity"), l),
            None => (1, tok),
        };
        v.add(q.lookup(label).expect("label resolves"), m);
    }
    v
}

pub fn show(q: &TranslationQuiver, v: &ModuleVector) -> String {
    v.display(q).to_string()
}

pub fn show_terms(q: &TranslationQuiver, terms: &[ModuleVector]) -> String {
    terms
        .iter()
        .map(|t| show(q, t))
        .collect::<Vec<_>>()
        .join(" | ")
}

/// Sum of rank vectors, or `None` when some vertex has no rank.
pub fn rank(q: &TranslationQuiver, v: &ModuleVector) -> Option<Vec<i64>> {
    let mut out: Vec<i64> = Vec::new();
    for (u, m) in v.iter() {
        let r = q.vertex(u).rank.as_ref()?;
        if out.is_empty() {
            out = vec![0; r.len()];
        }
        for (o, x) in out.iter_mut().zip(r) {
            *o += m as i64 * *x as i64;
        }
    }
    Some(out)
}

/// Whether `terms` (target first) can be the terms of an exact sequence
/// `0 → T_m → … → T_1 → T_0` of MCM modules whose last map has finite
/// length cokernel: every intermediate kernel must have nonnegative,
/// nonzero rank and the last one rank zero.
pub fn rank_consistent(q: &TranslationQuiver, terms: &[ModuleVector]) -> Result<(), String> {
    let ranks: Vec<Vec<i64>> = terms
        .iter()
        .map(|t| rank(q, t).ok_or_else(|| "missing rank".to_string()))
        .collect::<Result<_, _>>()?;
    let width = ranks.iter().map(Vec::len).max().unwrap_or(0);
    let pad = |r: &Vec<i64>| {
        let mut r = r.clone();
        r.resize(width, 0);
        r
    };
    let mut kernel = pad(&ranks[0]);
    for (i, r) in ranks.iter().enumerate().skip(1) {
        let next: Vec<i64> = pad(r).iter().zip(&kernel).map(|(a, b)| a - b).collect();
        let last = i + 1 == ranks.len();
        if next.iter().any(|&x| x < 0) {
            return Err(format!("kernel {i} has negative rank {next:?}"));
        }
        if last && next.iter().any(|&x| x != 0) {
            return Err(format!("last term leaves rank {next:?}"));
        }
        if !last && next.iter().all(|&x| x == 0) {
            return Err(format!("kernel {i} has rank 0 but the sequence goes on"));
        }
        kernel = next;
    }
    Ok(())
}
