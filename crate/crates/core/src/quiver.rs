//! AR translation quivers, module vectors and the JSON quiver document.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

/// Dense vertex index, `0..n` within one quiver.
pub type VertexId = usize;

/// Vertex sets are bitmasks, so a quiver holds at most this many vertices.
pub const MAX_VERTICES: usize = 64;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VertexKind {
    Free,
    Nonfree,
    FormalZero,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Vertex {
    pub id: VertexId,
    pub label: String,
    pub kind: VertexKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rank: Option<Vec<u32>>,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum QuiverError {
    #[error("syntax error at line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("empty quiver")]
    Empty,
    #[error("too many vertices: {0} (at most {MAX_VERTICES} supported)")]
    TooManyVertices(usize),
    #[error("dim must be 1 or 2, got {0}")]
    InvalidDim(u8),
    #[error("duplicate vertex id {0}")]
    DuplicateId(VertexId),
    #[error("vertex ids must be 0..{n} without gaps; id {id} is out of range")]
    NonDenseIds { id: VertexId, n: usize },
    #[error("duplicate vertex label {0:?}")]
    DuplicateLabel(String),
    #[error("{context} references unknown vertex id {id}")]
    UnknownVertex { context: &'static str, id: VertexId },
    #[error("arrow {from} -> {to} has multiplicity {mult}; must be at least 1")]
    BadMultiplicity { from: VertexId, to: VertexId, mult: u32 },
    #[error("tau defined twice on vertex {0}")]
    DuplicateTau(VertexId),
    #[error("formal zero vertex only allowed in dimension 1")]
    FormalZeroInDim2,
    #[error("formal zero already present")]
    FormalZeroPresent,
    #[error("formal zero is only inserted into curves (dim 1)")]
    NotCurve,
    #[error("quiver needs exactly one free vertex, found {0}")]
    FreeCount(usize),
    #[error("tau already defined on the free vertex")]
    FreeTauDefined,
    #[error("vertex {0} is the formal zero")]
    IsFormalZero(VertexId),
    #[error("unknown label {label:?}; valid labels: {valid}")]
    UnknownLabel { label: String, valid: String },
}

/// Formal nonnegative combination of vertices: a class in K_0.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ModuleVector {
    mult: BTreeMap<VertexId, u64>,
}

impl ModuleVector {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn unit(v: VertexId) -> Self {
        let mut m = Self::new();
        m.add(v, 1);
        m
    }

    pub fn from_pairs<I: IntoIterator<Item = (VertexId, u64)>>(pairs: I) -> Self {
        let mut m = Self::new();
        for (v, k) in pairs {
            m.add(v, k);
        }
        m
    }

    pub fn get(&self, v: VertexId) -> u64 {
        self.mult.get(&v).copied().unwrap_or(0)
    }

    pub fn add(&mut self, v: VertexId, k: u64) {
        if k > 0 {
            *self.mult.entry(v).or_insert(0) += k;
        }
    }

    pub fn add_scaled(&mut self, other: &ModuleVector, k: u64) {
        for (&v, &m) in &other.mult {
            self.add(v, m * k);
        }
    }

    pub fn is_zero(&self) -> bool {
        self.mult.is_empty()
    }

    /// Entries in ascending vertex order.
    pub fn iter(&self) -> impl Iterator<Item = (VertexId, u64)> + '_ {
        self.mult.iter().map(|(&v, &m)| (v, m))
    }

    pub fn support(&self) -> VertexSet {
        VertexSet::from_ids(self.mult.keys().copied())
    }

    pub fn total(&self) -> u64 {
        self.mult.values().sum()
    }

    /// Splits into the part supported on `s` and the rest.
    pub fn split(&self, s: VertexSet) -> (ModuleVector, ModuleVector) {
        let mut inside = ModuleVector::new();
        let mut outside = ModuleVector::new();
        for (v, m) in self.iter() {
            if s.contains(v) {
                inside.add(v, m);
            } else {
                outside.add(v, m);
            }
        }
        (inside, outside)
    }

    pub fn map_ids(&self, f: impl Fn(VertexId) -> VertexId) -> ModuleVector {
        ModuleVector::from_pairs(self.iter().map(|(v, m)| (f(v), m)))
    }

    /// `2*M1+R` style rendering by label; `0` for the zero vector.
    pub fn display<'a>(&'a self, q: &'a TranslationQuiver) -> impl fmt::Display + 'a {
        DisplayVector { v: self, q }
    }

    /// Label-keyed map, used for JSON output.
    pub fn to_label_map(&self, q: &TranslationQuiver) -> BTreeMap<String, u64> {
        self.iter().map(|(v, m)| (q.label(v).to_string(), m)).collect()
    }
}

struct DisplayVector<'a> {
    v: &'a ModuleVector,
    q: &'a TranslationQuiver,
}

impl fmt::Display for DisplayVector<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.v.is_zero() {
            return write!(f, "0");
        }
        for (i, (v, m)) in self.v.iter().enumerate() {
            if i > 0 {
                write!(f, "+")?;
            }
            if m == 1 {
                write!(f, "{}", self.q.label(v))?;
            } else {
                write!(f, "{}*{}", m, self.q.label(v))?;
            }
        }
        Ok(())
    }
}

/// Subset of vertices as a 64-bit mask.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct VertexSet(pub u64);

impl VertexSet {
    pub const EMPTY: VertexSet = VertexSet(0);

    pub fn from_ids<I: IntoIterator<Item = VertexId>>(ids: I) -> Self {
        let mut s = VertexSet(0);
        for v in ids {
            s.insert(v);
        }
        s
    }

    pub fn insert(&mut self, v: VertexId) {
        assert!(v < MAX_VERTICES, "vertex id {v} exceeds set capacity");
        self.0 |= 1u64 << v;
    }

    pub fn contains(self, v: VertexId) -> bool {
        v < MAX_VERTICES && self.0 >> v & 1 == 1
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn iter(self) -> impl Iterator<Item = VertexId> {
        let mut bits = self.0;
        std::iter::from_fn(move || {
            if bits == 0 {
                return None;
            }
            let v = bits.trailing_zeros() as usize;
            bits &= bits - 1;
            Some(v)
        })
    }

    pub fn is_subset(self, other: VertexSet) -> bool {
        self.0 & !other.0 == 0
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ArrowDoc {
    from: VertexId,
    to: VertexId,
    mult: u32,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TauDoc {
    from: VertexId,
    to: VertexId,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct QuiverDoc {
    name: String,
    dim: u8,
    vertices: Vec<Vertex>,
    arrows: Vec<ArrowDoc>,
    #[serde(default)]
    tau: Vec<TauDoc>,
}

/// AR translation quiver. Immutable once built.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TranslationQuiver {
    name: String,
    dim: u8,
    vertices: Vec<Vertex>,
    arrows: BTreeMap<(VertexId, VertexId), u32>,
    tau: Vec<Option<VertexId>>,
    preds: Vec<Vec<(VertexId, u32)>>,
    tau_inv: Vec<Option<VertexId>>,
}

impl TranslationQuiver {
    /// Builds a quiver, checking only referential structure. Repeated
    /// arrows between the same pair are merged by adding multiplicities.
    pub fn new(
        name: impl Into<String>,
        dim: u8,
        mut vertices: Vec<Vertex>,
        arrows: impl IntoIterator<Item = (VertexId, VertexId, u32)>,
        tau: impl IntoIterator<Item = (VertexId, VertexId)>,
    ) -> Result<Self, QuiverError> {
        let n = vertices.len();
        if n == 0 {
            return Err(QuiverError::Empty);
        }
        if n > MAX_VERTICES {
            return Err(QuiverError::TooManyVertices(n));
        }
        if dim != 1 && dim != 2 {
            return Err(QuiverError::InvalidDim(dim));
        }
        let mut seen = vec![false; n];
        for v in &vertices {
            if v.id >= n {
                return Err(QuiverError::NonDenseIds { id: v.id, n });
            }
            if seen[v.id] {
                return Err(QuiverError::DuplicateId(v.id));
            }
            seen[v.id] = true;
        }
        vertices.sort_by_key(|v| v.id);
        let mut labels = std::collections::HashSet::new();
        for v in &vertices {
            if !labels.insert(v.label.as_str()) {
                return Err(QuiverError::DuplicateLabel(v.label.clone()));
            }
        }

        let mut arrow_map = BTreeMap::new();
        for (from, to, mult) in arrows {
            for id in [from, to] {
                if id >= n {
                    return Err(QuiverError::UnknownVertex { context: "arrow", id });
                }
            }
            if mult == 0 {
                return Err(QuiverError::BadMultiplicity { from, to, mult });
            }
            *arrow_map.entry((from, to)).or_insert(0) += mult;
        }

        let mut tau_map = vec![None; n];
        for (from, to) in tau {
            for id in [from, to] {
                if id >= n {
                    return Err(QuiverError::UnknownVertex { context: "tau", id });
                }
            }
            if tau_map[from].replace(to).is_some() {
                return Err(QuiverError::DuplicateTau(from));
            }
        }

        let mut preds = vec![Vec::new(); n];
        for (&(u, v), &m) in &arrow_map {
            preds[v].push((u, m));
        }
        let mut tau_inv = vec![None; n];
        for (v, t) in tau_map.iter().enumerate() {
            if let Some(t) = *t {
                tau_inv[t].get_or_insert(v);
            }
        }
        Ok(Self {
            name: name.into(),
            dim,
            vertices,
            arrows: arrow_map,
            tau: tau_map,
            preds,
            tau_inv,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dim(&self) -> u8 {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn vertices(&self) -> &[Vertex] {
        &self.vertices
    }

    pub fn vertex(&self, v: VertexId) -> &Vertex {
        &self.vertices[v]
    }

    pub fn label(&self, v: VertexId) -> &str {
        &self.vertices[v].label
    }

    pub fn kind(&self, v: VertexId) -> VertexKind {
        self.vertices[v].kind
    }

    pub fn arrows(&self) -> impl Iterator<Item = (VertexId, VertexId, u32)> + '_ {
        self.arrows.iter().map(|(&(u, v), &m)| (u, v, m))
    }

    pub fn arrow_mult(&self, from: VertexId, to: VertexId) -> u32 {
        self.arrows.get(&(from, to)).copied().unwrap_or(0)
    }

    /// Arrows `u -> v` into `v`, as `(u, mult)`.
    pub fn preds(&self, v: VertexId) -> &[(VertexId, u32)] {
        &self.preds[v]
    }

    pub fn tau(&self, v: VertexId) -> Option<VertexId> {
        self.tau[v]
    }

    pub fn tau_inv(&self, v: VertexId) -> Option<VertexId> {
        self.tau_inv[v]
    }

    /// First free vertex. Admissible quivers have exactly one.
    pub fn free(&self) -> Option<VertexId> {
        self.vertices.iter().position(|v| v.kind == VertexKind::Free)
    }

    pub fn formal_zero(&self) -> Option<VertexId> {
        self.vertices.iter().position(|v| v.kind == VertexKind::FormalZero)
    }

    pub fn is_real(&self, v: VertexId) -> bool {
        self.vertices[v].kind != VertexKind::FormalZero
    }

    /// Real (non formal zero) vertices in ascending id order.
    pub fn real_vertices(&self) -> Vec<VertexId> {
        (0..self.len()).filter(|&v| self.is_real(v)).collect()
    }

    pub fn all_real(&self) -> VertexSet {
        VertexSet::from_ids(self.real_vertices())
    }

    pub fn vertex_by_label(&self, label: &str) -> Option<VertexId> {
        self.vertices.iter().position(|v| v.label == label)
    }

    /// Label lookup for user input. `R` falls back to the free vertex when
    /// no vertex carries that label (the A_n families call it `I0`).
    pub fn lookup(&self, label: &str) -> Result<VertexId, QuiverError> {
        if let Some(v) = self.vertex_by_label(label) {
            return Ok(v);
        }
        if label == "R" {
            if let Some(v) = self.free() {
                return Ok(v);
            }
        }
        Err(QuiverError::UnknownLabel {
            label: label.to_string(),
            valid: self
                .vertices
                .iter()
                .map(|v| v.label.as_str())
                .collect::<Vec<_>>()
                .join(", "),
        })
    }

    /// Resolves a list of labels into a set of real vertices. Duplicates
    /// collapse.
    pub fn lookup_set<S: AsRef<str>>(&self, labels: &[S]) -> Result<VertexSet, QuiverError> {
        let mut s = VertexSet::EMPTY;
        for l in labels {
            let v = self.lookup(l.as_ref())?;
            if !self.is_real(v) {
                return Err(QuiverError::IsFormalZero(v));
            }
            s.insert(v);
        }
        Ok(s)
    }

    pub fn set_labels(&self, s: VertexSet) -> Vec<&str> {
        s.iter().map(|v| self.label(v)).collect()
    }

    /// Copy with vertex `v` renamed to `perm[v]`.
    pub fn relabel(&self, perm: &[VertexId]) -> TranslationQuiver {
        assert_eq!(perm.len(), self.len());
        let vertices = self
            .vertices
            .iter()
            .map(|v| Vertex {
                id: perm[v.id],
                ..v.clone()
            })
            .collect();
        let arrows = self.arrows().map(|(u, v, m)| (perm[u], perm[v], m));
        let tau = (0..self.len()).filter_map(|v| self.tau[v].map(|t| (perm[v], perm[t])));
        TranslationQuiver::new(self.name.clone(), self.dim, vertices, arrows, tau)
            .expect("relabeling preserves structure")
    }

    fn to_doc(&self) -> QuiverDoc {
        QuiverDoc {
            name: self.name.clone(),
            dim: self.dim,
            vertices: self.vertices.clone(),
            arrows: self
                .arrows()
                .map(|(from, to, mult)| ArrowDoc { from, to, mult })
                .collect(),
            tau: (0..self.len())
                .filter_map(|v| self.tau[v].map(|to| TauDoc { from: v, to }))
                .collect(),
        }
    }

    /// Pretty JSON quiver document in canonical order.
    pub fn emit(&self) -> String {
        serde_json::to_string_pretty(&self.to_doc()).expect("quiver serializes")
    }

    /// SHA-256 of the compact canonical document, hex encoded.
    pub fn content_hash(&self) -> String {
        let compact = serde_json::to_string(&self.to_doc()).expect("quiver serializes");
        let digest = Sha256::digest(compact.as_bytes());
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }

    /// Σ mult(u→v)·u over arrows into `v`.
    pub fn theta(&self, v: VertexId) -> Result<ModuleVector, QuiverError> {
        if v >= self.len() {
            return Err(QuiverError::UnknownVertex { context: "theta", id: v });
        }
        if !self.is_real(v) {
            return Err(QuiverError::IsFormalZero(v));
        }
        Ok(ModuleVector::from_pairs(
            self.preds[v].iter().map(|&(u, m)| (u, m as u64)),
        ))
    }
}

/// Parses a quiver document. Structural errors are reported, mesh and τ
/// axioms are left to [`validate`].
pub fn parse_quiver(text: &str) -> Result<TranslationQuiver, QuiverError> {
    let doc: QuiverDoc = serde_json::from_str(text).map_err(|e| QuiverError::Syntax {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    TranslationQuiver::new(
        doc.name,
        doc.dim,
        doc.vertices,
        doc.arrows.into_iter().map(|a| (a.from, a.to, a.mult)),
        doc.tau.into_iter().map(|t| (t.from, t.to)),
    )
}

/// Adds the formal zero vertex `0` of a curve, with τ(R) = 0 and τ(0) = R.
pub fn insert_formal_zero(q: &TranslationQuiver) -> Result<TranslationQuiver, QuiverError> {
    if q.dim != 1 {
        return Err(QuiverError::NotCurve);
    }
    if q.formal_zero().is_some() {
        return Err(QuiverError::FormalZeroPresent);
    }
    let frees: Vec<_> = (0..q.len()).filter(|&v| q.kind(v) == VertexKind::Free).collect();
    if frees.len() != 1 {
        return Err(QuiverError::FreeCount(frees.len()));
    }
    let r = frees[0];
    if q.tau(r).is_some() {
        return Err(QuiverError::FreeTauDefined);
    }
    let z = q.len();
    let mut label = "0".to_string();
    while q.vertex_by_label(&label).is_some() {
        label.push('\'');
    }
    let mut vertices = q.vertices.clone();
    vertices.push(Vertex {
        id: z,
        label,
        kind: VertexKind::FormalZero,
        rank: None,
    });
    let tau = (0..q.len())
        .filter_map(|v| q.tau(v).map(|t| (v, t)))
        .chain([(r, z), (z, r)]);
    TranslationQuiver::new(q.name.clone(), 1, vertices, q.arrows(), tau)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Violation {
    pub rule: &'static str,
    pub message: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.rule, self.message)
    }
}

/// Lists every violated quiver invariant. Empty means the ladder engine
/// accepts the quiver.
pub fn validate(q: &TranslationQuiver) -> Vec<Violation> {
    let mut out = Vec::new();
    let mut push = |rule, message: String| out.push(Violation { rule, message });

    let frees: Vec<_> = (0..q.len()).filter(|&v| q.kind(v) == VertexKind::Free).collect();
    if frees.len() != 1 {
        push(
            "free",
            format!("exactly one free vertex required, found {}", frees.len()),
        );
    }
    let zeros: Vec<_> = (0..q.len())
        .filter(|&v| q.kind(v) == VertexKind::FormalZero)
        .collect();
    if zeros.len() > 1 {
        push("formal_zero", format!("{} formal zero vertices", zeros.len()));
    }
    for &z in &zeros {
        if q.dim != 1 {
            push(
                "formal_zero",
                format!("formal zero {} in a dimension {} quiver", q.label(z), q.dim),
            );
        }
        if q.arrows().any(|(u, v, _)| u == z || v == z) {
            push(
                "formal_zero",
                format!("formal zero {} has incident arrows", q.label(z)),
            );
        }
    }

    let mut hit = vec![0usize; q.len()];
    for v in 0..q.len() {
        if let Some(t) = q.tau(v) {
            hit[t] += 1;
        }
    }
    for v in 0..q.len() {
        if hit[v] > 1 {
            push(
                "tau",
                format!("tau is not injective: {} has {} preimages", q.label(v), hit[v]),
            );
        }
    }
    for v in 0..q.len() {
        let t = q.tau(v);
        match (q.kind(v), q.dim) {
            (VertexKind::FormalZero, _) => {
                if frees.len() == 1 && t != Some(frees[0]) {
                    push("tau", format!("tau({}) must be the free vertex", q.label(v)));
                }
            }
            (VertexKind::Free, 1) => match (zeros.first(), t) {
                (None, _) => push(
                    "formal_zero",
                    "curve without formal zero vertex (insert_formal_zero)".to_string(),
                ),
                (Some(&z), t) if t != Some(z) => push(
                    "tau",
                    format!("tau({}) must be the formal zero", q.label(v)),
                ),
                _ => {}
            },
            _ => match t {
                None => push("tau", format!("tau undefined on {}", q.label(v))),
                Some(t) if !q.is_real(t) => push(
                    "tau",
                    format!("tau({}) is the formal zero but {} is not free", q.label(v), q.label(v)),
                ),
                _ => {}
            },
        }
    }

    for (u, v, m) in q.arrows() {
        let Some(t) = q.tau(v) else { continue };
        if !q.is_real(t) {
            continue;
        }
        let back = q.arrow_mult(t, u);
        if back != m {
            push(
                "mesh",
                format!(
                    "arrow {} -> {} (mult {}) needs tau({}) = {} -> {} with mult {}, found {}",
                    q.label(u),
                    q.label(v),
                    m,
                    q.label(v),
                    q.label(t),
                    q.label(u),
                    m,
                    back
                ),
            );
        }
    }

    let lens: std::collections::BTreeSet<usize> = q
        .vertices
        .iter()
        .filter_map(|v| v.rank.as_ref().map(Vec::len))
        .collect();
    if lens.len() > 1 {
        push(
            "rank",
            format!("rank vectors have differing lengths {lens:?}"),
        );
    }
    out
}
