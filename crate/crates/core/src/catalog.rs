//! Built-in quivers: the A_n curve families, cyclic quotient surfaces, and
//! shipped fixtures for the D_n and E_{6,7,8} curves and the binary dihedral
//! surfaces D_{5,3} and D_{7,5}.

use thiserror::Error;

use crate::quiver::{
    insert_formal_zero, parse_quiver, QuiverError, TranslationQuiver, Vertex, VertexKind,
};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum CatalogError {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("unknown catalog key {key:?}; try `catalog list`")]
    UnknownKey { key: String },
    #[error("fixture {key}: {source}")]
    Fixture {
        key: String,
        #[source]
        source: QuiverError,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Family {
    AEven,
    AOdd,
    DCurve,
    ECurve,
    CyclicSurface,
    DihedralSurface,
}

#[derive(Clone, Debug)]
pub struct CatalogEntry {
    pub key: String,
    pub family: Family,
    pub params: Vec<u32>,
    pub quiver: TranslationQuiver,
}

macro_rules! fixtures {
    ($($key:literal),* $(,)?) => {
        &[$(($key, include_str!(concat!("../data/", $key, ".json")))),*]
    };
}

static FIXTURES: &[(&str, &str)] = fixtures![
    "d_curve_4",
    "d_curve_5",
    "d_curve_6",
    "d_curve_7",
    "d_curve_8",
    "d_curve_9",
    "d_curve_10",
    "d_curve_11",
    "d_curve_12",
    "d_curve_13",
    "e6_curve",
    "e7_curve",
    "e8_curve",
    "d53_surface",
    "d75_surface",
];

pub fn fixture_keys() -> impl Iterator<Item = &'static str> {
    FIXTURES.iter().map(|(k, _)| *k)
}

/// Accepts `name(a,b)` as a spelling of `name_a_b`.
fn normalize_key(key: &str) -> String {
    let key = key.trim();
    match key.strip_suffix(')').and_then(|k| k.split_once('(')) {
        Some((head, args)) => {
            let mut out = head.to_string();
            for a in args.split(',') {
                out.push('_');
                out.push_str(a.trim());
            }
            out
        }
        None => key.to_string(),
    }
}

/// Raw shipped document for a fixture key, before the formal zero is added.
pub fn fixture_document(key: &str) -> Option<&'static str> {
    let key = normalize_key(key);
    FIXTURES.iter().find(|(k, _)| *k == key).map(|(_, d)| *d)
}

/// Loads a shipped fixture; curves come back with the formal zero inserted.
pub fn load_fixture(key: &str) -> Result<TranslationQuiver, CatalogError> {
    let norm = normalize_key(key);
    let doc = fixture_document(&norm).ok_or_else(|| CatalogError::UnknownKey {
        key: key.to_string(),
    })?;
    let wrap = |source| CatalogError::Fixture {
        key: norm.clone(),
        source,
    };
    let q = parse_quiver(doc).map_err(wrap)?;
    if q.dim() == 1 {
        insert_formal_zero(&q).map_err(wrap)
    } else {
        Ok(q)
    }
}

fn vertex(id: usize, label: impl Into<String>, kind: VertexKind) -> Vertex {
    Vertex {
        id,
        label: label.into(),
        kind,
        rank: None,
    }
}

fn chain(k: usize) -> (Vec<Vertex>, Vec<(usize, usize, u32)>) {
    let vertices = (0..=k)
        .map(|l| {
            let kind = if l == 0 { VertexKind::Free } else { VertexKind::Nonfree };
            vertex(l, format!("I{l}"), kind)
        })
        .collect();
    let arrows = (0..k).flat_map(|l| [(l, l + 1, 1), (l + 1, l, 1)]).collect();
    (vertices, arrows)
}

/// A_{2k} curve (y² + x^{2k+1}): I_0 = R, …, I_k, loop at I_k.
pub fn a_even_curve(k: u32) -> Result<TranslationQuiver, CatalogError> {
    if k < 1 {
        return Err(CatalogError::InvalidParams(
            "a_even_curve needs k >= 1 (k = 0 is regular)".into(),
        ));
    }
    let k = k as usize;
    let (vertices, mut arrows) = chain(k);
    arrows.push((k, k, 1));
    let tau = (1..=k).map(|l| (l, l));
    let q = TranslationQuiver::new(format!("A{} curve", 2 * k), 1, vertices, arrows, tau)
        .expect("generated quiver is well formed");
    Ok(insert_formal_zero(&q).expect("curve without zero"))
}

/// A_{2k+1} curve (y² + x^{2k+2}): I_0 = R, …, I_k and the branches D±.
pub fn a_odd_curve(k: u32) -> Result<TranslationQuiver, CatalogError> {
    let k = k as usize;
    let (mut vertices, mut arrows) = chain(k);
    let (dp, dm) = (k + 1, k + 2);
    vertices.push(vertex(dp, "D+", VertexKind::Nonfree));
    vertices.push(vertex(dm, "D-", VertexKind::Nonfree));
    for d in [dp, dm] {
        arrows.push((k, d, 1));
        arrows.push((d, k, 1));
    }
    let tau = (1..=k).map(|l| (l, l)).chain([(dp, dm), (dm, dp)]);
    let q = TranslationQuiver::new(format!("A{} curve", 2 * k + 1), 1, vertices, arrows, tau)
        .expect("generated quiver is well formed");
    Ok(insert_formal_zero(&q).expect("curve without zero"))
}

fn gcd(a: u32, b: u32) -> u32 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Cyclic quotient surface C_{n,q}: arrows i → i+1 and i → i+q, τ(i) = i−(1+q).
pub fn cyclic_surface(n: u32, q: u32) -> Result<TranslationQuiver, CatalogError> {
    if n < 2 || q < 1 || q >= n {
        return Err(CatalogError::InvalidParams(format!(
            "cyclic_surface needs 1 <= q < n, got n={n}, q={q}"
        )));
    }
    if gcd(n, q) != 1 {
        return Err(CatalogError::InvalidParams(format!(
            "q={q} is not coprime to n={n}"
        )));
    }
    let nn = n as usize;
    let qq = q as usize;
    let vertices = (0..nn)
        .map(|i| {
            let kind = if i == 0 { VertexKind::Free } else { VertexKind::Nonfree };
            vertex(i, i.to_string(), kind)
        })
        .collect();
    let arrows = (0..nn).flat_map(|i| [(i, (i + 1) % nn, 1), (i, (i + qq) % nn, 1)]);
    let tau = (0..nn).map(|i| (i, (i + 2 * nn - 1 - qq) % nn));
    Ok(
        TranslationQuiver::new(format!("C({n},{q}) surface"), 2, vertices, arrows, tau)
            .expect("generated quiver is well formed"),
    )
}

fn parse_params(rest: &str, count: usize, key: &str) -> Result<Vec<u32>, CatalogError> {
    let parts: Vec<_> = rest.split('_').collect();
    let bad = || CatalogError::InvalidParams(format!("cannot read parameters of {key:?}"));
    if parts.len() != count {
        return Err(bad());
    }
    parts.iter().map(|p| p.parse().map_err(|_| bad())).collect()
}

/// Resolves any catalog key: fixtures plus `a_even_curve_K`,
/// `a_odd_curve_K` and `cyclic_surface_N_Q` (parenthesised forms allowed).
pub fn lookup(key: &str) -> Result<CatalogEntry, CatalogError> {
    let norm = normalize_key(key);
    let entry = |family, params: Vec<u32>, quiver| CatalogEntry {
        key: norm.clone(),
        family,
        params,
        quiver,
    };
    if let Some(rest) = norm.strip_prefix("a_even_curve_") {
        let p = parse_params(rest, 1, key)?;
        return Ok(entry(Family::AEven, p.clone(), a_even_curve(p[0])?));
    }
    if let Some(rest) = norm.strip_prefix("a_odd_curve_") {
        let p = parse_params(rest, 1, key)?;
        return Ok(entry(Family::AOdd, p.clone(), a_odd_curve(p[0])?));
    }
    if let Some(rest) = norm.strip_prefix("cyclic_surface_") {
        let p = parse_params(rest, 2, key)?;
        return Ok(entry(Family::CyclicSurface, p.clone(), cyclic_surface(p[0], p[1])?));
    }
    let quiver = load_fixture(&norm)?;
    let (family, params) = match norm.as_str() {
        "e6_curve" => (Family::ECurve, vec![6]),
        "e7_curve" => (Family::ECurve, vec![7]),
        "e8_curve" => (Family::ECurve, vec![8]),
        "d53_surface" => (Family::DihedralSurface, vec![5, 3]),
        "d75_surface" => (Family::DihedralSurface, vec![7, 5]),
        other => {
            let n = other.trim_start_matches("d_curve_").parse().unwrap_or(0);
            (Family::DCurve, vec![n])
        }
    };
    Ok(entry(family, params, quiver))
}

/// Keys shown by `catalog list`.
pub fn list() -> Vec<String> {
    let mut keys: Vec<String> = fixture_keys().map(str::to_string).collect();
    keys.push("a_even_curve_K   (K >= 1)".into());
    keys.push("a_odd_curve_K    (K >= 0)".into());
    keys.push("cyclic_surface_N_Q   (1 <= Q < N, gcd(N, Q) = 1)".into());
    keys
}

/// Every fixture plus small members of the generated families. Used by the
/// property suites.
pub fn sample_entries() -> Vec<CatalogEntry> {
    let mut keys: Vec<String> = fixture_keys().map(str::to_string).collect();
    keys.extend((1..=4).map(|k| format!("a_even_curve_{k}")));
    keys.extend((0..=4).map(|k| format!("a_odd_curve_{k}")));
    keys.extend(["cyclic_surface_8_5", "cyclic_surface_16_9", "cyclic_surface_5_1", "cyclic_surface_7_3"].map(String::from));
    keys.iter()
        .map(|k| lookup(k).expect("sample key resolves"))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quiver::validate;

    #[test]
    fn every_sample_validates() {
        for e in sample_entries() {
            let v = validate(&e.quiver);
            assert!(v.is_empty(), "{}: {:?}", e.key, v);
        }
    }

    #[test]
    fn cyclic_8_5_shape() {
        let q = cyclic_surface(8, 5).unwrap();
        assert_eq!(q.tau(0), Some(2));
        assert_eq!(q.arrow_mult(0, 1), 1);
        assert_eq!(q.arrow_mult(0, 5), 1);
        assert!(cyclic_surface(8, 4).is_err());
        assert_eq!(cyclic_surface(5, 1).unwrap().arrow_mult(0, 1), 2);
    }

    #[test]
    fn a_family_shapes() {
        let q = a_even_curve(1).unwrap();
        assert_eq!(q.real_vertices().len(), 2);
        assert_eq!(q.arrows().count(), 3);
        assert!(a_even_curve(0).is_err());
        let q = a_odd_curve(0).unwrap();
        let labels: Vec<_> = q.real_vertices().iter().map(|&v| q.label(v).to_string()).collect();
        assert_eq!(labels, ["I0", "D+", "D-"]);
    }

    #[test]
    fn fixture_sizes() {
        let real = |k: &str| load_fixture(k).unwrap().real_vertices().len();
        assert_eq!(real("e6_curve"), 7);
        assert_eq!(real("e7_curve"), 15);
        assert_eq!(real("e8_curve"), 17);
        assert_eq!(real("d53_surface"), 12);
        assert_eq!(real("d75_surface"), 16);
        for n in 4..=13 {
            let expect = if n % 2 == 0 { 2 * n + 1 } else { 2 * n - 2 };
            assert_eq!(real(&format!("d_curve({n})")), expect, "D{n}");
        }
        assert!(matches!(load_fixture("e9_curve"), Err(CatalogError::UnknownKey { .. })));
    }

    #[test]
    fn e6_labels() {
        let q = load_fixture("e6_curve").unwrap();
        let labels: Vec<_> = q.real_vertices().iter().map(|&v| q.label(v)).collect();
        assert_eq!(labels, ["R", "M1", "N1", "A", "B", "X", "M2"]);
    }

    #[test]
    fn shipped_multiplicities_are_one() {
        for k in fixture_keys() {
            let q = load_fixture(k).unwrap();
            assert!(q.arrows().all(|(_, _, m)| m == 1), "{k}");
        }
    }
}
