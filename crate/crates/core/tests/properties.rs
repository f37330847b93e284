mod common;

use common::quiver;
use mcm_spectra::catalog::sample_entries;
use mcm_spectra::ladder::{knit, knit_traced, KnitError, Status, DEFAULT_MAX_LEVELS};
use mcm_spectra::spectrum::{checkpoint_read, enumerate_spectrum, spectrum_support, SpectrumError, SpectrumOptions};
use mcm_spectra::{parse_quiver, validate, VertexSet};
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig { cases: 64, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn emit_parse_round_trip(i in 0usize..30, seed in any::<u64>()) {
        let entries = sample_entries();
        let q = &entries[i % entries.len()].quiver;
        let mut perm: Vec<usize> = (0..q.len()).collect();
        // Cheap deterministic shuffle.
        let mut s = seed | 1;
        for k in (1..perm.len()).rev() {
            s ^= s << 13;
            s ^= s >> 7;
            s ^= s << 17;
            perm.swap(k, (s % (k as u64 + 1)) as usize);
        }
        let p = q.relabel(&perm);
        let back = parse_quiver(&p.emit()).unwrap();
        prop_assert_eq!(back.emit(), p.emit());
        prop_assert_eq!(back.content_hash(), p.content_hash());
        prop_assert!(validate(&back).is_empty());
    }

    #[test]
    fn approximations_are_rank_additive(mask in 0u64..(1 << 15), t in 0usize..15) {
        // With R in S every approximation C → X is onto up to finite length,
        // so rk C = rk K + rk X.
        let q = quiver("e7_curve");
        let real = q.real_vertices();
        let mut s = VertexSet::from_ids(real.iter().enumerate().filter(|(b, _)| mask >> b & 1 == 1).map(|(_, &v)| v));
        s.insert(q.free().unwrap());
        let x = real[t];
        let a = knit(&q, x, s, DEFAULT_MAX_LEVELS).unwrap();
        let rk = |v: &mcm_spectra::ModuleVector| {
            let mut r = common::rank(&q, v).unwrap();
            r.resize(2, 0);
            r
        };
        let (c, k) = (rk(&a.middle), rk(&a.kernel));
        let rx = q.vertex(x).rank.clone().unwrap();
        for i in 0..2 {
            prop_assert_eq!(c[i], k[i] + rx[i] as i64);
        }
        prop_assert!(a.middle.support().is_subset(s));
    }
}

#[test]
fn trace_levels_classify_in_order() {
    let q = quiver("e6_curve");
    let s = q.lookup_set(&["R", "M1", "B"]).unwrap();
    let (a, levels) = knit_traced(&q, q.lookup("N1").unwrap(), s, DEFAULT_MAX_LEVELS).unwrap();
    assert_eq!(levels[0].entries.values().next().unwrap().status, Status::Initial);
    assert_eq!(levels.len(), a.levels_used + 1);
    for l in &levels[1..] {
        for e in l.entries.values() {
            if e.raw < 0 {
                assert_eq!(e.status, Status::Negative);
            }
        }
    }
}

#[test]
fn knit_budget_keeps_partial_result() {
    let q = quiver("e6_curve");
    let s = q.lookup_set(&["R", "M1", "B"]).unwrap();
    match knit(&q, q.lookup("N1").unwrap(), s, 3) {
        Err(KnitError::BudgetExhausted { budget, partial }) => {
            assert_eq!(budget, 3);
            assert_eq!(partial.levels_used, 3);
        }
        other => panic!("{other:?}"),
    }
    assert_eq!(knit(&q, 0, VertexSet::EMPTY, 10), Err(KnitError::EmptySet));
}

#[test]
fn incomplete_and_corrupt_checkpoints() {
    let q = quiver("e6_curve");
    let dir = tempfile::tempdir().unwrap();
    let cp = dir.path().join("cp.json");
    let part = enumerate_spectrum(
        &q,
        &SpectrumOptions {
            range: Some((1, 40)),
            checkpoint: Some(cp.clone()),
            ..SpectrumOptions::default()
        },
    )
    .unwrap();
    assert!(matches!(spectrum_support(&part), Err(SpectrumError::Incomplete { done: 39, total: 127 })));
    assert_eq!(checkpoint_read(&cp, &q).unwrap(), part);

    let other = quiver("d_curve_4");
    assert!(matches!(checkpoint_read(&cp, &other), Err(SpectrumError::QuiverMismatch { .. })));

    let mut doc: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&cp).unwrap()).unwrap();
    doc["infinite_count"] = (doc["infinite_count"].as_u64().unwrap() + 1).into();
    std::fs::write(&cp, doc.to_string()).unwrap();
    assert!(matches!(checkpoint_read(&cp, &q), Err(SpectrumError::Corrupt(_))));

    std::fs::write(&cp, "{ not json").unwrap();
    assert!(matches!(checkpoint_read(&cp, &q), Err(SpectrumError::Corrupt(_))));

    let bad = enumerate_spectrum(&q, &SpectrumOptions { range: Some((0, 10)), ..SpectrumOptions::default() });
    assert!(matches!(bad, Err(SpectrumError::BadRange(_))));
}
