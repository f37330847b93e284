//! Table rows D_8 to D_13. Minutes to hours each; run with
//! `cargo test --release --test long_running -- --ignored`. Each run keeps
//! a checkpoint in the system temp directory and resumes from it.

mod common;

use std::collections::BTreeMap;

use common::quiver;
use mcm_spectra::spectrum::{enumerate_spectrum, SpectrumOptions};

fn row(n: u32, hist: [u64; 5], infinite: u64) {
    let key = format!("d_curve_{n}");
    let q = quiver(&key);
    let cp = std::env::temp_dir().join(format!("mcm-spectra-{key}-{}.json", &q.content_hash()[..12]));
    let opts = SpectrumOptions {
        resume: cp.exists(),
        checkpoint: Some(cp),
        ..SpectrumOptions::default()
    };
    let r = enumerate_spectrum(&q, &opts).unwrap();
    let want: BTreeMap<u32, u64> = (1..=5).zip(hist).filter(|&(_, c)| c > 0).collect();
    assert_eq!(r.histogram, want, "{key}");
    assert_eq!(r.infinite_count, infinite, "{key}");
    assert_eq!(r.unknown_count, 0);
    assert!(r.is_complete());
}

#[test]
#[ignore = "long running"]
fn d8() {
    row(8, [7, 146, 25601, 26743, 1458], 77116);
}

#[test]
#[ignore = "long running"]
fn d9() {
    row(9, [3, 122, 12541, 9527, 382], 42960);
}

#[test]
#[ignore = "long running"]
fn d10() {
    row(10, [7, 253, 265602, 389942, 23422], 1417925);
}

#[test]
#[ignore = "long running"]
fn d11() {
    row(11, [3, 218, 130672, 146418, 6778], 764486);
}

#[test]
#[ignore = "long running"]
fn d12() {
    row(12, [7, 400, 2745634, 5449152, 353644], 25005594);
}

#[test]
#[ignore = "long running"]
fn d13() {
    row(13, [3, 352, 1352109, 2113324, 109690], 13201737);
}
