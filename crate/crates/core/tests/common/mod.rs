#![allow(dead_code)]

use std::path::PathBuf;

use lagspec::oracle::{reference_set, HpContext, OracleCache, RefKind};

/// Frozen oracle values shipped with the tests.
pub fn cache() -> OracleCache {
    OracleCache::new(PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/data/oracle"))
}

/// 24-digit reference values rounded to double, computed once and cached.
pub fn reference(alpha: f64, n: usize, kind: RefKind) -> Vec<f64> {
    let ctx = HpContext::default();
    reference_set(&ctx, alpha, n, kind, Some(&cache()))
        .expect("oracle reference")
        .as_f64()
}

pub fn rel_err(got: f64, want: f64) -> f64 {
    if want == 0.0 {
        got.abs()
    } else {
        ((got - want) / want).abs()
    }
}

pub fn max_rel_err(got: &[f64], want: &[f64]) -> f64 {
    assert_eq!(got.len(), want.len());
    got.iter().zip(want).map(|(&g, &w)| rel_err(g, w)).fold(0.0, f64::max)
}

pub fn ulps(a: f64, b: f64) -> u64 {
    if a == b {
        return 0;
    }
    if a.signum() != b.signum() {
        return u64::MAX;
    }
    (a.to_bits() as i64 - b.to_bits() as i64).unsigned_abs()
}
