//! Inputs shared by the benchmarks.

use std::sync::Arc;

use mflab_core::experiments::{catalog_entry, Family};
use mflab_core::{Field, MatrixFactorization, SeriesRing, TruncSeries};

/// A dense series in `nvars` variables with every coefficient below `trunc` set.
pub fn dense_series(ring: &Arc<SeriesRing>, shift: usize) -> TruncSeries {
    let vars: Vec<String> = ring.vars.clone();
    let mut terms = Vec::new();
    for (i, v) in vars.iter().enumerate() {
        for e in 1..ring.trunc {
            terms.push(format!("{}*{v}^{e}", (i + e + shift) % 5 + 1));
        }
    }
    for w in vars.windows(2) {
        terms.push(format!("{}*{}", w[0], w[1]));
    }
    terms.push("1".into());
    TruncSeries::parse(&terms.join(" + "), ring).expect("well-formed series")
}

pub fn series_ring(nvars: usize, trunc: usize) -> Arc<SeriesRing> {
    let vars = ["x", "y", "z", "w"][..nvars].iter().map(|s| s.to_string()).collect();
    SeriesRing::new(Field::fp(101).expect("prime"), vars, trunc).expect("valid ring")
}

/// The factorizations of one catalog entry over F7.
pub fn catalog(family: Family, n: usize, trunc: usize) -> Vec<MatrixFactorization> {
    let field = Field::fp(7).expect("prime");
    catalog_entry(family, n, &field, trunc).expect("catalog entry").mfs
}
