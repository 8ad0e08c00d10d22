//! Criterion benchmarks for `lhv-core`; see `benches/`.
