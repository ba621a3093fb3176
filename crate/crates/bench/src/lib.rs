//! Criterion benchmarks for `nongauss`; see `benches/`.
