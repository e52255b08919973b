//! Criterion benchmarks for the topoforge pipeline live in `benches/`.
