//! Criterion benchmarks for polybm live under `benches/`.
