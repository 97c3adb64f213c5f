//! Criterion benchmarks for diffscat live under `benches/`.
