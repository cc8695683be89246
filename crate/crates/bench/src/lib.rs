//! Criterion benchmarks for the hot paths live under `benches/`.
