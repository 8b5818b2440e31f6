//! Criterion benchmarks for the esqkd kernels live in `benches/`.
