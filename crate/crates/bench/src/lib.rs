//! Criterion benchmarks for the hardylab kernels live under `benches/`.
