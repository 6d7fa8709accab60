//! Criterion benchmarks for the transform and inequality kernels; see `benches/`.
