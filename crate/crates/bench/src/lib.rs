//! Criterion benchmarks for the bakerweyl kernels live under `benches/`.
