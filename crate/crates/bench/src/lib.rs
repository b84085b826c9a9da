//! Benchmarks for heun-core live in `benches/`.
