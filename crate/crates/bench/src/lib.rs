//! Criterion benchmarks for the routers live under `benches/`.
