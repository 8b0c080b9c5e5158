//! Criterion benchmarks for `bergman-core`; see `benches/`.
