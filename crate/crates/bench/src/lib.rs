//! Criterion benchmarks for `tiltpump-core`; see `benches/`.
