//! Criterion benchmarks for `fracbvp`; see `benches/`.
