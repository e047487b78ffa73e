//! Criterion benchmarks for the solvers live under `benches/`; this crate
//! exports nothing.
