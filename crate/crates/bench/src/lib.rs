//! Criterion benchmarks for the core kernels; see benches/.
//!
//! Run with `cargo bench -p cloak-bench`.
