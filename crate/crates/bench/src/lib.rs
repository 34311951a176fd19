//! Benchmarks live in `benches/kernels.rs`; run them with `cargo bench -p orbitlab-bench`.
