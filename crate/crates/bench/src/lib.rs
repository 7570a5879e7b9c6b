//! Benchmark fixtures live in `benches/`; run them with `cargo bench -p hocc-bench`.
