//! Benchmark host crate; see `benches/hot_paths.rs`.
