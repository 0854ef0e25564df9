//! Benchmark-only crate; see `benches/pairing.rs`.
