//! Benchmark-only crate; the measurements live in `benches/toolchain.rs`.
