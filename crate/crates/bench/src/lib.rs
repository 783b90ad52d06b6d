//! Criterion benchmarks (`benches/`) and the acceptance gate (`tests/acceptance.rs`) for `vissm`.
