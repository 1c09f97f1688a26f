//! Acceptance checks for `grcim` live in `tests/acceptance.rs`.
