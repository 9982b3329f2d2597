//! Home of the `acceptance` integration test target. The crate itself
//! exports nothing; see `tests/acceptance.rs`.
