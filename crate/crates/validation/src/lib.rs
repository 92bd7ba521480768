//! Acceptance suite for `iga-dispersion`; see `tests/acceptance.rs`.
