//! End-to-end acceptance checks for `ndsort`; see `tests/acceptance.rs`.
