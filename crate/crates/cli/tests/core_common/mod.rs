//! The core crate's test helpers: prompt scenarios, round-trip generators,
//! the parser fixture corpus and its naive reference parser.
#![allow(dead_code)]

use std::path::PathBuf;

#[path = "../../../core/tests/common/fixtures.rs"]
pub mod fixtures;
#[path = "../../../core/tests/common/reference.rs"]
pub mod reference;
#[path = "../../../core/tests/common/roundtrip.rs"]
pub mod roundtrip;
#[path = "../../../core/tests/common/scenarios.rs"]
pub mod scenarios;

pub fn core_tests_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../core/tests")
}
