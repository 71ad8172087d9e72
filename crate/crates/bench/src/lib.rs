//! Shared fixtures for the benchmarks.

use std::path::PathBuf;

use phonoblocks::lexicon::{load_dictionary, PronEntry};

pub fn data_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data")
}

/// The first `n` trainable dictionary entries, or all of them.
pub fn dictionary(n: Option<usize>) -> Vec<PronEntry> {
    let report = load_dictionary(&data_dir().join("cmudict.txt")).expect("data/cmudict.txt is readable");
    let entries = report.entries.into_iter().filter(|e| e.is_trainable());
    match n {
        Some(n) => entries.take(n).collect(),
        None => entries.collect(),
    }
}
