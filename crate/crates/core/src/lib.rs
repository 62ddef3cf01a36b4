//! Anchored pairwise translation evaluation.
//!
//! A candidate model is scored by translating a fixed item set, having an
//! LLM judge compare each translation against every model in a *frozen,
//! versioned anchor set*, fitting a penalized Bradley-Terry model over the
//! resulting match graph, and reporting win rates plus normalized 0-10 LT
//! scores — overall and per direction/difficulty slice.
//!
//! Design commitments, enforced throughout:
//!
//! - **Determinism**: slot assignment and simulation draws are keyed
//!   hashes, serialized maps are ordered, reports carry no timestamps.
//!   Same inputs, same bytes.
//! - **Isolation**: candidates are scored one at a time against the frozen
//!   anchors; scores never depend on which other candidates exist.
//! - **Resumability**: generation and judging are append-and-skip; any run
//!   can be interrupted and re-run without repeating paid work.
//! - **Honest degradation**: endpoint failures become empty translations
//!   (which lose by rule) or judge refusals (which are excluded), both
//!   visible in the report, neither fatal.

pub mod aggregate;
pub mod costmodel;
pub mod datamodel;
pub mod error;
pub mod hashing;
pub mod inference;
pub mod judge;
pub mod pairing;
pub mod report;
pub mod simjudge;
pub mod store;

pub use error::{Error, Result};

/// The bundled demonstration item set (70 items across both directions and
/// both difficulty tiers).
pub const SAMPLE_ITEMSET_JSON: &str = include_str!("../data/sample_itemset.json");

/// Parse the bundled demonstration item set.
pub fn sample_item_set() -> datamodel::ItemSet {
    let set: datamodel::ItemSet =
        serde_json::from_str(SAMPLE_ITEMSET_JSON).expect("bundled item set parses");
    set.validate().expect("bundled item set is valid");
    set
}
