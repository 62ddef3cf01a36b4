//! Pair-plan construction: which comparisons run, and who sits in slot A.
//!
//! A plan is the full cross product of items and anchors for one candidate.
//! Slot assignment is a pure function of (seed, item, model pair) — see
//! [`crate::hashing`] — so plans are reproducible record-for-record no
//! matter how or where they are built.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::datamodel::{read_json, write_json, ASide, AnchorSet, Item, ItemSet, ModelRef, PairAssignment, Slice};
use crate::error::{Error, Result};
use crate::hashing;

/// A persisted pairing decision: scoring reads assignments from here (or
/// from the judgments that embed them) rather than re-deriving.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PairPlan {
    pub candidate: String,
    pub baseset_version: String,
    pub seed: u64,
    pub pairs: Vec<PairAssignment>,
}

impl PairPlan {
    pub fn load(path: &Path) -> Result<Self> {
        read_json(path)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        write_json(path, self)
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }
}

/// Construct the candidate-vs-anchor plan: every item crossed with every
/// anchor, in canonical (item_id, anchor_id) order, with keyed-hash slot
/// assignment derived from `seed`.
pub fn build_pair_plan(
    items: &ItemSet,
    anchors: &AnchorSet,
    candidate: &ModelRef,
    seed: u64,
) -> Result<PairPlan> {
    if items.is_empty() {
        return Err(Error::Empty("item set has no items".into()));
    }
    if anchors.anchors.is_empty() {
        return Err(Error::Empty("anchor set has no anchors".into()));
    }
    if anchors.contains_model(&candidate.id) {
        return Err(Error::Conflict(format!(
            "candidate `{}` is already an anchor in baseset v{}",
            candidate.id, anchors.version
        )));
    }

    let mut item_ids: Vec<&str> = items.items.iter().map(|i| i.id.as_str()).collect();
    item_ids.sort_unstable();
    let mut anchor_ids: Vec<&str> = anchors.anchors.iter().map(|a| a.id.as_str()).collect();
    anchor_ids.sort_unstable();

    let mut pairs = Vec::with_capacity(item_ids.len() * anchor_ids.len());
    for item_id in &item_ids {
        for anchor_id in &anchor_ids {
            pairs.push(assign_pair(seed, item_id, &candidate.id, anchor_id));
        }
    }
    Ok(PairPlan {
        candidate: candidate.id.clone(),
        baseset_version: anchors.version.clone(),
        seed,
        pairs,
    })
}

/// Build one canonical pair assignment. The pair's left model is always the
/// lexicographically smaller id; the keyed hash decides which side lands in
/// display slot A.
pub fn assign_pair(seed: u64, item_id: &str, model_a: &str, model_b: &str) -> PairAssignment {
    let (left, right) = if model_a <= model_b { (model_a, model_b) } else { (model_b, model_a) };
    let a_side = if hashing::side_draw_left_is_a(seed, item_id, left, right) {
        ASide::Left
    } else {
        ASide::Right
    };
    PairAssignment {
        item_id: item_id.to_string(),
        left_model: left.to_string(),
        right_model: right.to_string(),
        a_side,
        seed_used: seed,
    }
}

/// The four slices an item belongs to: overall, its direction, its tier,
/// and its direction-tier cell.
pub fn slice_of(item: &Item) -> [Slice; 4] {
    let direction = match item.direction {
        crate::datamodel::Direction::EnToJa => Slice::EnToJa,
        crate::datamodel::Direction::JaToEn => Slice::JaToEn,
    };
    let tier = match item.tier {
        crate::datamodel::Tier::Easy => Slice::Easy,
        crate::datamodel::Tier::Hard => Slice::Hard,
    };
    let cell = match (item.direction, item.tier) {
        (crate::datamodel::Direction::EnToJa, crate::datamodel::Tier::Easy) => Slice::EnToJaEasy,
        (crate::datamodel::Direction::EnToJa, crate::datamodel::Tier::Hard) => Slice::EnToJaHard,
        (crate::datamodel::Direction::JaToEn, crate::datamodel::Tier::Easy) => Slice::JaToEnEasy,
        (crate::datamodel::Direction::JaToEn, crate::datamodel::Tier::Hard) => Slice::JaToEnHard,
    };
    [Slice::Overall, direction, tier, cell]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::datamodel::{DecodingConfig, Direction, JudgeConfig, Tier};
    use crate::store::TranslationStore;

    fn model(id: &str) -> ModelRef {
        ModelRef { id: id.into(), endpoint: "frozen".into(), decoding: DecodingConfig::default() }
    }

    fn judge_config() -> JudgeConfig {
        JudgeConfig {
            model: model("judge"),
            prompt_id: "deadbeef".into(),
            decoding: DecodingConfig::default(),
            max_retries: 3,
        }
    }

    fn item_set(n: usize) -> ItemSet {
        let items = (0..n)
            .map(|i| Item {
                id: format!("item-{i:03}"),
                direction: if i % 2 == 0 { Direction::EnToJa } else { Direction::JaToEn },
                tier: if i % 3 == 0 { Tier::Hard } else { Tier::Easy },
                source_text: format!("source {i}"),
            })
            .collect();
        ItemSet { name: "test".into(), items }
    }

    fn anchor_set(items: &ItemSet, anchor_ids: &[&str]) -> AnchorSet {
        let mut translations = TranslationStore::in_memory();
        for item in &items.items {
            for id in anchor_ids {
                translations.insert(crate::datamodel::Translation {
                    item_id: item.id.clone(),
                    model_id: id.to_string(),
                    text: format!("{id} on {}", item.id),
                    generated_at: crate::datamodel::EPOCH_TIMESTAMP.into(),
                    generation_meta: Default::default(),
                });
            }
        }
        AnchorSet {
            version: "1.0.0".into(),
            judge: judge_config(),
            anchors: anchor_ids.iter().map(|id| model(id)).collect(),
            translations,
            frozen_judgments: Vec::new(),
        }
    }

    #[test]
    fn plan_is_full_cross_product_in_canonical_order() {
        let items = item_set(70);
        let anchor_ids: Vec<String> = (0..20).map(|i| format!("anchor-{i:02}")).collect();
        let refs: Vec<&str> = anchor_ids.iter().map(String::as_str).collect();
        let anchors = anchor_set(&items, &refs);
        let plan = build_pair_plan(&items, &anchors, &model("candidate"), 42).unwrap();
        assert_eq!(plan.len(), 1400);

        let mut keys: Vec<(String, String)> = plan
            .pairs
            .iter()
            .map(|p| {
                let anchor = if p.left_model == "candidate" { &p.right_model } else { &p.left_model };
                (p.item_id.clone(), anchor.clone())
            })
            .collect();
        let sorted = {
            let mut s = keys.clone();
            s.sort();
            s
        };
        assert_eq!(keys, sorted, "plan not in canonical (item, anchor) order");
        keys.dedup();
        assert_eq!(keys.len(), 1400, "duplicate pairs in plan");
    }

    #[test]
    fn plan_is_deterministic_and_serialization_stable() {
        let items = item_set(10);
        let anchors = anchor_set(&items, &["a1", "a2", "a3"]);
        let p1 = build_pair_plan(&items, &anchors, &model("cand"), 7).unwrap();
        let p2 = build_pair_plan(&items, &anchors, &model("cand"), 7).unwrap();
        assert_eq!(p1, p2);
        assert_eq!(serde_json::to_string(&p1).unwrap(), serde_json::to_string(&p2).unwrap());
    }

    #[test]
    fn single_pair_assignment_is_deterministic() {
        let a = assign_pair(42, "item-x", "cand", "anchor");
        let b = assign_pair(42, "item-x", "anchor", "cand");
        assert_eq!(a, b, "argument order leaked into assignment");
        assert_eq!(a.left_model, "anchor");
        assert_eq!(a.right_model, "cand");
    }

    #[test]
    fn side_balance_is_plausible_over_1400_pairs() {
        let items = item_set(70);
        let anchor_ids: Vec<String> = (0..20).map(|i| format!("anchor-{i:02}")).collect();
        let refs: Vec<&str> = anchor_ids.iter().map(String::as_str).collect();
        let anchors = anchor_set(&items, &refs);
        let plan = build_pair_plan(&items, &anchors, &model("candidate"), 42).unwrap();
        let candidate_in_a = plan
            .pairs
            .iter()
            .filter(|p| p.model_in_slot_a() == "candidate")
            .count();
        // 99.99% central interval for Binomial(1400, 0.5) is [627, 773].
        assert!(
            (627..=773).contains(&candidate_in_a),
            "candidate landed in slot A {candidate_in_a}/1400 times"
        );
    }

    #[test]
    fn per_seed_balance_holds_for_200_items() {
        // 99.99% central interval for Binomial(200, 0.5) is [73, 127].
        for seed in [0u64, 1, 42, 1337] {
            let left_in_a = (0..200)
                .filter(|i| {
                    assign_pair(seed, &format!("item-{i}"), "m-left", "m-right").a_side == ASide::Left
                })
                .count();
            assert!(
                (73..=127).contains(&left_in_a),
                "seed {seed}: left model in slot A {left_in_a}/200 times"
            );
        }
    }

    #[test]
    fn candidate_already_an_anchor_is_a_conflict() {
        let items = item_set(4);
        let anchors = anchor_set(&items, &["a1", "a2"]);
        let err = build_pair_plan(&items, &anchors, &model("a1"), 42).unwrap_err();
        assert!(matches!(err, Error::Conflict(_)));
    }

    #[test]
    fn empty_inputs_are_rejected() {
        let items = item_set(0);
        let full_items = item_set(3);
        let anchors = anchor_set(&full_items, &["a1"]);
        assert!(matches!(
            build_pair_plan(&items, &anchors, &model("c"), 1),
            Err(Error::Empty(_))
        ));
    }

    #[test]
    fn stored_a_side_rederives_from_seed() {
        let items = item_set(30);
        let anchors = anchor_set(&items, &["a1", "a2", "a3", "a4"]);
        let plan = build_pair_plan(&items, &anchors, &model("cand"), 99).unwrap();
        for pair in &plan.pairs {
            let rederived = assign_pair(pair.seed_used, &pair.item_id, &pair.left_model, &pair.right_model);
            assert_eq!(&rederived, pair);
        }
    }

    #[test]
    fn slice_of_returns_the_four_owning_slices() {
        let item = Item {
            id: "x".into(),
            direction: Direction::JaToEn,
            tier: Tier::Hard,
            source_text: "s".into(),
        };
        assert_eq!(
            slice_of(&item),
            [Slice::Overall, Slice::JaToEn, Slice::Hard, Slice::JaToEnHard]
        );
    }
}
