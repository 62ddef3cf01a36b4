//! Domain types, their JSON schemas, and the versioning rules that tie a
//! score to the exact frozen inputs that produced it.
//!
//! Everything serialized here is deterministic: maps are `BTreeMap` so key
//! order is stable, and score reports carry no timestamps. Timestamps on
//! translations and judgments are informational provenance only and never
//! participate in scoring.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::store::TranslationStore;

/// RFC 3339 timestamp for "now", UTC, second precision.
pub fn now_timestamp() -> String {
    chrono::Utc::now().format("%Y-%m-%dT%H:%M:%SZ").to_string()
}

/// Fixed timestamp used by simulated records so simulation output is
/// byte-identical across runs.
pub const EPOCH_TIMESTAMP: &str = "1970-01-01T00:00:00Z";

/// Read and deserialize a JSON file with path context on errors.
pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path.display().to_string(), e))?;
    serde_json::from_str(&text).map_err(|e| Error::parse(path.display().to_string(), e))
}

/// Serialize a value as pretty JSON (with trailing newline) and write it.
pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)
        .map_err(|e| Error::parse(path.display().to_string(), e))?;
    text.push('\n');
    std::fs::write(path, text).map_err(|e| Error::io(path.display().to_string(), e))
}

// ---------------------------------------------------------------------------
// Items
// ---------------------------------------------------------------------------

/// Translation direction of one item.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Direction {
    #[serde(rename = "en-ja")]
    EnToJa,
    #[serde(rename = "ja-en")]
    JaToEn,
}

impl Direction {
    /// Name of the language a translation of this item should be written in.
    pub fn target_language(self) -> &'static str {
        match self {
            Direction::EnToJa => "Japanese",
            Direction::JaToEn => "English",
        }
    }
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Direction::EnToJa => "en-ja",
            Direction::JaToEn => "ja-en",
        })
    }
}

/// Difficulty tier of one item.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Tier {
    Easy,
    Hard,
}

impl fmt::Display for Tier {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Tier::Easy => "easy",
            Tier::Hard => "hard",
        })
    }
}

/// One source text to be translated and judged.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Item {
    pub id: String,
    pub direction: Direction,
    pub tier: Tier,
    pub source_text: String,
}

/// An immutable collection of items; the unit a version number protects.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ItemSet {
    pub name: String,
    pub items: Vec<Item>,
}

impl ItemSet {
    pub fn load(path: &Path) -> Result<Self> {
        let set: ItemSet = read_json(path)?;
        set.validate()?;
        Ok(set)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        write_json(path, self)
    }

    /// Item ids must be unique and source texts non-empty.
    pub fn validate(&self) -> Result<()> {
        let mut seen = std::collections::BTreeSet::new();
        for item in &self.items {
            if item.id.is_empty() {
                return Err(Error::Validation("item with empty id".into()));
            }
            if !seen.insert(item.id.as_str()) {
                return Err(Error::Validation(format!("duplicate item id `{}`", item.id)));
            }
            if item.source_text.is_empty() {
                return Err(Error::Validation(format!("item `{}` has empty source_text", item.id)));
            }
        }
        Ok(())
    }

    pub fn get(&self, id: &str) -> Option<&Item> {
        self.items.iter().find(|i| i.id == id)
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    /// Number of items falling in each slice. Every item lands in Overall,
    /// one direction, one tier, and one direction-tier cell.
    pub fn slice_counts(&self) -> BTreeMap<Slice, usize> {
        let mut counts = BTreeMap::new();
        for slice in Slice::ALL {
            counts.insert(slice, 0usize);
        }
        for item in &self.items {
            for slice in Slice::ALL {
                if slice.contains(item) {
                    *counts.get_mut(&slice).unwrap() += 1;
                }
            }
        }
        counts
    }
}

// ---------------------------------------------------------------------------
// Models and decoding
// ---------------------------------------------------------------------------

/// Decoding settings a model runs with. `extra` carries provider-specific
/// knobs (top_p, reasoning effort, ...) as opaque strings.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecodingConfig {
    pub temperature: f64,
    pub max_output_tokens: u32,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub extra: BTreeMap<String, String>,
}

impl Default for DecodingConfig {
    fn default() -> Self {
        DecodingConfig { temperature: 0.0, max_output_tokens: 2048, extra: BTreeMap::new() }
    }
}

impl DecodingConfig {
    /// Canonical one-line rendering, used in cache keys and report checklists.
    pub fn fingerprint(&self) -> String {
        let mut out = format!(
            "temperature={};max_output_tokens={}",
            self.temperature, self.max_output_tokens
        );
        for (k, v) in &self.extra {
            out.push_str(&format!(";{k}={v}"));
        }
        out
    }
}

/// A model identity plus how to reach it. `endpoint` is a base URL, or the
/// literal `"frozen"` for models whose outputs are only ever read from disk.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelRef {
    pub id: String,
    pub endpoint: String,
    #[serde(default)]
    pub decoding: DecodingConfig,
}

/// Endpoint value for models that are never called.
pub const FROZEN_ENDPOINT: &str = "frozen";

impl ModelRef {
    pub fn is_frozen(&self) -> bool {
        self.endpoint == FROZEN_ENDPOINT
    }
}

/// The judge identity an anchor set is calibrated against.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct JudgeConfig {
    pub model: ModelRef,
    /// Content hash of the compare prompt template.
    pub prompt_id: String,
    pub decoding: DecodingConfig,
    pub max_retries: u32,
}

impl JudgeConfig {
    /// Judging must be deterministic: temperature is pinned to zero.
    pub fn validate(&self) -> Result<()> {
        if self.decoding.temperature != 0.0 {
            return Err(Error::Validation(format!(
                "judge temperature must be 0, got {}",
                self.decoding.temperature
            )));
        }
        if self.prompt_id.is_empty() {
            return Err(Error::Validation("judge prompt_id is empty".into()));
        }
        Ok(())
    }
}

/// Minimal judge provenance stamped on every judgment record.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct JudgeRef {
    pub model: String,
    pub prompt_id: String,
    pub temperature: f64,
}

impl From<&JudgeConfig> for JudgeRef {
    fn from(cfg: &JudgeConfig) -> Self {
        JudgeRef {
            model: cfg.model.id.clone(),
            prompt_id: cfg.prompt_id.clone(),
            temperature: cfg.decoding.temperature,
        }
    }
}

// ---------------------------------------------------------------------------
// Translations
// ---------------------------------------------------------------------------

/// One model's translation of one item. Empty `text` means the model failed
/// or refused to translate; such records still exist so coverage is total.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Translation {
    pub item_id: String,
    pub model_id: String,
    pub text: String,
    /// Informational provenance; never used in scoring.
    pub generated_at: String,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub generation_meta: BTreeMap<String, String>,
}

// ---------------------------------------------------------------------------
// Pairs and judgments
// ---------------------------------------------------------------------------

/// Which display slot the pair's left model was dealt.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ASide {
    Left,
    Right,
}

/// One scheduled comparison. `left_model` is always the lexicographically
/// smaller id, so a pair's identity is order-free; `a_side` records the
/// keyed-hash slot assignment and `seed_used` the seed that produced it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PairAssignment {
    pub item_id: String,
    pub left_model: String,
    pub right_model: String,
    pub a_side: ASide,
    pub seed_used: u64,
}

impl PairAssignment {
    /// Model shown to the judge as "Translation A".
    pub fn model_in_slot_a(&self) -> &str {
        match self.a_side {
            ASide::Left => &self.left_model,
            ASide::Right => &self.right_model,
        }
    }

    /// Model shown to the judge as "Translation B".
    pub fn model_in_slot_b(&self) -> &str {
        match self.a_side {
            ASide::Left => &self.right_model,
            ASide::Right => &self.left_model,
        }
    }

    pub fn involves(&self, model_id: &str) -> bool {
        self.left_model == model_id || self.right_model == model_id
    }

    /// Identity key used for resume/dedup.
    pub fn key(&self) -> (String, String, String) {
        (self.item_id.clone(), self.left_model.clone(), self.right_model.clone())
    }

    pub fn validate(&self) -> Result<()> {
        if self.left_model == self.right_model {
            return Err(Error::Validation(format!(
                "pair on item `{}` compares `{}` against itself",
                self.item_id, self.left_model
            )));
        }
        if self.left_model > self.right_model {
            return Err(Error::Validation(format!(
                "pair on item `{}` is not canonically ordered: `{}` > `{}`",
                self.item_id, self.left_model, self.right_model
            )));
        }
        Ok(())
    }
}

/// What the judge answered for one pair.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Verdict {
    A,
    B,
    /// The judge declined or never produced a usable answer. Excluded from
    /// aggregation; never counted as a loss for either side.
    #[serde(rename = "refused")]
    JudgeRefused,
}

/// Map a verdict back through the slot assignment to the winning model id.
pub fn winner_for(pair: &PairAssignment, verdict: Verdict) -> Option<String> {
    match verdict {
        Verdict::A => Some(pair.model_in_slot_a().to_string()),
        Verdict::B => Some(pair.model_in_slot_b().to_string()),
        Verdict::JudgeRefused => None,
    }
}

/// One judged comparison, as persisted in a judgment log.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Judgment {
    pub pair: PairAssignment,
    pub verdict: Verdict,
    /// Present iff the verdict decided the match.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub winner_model: Option<String>,
    /// Raw judge output (analysis and all), kept for auditability.
    pub analysis_text: String,
    pub input_tokens: u64,
    pub output_tokens: u64,
    /// True when token counts were estimated from byte lengths rather than
    /// reported by the endpoint.
    #[serde(default)]
    pub tokens_estimated: bool,
    pub judge: JudgeRef,
    /// Informational provenance; never used in scoring.
    pub judged_at: String,
}

impl Judgment {
    pub fn validate(&self) -> Result<()> {
        self.pair.validate()?;
        match (&self.verdict, &self.winner_model) {
            (Verdict::JudgeRefused, None) => Ok(()),
            (Verdict::JudgeRefused, Some(w)) => Err(Error::Validation(format!(
                "refused judgment on item `{}` names a winner `{w}`",
                self.pair.item_id
            ))),
            (_, None) => Err(Error::Validation(format!(
                "decided judgment on item `{}` has no winner",
                self.pair.item_id
            ))),
            (_, Some(w)) if !self.pair.involves(w) => Err(Error::Validation(format!(
                "winner `{w}` is not a side of the pair on item `{}`",
                self.pair.item_id
            ))),
            _ => Ok(()),
        }
    }

    /// The model that lost this match, if it was decided.
    pub fn loser_model(&self) -> Option<&str> {
        let winner = self.winner_model.as_deref()?;
        if winner == self.pair.left_model {
            Some(&self.pair.right_model)
        } else {
            Some(&self.pair.left_model)
        }
    }
}

// ---------------------------------------------------------------------------
// Slices
// ---------------------------------------------------------------------------

/// A reporting slice: the whole set, one direction, one tier, or one
/// direction-tier cell. Every item belongs to exactly four slices.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Slice {
    #[serde(rename = "overall")]
    Overall,
    #[serde(rename = "en-ja")]
    EnToJa,
    #[serde(rename = "ja-en")]
    JaToEn,
    #[serde(rename = "easy")]
    Easy,
    #[serde(rename = "hard")]
    Hard,
    #[serde(rename = "en-ja-easy")]
    EnToJaEasy,
    #[serde(rename = "en-ja-hard")]
    EnToJaHard,
    #[serde(rename = "ja-en-easy")]
    JaToEnEasy,
    #[serde(rename = "ja-en-hard")]
    JaToEnHard,
}

impl Slice {
    pub const ALL: [Slice; 9] = [
        Slice::Overall,
        Slice::EnToJa,
        Slice::JaToEn,
        Slice::Easy,
        Slice::Hard,
        Slice::EnToJaEasy,
        Slice::EnToJaHard,
        Slice::JaToEnEasy,
        Slice::JaToEnHard,
    ];

    pub fn contains(self, item: &Item) -> bool {
        match self {
            Slice::Overall => true,
            Slice::EnToJa => item.direction == Direction::EnToJa,
            Slice::JaToEn => item.direction == Direction::JaToEn,
            Slice::Easy => item.tier == Tier::Easy,
            Slice::Hard => item.tier == Tier::Hard,
            Slice::EnToJaEasy => item.direction == Direction::EnToJa && item.tier == Tier::Easy,
            Slice::EnToJaHard => item.direction == Direction::EnToJa && item.tier == Tier::Hard,
            Slice::JaToEnEasy => item.direction == Direction::JaToEn && item.tier == Tier::Easy,
            Slice::JaToEnHard => item.direction == Direction::JaToEn && item.tier == Tier::Hard,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Slice::Overall => "overall",
            Slice::EnToJa => "en-ja",
            Slice::JaToEn => "ja-en",
            Slice::Easy => "easy",
            Slice::Hard => "hard",
            Slice::EnToJaEasy => "en-ja-easy",
            Slice::EnToJaHard => "en-ja-hard",
            Slice::JaToEnEasy => "ja-en-easy",
            Slice::JaToEnHard => "ja-en-hard",
        }
    }
}

impl fmt::Display for Slice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Slice {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Slice::ALL
            .into_iter()
            .find(|slice| slice.as_str() == s)
            .ok_or_else(|| Error::Validation(format!("unknown slice `{s}`")))
    }
}

// ---------------------------------------------------------------------------
// Score reports
// ---------------------------------------------------------------------------

/// Scores for one slice. Optional fields are absent when the slice had no
/// decided matches to fit on.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SliceScore {
    /// Decided matches involving the candidate in this slice.
    pub matches: u64,
    /// Of those, how many the candidate won.
    pub wins: u64,
    /// Judge refusals excluded from the two counts above.
    pub excluded: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub win_rate: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub theta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lt: Option<f64>,
    /// Fitted strengths of the anchors in this slice's match graph.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub anchor_thetas: BTreeMap<String, f64>,
    /// Within-slice win rates of the anchors (over all their matches,
    /// frozen and candidate-facing alike).
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub anchor_win_rates: BTreeMap<String, f64>,
    /// Fitted LT of each anchor in this slice.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub anchor_lts: BTreeMap<String, f64>,
}

/// Reference to a raw log file backing a report.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LogRef {
    pub path: String,
    pub sha256: String,
}

/// The reproducibility checklist embedded in every report: everything a
/// reader needs to re-run or audit the evaluation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReproMeta {
    /// Frozen snapshot identifier, e.g. "baseset/v1.0.0".
    pub baseset_version: String,
    pub judge_model: String,
    pub judge_prompt_hash: String,
    pub judge_decoding: String,
    pub candidate_model: String,
    pub candidate_decoding: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub generation_prompt_hash: Option<String>,
    /// Any filtering or backfill applied to missing judgments ("none" when clean).
    pub filter_notes: String,
    /// Raw comparison logs (paths and content hashes) when available.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub logs: Vec<LogRef>,
}

/// The complete outcome of scoring one candidate against one anchor set.
/// Contains no timestamps or environment state: scoring the same inputs
/// yields byte-identical reports.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScoreReport {
    pub candidate: String,
    pub baseset_version: String,
    pub judge: JudgeConfig,
    pub per_slice: BTreeMap<Slice, SliceScore>,
    pub cost: crate::costmodel::CostEstimate,
    pub checklist: ReproMeta,
    /// False when judgments were missing or refused relative to the plan.
    pub complete: bool,
}

impl ScoreReport {
    pub fn load(path: &Path) -> Result<Self> {
        read_json(path)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        write_json(path, self)
    }

    pub fn overall(&self) -> Option<&SliceScore> {
        self.per_slice.get(&Slice::Overall)
    }
}

// ---------------------------------------------------------------------------
// Versioning
// ---------------------------------------------------------------------------

/// How two anchor-set versions relate for score-comparison purposes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum VersionRelation {
    /// Identical versions: scores comparable.
    Equal,
    /// Same major.minor, different patch: directly comparable.
    ComparablePatch,
    /// Same major, different minor: comparable only with recalibration.
    CalibratedMinor,
    /// Different major: scores must not be compared.
    IncomparableMajor,
}

/// Relate two semver strings under the anchor-set compatibility contract.
pub fn compare_versions(a: &str, b: &str) -> Result<VersionRelation> {
    let parse = |s: &str| {
        semver::Version::parse(s).map_err(|e| Error::Version(format!("`{s}` is not semver: {e}")))
    };
    let va = parse(a)?;
    let vb = parse(b)?;
    Ok(if va == vb {
        VersionRelation::Equal
    } else if va.major == vb.major && va.minor == vb.minor {
        VersionRelation::ComparablePatch
    } else if va.major == vb.major {
        VersionRelation::CalibratedMinor
    } else {
        VersionRelation::IncomparableMajor
    })
}

// ---------------------------------------------------------------------------
// Anchor sets
// ---------------------------------------------------------------------------

/// On-disk manifest of an anchor-set snapshot directory.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BasesetManifest {
    pub version: String,
    pub judge: JudgeConfig,
    pub anchors: Vec<ModelRef>,
}

/// A frozen anchor set: versioned anchors, their translations, the judge
/// configuration they were calibrated with, and the anchor-vs-anchor
/// judgments that position them relative to each other.
#[derive(Clone, Debug)]
pub struct AnchorSet {
    pub version: String,
    pub judge: JudgeConfig,
    pub anchors: Vec<ModelRef>,
    pub translations: TranslationStore,
    pub frozen_judgments: Vec<Judgment>,
}

pub const MANIFEST_FILE: &str = "manifest.json";
pub const TRANSLATIONS_FILE: &str = "translations.jsonl";
pub const JUDGMENTS_FILE: &str = "judgments.jsonl";
pub const ITEMSET_COPY_FILE: &str = "itemset.json";

impl AnchorSet {
    pub fn anchor_ids(&self) -> Vec<String> {
        self.anchors.iter().map(|a| a.id.clone()).collect()
    }

    pub fn contains_model(&self, id: &str) -> bool {
        self.anchors.iter().any(|a| a.id == id)
    }

    /// Load a snapshot directory and validate it against the item set:
    /// semver version, unique anchor ids, total translation coverage
    /// (anchors x items), and frozen judgments referencing only anchors.
    pub fn load(dir: &Path, items: &ItemSet) -> Result<Self> {
        let manifest: BasesetManifest = read_json(&dir.join(MANIFEST_FILE))?;
        semver::Version::parse(&manifest.version)
            .map_err(|e| Error::Version(format!("`{}` is not semver: {e}", manifest.version)))?;
        manifest.judge.validate()?;

        let translations = TranslationStore::load(&dir.join(TRANSLATIONS_FILE))?;
        let frozen_judgments = crate::store::read_jsonl(&dir.join(JUDGMENTS_FILE))?;

        let set = AnchorSet {
            version: manifest.version,
            judge: manifest.judge,
            anchors: manifest.anchors,
            translations,
            frozen_judgments,
        };
        set.validate(items)?;
        Ok(set)
    }

    pub fn validate(&self, items: &ItemSet) -> Result<()> {
        if self.anchors.is_empty() {
            return Err(Error::Empty("anchor set has no anchors".into()));
        }
        let mut seen = std::collections::BTreeSet::new();
        for anchor in &self.anchors {
            if !seen.insert(anchor.id.as_str()) {
                return Err(Error::Validation(format!("duplicate anchor id `{}`", anchor.id)));
            }
        }
        // Coverage must be total: every anchor translated every item.
        for anchor in &self.anchors {
            for item in &items.items {
                if self.translations.get(&item.id, &anchor.id).is_none() {
                    return Err(Error::Incomplete {
                        item_id: item.id.clone(),
                        model_id: anchor.id.clone(),
                    });
                }
            }
        }
        for judgment in &self.frozen_judgments {
            judgment.validate()?;
            for model in [&judgment.pair.left_model, &judgment.pair.right_model] {
                if !seen.contains(model.as_str()) {
                    return Err(Error::Validation(format!(
                        "frozen judgment references `{model}`, which is not an anchor"
                    )));
                }
            }
            if items.get(&judgment.pair.item_id).is_none() {
                return Err(Error::Validation(format!(
                    "frozen judgment references unknown item `{}`",
                    judgment.pair.item_id
                )));
            }
        }
        Ok(())
    }

    /// Write a snapshot directory (manifest + translations + frozen
    /// judgments + a copy of the item set so the snapshot is self-describing).
    pub fn save(&self, dir: &Path, items: &ItemSet) -> Result<()> {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir.display().to_string(), e))?;
        let manifest = BasesetManifest {
            version: self.version.clone(),
            judge: self.judge.clone(),
            anchors: self.anchors.clone(),
        };
        write_json(&dir.join(MANIFEST_FILE), &manifest)?;
        self.translations.save(&dir.join(TRANSLATIONS_FILE))?;
        crate::store::write_jsonl(&dir.join(JUDGMENTS_FILE), &self.frozen_judgments)?;
        items.save(&dir.join(ITEMSET_COPY_FILE))?;
        Ok(())
    }
}

/// Convenience wrapper matching the directory-level loading entry point.
pub fn load_anchor_set(dir: &Path, items: &ItemSet) -> Result<AnchorSet> {
    AnchorSet::load(dir, items)
}

pub fn load_item_set(path: &Path) -> Result<ItemSet> {
    ItemSet::load(path)
}
