//! Simulated judge for end-to-end testing without network access.
//!
//! Judgments are drawn from the same model family the aggregator assumes:
//! given true strengths, slot A wins with probability
//! `sigma((theta_A - theta_B) / noise_temperature) + position_bias`
//! (clamped to [0, 1]). Draws come from the keyed-hash generator in
//! [`crate::hashing`], so a simulated run is a pure function of its config
//! and plan — identical inputs produce byte-identical logs.

use std::collections::BTreeMap;
use std::path::Path;
use std::sync::atomic::{AtomicU64, Ordering};

use serde::{Deserialize, Serialize};

use crate::aggregate::logistic;
use crate::datamodel::{
    read_json, winner_for, AnchorSet, DecodingConfig, Item, ItemSet, JudgeConfig, JudgeRef,
    Judgment, ModelRef, PairAssignment, Translation, Verdict, EPOCH_TIMESTAMP, FROZEN_ENDPOINT,
};
use crate::error::{Error, Result};
use crate::hashing::unit_draw;
use crate::judge::{compare_prompt_id, PairJudge};
use crate::pairing::assign_pair;
use crate::store::TranslationStore;

/// Model id stamped on simulated judgments.
pub const SIM_JUDGE_ID: &str = "simulated/keyed-hash";

fn default_noise_temperature() -> f64 {
    1.0
}
fn default_sim_input_tokens() -> u64 {
    2626
}
fn default_sim_output_tokens() -> u64 {
    1567
}

/// Configuration of the simulated world: true strengths, judge imperfection
/// knobs, and the seed every keyed-hash draw derives from.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    /// True strength of each model the simulation may be asked about.
    pub true_theta: BTreeMap<String, f64>,
    /// Additive probability bonus for whichever model sits in slot A;
    /// models a position-biased judge. Must be in [0, 0.5].
    #[serde(default)]
    pub position_bias: f64,
    /// Softens (>1) or sharpens (<1) the strength-difference curve;
    /// models a noisy judge. Must be positive.
    #[serde(default = "default_noise_temperature")]
    pub noise_temperature: f64,
    #[serde(default)]
    pub rng_seed: u64,
    /// Synthetic per-judgment token footprint, so simulated runs exercise
    /// the cost pipeline at realistic magnitudes.
    #[serde(default = "default_sim_input_tokens")]
    pub sim_input_tokens: u64,
    #[serde(default = "default_sim_output_tokens")]
    pub sim_output_tokens: u64,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            true_theta: BTreeMap::new(),
            position_bias: 0.0,
            noise_temperature: default_noise_temperature(),
            rng_seed: 42,
            sim_input_tokens: default_sim_input_tokens(),
            sim_output_tokens: default_sim_output_tokens(),
        }
    }
}

impl SimConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let config: SimConfig = read_json(path)?;
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..=0.5).contains(&self.position_bias) {
            return Err(Error::Config(format!(
                "position_bias must be in [0, 0.5], got {}",
                self.position_bias
            )));
        }
        if !(self.noise_temperature > 0.0) {
            return Err(Error::Config(format!(
                "noise_temperature must be positive, got {}",
                self.noise_temperature
            )));
        }
        Ok(())
    }

    fn theta(&self, model: &str) -> Result<f64> {
        self.true_theta
            .get(model)
            .copied()
            .ok_or_else(|| Error::UnknownModel(format!("`{model}` has no true strength configured")))
    }

    /// The judge identity simulated runs are stamped with.
    pub fn judge_config(&self) -> JudgeConfig {
        let decoding = DecodingConfig { temperature: 0.0, max_output_tokens: 4096, extra: BTreeMap::new() };
        JudgeConfig {
            model: ModelRef {
                id: SIM_JUDGE_ID.into(),
                endpoint: FROZEN_ENDPOINT.into(),
                decoding: decoding.clone(),
            },
            prompt_id: compare_prompt_id().to_string(),
            decoding,
            max_retries: 0,
        }
    }
}

/// Probability that slot A wins, before clamping.
fn slot_a_probability(cfg: &SimConfig, theta_a: f64, theta_b: f64) -> f64 {
    logistic((theta_a - theta_b) / cfg.noise_temperature) + cfg.position_bias
}

fn build_judgment(cfg: &SimConfig, pair: &PairAssignment, verdict: Verdict, analysis: String) -> Judgment {
    Judgment {
        winner_model: winner_for(pair, verdict),
        pair: pair.clone(),
        verdict,
        analysis_text: analysis,
        input_tokens: cfg.sim_input_tokens,
        output_tokens: cfg.sim_output_tokens,
        tokens_estimated: true,
        judge: JudgeRef { model: SIM_JUDGE_ID.into(), prompt_id: compare_prompt_id().to_string(), temperature: 0.0 },
        judged_at: EPOCH_TIMESTAMP.into(),
    }
}

/// Draw one simulated judgment for a pair from the configured strengths.
/// Pure: the outcome is a keyed-hash function of (config seed, item, pair).
pub fn simulate_judgment(pair: &PairAssignment, cfg: &SimConfig) -> Result<Judgment> {
    cfg.validate()?;
    let theta_a = cfg.theta(pair.model_in_slot_a())?;
    let theta_b = cfg.theta(pair.model_in_slot_b())?;
    let p_raw = slot_a_probability(cfg, theta_a, theta_b);
    let p = p_raw.clamp(0.0, 1.0);
    let u = unit_draw(cfg.rng_seed, &pair.item_id, &pair.left_model, &pair.right_model);
    let verdict = if u < p { Verdict::A } else { Verdict::B };
    let analysis = format!("simulated draw: p_slot_a={p:.6} u={u:.6}");
    Ok(build_judgment(cfg, pair, verdict, analysis))
}

/// [`PairJudge`] implementation over [`simulate_judgment`], adding the
/// harness-level rule the real prompt enforces: an empty translation loses
/// outright (strength negative infinity). Both sides empty falls back to
/// the ordinary strength draw.
pub struct SimJudge {
    cfg: SimConfig,
    clamped_draws: AtomicU64,
}

impl SimJudge {
    pub fn new(cfg: SimConfig) -> Result<Self> {
        cfg.validate()?;
        Ok(SimJudge { cfg, clamped_draws: AtomicU64::new(0) })
    }

    pub fn config(&self) -> &SimConfig {
        &self.cfg
    }

    /// How many draws hit the probability clamp (observability for bias
    /// experiments; a bias that saturates stops being additive).
    pub fn clamped_draws(&self) -> u64 {
        self.clamped_draws.load(Ordering::Relaxed)
    }
}

impl PairJudge for SimJudge {
    fn judge(
        &self,
        pair: &PairAssignment,
        _item: &Item,
        left_text: &str,
        right_text: &str,
    ) -> Result<Judgment> {
        let (a_text, b_text) = match pair.a_side {
            crate::datamodel::ASide::Left => (left_text, right_text),
            crate::datamodel::ASide::Right => (right_text, left_text),
        };
        match (a_text.is_empty(), b_text.is_empty()) {
            (true, false) => {
                return Ok(build_judgment(
                    &self.cfg,
                    pair,
                    Verdict::B,
                    "simulated: slot A empty, default loss".into(),
                ))
            }
            (false, true) => {
                return Ok(build_judgment(
                    &self.cfg,
                    pair,
                    Verdict::A,
                    "simulated: slot B empty, default loss".into(),
                ))
            }
            // Both empty: no signal either way; fall through to the draw.
            _ => {}
        }
        let theta_a = self.cfg.theta(pair.model_in_slot_a())?;
        let theta_b = self.cfg.theta(pair.model_in_slot_b())?;
        let p_raw = slot_a_probability(&self.cfg, theta_a, theta_b);
        if !(0.0..=1.0).contains(&p_raw) {
            self.clamped_draws.fetch_add(1, Ordering::Relaxed);
        }
        simulate_judgment(pair, &self.cfg)
    }
}

// ---------------------------------------------------------------------------
// Synthetic anchor sets
// ---------------------------------------------------------------------------

/// Default strength spread for synthetic anchors: top anchors win ~96% of
/// their matches and bottom anchors ~4%, and fitted LT scores span past
/// [0.1, 9.9] with margin.
pub const DEFAULT_THETA_SPREAD: f64 = 14.0;

/// Build a fully synthetic frozen anchor set: `n_anchors` models with true
/// strengths evenly spaced over `theta_spread` (anchor-00 strongest),
/// placeholder translations for every item, and a complete anchor-vs-anchor
/// judgment log drawn from those strengths.
///
/// Returns the anchor set together with a copy of `cfg` whose `true_theta`
/// has the anchor strengths filled in, ready to judge candidates against
/// the same world.
pub fn synth_anchor_set(
    n_anchors: usize,
    theta_spread: f64,
    items: &ItemSet,
    cfg: &SimConfig,
) -> Result<(AnchorSet, SimConfig)> {
    if n_anchors < 2 {
        return Err(Error::Degenerate(format!("need at least 2 anchors, got {n_anchors}")));
    }
    if items.is_empty() {
        return Err(Error::Empty("item set has no items".into()));
    }
    if !(theta_spread > 0.0) {
        return Err(Error::Config(format!("theta_spread must be positive, got {theta_spread}")));
    }
    cfg.validate()?;

    let mut world = cfg.clone();
    let mut anchors = Vec::with_capacity(n_anchors);
    for i in 0..n_anchors {
        let id = format!("anchor-{i:02}");
        // Evenly spaced, strongest first, centered on zero.
        let theta = theta_spread / 2.0 - theta_spread * i as f64 / (n_anchors - 1) as f64;
        if world.true_theta.insert(id.clone(), theta).is_some() {
            return Err(Error::Conflict(format!("`{id}` already has a configured strength")));
        }
        anchors.push(ModelRef {
            id,
            endpoint: FROZEN_ENDPOINT.into(),
            decoding: DecodingConfig::default(),
        });
    }

    // Placeholder translations: non-empty, deterministic, distinct per model.
    let mut translations = TranslationStore::in_memory();
    for item in &items.items {
        for anchor in &anchors {
            translations.insert(Translation {
                item_id: item.id.clone(),
                model_id: anchor.id.clone(),
                text: format!("[{} rendering of {}]", anchor.id, item.id),
                generated_at: EPOCH_TIMESTAMP.into(),
                generation_meta: BTreeMap::new(),
            });
        }
    }

    // Frozen log: every unordered anchor pair on every item, in canonical
    // order, judged by the simulated world.
    let mut frozen_judgments = Vec::new();
    let mut sorted_items: Vec<&Item> = items.items.iter().collect();
    sorted_items.sort_by(|a, b| a.id.cmp(&b.id));
    for item in sorted_items {
        for i in 0..n_anchors {
            for j in (i + 1)..n_anchors {
                let pair = assign_pair(world.rng_seed, &item.id, &anchors[i].id, &anchors[j].id);
                frozen_judgments.push(simulate_judgment(&pair, &world)?);
            }
        }
    }

    let set = AnchorSet {
        version: "1.0.0".into(),
        judge: world.judge_config(),
        anchors,
        translations,
        frozen_judgments,
    };
    Ok((set, world))
}
