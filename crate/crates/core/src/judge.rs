//! Pairwise judging: prompt rendering, strict verdict parsing, the
//! [`PairJudge`] abstraction, resumable full-plan judging, and the
//! reference-aware rubric judge.
//!
//! Verdict parsing is deliberately strict — the last `<answer>` block must
//! contain exactly `A` or `B` after trimming. Anything else is malformed;
//! malformed outputs are re-asked up to `max_retries` times and then
//! recorded as a judge refusal, which aggregation excludes entirely.

use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::mpsc;

use serde::{Deserialize, Serialize};

use crate::costmodel::estimate_tokens;
use crate::datamodel::{
    now_timestamp, winner_for, Item, ItemSet, JudgeConfig, JudgeRef, Judgment, PairAssignment,
    Verdict,
};
use crate::error::{Error, Result};
use crate::hashing::prompt_hash;
use crate::inference::{call_with_retries, ChatEndpoint, ChatRequest, EndpointProfile};
use crate::pairing::PairPlan;
use crate::store::{JudgmentLog, TranslationStore};

/// The pairwise comparison prompt. Its content hash is the `prompt_id`
/// recorded on every judgment and pinned by anchor-set manifests.
pub const COMPARE_PROMPT_TEMPLATE: &str = include_str!("../prompts/compare_prompt.txt");

/// The reference-aware rubric prompt (absolute 1-5 scoring).
pub const RUBRIC_PROMPT_TEMPLATE: &str = include_str!("../prompts/rubric_prompt.txt");

/// Content hash of [`COMPARE_PROMPT_TEMPLATE`].
pub fn compare_prompt_id() -> &'static str {
    static ID: std::sync::OnceLock<String> = std::sync::OnceLock::new();
    ID.get_or_init(|| prompt_hash(COMPARE_PROMPT_TEMPLATE))
}

/// Content hash of [`RUBRIC_PROMPT_TEMPLATE`].
pub fn rubric_prompt_id() -> &'static str {
    static ID: std::sync::OnceLock<String> = std::sync::OnceLock::new();
    ID.get_or_init(|| prompt_hash(RUBRIC_PROMPT_TEMPLATE))
}

// ---------------------------------------------------------------------------
// Compare prompt
// ---------------------------------------------------------------------------

/// Texts for one rendered comparison. `translation_a`/`translation_b` are
/// already slot-assigned: A is what the judge sees first.
#[derive(Clone, Debug)]
pub struct ComparePromptInput<'a> {
    pub source_text: &'a str,
    pub translation_a: &'a str,
    pub translation_b: &'a str,
    pub direction: crate::datamodel::Direction,
}

/// Render the compare prompt. Pure string substitution: translations are
/// inserted exactly as stored (an empty translation renders as an empty
/// block, which the prompt itself rules a default loss).
pub fn render_compare_prompt(input: &ComparePromptInput<'_>) -> String {
    COMPARE_PROMPT_TEMPLATE
        .replace("{{source_text}}", input.source_text)
        .replace("{{translation_a}}", input.translation_a)
        .replace("{{translation_b}}", input.translation_b)
}

/// Outcome of parsing one raw judge reply.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ParsedVerdict {
    A,
    B,
    /// No usable `<answer>` block. Retried, then counted as a refusal.
    Malformed,
}

/// Parse the verdict from raw judge output: the contents of the *last*
/// `<answer>...</answer>` block, whitespace-trimmed, must be exactly `A` or
/// `B` (case-sensitive).
pub fn parse_verdict(raw: &str) -> ParsedVerdict {
    let open = "<answer>";
    let close = "</answer>";
    let Some(start) = raw.rfind(open) else { return ParsedVerdict::Malformed };
    let after = &raw[start + open.len()..];
    let Some(end) = after.find(close) else { return ParsedVerdict::Malformed };
    match after[..end].trim() {
        "A" => ParsedVerdict::A,
        "B" => ParsedVerdict::B,
        _ => ParsedVerdict::Malformed,
    }
}

// ---------------------------------------------------------------------------
// PairJudge
// ---------------------------------------------------------------------------

/// Anything that can judge one slot-assigned pair. `left_text`/`right_text`
/// follow the pair's left/right models; implementations apply `a_side`
/// themselves. Must be callable from worker threads.
pub trait PairJudge: Send + Sync {
    fn judge(
        &self,
        pair: &PairAssignment,
        item: &Item,
        left_text: &str,
        right_text: &str,
    ) -> Result<Judgment>;
}

/// LLM judge speaking the chat-completions wire format.
pub struct HttpPairJudge<E: ChatEndpoint> {
    endpoint: E,
    config: JudgeConfig,
    profile: EndpointProfile,
}

impl<E: ChatEndpoint> HttpPairJudge<E> {
    pub fn new(endpoint: E, config: JudgeConfig, profile: EndpointProfile) -> Result<Self> {
        config.validate()?;
        profile.validate()?;
        Ok(HttpPairJudge { endpoint, config, profile })
    }
}

impl<E: ChatEndpoint> PairJudge for HttpPairJudge<E> {
    fn judge(
        &self,
        pair: &PairAssignment,
        item: &Item,
        left_text: &str,
        right_text: &str,
    ) -> Result<Judgment> {
        let (a_text, b_text) = match pair.a_side {
            crate::datamodel::ASide::Left => (left_text, right_text),
            crate::datamodel::ASide::Right => (right_text, left_text),
        };
        let prompt = render_compare_prompt(&ComparePromptInput {
            source_text: &item.source_text,
            translation_a: a_text,
            translation_b: b_text,
            direction: item.direction,
        });
        let mut request = ChatRequest::user_message(&self.config.model, prompt.clone());
        request.temperature = self.config.decoding.temperature;
        request.max_tokens = self.config.decoding.max_output_tokens;

        let mut last_raw = String::new();
        let mut input_tokens = 0u64;
        let mut output_tokens = 0u64;
        let mut tokens_estimated = false;
        let mut refusal_reason = None;

        // One initial ask plus up to max_retries re-asks of malformed output.
        for _ in 0..=self.config.max_retries {
            match call_with_retries(
                &self.endpoint,
                &request,
                self.profile.max_retries,
                self.profile.retry_backoff(),
            ) {
                Ok(response) => {
                    last_raw = response.content;
                    match (response.input_tokens, response.output_tokens) {
                        (Some(i), Some(o)) => {
                            input_tokens = i;
                            output_tokens = o;
                            tokens_estimated = false;
                        }
                        _ => {
                            input_tokens = estimate_tokens(&prompt);
                            output_tokens = estimate_tokens(&last_raw);
                            tokens_estimated = true;
                        }
                    }
                    match parse_verdict(&last_raw) {
                        ParsedVerdict::A => return Ok(self.build(pair, Verdict::A, last_raw, input_tokens, output_tokens, tokens_estimated)),
                        ParsedVerdict::B => return Ok(self.build(pair, Verdict::B, last_raw, input_tokens, output_tokens, tokens_estimated)),
                        ParsedVerdict::Malformed => continue,
                    }
                }
                Err(e) => {
                    // Endpoint-level failure after transport retries: the
                    // judge never answered, so this pair is a refusal.
                    refusal_reason = Some(e.to_string());
                    break;
                }
            }
        }
        let analysis = match refusal_reason {
            Some(reason) => format!("judge unavailable: {reason}"),
            None => last_raw,
        };
        Ok(self.build(pair, Verdict::JudgeRefused, analysis, input_tokens, output_tokens, tokens_estimated))
    }
}

impl<E: ChatEndpoint> HttpPairJudge<E> {
    fn build(
        &self,
        pair: &PairAssignment,
        verdict: Verdict,
        analysis_text: String,
        input_tokens: u64,
        output_tokens: u64,
        tokens_estimated: bool,
    ) -> Judgment {
        Judgment {
            winner_model: winner_for(pair, verdict),
            pair: pair.clone(),
            verdict,
            analysis_text,
            input_tokens,
            output_tokens,
            tokens_estimated,
            judge: JudgeRef::from(&self.config),
            judged_at: now_timestamp(),
        }
    }
}

// ---------------------------------------------------------------------------
// judge_pair / judge_all
// ---------------------------------------------------------------------------

/// Judge a single pair, resolving both translations from the store.
pub fn judge_pair(
    pair: &PairAssignment,
    items: &ItemSet,
    translations: &TranslationStore,
    judge: &dyn PairJudge,
) -> Result<Judgment> {
    let item = items
        .get(&pair.item_id)
        .ok_or_else(|| Error::Precondition(format!("unknown item `{}` in pair", pair.item_id)))?;
    let left = translations.get(&pair.item_id, &pair.left_model).ok_or_else(|| {
        Error::Precondition(format!(
            "no stored translation of `{}` by `{}`",
            pair.item_id, pair.left_model
        ))
    })?;
    let right = translations.get(&pair.item_id, &pair.right_model).ok_or_else(|| {
        Error::Precondition(format!(
            "no stored translation of `{}` by `{}`",
            pair.item_id, pair.right_model
        ))
    })?;
    judge.judge(pair, item, &left.text, &right.text)
}

/// Outcome counts of a [`judge_all`] run.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct JudgeSummary {
    /// Pairs judged by this run.
    pub judged: usize,
    /// Planned pairs already present in the log and skipped.
    pub cached: usize,
    /// Of the pairs judged by this run, how many ended refused.
    pub refused: usize,
}

/// Judge every pair of the plan that is not already in the log, appending
/// results as they land. Workers run `concurrency` wide; the log itself is
/// written by this thread only, so records never interleave. Safe to
/// interrupt and re-run: completed pairs are skipped by identity.
pub fn judge_all(
    plan: &PairPlan,
    items: &ItemSet,
    translations: &TranslationStore,
    judge: &dyn PairJudge,
    log: &JudgmentLog,
    concurrency: usize,
) -> Result<JudgeSummary> {
    if concurrency == 0 {
        return Err(Error::Config("judge concurrency must be at least 1".into()));
    }
    let existing = log.read_existing()?;
    let done: std::collections::BTreeSet<(String, String, String)> =
        existing.iter().map(|j| j.pair.key()).collect();

    let pending: Vec<&PairAssignment> =
        plan.pairs.iter().filter(|p| !done.contains(&p.key())).collect();
    let cached = plan.pairs.len() - pending.len();

    // Fail fast if any pending pair lacks a stored translation: judging a
    // half-loaded store would silently skew the run.
    for pair in &pending {
        if items.get(&pair.item_id).is_none() {
            return Err(Error::Precondition(format!("unknown item `{}` in plan", pair.item_id)));
        }
        for model in [&pair.left_model, &pair.right_model] {
            if translations.get(&pair.item_id, model).is_none() {
                return Err(Error::Precondition(format!(
                    "no stored translation of `{}` by `{model}`",
                    pair.item_id
                )));
            }
        }
    }

    let mut summary = JudgeSummary { judged: 0, cached, refused: 0 };
    if pending.is_empty() {
        return Ok(summary);
    }

    let next = AtomicUsize::new(0);
    let workers = concurrency.min(pending.len());
    let (tx, rx) = mpsc::channel::<Result<Judgment>>();
    std::thread::scope(|scope| -> Result<()> {
        for _ in 0..workers {
            let tx = tx.clone();
            let next = &next;
            let pending = &pending;
            scope.spawn(move || {
                loop {
                    let i = next.fetch_add(1, Ordering::Relaxed);
                    if i >= pending.len() {
                        break;
                    }
                    let result = judge_pair(pending[i], items, translations, judge);
                    if tx.send(result).is_err() {
                        break;
                    }
                }
            });
        }
        drop(tx);
        for result in rx {
            let judgment = result?;
            if judgment.verdict == Verdict::JudgeRefused {
                summary.refused += 1;
            }
            log.append(&judgment)?;
            summary.judged += 1;
        }
        Ok(())
    })?;
    Ok(summary)
}

// ---------------------------------------------------------------------------
// Rubric judge
// ---------------------------------------------------------------------------

/// One absolute rubric judgment: a strict 1-5 score plus a binary
/// "perfect" flag for native-quality output.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RubricResult {
    pub score: u8,
    pub perfect: bool,
    pub justification: String,
    /// Set when the raw output was internally contradictory (perfect flag
    /// alongside a sub-5 score) and the flag was downgraded.
    #[serde(default)]
    pub contradiction_warning: bool,
}

/// Render the rubric prompt for one (source, translation, reference) triple.
pub fn render_rubric_prompt(source_text: &str, translated_text: &str, reference_text: &str) -> String {
    RUBRIC_PROMPT_TEMPLATE
        .replace("{{ source_text }}", source_text)
        .replace("{{ translated_text }}", translated_text)
        .replace("{{ reference_text }}", reference_text)
}

fn extract_tag<'a>(raw: &'a str, tag: &str) -> Option<&'a str> {
    let open = format!("<{tag}>");
    let close = format!("</{tag}>");
    let start = raw.rfind(&open)?;
    let after = &raw[start + open.len()..];
    let end = after.find(&close)?;
    Some(after[..end].trim())
}

/// Parse a raw rubric reply into a [`RubricResult`].
///
/// Requires `<score>N</score>` with N in 1..=5 and `<correct>0|1</correct>`.
/// A perfect flag on a sub-5 score contradicts the rubric; the flag is
/// dropped and the contradiction recorded rather than failing the sample.
pub fn parse_rubric(raw: &str) -> Result<RubricResult> {
    let score_text = extract_tag(raw, "score")
        .ok_or_else(|| Error::MalformedJudgeOutput("missing <score> tag".into()))?;
    let score: u8 = score_text
        .parse()
        .map_err(|_| Error::MalformedJudgeOutput(format!("non-integer score `{score_text}`")))?;
    if !(1..=5).contains(&score) {
        return Err(Error::MalformedJudgeOutput(format!("score {score} out of range 1-5")));
    }
    let correct_text = extract_tag(raw, "correct")
        .ok_or_else(|| Error::MalformedJudgeOutput("missing <correct> tag".into()))?;
    let flagged = match correct_text {
        "0" => false,
        "1" => true,
        other => {
            return Err(Error::MalformedJudgeOutput(format!("bad <correct> value `{other}`")))
        }
    };
    let justification = extract_tag(raw, "justification").unwrap_or("").to_string();
    let contradiction = flagged && score < 5;
    Ok(RubricResult {
        score,
        perfect: flagged && score == 5,
        justification,
        contradiction_warning: contradiction,
    })
}

/// Run the rubric judge on one translation against a non-empty reference.
pub fn rubric_judge(
    item: &Item,
    translated_text: &str,
    reference_text: &str,
    config: &JudgeConfig,
    profile: &EndpointProfile,
    endpoint: &dyn ChatEndpoint,
) -> Result<RubricResult> {
    if reference_text.trim().is_empty() {
        return Err(Error::Precondition(format!(
            "rubric judging of item `{}` requires a non-empty reference",
            item.id
        )));
    }
    config.validate()?;
    let prompt = render_rubric_prompt(&item.source_text, translated_text, reference_text);
    let mut request = ChatRequest::user_message(&config.model, prompt);
    request.temperature = config.decoding.temperature;
    request.max_tokens = config.decoding.max_output_tokens;

    let mut last_err: Option<Error> = None;
    for _ in 0..=config.max_retries {
        let response = call_with_retries(endpoint, &request, profile.max_retries, profile.retry_backoff())
            .map_err(|e| Error::MalformedJudgeOutput(format!("judge unavailable: {e}")))?;
        match parse_rubric(&response.content) {
            Ok(result) => return Ok(result),
            Err(e) => last_err = Some(e),
        }
    }
    Err(last_err.unwrap_or_else(|| Error::MalformedJudgeOutput("no attempts made".into())))
}
