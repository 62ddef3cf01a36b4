//! Aggregation: match matrices, penalized Bradley-Terry strength fitting,
//! LT scores, and end-to-end candidate scoring.
//!
//! The model: P(i beats j) = sigma(theta_i - theta_j). Strengths are the
//! maximizer of the ridge-penalized log-likelihood
//!
//! ```text
//! F(theta) = sum_{i != j} w_ij * ln sigma(theta_i - theta_j)
//!            - (prior_strength / 2) * sum_i theta_i^2
//! ```
//!
//! which the prior makes strictly concave with a unique, automatically
//! near-mean-zero optimum. The solver is a diagonal-majorization MM scheme:
//! each iteration takes a Jacobi step `delta_i = g_i / (d_i / 2 + lambda)`
//! where `g` is the penalized gradient and `d_i` the total matches played
//! by model i. The step maximizes a quadratic minorant of F built from the
//! logistic curvature bound (1/8) and the `L <= 2D` diagonal bound on the
//! comparison-graph Laplacian, so every iteration increases F — an
//! invariant the tests check directly.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::costmodel::{estimate_cost, measure_token_stats, CostEstimate, PriceSheet};
use crate::datamodel::{
    AnchorSet, ItemSet, Judgment, LogRef, ModelRef, ReproMeta, ScoreReport, Slice, SliceScore,
    Verdict,
};
use crate::error::{Error, Result};
use crate::judge::RubricResult;

/// Numerically stable logistic function.
pub fn logistic(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

// ---------------------------------------------------------------------------
// Match matrix
// ---------------------------------------------------------------------------

/// Directed win counts over a fixed model roster: `wins[i][j]` is the number
/// of decided matches model `i` won against model `j`.
#[derive(Clone, Debug, PartialEq)]
pub struct MatchMatrix {
    pub models: Vec<String>,
    pub wins: Vec<Vec<u64>>,
}

impl MatchMatrix {
    pub fn n(&self) -> usize {
        self.models.len()
    }

    pub fn index_of(&self, model: &str) -> Option<usize> {
        self.models.iter().position(|m| m == model)
    }

    /// Total decided matches model `i` played.
    pub fn matches_of(&self, i: usize) -> u64 {
        (0..self.n()).map(|j| self.wins[i][j] + self.wins[j][i]).sum()
    }

    /// Total decided matches model `i` won.
    pub fn wins_of(&self, i: usize) -> u64 {
        self.wins[i].iter().sum()
    }

    pub fn total_matches(&self) -> u64 {
        (0..self.n()).map(|i| self.wins_of(i)).sum()
    }
}

/// Build the directed win matrix for one slice from the frozen
/// anchor-vs-anchor judgments plus one candidate's judgments.
///
/// The candidate's matches extend the frozen graph; they never replace or
/// re-weight it, and judgments from any other candidate are rejected.
pub fn build_match_matrix(
    frozen: &[Judgment],
    candidate_judgments: &[Judgment],
    slice: Slice,
    items: &ItemSet,
    anchor_ids: &[String],
    candidate_id: &str,
) -> Result<MatchMatrix> {
    if anchor_ids.iter().any(|a| a == candidate_id) {
        return Err(Error::Conflict(format!("candidate `{candidate_id}` is also an anchor")));
    }
    let mut models: Vec<String> = anchor_ids.to_vec();
    models.sort_unstable();
    models.push(candidate_id.to_string());
    let index: BTreeMap<&str, usize> =
        models.iter().enumerate().map(|(i, m)| (m.as_str(), i)).collect();

    let mut wins = vec![vec![0u64; models.len()]; models.len()];
    let mut count = |judgment: &Judgment, frozen_side: bool| -> Result<()> {
        judgment.validate()?;
        let item = items.get(&judgment.pair.item_id).ok_or_else(|| {
            Error::Validation(format!(
                "judgment references unknown item `{}`",
                judgment.pair.item_id
            ))
        })?;
        for model in [&judgment.pair.left_model, &judgment.pair.right_model] {
            if !index.contains_key(model.as_str()) {
                return Err(Error::MixedCandidates(format!(
                    "judgment on item `{}` references `{model}`, which is neither an anchor nor the candidate `{candidate_id}`",
                    judgment.pair.item_id
                )));
            }
            if frozen_side && model == candidate_id {
                return Err(Error::Validation(format!(
                    "frozen judgment references the candidate `{candidate_id}`"
                )));
            }
        }
        if !frozen_side && !judgment.pair.involves(candidate_id) {
            return Err(Error::Validation(format!(
                "candidate judgment on item `{}` does not involve the candidate `{candidate_id}`",
                judgment.pair.item_id
            )));
        }
        if !slice.contains(item) {
            return Ok(());
        }
        // Refusals are excluded: they shrink match counts and are never a loss.
        if judgment.verdict == Verdict::JudgeRefused {
            return Ok(());
        }
        let winner = judgment.winner_model.as_deref().expect("validated decided judgment");
        let loser = judgment.loser_model().expect("validated decided judgment");
        wins[index[winner]][index[loser]] += 1;
        Ok(())
    };

    for judgment in frozen {
        count(judgment, true)?;
    }
    for judgment in candidate_judgments {
        count(judgment, false)?;
    }
    Ok(MatchMatrix { models, wins })
}

// ---------------------------------------------------------------------------
// Bradley-Terry fit
// ---------------------------------------------------------------------------

/// Solver settings for [`fit_bradley_terry`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BtOptions {
    /// Ridge prior strength (lambda). Must be positive; the prior keeps the
    /// optimum finite even for undefeated models.
    pub prior_strength: f64,
    /// Convergence tolerance on the max absolute per-iteration step.
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for BtOptions {
    fn default() -> Self {
        // The diagonal majorizer is deliberately conservative, so nearly
        // separated match data converges geometrically but slowly; a large
        // iteration cap costs little (each step is O(n^2) over n <= ~dozens
        // of models) and keeps the tight tolerance reachable.
        BtOptions { prior_strength: 0.01, tol: 1e-8, max_iter: 500_000 }
    }
}

/// A fitted strength vector, centered so the mean strength is zero.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BtFit {
    pub theta: BTreeMap<String, f64>,
    /// Mean strength the fit was centered around (zero after centering;
    /// kept explicit so LT scoring never depends on that convention).
    pub theta_bar: f64,
    /// Penalized log-likelihood at the reported strengths.
    pub log_likelihood: f64,
    pub iterations: usize,
}

/// Penalized Bradley-Terry log-likelihood at `theta` (indexed like
/// `matrix.models`).
pub fn penalized_log_likelihood(matrix: &MatchMatrix, theta: &[f64], prior_strength: f64) -> f64 {
    let n = matrix.n();
    let mut ll = 0.0;
    for i in 0..n {
        for j in 0..n {
            let w = matrix.wins[i][j];
            if w > 0 {
                ll += w as f64 * logistic(theta[i] - theta[j]).ln();
            }
        }
    }
    let sq: f64 = theta.iter().map(|t| t * t).sum();
    ll - prior_strength / 2.0 * sq
}

/// Gradient of [`penalized_log_likelihood`] with respect to `theta`.
pub fn penalized_gradient(matrix: &MatchMatrix, theta: &[f64], prior_strength: f64) -> Vec<f64> {
    let n = matrix.n();
    let mut grad = vec![0.0; n];
    for k in 0..n {
        let mut g = 0.0;
        for j in 0..n {
            if j == k {
                continue;
            }
            let w_kj = matrix.wins[k][j] as f64;
            let w_jk = matrix.wins[j][k] as f64;
            let p_kj = logistic(theta[k] - theta[j]);
            // d/dtheta_k of w_kj*ln sigma(tk-tj) + w_jk*ln sigma(tj-tk).
            g += w_kj - (w_kj + w_jk) * p_kj;
        }
        grad[k] = g - prior_strength * theta[k];
    }
    grad
}

fn fit_inner(
    matrix: &MatchMatrix,
    options: &BtOptions,
    mut trace: Option<&mut Vec<f64>>,
) -> Result<BtFit> {
    let n = matrix.n();
    if n < 2 {
        return Err(Error::Degenerate(format!("need at least 2 models, got {n}")));
    }
    if !(options.prior_strength > 0.0) {
        return Err(Error::Degenerate(format!(
            "prior_strength must be positive, got {}",
            options.prior_strength
        )));
    }

    let degrees: Vec<f64> = (0..n).map(|i| matrix.matches_of(i) as f64).collect();
    let mut theta = vec![0.0f64; n];
    let mut iterations = 0;
    let mut residual = f64::INFINITY;

    while iterations < options.max_iter {
        let grad = penalized_gradient(matrix, &theta, options.prior_strength);
        let mut max_step = 0.0f64;
        for i in 0..n {
            let step = grad[i] / (degrees[i] / 2.0 + options.prior_strength);
            theta[i] += step;
            max_step = max_step.max(step.abs());
        }
        iterations += 1;
        if let Some(trace) = trace.as_deref_mut() {
            trace.push(penalized_log_likelihood(matrix, &theta, options.prior_strength));
        }
        residual = max_step;
        if max_step < options.tol {
            break;
        }
    }
    if residual >= options.tol {
        return Err(Error::NotConverged { iterations, residual });
    }

    // Center: the ridge optimum is already mean-zero up to solver tolerance,
    // so this is a convention, not a correction.
    let mean = theta.iter().sum::<f64>() / n as f64;
    for t in &mut theta {
        *t -= mean;
    }
    let log_likelihood = penalized_log_likelihood(matrix, &theta, options.prior_strength);
    Ok(BtFit {
        theta: matrix.models.iter().cloned().zip(theta).collect(),
        theta_bar: 0.0,
        log_likelihood,
        iterations,
    })
}

/// Fit penalized Bradley-Terry strengths. See the module docs for the
/// update rule. Returns the fit and, for diagnostics, the penalized
/// log-likelihood after every iteration (a non-decreasing series).
pub fn fit_bradley_terry_traced(
    matrix: &MatchMatrix,
    options: &BtOptions,
) -> Result<(BtFit, Vec<f64>)> {
    let mut trace = Vec::new();
    let fit = fit_inner(matrix, options, Some(&mut trace))?;
    Ok((fit, trace))
}

/// Fit penalized Bradley-Terry strengths (see [`fit_bradley_terry_traced`]).
pub fn fit_bradley_terry(matrix: &MatchMatrix, options: &BtOptions) -> Result<BtFit> {
    fit_inner(matrix, options, None)
}

/// LT score of one fitted model: `10 * sigma(theta - theta_bar)`, a 0-10
/// scale where 5.0 marks the average anchor and +ln 3 maps to 7.5.
pub fn lt_score(fit: &BtFit, model: &str) -> Result<f64> {
    let theta = fit
        .theta
        .get(model)
        .ok_or_else(|| Error::UnknownModel(format!("`{model}` is not in the fit")))?;
    Ok(10.0 * logistic(theta - fit.theta_bar))
}

// ---------------------------------------------------------------------------
// Candidate scoring
// ---------------------------------------------------------------------------

/// Dedupe judgments by pair identity, keeping the last record for each pair
/// (matching the append-only log convention). Returns the survivors in
/// first-seen order and the number of superseded records.
fn dedupe_last_wins(judgments: &[Judgment]) -> (Vec<&Judgment>, usize) {
    let mut latest: BTreeMap<(String, String, String), &Judgment> = BTreeMap::new();
    let mut order: Vec<(String, String, String)> = Vec::new();
    for judgment in judgments {
        let key = judgment.pair.key();
        if latest.insert(key.clone(), judgment).is_none() {
            order.push(key);
        }
    }
    let superseded = judgments.len() - order.len();
    (order.into_iter().map(|k| latest[&k]).collect(), superseded)
}

/// Score one candidate against a frozen anchor set.
///
/// Pure with respect to its inputs: no clock, no environment, no state from
/// other candidates — scoring the same inputs yields an identical report
/// byte-for-byte, and interleaving other candidates' runs cannot change it.
pub fn score_candidate(
    baseset: &AnchorSet,
    candidate: &ModelRef,
    judgments: &[Judgment],
    items: &ItemSet,
    prices: &PriceSheet,
) -> Result<ScoreReport> {
    baseset.judge.validate()?;
    prices.validate()?;
    if baseset.contains_model(&candidate.id) {
        return Err(Error::Conflict(format!(
            "candidate `{}` is an anchor in baseset v{}",
            candidate.id, baseset.version
        )));
    }

    let anchor_ids = baseset.anchor_ids();
    let (deduped_refs, superseded) = dedupe_last_wins(judgments);
    let deduped: Vec<Judgment> = deduped_refs.into_iter().cloned().collect();
    for judgment in &deduped {
        judgment.validate()?;
        if items.get(&judgment.pair.item_id).is_none() {
            return Err(Error::Validation(format!(
                "judgment references unknown item `{}`",
                judgment.pair.item_id
            )));
        }
    }

    let expected_per_item = anchor_ids.len() as u64;
    let slice_item_counts = items.slice_counts();

    let mut per_slice = BTreeMap::new();
    let mut missing_total = 0u64;
    let mut refused_total = 0u64;

    for slice in Slice::ALL {
        let in_slice: Vec<&Judgment> = deduped
            .iter()
            .filter(|j| slice.contains(items.get(&j.pair.item_id).expect("validated item id")))
            .collect();
        let refused = in_slice.iter().filter(|j| j.verdict == Verdict::JudgeRefused).count() as u64;
        let decided = in_slice.len() as u64 - refused;
        let wins = in_slice
            .iter()
            .filter(|j| j.winner_model.as_deref() == Some(candidate.id.as_str()))
            .count() as u64;

        let expected = slice_item_counts[&slice] as u64 * expected_per_item;
        if slice == Slice::Overall {
            missing_total = expected.saturating_sub(in_slice.len() as u64);
            refused_total = refused;
        }

        let mut score = SliceScore {
            matches: decided,
            wins,
            excluded: refused,
            win_rate: None,
            theta: None,
            lt: None,
            anchor_thetas: BTreeMap::new(),
            anchor_win_rates: BTreeMap::new(),
            anchor_lts: BTreeMap::new(),
        };

        if decided > 0 {
            score.win_rate = Some(wins as f64 / decided as f64);
            let matrix = build_match_matrix(
                &baseset.frozen_judgments,
                &deduped,
                slice,
                items,
                &anchor_ids,
                &candidate.id,
            )?;
            let fit = fit_bradley_terry(&matrix, &BtOptions::default())?;
            score.theta = Some(fit.theta[&candidate.id]);
            score.lt = Some(lt_score(&fit, &candidate.id)?);
            for anchor in &anchor_ids {
                score.anchor_thetas.insert(anchor.clone(), fit.theta[anchor]);
                score.anchor_lts.insert(anchor.clone(), lt_score(&fit, anchor)?);
                let i = matrix.index_of(anchor).expect("anchor in matrix");
                let played = matrix.matches_of(i);
                if played > 0 {
                    score
                        .anchor_win_rates
                        .insert(anchor.clone(), matrix.wins_of(i) as f64 / played as f64);
                }
            }
        }
        per_slice.insert(slice, score);
    }

    // Cost of the run, measured over its own decided judgments.
    let cost = match measure_token_stats(&deduped) {
        Ok(stats) => estimate_cost(&stats, stats.judgment_count, prices),
        Err(Error::Empty(_)) => CostEstimate::zero(&prices.currency),
        Err(e) => return Err(e),
    };

    let mut notes = Vec::new();
    if missing_total > 0 {
        notes.push(format!("{missing_total} planned comparisons missing from the log"));
    }
    if refused_total > 0 {
        notes.push(format!("{refused_total} judge refusals excluded from aggregation"));
    }
    if superseded > 0 {
        notes.push(format!("{superseded} duplicate judgments superseded by later records"));
    }
    let filter_notes = if notes.is_empty() { "none".to_string() } else { notes.join("; ") };

    let checklist = ReproMeta {
        baseset_version: format!("baseset/v{}", baseset.version),
        judge_model: baseset.judge.model.id.clone(),
        judge_prompt_hash: baseset.judge.prompt_id.clone(),
        judge_decoding: baseset.judge.decoding.fingerprint(),
        candidate_model: candidate.id.clone(),
        candidate_decoding: candidate.decoding.fingerprint(),
        generation_prompt_hash: None,
        filter_notes,
        logs: Vec::<LogRef>::new(),
    };

    Ok(ScoreReport {
        candidate: candidate.id.clone(),
        baseset_version: baseset.version.clone(),
        judge: baseset.judge.clone(),
        per_slice,
        cost,
        checklist,
        complete: missing_total == 0,
    })
}

// ---------------------------------------------------------------------------
// Rubric statistics
// ---------------------------------------------------------------------------

/// Aggregate statistics over rubric judgments (1-5 scale + perfect flag).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RubricStats {
    pub samples: u64,
    pub mean: f64,
    pub median: f64,
    /// Percentage of samples at each score, index 0 = score 1.
    pub score_pct: [f64; 5],
    /// Percentage scoring 3 or above.
    pub useful_pct: f64,
    /// Percentage flagged perfect.
    pub perfect_pct: f64,
}

pub fn rubric_stats(results: &[RubricResult]) -> Result<RubricStats> {
    if results.is_empty() {
        return Err(Error::Empty("no rubric results".into()));
    }
    let n = results.len() as f64;
    let mut counts = [0u64; 5];
    for r in results {
        if !(1..=5).contains(&r.score) {
            return Err(Error::Validation(format!("rubric score {} out of range", r.score)));
        }
        counts[(r.score - 1) as usize] += 1;
    }
    let mean = results.iter().map(|r| r.score as f64).sum::<f64>() / n;
    let mut sorted: Vec<u8> = results.iter().map(|r| r.score).collect();
    sorted.sort_unstable();
    let median = if sorted.len() % 2 == 1 {
        sorted[sorted.len() / 2] as f64
    } else {
        (sorted[sorted.len() / 2 - 1] as f64 + sorted[sorted.len() / 2] as f64) / 2.0
    };
    let mut score_pct = [0.0; 5];
    for (i, c) in counts.iter().enumerate() {
        score_pct[i] = *c as f64 / n * 100.0;
    }
    let useful = counts[2] + counts[3] + counts[4];
    let perfect = results.iter().filter(|r| r.perfect).count() as f64;
    Ok(RubricStats {
        samples: results.len() as u64,
        mean,
        median,
        score_pct,
        useful_pct: useful as f64 / n * 100.0,
        perfect_pct: perfect / n * 100.0,
    })
}
