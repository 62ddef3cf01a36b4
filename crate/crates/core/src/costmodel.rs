//! Token accounting and evaluation-cost estimation.
//!
//! Costs are computed entirely in f64 with no intermediate rounding, so the
//! estimate is exactly linear in judgment count; rounding happens only at
//! display time. Prices are config data loaded from a price sheet, never
//! baked into formulas.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::datamodel::{read_json, Judgment, Verdict};
use crate::error::{Error, Result};

/// Per-million-token prices for one judge endpoint.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PriceSheet {
    pub input_per_million: f64,
    pub output_per_million: f64,
    pub currency: String,
}

impl Default for PriceSheet {
    fn default() -> Self {
        // Bundled fallback prices; real runs should load a price sheet.
        PriceSheet { input_per_million: 0.30, output_per_million: 2.50, currency: "USD".into() }
    }
}

impl PriceSheet {
    pub fn load(path: &Path) -> Result<Self> {
        let sheet: PriceSheet = read_json(path)?;
        sheet.validate()?;
        Ok(sheet)
    }

    pub fn validate(&self) -> Result<()> {
        if self.input_per_million < 0.0 || self.output_per_million < 0.0 {
            return Err(Error::Validation("negative token price".into()));
        }
        if !self.input_per_million.is_finite() || !self.output_per_million.is_finite() {
            return Err(Error::Validation("non-finite token price".into()));
        }
        Ok(())
    }
}

/// Mean token usage measured over the decided judgments of a log.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TokenStats {
    pub mean_input: f64,
    pub mean_output: f64,
    pub judgment_count: u64,
    /// Fraction of the measured judgments whose token counts were estimated
    /// from byte lengths rather than reported by the endpoint.
    pub estimated_fraction: f64,
}

/// A cost projection for a run. Token totals are f64 because they are
/// means scaled by a count, not observed integers.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CostEstimate {
    pub input_tokens: f64,
    pub output_tokens: f64,
    pub input_cost: f64,
    pub output_cost: f64,
    pub total: f64,
    pub currency: String,
    pub estimated_fraction: f64,
}

impl CostEstimate {
    /// A zero estimate (used when a log had no decided judgments to measure).
    pub fn zero(currency: &str) -> Self {
        CostEstimate {
            input_tokens: 0.0,
            output_tokens: 0.0,
            input_cost: 0.0,
            output_cost: 0.0,
            total: 0.0,
            currency: currency.to_string(),
            estimated_fraction: 0.0,
        }
    }
}

/// Measure mean token usage over a log's non-refused judgments.
pub fn measure_token_stats(judgments: &[Judgment]) -> Result<TokenStats> {
    let decided: Vec<&Judgment> = judgments.iter().filter(|j| j.verdict != Verdict::JudgeRefused).collect();
    if decided.is_empty() {
        return Err(Error::Empty("no decided judgments to measure".into()));
    }
    let n = decided.len() as f64;
    let sum_in: f64 = decided.iter().map(|j| j.input_tokens as f64).sum();
    let sum_out: f64 = decided.iter().map(|j| j.output_tokens as f64).sum();
    let estimated = decided.iter().filter(|j| j.tokens_estimated).count() as f64;
    Ok(TokenStats {
        mean_input: sum_in / n,
        mean_output: sum_out / n,
        judgment_count: decided.len() as u64,
        estimated_fraction: estimated / n,
    })
}

/// Project the cost of `judgment_count` judgments at the measured means.
pub fn estimate_cost(stats: &TokenStats, judgment_count: u64, prices: &PriceSheet) -> CostEstimate {
    let n = judgment_count as f64;
    let input_tokens = stats.mean_input * n;
    let output_tokens = stats.mean_output * n;
    let input_cost = input_tokens * prices.input_per_million / 1_000_000.0;
    let output_cost = output_tokens * prices.output_per_million / 1_000_000.0;
    CostEstimate {
        input_tokens,
        output_tokens,
        input_cost,
        output_cost,
        total: input_cost + output_cost,
        currency: prices.currency.clone(),
        estimated_fraction: stats.estimated_fraction,
    }
}

/// Estimate a token count from UTF-8 byte length when the endpoint reports
/// no usage: ceil(bytes / 4).
pub fn estimate_tokens(text: &str) -> u64 {
    (text.len() as u64).div_ceil(4)
}
