//! Report rendering: JSON (full precision) and Markdown (display-rounded).
//!
//! Rounding happens here and only here — LT scores to 2 decimals, win rates
//! to 0.01 percentage points, costs to cents. The JSON report keeps full
//! precision. Rendering is a pure function of the report, so identical
//! reports produce identical bytes.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::datamodel::{ScoreReport, Slice};
use crate::error::Result;

/// File names written by [`write_report`].
pub const REPORT_JSON: &str = "report.json";
pub const REPORT_MD: &str = "report.md";

/// Format an optional LT score to two decimals; `-` when absent.
pub fn fmt_lt(x: Option<f64>) -> String {
    match x {
        Some(v) => format!("{v:.2}"),
        None => "-".to_string(),
    }
}

/// Format an optional win rate as a percentage to 0.01pp; `-` when absent.
pub fn fmt_rate(x: Option<f64>) -> String {
    match x {
        Some(v) => format!("{:.2}%", v * 100.0),
        None => "-".to_string(),
    }
}

/// Format a token total compactly (`3.68M`, `126.0k`, `950`).
pub fn fmt_tokens(x: f64) -> String {
    if x >= 1_000_000.0 {
        format!("{:.2}M", x / 1_000_000.0)
    } else if x >= 1_000.0 {
        format!("{:.1}k", x / 1_000.0)
    } else {
        format!("{x:.0}")
    }
}

/// Format a cost to cents, `$`-prefixed for USD.
pub fn fmt_cost(x: f64, currency: &str) -> String {
    if currency == "USD" {
        format!("${x:.2}")
    } else {
        format!("{x:.2} {currency}")
    }
}

/// Human-readable display label of a slice.
pub fn slice_label(slice: Slice) -> &'static str {
    match slice {
        Slice::Overall => "Overall",
        Slice::EnToJa => "English → Japanese",
        Slice::JaToEn => "Japanese → English",
        Slice::Easy => "Easy",
        Slice::Hard => "Hard",
        Slice::EnToJaEasy => "En→Ja · Easy",
        Slice::EnToJaHard => "En→Ja · Hard",
        Slice::JaToEnEasy => "Ja→En · Easy",
        Slice::JaToEnHard => "Ja→En · Hard",
    }
}

fn direction_table(
    out: &mut String,
    report: &ScoreReport,
    title: &str,
    easy: Slice,
    hard: Slice,
    overall: Slice,
) {
    let get = |s: Slice| report.per_slice.get(&s);
    let (Some(easy_s), Some(hard_s), Some(dir_s)) = (get(easy), get(hard), get(overall)) else {
        return;
    };
    let _ = writeln!(out, "### {title}\n");
    let _ = writeln!(out, "| Model | Easy LT | Hard LT | Overall LT | Win Rate |");
    let _ = writeln!(out, "|---|---|---|---|---|");
    let _ = writeln!(
        out,
        "| **{}** (this run) | {} | {} | {} | {} |",
        report.candidate,
        fmt_lt(easy_s.lt),
        fmt_lt(hard_s.lt),
        fmt_lt(dir_s.lt),
        fmt_rate(dir_s.win_rate),
    );
    // Anchors sorted by direction LT, strongest first.
    let mut anchors: Vec<(&String, f64)> =
        dir_s.anchor_lts.iter().map(|(id, lt)| (id, *lt)).collect();
    anchors.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap_or(std::cmp::Ordering::Equal));
    for (id, lt) in anchors {
        let _ = writeln!(
            out,
            "| {id} | {} | {} | {} | {} |",
            fmt_lt(easy_s.anchor_lts.get(id).copied()),
            fmt_lt(hard_s.anchor_lts.get(id).copied()),
            fmt_lt(Some(lt)),
            fmt_rate(dir_s.anchor_win_rates.get(id).copied()),
        );
    }
    out.push('\n');
}

/// Render the Markdown report.
pub fn render_markdown(report: &ScoreReport) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "# Evaluation report: {}\n", report.candidate);
    let _ = writeln!(
        out,
        "Candidate `{}` scored against frozen anchor set `{}`.{}\n",
        report.candidate,
        report.checklist.baseset_version,
        if report.complete { "" } else { " **Run incomplete — see checklist.**" }
    );

    if let Some(overall) = report.overall() {
        let _ = writeln!(
            out,
            "**Overall: LT {} · win rate {} over {} decided matches.**\n",
            fmt_lt(overall.lt),
            fmt_rate(overall.win_rate),
            overall.matches
        );
    }

    // -- Reproducibility checklist -----------------------------------------
    let c = &report.checklist;
    let _ = writeln!(out, "## Reproducibility checklist\n");
    let _ = writeln!(out, "- **Anchor set snapshot**: `{}`", c.baseset_version);
    let _ = writeln!(out, "- **Judge model**: `{}`", c.judge_model);
    let _ = writeln!(
        out,
        "- **Judge prompt hash / decoding**: `{}` / `{}`",
        c.judge_prompt_hash, c.judge_decoding
    );
    let _ = writeln!(
        out,
        "- **Candidate model / decoding**: `{}` / `{}`",
        c.candidate_model, c.candidate_decoding
    );
    if let Some(hash) = &c.generation_prompt_hash {
        let _ = writeln!(out, "- **Generation prompt hash**: `{hash}`");
    }
    let _ = writeln!(out, "- **Filtering/backfill applied**: {}", c.filter_notes);
    if c.logs.is_empty() {
        let _ = writeln!(out, "- **Raw comparison logs**: not attached");
    } else {
        let _ = writeln!(out, "- **Raw comparison logs**:");
        for log in &c.logs {
            let _ = writeln!(out, "  - `{}` (sha256 `{}`)", log.path, log.sha256);
        }
    }
    out.push('\n');

    // -- Per-slice scores ---------------------------------------------------
    let _ = writeln!(out, "## Scores by slice\n");
    let _ = writeln!(out, "| Slice | Matches | Wins | Excluded | Win Rate | θ | LT |");
    let _ = writeln!(out, "|---|---|---|---|---|---|---|");
    for slice in Slice::ALL {
        if let Some(s) = report.per_slice.get(&slice) {
            let theta = match s.theta {
                Some(t) => format!("{t:+.3}"),
                None => "-".into(),
            };
            let _ = writeln!(
                out,
                "| {} | {} | {} | {} | {} | {} | {} |",
                slice_label(slice),
                s.matches,
                s.wins,
                s.excluded,
                fmt_rate(s.win_rate),
                theta,
                fmt_lt(s.lt),
            );
        }
    }
    out.push('\n');

    // -- Direction tables ---------------------------------------------------
    direction_table(
        &mut out,
        report,
        "English → Japanese",
        Slice::EnToJaEasy,
        Slice::EnToJaHard,
        Slice::EnToJa,
    );
    direction_table(
        &mut out,
        report,
        "Japanese → English",
        Slice::JaToEnEasy,
        Slice::JaToEnHard,
        Slice::JaToEn,
    );

    // -- Overall leaderboard --------------------------------------------------
    if let Some(overall) = report.overall() {
        if !overall.anchor_lts.is_empty() {
            let _ = writeln!(out, "### Overall leaderboard\n");
            let _ = writeln!(out, "| # | Model | Win Rate | LT |");
            let _ = writeln!(out, "|---|---|---|---|");
            let mut rows: Vec<(String, Option<f64>, f64, bool)> = overall
                .anchor_lts
                .iter()
                .map(|(id, lt)| (id.clone(), overall.anchor_win_rates.get(id).copied(), *lt, false))
                .collect();
            if let Some(lt) = overall.lt {
                rows.push((report.candidate.clone(), overall.win_rate, lt, true));
            }
            rows.sort_by(|a, b| b.2.partial_cmp(&a.2).unwrap_or(std::cmp::Ordering::Equal));
            for (rank, (id, rate, lt, is_candidate)) in rows.iter().enumerate() {
                let name = if *is_candidate { format!("**{id}** (this run)") } else { id.clone() };
                let _ = writeln!(
                    out,
                    "| {} | {name} | {} | {} |",
                    rank + 1,
                    fmt_rate(*rate),
                    fmt_lt(Some(*lt)),
                );
            }
            out.push('\n');
        }
    }

    // -- Cost -----------------------------------------------------------------
    let cost = &report.cost;
    let decided = report.overall().map(|s| s.matches).unwrap_or(0);
    let _ = writeln!(out, "## Judging cost\n");
    let _ = writeln!(out, "| Component | Tokens | Cost |");
    let _ = writeln!(out, "|---|---|---|");
    let _ = writeln!(
        out,
        "| Input ({} judgments) | {} | {} |",
        decided,
        fmt_tokens(cost.input_tokens),
        fmt_cost(cost.input_cost, &cost.currency)
    );
    let _ = writeln!(
        out,
        "| Output ({} judgments) | {} | {} |",
        decided,
        fmt_tokens(cost.output_tokens),
        fmt_cost(cost.output_cost, &cost.currency)
    );
    let _ = writeln!(out, "| **Total** | | **{}** |", fmt_cost(cost.total, &cost.currency));
    if cost.estimated_fraction > 0.0 {
        let _ = writeln!(
            out,
            "\nToken counts for {:.1}% of judgments were estimated from byte lengths.",
            cost.estimated_fraction * 100.0
        );
    }
    out
}

/// Write `report.json` and `report.md` into `dir`; returns their paths.
pub fn write_report(dir: &Path, report: &ScoreReport) -> Result<(PathBuf, PathBuf)> {
    std::fs::create_dir_all(dir).map_err(|e| crate::Error::io(dir.display().to_string(), e))?;
    let json_path = dir.join(REPORT_JSON);
    let md_path = dir.join(REPORT_MD);
    report.save(&json_path)?;
    std::fs::write(&md_path, render_markdown(report))
        .map_err(|e| crate::Error::io(md_path.display().to_string(), e))?;
    Ok((json_path, md_path))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::costmodel::CostEstimate;
    use crate::datamodel::{
        DecodingConfig, JudgeConfig, LogRef, ModelRef, ReproMeta, SliceScore,
    };
    use std::collections::BTreeMap;

    fn slice_score(lt: f64, win_rate: f64) -> SliceScore {
        SliceScore {
            matches: 100,
            wins: (win_rate * 100.0) as u64,
            excluded: 2,
            win_rate: Some(win_rate),
            theta: Some(0.5),
            lt: Some(lt),
            anchor_thetas: BTreeMap::from([("anchor-00".into(), 1.0)]),
            anchor_win_rates: BTreeMap::from([("anchor-00".into(), 0.9)]),
            anchor_lts: BTreeMap::from([("anchor-00".into(), 9.0)]),
        }
    }

    fn report() -> ScoreReport {
        let decoding = DecodingConfig::default();
        ScoreReport {
            candidate: "test-model".into(),
            baseset_version: "1.0.0".into(),
            judge: JudgeConfig {
                model: ModelRef { id: "judge".into(), endpoint: "frozen".into(), decoding: decoding.clone() },
                prompt_id: "abc123".into(),
                decoding: decoding.clone(),
                max_retries: 3,
            },
            per_slice: Slice::ALL.into_iter().map(|s| (s, slice_score(7.519, 0.5721))).collect(),
            cost: CostEstimate {
                input_tokens: 3_676_400.0,
                output_tokens: 2_193_800.0,
                input_cost: 1.10292,
                output_cost: 5.4845,
                total: 6.58742,
                currency: "USD".into(),
                estimated_fraction: 0.0,
            },
            checklist: ReproMeta {
                baseset_version: "baseset/v1.0.0".into(),
                judge_model: "judge".into(),
                judge_prompt_hash: "abc123".into(),
                judge_decoding: "temperature=0;max_output_tokens=4096".into(),
                candidate_model: "test-model".into(),
                candidate_decoding: "temperature=0;max_output_tokens=2048".into(),
                generation_prompt_hash: Some("def456".into()),
                filter_notes: "none".into(),
                logs: vec![LogRef { path: "judgments.jsonl".into(), sha256: "ffff".into() }],
            },
            complete: true,
        }
    }

    #[test]
    fn markdown_carries_all_checklist_fields() {
        let md = render_markdown(&report());
        for needle in [
            "baseset/v1.0.0",
            "judge",
            "abc123",
            "temperature=0;max_output_tokens=4096",
            "test-model",
            "temperature=0;max_output_tokens=2048",
            "none",
            "judgments.jsonl",
            "ffff",
        ] {
            assert!(md.contains(needle), "missing `{needle}` in:\n{md}");
        }
    }

    #[test]
    fn markdown_rounds_for_display() {
        let md = render_markdown(&report());
        // LT to 2 decimals, win rate to 0.01pp, cost to cents.
        assert!(md.contains("7.52"), "LT not rounded:\n{md}");
        assert!(md.contains("57.21%"), "win rate not rounded:\n{md}");
        assert!(md.contains("$6.59"), "total not rounded:\n{md}");
        assert!(md.contains("$1.10") && md.contains("$5.48"));
        assert!(md.contains("3.68M") && md.contains("2.19M"));
    }

    #[test]
    fn rendering_is_deterministic() {
        let r = report();
        assert_eq!(render_markdown(&r), render_markdown(&r));
    }

    #[test]
    fn json_and_md_round_trip_through_disk() {
        let dir = tempfile::tempdir().unwrap();
        let r = report();
        let (json_path, md_path) = write_report(dir.path(), &r).unwrap();
        let back = ScoreReport::load(&json_path).unwrap();
        assert_eq!(back, r);
        let md = std::fs::read_to_string(&md_path).unwrap();
        assert_eq!(md, render_markdown(&r));
    }
}
