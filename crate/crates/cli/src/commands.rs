//! Command implementations: generate, judge, score, report, cost, simulate,
//! and validate-baseset. Each command prints a human summary to stdout and,
//! when `--json` is set, one machine-readable JSON line at the end.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anchorbench::aggregate::score_candidate;
use anchorbench::costmodel::{estimate_cost, measure_token_stats, PriceSheet};
use anchorbench::datamodel::{
    load_anchor_set, load_item_set, AnchorSet, ItemSet, LogRef, ModelRef, ScoreReport, Slice,
    Translation, Verdict, EPOCH_TIMESTAMP,
};
use anchorbench::hashing::sha256_file;
use anchorbench::inference::{generate_all, translate_prompt_id, HttpEndpoint};
use anchorbench::judge::{judge_all, HttpPairJudge};
use anchorbench::pairing::{build_pair_plan, PairPlan};
use anchorbench::report::{fmt_cost, fmt_lt, fmt_rate, fmt_tokens, render_markdown, slice_label, write_report};
use anchorbench::simjudge::{simulate_judgment, synth_anchor_set, SimConfig, SimJudge, DEFAULT_THETA_SPREAD};
use anchorbench::store::{read_judgments, JudgmentLog, TranslationStore};
use anyhow::Context;

use crate::config::{config_error, RunConfig};

fn print_json(value: serde_json::Value) {
    println!("{value}");
}

/// Candidates are compared against anchors, never against themselves: an id
/// collision would corrupt the pairing protocol, so it is refused up front.
fn ensure_candidate_is_not_an_anchor(
    baseset: &AnchorSet,
    candidate: &ModelRef,
) -> anyhow::Result<()> {
    if baseset.contains_model(&candidate.id) {
        return Err(config_error(format!(
            "candidate `{}` is already an anchor of base set {}; \
             anchors are scored by their frozen judgments, not as candidates",
            candidate.id, baseset.version
        )));
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// generate
// ---------------------------------------------------------------------------

pub fn generate(config_path: &Path, retry_failed: bool, json: bool) -> anyhow::Result<ExitCode> {
    let config = RunConfig::load(config_path)?;
    let items = config.load_items()?;
    let baseset = config.load_baseset(&items)?;
    let candidate = config.candidate.model_ref();
    ensure_candidate_is_not_an_anchor(&baseset, &candidate)?;

    let summary = if candidate.is_frozen() {
        // Frozen candidates are never called: their outputs must already
        // sit, pre-recorded, in the run's translation store. Verify total
        // coverage so judging cannot start from a partial store.
        let path = config.translations_path();
        if !path.exists() {
            return Err(anyhow::anyhow!(
                "candidate `{}` is frozen but there is no translation store at `{}`; \
                 frozen candidates ship their translations with the run",
                candidate.id,
                path.display()
            ));
        }
        let store = TranslationStore::load(&path)?;
        let mut empty = 0usize;
        for item in &items.items {
            match store.get(&item.id, &candidate.id) {
                Some(t) if t.text.is_empty() => empty += 1,
                Some(_) => {}
                None => {
                    return Err(anyhow::anyhow!(
                        "frozen candidate `{}` has no pre-recorded translation of `{}` in `{}`",
                        candidate.id,
                        item.id,
                        path.display()
                    ));
                }
            }
        }
        println!(
            "frozen candidate `{}`: {} pre-recorded translations verified",
            candidate.id,
            items.len()
        );
        if empty > 0 {
            eprintln!(
                "warning: {empty} pre-recorded translations are empty; \
                 they will lose their comparisons by default"
            );
        }
        anchorbench::inference::GenerateSummary { generated: 0, cached: items.len(), failed: empty }
    } else {
        let profile = &config.endpoints.candidate;
        if profile.base_url.is_empty() {
            return Err(config_error(
                "endpoints.candidate.base_url must be set to generate translations",
            ));
        }
        let endpoint = HttpEndpoint::new(profile)?;
        let mut store = TranslationStore::open(&config.translations_path())?;
        let summary =
            generate_all(&items, &candidate, profile, &endpoint, &mut store, retry_failed)?;
        println!(
            "generated {} translations, reused {} cached, {} failed",
            summary.generated, summary.cached, summary.failed
        );
        if summary.failed > 0 {
            eprintln!(
                "warning: {} items have empty translations (endpoint failures); \
                 they will lose their comparisons by default. Re-run with --retry-failed to retry.",
                summary.failed
            );
        }
        summary
    };

    println!("translations: {}", config.translations_path().display());
    if json {
        print_json(serde_json::json!({
            "command": "generate",
            "candidate": candidate.id,
            "generated": summary.generated,
            "cached": summary.cached,
            "failed": summary.failed,
            "translations": config.translations_path(),
        }));
    }
    Ok(ExitCode::SUCCESS)
}

// ---------------------------------------------------------------------------
// judge
// ---------------------------------------------------------------------------

/// Load the saved pair plan if present (verifying it belongs to this run),
/// else build and save it.
fn load_or_build_plan(
    config: &RunConfig,
    items: &ItemSet,
    baseset: &AnchorSet,
    candidate: &ModelRef,
) -> anyhow::Result<PairPlan> {
    let path = config.plan_path();
    if path.exists() {
        let plan = PairPlan::load(&path)?;
        if plan.candidate != candidate.id {
            return Err(config_error(format!(
                "plan `{}` was built for candidate `{}`, not `{}`",
                path.display(),
                plan.candidate,
                candidate.id
            )));
        }
        if plan.baseset_version != baseset.version {
            return Err(config_error(format!(
                "plan `{}` was built against base set {}, not {}",
                path.display(),
                plan.baseset_version,
                baseset.version
            )));
        }
        if plan.seed != config.seed {
            return Err(config_error(format!(
                "plan `{}` used seed {}, config says {}",
                path.display(),
                plan.seed,
                config.seed
            )));
        }
        Ok(plan)
    } else {
        let plan = build_pair_plan(items, baseset, candidate, config.seed)?;
        plan.save(&path)?;
        Ok(plan)
    }
}

pub fn judge(config_path: &Path, json: bool) -> anyhow::Result<ExitCode> {
    let config = RunConfig::load(config_path)?;
    let items = config.load_items()?;
    let baseset = config.load_baseset(&items)?;
    let candidate = config.candidate.model_ref();
    ensure_candidate_is_not_an_anchor(&baseset, &candidate)?;

    let translations_path = config.translations_path();
    if !translations_path.exists() {
        return Err(anyhow::anyhow!(
            "no translations at `{}`; run `anchorbench generate` first",
            translations_path.display()
        ));
    }
    let mut translations = TranslationStore::load(&translations_path)?;
    translations.merge(&baseset.translations);

    let plan = load_or_build_plan(&config, &items, &baseset, &candidate)?;

    let profile = config.endpoints.judge.clone();
    if profile.base_url.is_empty() {
        return Err(config_error("endpoints.judge.base_url must be set to judge pairs"));
    }
    let judge_config = config.judge.judge_config();
    if judge_config.model.id != baseset.judge.model.id {
        return Err(config_error(format!(
            "judge.model `{}` does not match the base set's judge `{}`; \
             scores are only comparable under the calibrated judge",
            judge_config.model.id, baseset.judge.model.id
        )));
    }
    let endpoint = HttpEndpoint::new(&profile)?;
    let pair_judge = HttpPairJudge::new(endpoint, judge_config, profile.clone())?;

    let log = JudgmentLog::open_append(&config.judgments_path())?;
    let summary = judge_all(&plan, &items, &translations, &pair_judge, &log, profile.max_concurrency)?;

    println!(
        "judged {} pairs ({} already in log), {} refused",
        summary.judged, summary.cached, summary.refused
    );
    if summary.refused > 0 {
        eprintln!(
            "warning: {} judgments ended refused (judge unavailable or no usable verdict); \
             they are recorded and excluded from aggregation",
            summary.refused
        );
    }
    println!("judgments: {}", config.judgments_path().display());
    if json {
        print_json(serde_json::json!({
            "command": "judge",
            "candidate": candidate.id,
            "planned": plan.pairs.len(),
            "judged": summary.judged,
            "cached": summary.cached,
            "refused": summary.refused,
            "judgments": config.judgments_path(),
        }));
    }
    Ok(ExitCode::SUCCESS)
}

// ---------------------------------------------------------------------------
// score
// ---------------------------------------------------------------------------

/// Fill the checklist fields only the CLI knows: the generation prompt hash
/// (when translations were generated by this tool) and the raw log hashes.
fn enrich_checklist(report: &mut ScoreReport, config: &RunConfig) -> anyhow::Result<()> {
    if config.translations_path().exists() {
        report.checklist.generation_prompt_hash = Some(translate_prompt_id().to_string());
    }
    let mut logs = Vec::new();
    for path in [config.judgments_path(), config.translations_path()] {
        if path.exists() {
            let name = path
                .file_name()
                .map(|n| n.to_string_lossy().into_owned())
                .unwrap_or_else(|| path.display().to_string());
            logs.push(LogRef { path: name, sha256: sha256_file(&path)? });
        }
    }
    report.checklist.logs = logs;
    Ok(())
}

fn print_score_summary(report: &ScoreReport) {
    let overall = report.overall();
    let win = overall.and_then(|s| s.win_rate);
    let lt = overall.and_then(|s| s.lt);
    println!(
        "{} vs base set {}: overall win rate {}, LT {}",
        report.candidate,
        report.baseset_version,
        fmt_rate(win),
        fmt_lt(lt)
    );
    for slice in Slice::ALL {
        if let Some(s) = report.per_slice.get(&slice) {
            println!(
                "  {:<22} matches {:>5}  win rate {:>8}  LT {:>6}",
                slice_label(slice),
                s.matches,
                fmt_rate(s.win_rate),
                fmt_lt(s.lt)
            );
        }
    }
}

pub fn score(config_path: &Path, json: bool) -> anyhow::Result<ExitCode> {
    let config = RunConfig::load(config_path)?;
    let items = config.load_items()?;
    let baseset = config.load_baseset(&items)?;
    let candidate = config.candidate.model_ref();
    ensure_candidate_is_not_an_anchor(&baseset, &candidate)?;

    let judgments_path = config.judgments_path();
    if !judgments_path.exists() {
        return Err(anyhow::anyhow!(
            "no judgment log at `{}`; run `anchorbench judge` first",
            judgments_path.display()
        ));
    }
    let judgments = read_judgments(&judgments_path)?;

    // Cross-check the saved plan when one exists: a log judged under a
    // different candidate, base set, or seed must not be scored silently.
    if config.plan_path().exists() {
        let plan = PairPlan::load(&config.plan_path())?;
        if plan.candidate != candidate.id
            || plan.baseset_version != baseset.version
            || plan.seed != config.seed
        {
            return Err(config_error(format!(
                "plan `{}` (candidate `{}`, base set {}, seed {}) does not match this config",
                config.plan_path().display(),
                plan.candidate,
                plan.baseset_version,
                plan.seed
            )));
        }
    }

    let prices = config.prices.price_sheet();
    let mut report = score_candidate(&baseset, &candidate, &judgments, &items, &prices)?;
    enrich_checklist(&mut report, &config)?;
    let (json_path, md_path) = write_report(&config.workdir, &report)?;

    print_score_summary(&report);
    println!("report: {}", json_path.display());
    println!("report: {}", md_path.display());
    if !report.complete {
        eprintln!(
            "warning: report is incomplete; filter notes: {}",
            report.checklist.filter_notes
        );
    }
    if json {
        let overall = report.overall();
        print_json(serde_json::json!({
            "command": "score",
            "candidate": report.candidate,
            "baseset_version": report.baseset_version,
            "overall_win_rate": overall.and_then(|s| s.win_rate),
            "overall_lt": overall.and_then(|s| s.lt),
            "complete": report.complete,
            "report_json": json_path,
            "report_md": md_path,
        }));
    }
    // Scoring what exists is the command's whole job: gaps are flagged in
    // the report (and warned about above), not turned into a failure exit.
    Ok(ExitCode::SUCCESS)
}

// ---------------------------------------------------------------------------
// report
// ---------------------------------------------------------------------------

pub fn report(report_path: &Path, out: Option<PathBuf>, json: bool) -> anyhow::Result<ExitCode> {
    let report = ScoreReport::load(report_path)
        .with_context(|| format!("loading report `{}`", report_path.display()))?;
    let out = out.unwrap_or_else(|| report_path.with_extension("md"));
    std::fs::write(&out, render_markdown(&report))
        .with_context(|| format!("writing `{}`", out.display()))?;
    println!("rendered {}", out.display());
    if json {
        print_json(serde_json::json!({
            "command": "report",
            "report_json": report_path,
            "report_md": out,
        }));
    }
    Ok(ExitCode::SUCCESS)
}

// ---------------------------------------------------------------------------
// cost
// ---------------------------------------------------------------------------

pub fn cost(
    log_path: &Path,
    prices_path: Option<&Path>,
    project: Option<u64>,
    json: bool,
) -> anyhow::Result<ExitCode> {
    let judgments = read_judgments(log_path)?;
    let refused = judgments.iter().filter(|j| j.verdict == Verdict::JudgeRefused).count();
    let prices = match prices_path {
        Some(p) => PriceSheet::load(p)?,
        None => PriceSheet::default(),
    };
    let stats = measure_token_stats(&judgments)?;
    let count = project.unwrap_or(stats.judgment_count);
    let estimate = estimate_cost(&stats, count, &prices);

    println!(
        "log: {} judgments ({} decided, {} refused)",
        judgments.len(),
        stats.judgment_count,
        refused
    );
    println!(
        "mean tokens per judgment: {:.1} input, {:.1} output",
        stats.mean_input, stats.mean_output
    );
    println!("projected over {count} judgments:");
    println!("| Component | Tokens | Cost |");
    println!("|---|---|---|");
    println!(
        "| Input | {} | {} |",
        fmt_tokens(estimate.input_tokens),
        fmt_cost(estimate.input_cost, &estimate.currency)
    );
    println!(
        "| Output | {} | {} |",
        fmt_tokens(estimate.output_tokens),
        fmt_cost(estimate.output_cost, &estimate.currency)
    );
    println!("| **Total** | | **{}** |", fmt_cost(estimate.total, &estimate.currency));
    if estimate.estimated_fraction > 0.0 {
        println!(
            "note: token counts for {:.1}% of judgments were estimated from byte lengths",
            estimate.estimated_fraction * 100.0
        );
    }
    if json {
        print_json(serde_json::json!({
            "command": "cost",
            "judgments": count,
            "estimate": estimate,
        }));
    }
    Ok(ExitCode::SUCCESS)
}

// ---------------------------------------------------------------------------
// simulate
// ---------------------------------------------------------------------------

pub struct SimulateArgs {
    pub out: PathBuf,
    pub anchors: usize,
    pub items: Option<PathBuf>,
    pub seed: u64,
    pub candidate_id: String,
    pub candidate_theta: f64,
    pub theta_spread: f64,
    pub noise: f64,
    pub bias: f64,
    pub bias_sweep: bool,
    pub force: bool,
}

impl Default for SimulateArgs {
    fn default() -> Self {
        SimulateArgs {
            out: PathBuf::new(),
            anchors: 5,
            items: None,
            seed: 42,
            candidate_id: "sim-candidate".into(),
            candidate_theta: 1.0,
            theta_spread: DEFAULT_THETA_SPREAD,
            noise: 1.0,
            bias: 0.0,
            bias_sweep: false,
            force: false,
        }
    }
}

/// The run config text `simulate` emits so its outputs can be re-scored with
/// the ordinary `score` command.
fn simulated_run_toml(args: &SimulateArgs) -> String {
    format!(
        r#"# Generated by `anchorbench simulate`. Paths are relative to this file.
itemset = "itemset.json"
baseset = "baseset"
workdir = "work"
seed = {seed}

[candidate]
id = "{candidate}"

[judge]
model = "{judge}"
"#,
        seed = args.seed,
        candidate = args.candidate_id,
        judge = anchorbench::simjudge::SIM_JUDGE_ID,
    )
}

pub fn simulate(args: &SimulateArgs, json: bool) -> anyhow::Result<ExitCode> {
    if args.out.exists() && args.out.read_dir().map(|mut d| d.next().is_some()).unwrap_or(true) {
        if !args.force {
            return Err(config_error(format!(
                "output directory `{}` exists and is not empty (use --force to replace it)",
                args.out.display()
            )));
        }
        std::fs::remove_dir_all(&args.out)
            .with_context(|| format!("clearing `{}`", args.out.display()))?;
    }
    std::fs::create_dir_all(&args.out)
        .with_context(|| format!("creating `{}`", args.out.display()))?;

    let items = match &args.items {
        Some(path) => load_item_set(path)?,
        None => anchorbench::sample_item_set(),
    };
    items.save(&args.out.join("itemset.json"))?;

    let base_cfg = SimConfig {
        rng_seed: args.seed,
        position_bias: args.bias,
        noise_temperature: args.noise,
        ..Default::default()
    };
    let (anchor_set, mut world) =
        synth_anchor_set(args.anchors, args.theta_spread, &items, &base_cfg)?;
    anchor_set.save(&args.out.join("baseset"), &items)?;

    if world.true_theta.contains_key(&args.candidate_id) {
        return Err(config_error(format!(
            "candidate id `{}` collides with an anchor id",
            args.candidate_id
        )));
    }
    world.true_theta.insert(args.candidate_id.clone(), args.candidate_theta);
    anchorbench::datamodel::write_json(&args.out.join("simconfig.json"), &world)?;

    let workdir = args.out.join("work");
    std::fs::create_dir_all(&workdir)?;

    // Candidate translations: deterministic placeholders.
    let candidate = ModelRef {
        id: args.candidate_id.clone(),
        endpoint: "candidate".into(),
        decoding: Default::default(),
    };
    let mut translations = TranslationStore::open(&workdir.join("translations.jsonl"))?;
    for item in &items.items {
        translations.insert_persist(Translation {
            item_id: item.id.clone(),
            model_id: candidate.id.clone(),
            text: format!("[{} rendering of {}]", candidate.id, item.id),
            generated_at: EPOCH_TIMESTAMP.into(),
            generation_meta: Default::default(),
        })?;
    }
    translations.merge(&anchor_set.translations);

    // Plan and judge sequentially: one worker keeps the log byte-stable.
    let plan = build_pair_plan(&items, &anchor_set, &candidate, args.seed)?;
    plan.save(&workdir.join("plan.json"))?;
    let sim_judge = SimJudge::new(world.clone())?;
    let log = JudgmentLog::open_append(&workdir.join("judgments.jsonl"))?;
    let summary = judge_all(&plan, &items, &translations, &sim_judge, &log, 1)?;

    // Score through the same path a real run takes.
    let judgments = log.read_existing()?;
    let run_toml_path = args.out.join("run.toml");
    std::fs::write(&run_toml_path, simulated_run_toml(args))?;
    let run_config = RunConfig::load(&run_toml_path)?;
    let mut report =
        score_candidate(&anchor_set, &candidate, &judgments, &items, &run_config.prices.price_sheet())?;
    enrich_checklist(&mut report, &run_config)?;
    let (json_path, _md_path) = write_report(&workdir, &report)?;

    println!(
        "simulated world: {} anchors over {} items, candidate `{}` at true strength {:+.2}",
        args.anchors,
        items.len(),
        args.candidate_id,
        args.candidate_theta
    );
    println!("judged {} pairs ({} refused)", summary.judged, summary.refused);
    print_score_summary(&report);
    println!("wrote {}", run_toml_path.display());
    println!("wrote {}", json_path.display());

    if args.bias_sweep {
        println!("\nslot-A win rate under position bias (same world, re-drawn):");
        println!("| Bias | Slot-A rate |");
        println!("|---|---|");
        for step in 0..=4 {
            let bias = step as f64 * 0.05;
            let mut swept = world.clone();
            swept.position_bias = bias;
            let a_wins = plan
                .pairs
                .iter()
                .filter(|pair| {
                    simulate_judgment(pair, &swept)
                        .map(|j| j.verdict == Verdict::A)
                        .unwrap_or(false)
                })
                .count();
            println!("| {bias:.2} | {} |", fmt_rate(Some(a_wins as f64 / plan.pairs.len() as f64)));
        }
    }

    if json {
        let overall = report.overall();
        print_json(serde_json::json!({
            "command": "simulate",
            "out": args.out,
            "candidate": args.candidate_id,
            "judged": summary.judged,
            "overall_win_rate": overall.and_then(|s| s.win_rate),
            "overall_lt": overall.and_then(|s| s.lt),
            "report_json": json_path,
            "run_config": run_toml_path,
        }));
    }
    Ok(ExitCode::SUCCESS)
}

// ---------------------------------------------------------------------------
// validate-baseset
// ---------------------------------------------------------------------------

/// Exit 0 when the anchor set is valid, 1 when its data is invalid, 2 when
/// a path cannot be read at all.
pub fn validate_baseset(baseset: &Path, itemset: &Path, json: bool) -> ExitCode {
    fn classify(err: &anchorbench::Error) -> u8 {
        match err {
            anchorbench::Error::Io { .. } => 2,
            _ => 1,
        }
    }

    let verdict = (|| -> Result<(ItemSet, AnchorSet), (u8, String)> {
        let items = load_item_set(itemset)
            .map_err(|e| (classify(&e), format!("item set `{}`: {e}", itemset.display())))?;
        println!("ok: item set `{}` with {} items", items.name, items.len());
        let set = load_anchor_set(baseset, &items)
            .map_err(|e| (classify(&e), format!("anchor set `{}`: {e}", baseset.display())))?;
        Ok((items, set))
    })();

    match verdict {
        Ok((items, set)) => {
            println!("ok: version {}", set.version);
            println!("ok: judge `{}` prompt {}", set.judge.model.id, set.judge.prompt_id);
            println!(
                "ok: {} anchors, {} translations ({} items x {} anchors), {} frozen judgments",
                set.anchors.len(),
                set.translations.len(),
                items.len(),
                set.anchors.len(),
                set.frozen_judgments.len()
            );
            println!("base set OK");
            if json {
                print_json(serde_json::json!({
                    "command": "validate-baseset",
                    "valid": true,
                    "version": set.version,
                    "anchors": set.anchors.len(),
                    "frozen_judgments": set.frozen_judgments.len(),
                }));
            }
            ExitCode::SUCCESS
        }
        Err((code, message)) => {
            eprintln!("invalid: {message}");
            if json {
                print_json(serde_json::json!({
                    "command": "validate-baseset",
                    "valid": false,
                    "error": message,
                }));
            }
            ExitCode::from(code)
        }
    }
}
