//! End-to-end tests of the `anchorbench` binary: exit codes, pipeline flows
//! against canned local HTTP endpoints, determinism of simulated runs, and
//! the read-only contract over frozen base set directories.

use std::collections::BTreeMap;
use std::io::{Read, Write};
use std::net::TcpListener;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Arc;
use std::time::Duration;

use anchorbench::datamodel::{
    Direction, Item, ItemSet, JudgeConfig, JudgeRef, ModelRef, Tier, Translation,
    EPOCH_TIMESTAMP,
};
use anchorbench::hashing::sha256_file;
use anchorbench::inference::translate_prompt_id;
use anchorbench::judge::compare_prompt_id;
use anchorbench::simjudge::{synth_anchor_set, SimConfig, DEFAULT_THETA_SPREAD};
use anchorbench::store::TranslationStore;

// ---------------------------------------------------------------------------
// Harness
// ---------------------------------------------------------------------------

fn anchorbench(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_anchorbench"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("run anchorbench binary")
}

fn stdout_of(output: &Output) -> String {
    String::from_utf8_lossy(&output.stdout).into_owned()
}

fn stderr_of(output: &Output) -> String {
    String::from_utf8_lossy(&output.stderr).into_owned()
}

#[track_caller]
fn assert_exit(output: &Output, code: i32) {
    assert_eq!(
        output.status.code(),
        Some(code),
        "expected exit {code}\n--- stdout ---\n{}\n--- stderr ---\n{}",
        stdout_of(output),
        stderr_of(output)
    );
}

/// Recursive content snapshot of a directory: relative path -> sha256.
fn dir_snapshot(dir: &Path) -> BTreeMap<String, String> {
    fn walk(root: &Path, dir: &Path, out: &mut BTreeMap<String, String>) {
        for entry in std::fs::read_dir(dir).expect("read_dir") {
            let path = entry.expect("dir entry").path();
            if path.is_dir() {
                walk(root, &path, out);
            } else {
                let rel = path.strip_prefix(root).unwrap().to_string_lossy().into_owned();
                out.insert(rel, sha256_file(&path).expect("hash file"));
            }
        }
    }
    let mut out = BTreeMap::new();
    walk(dir, dir, &mut out);
    out
}

/// Run `simulate` into `<dir>/world` with a small anchor pool and return the
/// emitted run config path.
fn simulate_world(dir: &Path, extra: &[&str]) -> PathBuf {
    let mut args = vec!["simulate", "--out", "world", "--anchors", "3", "--seed", "7"];
    args.extend_from_slice(extra);
    let output = anchorbench(dir, &args);
    assert_exit(&output, 0);
    dir.join("world/run.toml")
}

// ---------------------------------------------------------------------------
// Canned chat endpoint
// ---------------------------------------------------------------------------

/// Serve `POST /chat/completions` forever on a local port, answering each
/// request with `handler(body)` and counting hits. Connections are handled
/// one at a time; concurrent callers queue on the listener backlog.
fn serve_chat(
    handler: impl Fn(&str) -> String + Send + 'static,
) -> (String, Arc<AtomicUsize>) {
    let listener = TcpListener::bind("127.0.0.1:0").expect("bind local listener");
    let base_url = format!("http://{}", listener.local_addr().unwrap());
    let hits = Arc::new(AtomicUsize::new(0));
    let counter = Arc::clone(&hits);
    std::thread::spawn(move || loop {
        let (mut stream, _) = match listener.accept() {
            Ok(conn) => conn,
            Err(_) => return,
        };
        stream.set_read_timeout(Some(Duration::from_secs(5))).unwrap();
        let body = read_request_body(&mut stream);
        counter.fetch_add(1, Ordering::SeqCst);
        let response = handler(&body);
        let reply = format!(
            "HTTP/1.1 200 OK\r\ncontent-type: application/json\r\ncontent-length: {}\r\nconnection: close\r\n\r\n{}",
            response.len(),
            response
        );
        let _ = stream.write_all(reply.as_bytes());
    });
    (base_url, hits)
}

fn read_request_body(stream: &mut std::net::TcpStream) -> String {
    let mut buf = Vec::new();
    let mut chunk = [0u8; 1024];
    let header_end = loop {
        let n = stream.read(&mut chunk).expect("read request");
        buf.extend_from_slice(&chunk[..n]);
        if let Some(pos) = buf.windows(4).position(|w| w == b"\r\n\r\n") {
            break pos;
        }
        if n == 0 {
            panic!("connection closed before headers finished");
        }
    };
    let head = String::from_utf8_lossy(&buf[..header_end]).to_ascii_lowercase();
    let content_length: usize = head
        .split("\r\n")
        .find_map(|h| h.strip_prefix("content-length:"))
        .and_then(|v| v.trim().parse().ok())
        .unwrap_or(0);
    let mut body = buf[header_end + 4..].to_vec();
    while body.len() < content_length {
        let n = stream.read(&mut chunk).expect("read body");
        if n == 0 {
            break;
        }
        body.extend_from_slice(&chunk[..n]);
    }
    String::from_utf8_lossy(&body).into_owned()
}

fn chat_reply(content: &str, prompt_tokens: u64, completion_tokens: u64) -> String {
    serde_json::json!({
        "choices": [{"message": {"content": content}, "finish_reason": "stop"}],
        "usage": {"prompt_tokens": prompt_tokens, "completion_tokens": completion_tokens},
    })
    .to_string()
}

/// Translation requests carry the translate template; everything else on the
/// shared endpoint is a judge call, which this server always answers `A`.
fn canned_chat_handler(body: &str) -> String {
    if body.contains("Translate the following") {
        chat_reply("Canned rendering.", 64, 16)
    } else {
        chat_reply(
            "<translation_analysis>Slot A reads better.</translation_analysis>\n<answer>A</answer>",
            512,
            32,
        )
    }
}

// ---------------------------------------------------------------------------
// Canned world: a tiny item set and 2-anchor base set judged by `canned-judge`
// ---------------------------------------------------------------------------

fn small_item_set() -> ItemSet {
    let texts = [
        "The last train leaves at midnight.",
        "会議は明日の午前十時に始まります。",
        "Please keep the receipt for your records.",
        "この薬は食後に服用してください。",
        "Our team shipped the feature ahead of schedule.",
        "彼女は窓の外の雨をじっと見ていた。",
    ];
    let items = texts
        .iter()
        .enumerate()
        .map(|(i, text)| Item {
            id: format!("item-{i:02}"),
            direction: if i % 2 == 0 { Direction::EnToJa } else { Direction::JaToEn },
            tier: if i % 3 == 0 { Tier::Hard } else { Tier::Easy },
            source_text: (*text).into(),
        })
        .collect();
    ItemSet { name: "canned-items".into(), items }
}

/// Build an on-disk world whose base set was (nominally) frozen under a judge
/// called `canned-judge`, plus a run config pointing both endpoints at
/// `base_url`. Returns the run config path.
fn canned_world(dir: &Path, base_url: &str, candidate: &str, endpoint: &str) -> PathBuf {
    let items = small_item_set();
    items.save(&dir.join("itemset.json")).unwrap();

    let sim = SimConfig { rng_seed: 5, ..Default::default() };
    let (mut set, _world) = synth_anchor_set(2, DEFAULT_THETA_SPREAD, &items, &sim).unwrap();
    set.judge = JudgeConfig {
        model: ModelRef {
            id: "canned-judge".into(),
            endpoint: "judge".into(),
            decoding: Default::default(),
        },
        prompt_id: compare_prompt_id().to_string(),
        decoding: Default::default(),
        max_retries: 3,
    };
    // Restamp the frozen judgments so the snapshot is self-consistent.
    for judgment in &mut set.frozen_judgments {
        judgment.judge = JudgeRef::from(&set.judge);
    }
    set.save(&dir.join("baseset"), &items).unwrap();

    let config = format!(
        r#"itemset = "itemset.json"
baseset = "baseset"
workdir = "work"
seed = 11

[candidate]
id = "{candidate}"
endpoint = "{endpoint}"

[judge]
model = "canned-judge"

[endpoints.candidate]
base_url = "{base_url}"
request_timeout_ms = 5000
retry_backoff_ms = 1

[endpoints.judge]
base_url = "{base_url}"
request_timeout_ms = 5000
retry_backoff_ms = 1
max_concurrency = 2
"#
    );
    let path = dir.join("run.toml");
    std::fs::write(&path, config).unwrap();
    path
}

// ---------------------------------------------------------------------------
// simulate / score / validate / inspect flows
// ---------------------------------------------------------------------------

#[test]
fn simulate_emits_a_complete_scoreable_world() {
    let dir = tempfile::tempdir().unwrap();
    simulate_world(dir.path(), &[]);

    for file in [
        "world/itemset.json",
        "world/simconfig.json",
        "world/run.toml",
        "world/baseset/manifest.json",
        "world/baseset/translations.jsonl",
        "world/baseset/judgments.jsonl",
        "world/baseset/itemset.json",
        "world/work/translations.jsonl",
        "world/work/plan.json",
        "world/work/judgments.jsonl",
        "world/work/report.json",
        "world/work/report.md",
    ] {
        assert!(dir.path().join(file).exists(), "missing {file}");
    }
}

#[test]
fn score_reproduces_a_simulated_report_byte_for_byte() {
    let dir = tempfile::tempdir().unwrap();
    let config = simulate_world(dir.path(), &[]);

    let report_path = dir.path().join("world/work/report.json");
    let original = std::fs::read(&report_path).unwrap();
    std::fs::remove_file(&report_path).unwrap();
    std::fs::remove_file(dir.path().join("world/work/report.md")).unwrap();

    let output = anchorbench(dir.path(), &["score", "--config", config.to_str().unwrap(), "--json"]);
    assert_exit(&output, 0);
    assert_eq!(std::fs::read(&report_path).unwrap(), original, "report.json changed across re-score");

    // The final stdout line is the machine-readable summary.
    let stdout = stdout_of(&output);
    let last = stdout.lines().last().unwrap();
    let summary: serde_json::Value = serde_json::from_str(last).expect("JSON summary line");
    assert_eq!(summary["command"], "score");
    assert_eq!(summary["complete"], true);
    assert!(summary["overall_lt"].as_f64().is_some());
}

#[test]
fn simulate_is_deterministic_across_output_directories() {
    let dir = tempfile::tempdir().unwrap();
    let out_a = anchorbench(dir.path(), &["simulate", "--out", "a", "--anchors", "3", "--seed", "9"]);
    let out_b = anchorbench(dir.path(), &["simulate", "--out", "b", "--anchors", "3", "--seed", "9"]);
    assert_exit(&out_a, 0);
    assert_exit(&out_b, 0);
    assert_eq!(
        dir_snapshot(&dir.path().join("a")),
        dir_snapshot(&dir.path().join("b")),
        "same seed must produce identical files"
    );
}

#[test]
fn simulate_refuses_to_overwrite_without_force() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::create_dir(dir.path().join("world")).unwrap();
    std::fs::write(dir.path().join("world/precious.txt"), "keep me").unwrap();

    let refused = anchorbench(dir.path(), &["simulate", "--out", "world", "--anchors", "3"]);
    assert_exit(&refused, 2);
    assert!(stderr_of(&refused).contains("--force"), "{}", stderr_of(&refused));
    assert!(dir.path().join("world/precious.txt").exists());

    let forced = anchorbench(dir.path(), &["simulate", "--out", "world", "--anchors", "3", "--force"]);
    assert_exit(&forced, 0);
    assert!(!dir.path().join("world/precious.txt").exists(), "--force must replace the directory");
}

#[test]
fn validate_baseset_accepts_a_simulated_world() {
    let dir = tempfile::tempdir().unwrap();
    simulate_world(dir.path(), &[]);
    let output = anchorbench(
        dir.path(),
        &["validate-baseset", "--baseset", "world/baseset", "--itemset", "world/itemset.json"],
    );
    assert_exit(&output, 0);
    assert!(stdout_of(&output).contains("base set OK"));
}

#[test]
fn validate_baseset_rejects_corrupted_data() {
    let dir = tempfile::tempdir().unwrap();
    simulate_world(dir.path(), &[]);

    // Drop half the translation lines: anchor coverage is no longer total.
    let translations = dir.path().join("world/baseset/translations.jsonl");
    let text = std::fs::read_to_string(&translations).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    let kept = &lines[..lines.len() / 2];
    std::fs::write(&translations, format!("{}\n", kept.join("\n"))).unwrap();

    let output = anchorbench(
        dir.path(),
        &["validate-baseset", "--baseset", "world/baseset", "--itemset", "world/itemset.json"],
    );
    assert_exit(&output, 1);
    assert!(stderr_of(&output).contains("invalid:"), "{}", stderr_of(&output));
}

#[test]
fn validate_baseset_exits_two_when_paths_are_unreadable() {
    let dir = tempfile::tempdir().unwrap();
    let output = anchorbench(
        dir.path(),
        &["validate-baseset", "--baseset", "no-such-dir", "--itemset", "no-such-items.json"],
    );
    assert_exit(&output, 2);
}

#[test]
fn inspect_dump_renders_slot_assignments_and_verdicts() {
    let dir = tempfile::tempdir().unwrap();
    let config = simulate_world(dir.path(), &[]);
    let config = config.to_str().unwrap();

    let output = anchorbench(dir.path(), &["inspect", "--config", config, "--dump"]);
    assert_exit(&output, 0);
    let stdout = stdout_of(&output);
    assert!(stdout.contains("judgments from"), "{stdout}");
    assert!(stdout.contains("Slot A:"), "dump must show the judged slot mapping");
    assert!(stdout.contains("Verdict: "), "dump must show verdicts");

    // Filters narrow the dump; the simulated judge never refuses non-empty
    // pairs, so the frozen log holds zero refusals.
    let refused = anchorbench(
        dir.path(),
        &["inspect", "--config", config, "--frozen", "--verdict", "refused", "--dump"],
    );
    assert_exit(&refused, 0);
    assert!(stdout_of(&refused).starts_with("0 of "), "{}", stdout_of(&refused));

    let bad_filter = anchorbench(
        dir.path(),
        &["inspect", "--config", config, "--verdict", "maybe", "--dump"],
    );
    assert_exit(&bad_filter, 2);
}

#[test]
fn report_rerenders_markdown_from_the_json_report() {
    let dir = tempfile::tempdir().unwrap();
    simulate_world(dir.path(), &[]);

    let output = anchorbench(
        dir.path(),
        &["report", "--report", "world/work/report.json", "--out", "rendered.md"],
    );
    assert_exit(&output, 0);
    let rendered = std::fs::read(dir.path().join("rendered.md")).unwrap();
    let original = std::fs::read(dir.path().join("world/work/report.md")).unwrap();
    assert_eq!(rendered, original, "re-rendering the JSON report must reproduce report.md");
}

#[test]
fn cost_projects_token_spend_from_a_judgment_log() {
    let dir = tempfile::tempdir().unwrap();
    simulate_world(dir.path(), &[]);

    let output = anchorbench(
        dir.path(),
        &["cost", "--log", "world/work/judgments.jsonl", "--project", "1400"],
    );
    assert_exit(&output, 0);
    let stdout = stdout_of(&output);
    assert!(stdout.contains("projected over 1400 judgments"), "{stdout}");
    assert!(stdout.contains("| Input |"), "{stdout}");
    assert!(stdout.contains("| **Total** |"), "{stdout}");
}

// ---------------------------------------------------------------------------
// Exit codes
// ---------------------------------------------------------------------------

#[test]
fn missing_config_file_is_a_configuration_error() {
    let dir = tempfile::tempdir().unwrap();
    let output = anchorbench(dir.path(), &["score", "--config", "no-such.toml"]);
    assert_exit(&output, 2);
    assert!(stderr_of(&output).contains("cannot read config"), "{}", stderr_of(&output));
}

#[test]
fn malformed_config_file_is_a_configuration_error() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("run.toml"), "not = [valid").unwrap();
    let output = anchorbench(dir.path(), &["score", "--config", "run.toml"]);
    assert_exit(&output, 2);
}

#[test]
fn scoring_before_judging_is_a_runtime_error() {
    let dir = tempfile::tempdir().unwrap();
    let config = simulate_world(dir.path(), &[]);
    // Point the same world at a fresh workdir that holds no judgments.
    let text = std::fs::read_to_string(&config).unwrap();
    let moved = text.replace("workdir = \"work\"", "workdir = \"fresh\"");
    std::fs::write(dir.path().join("world/fresh.toml"), moved).unwrap();

    let output = anchorbench(dir.path(), &["score", "--config", "world/fresh.toml"]);
    assert_exit(&output, 1);
    assert!(stderr_of(&output).contains("anchorbench judge"), "{}", stderr_of(&output));
}

#[test]
fn scoring_a_partial_log_flags_the_report_but_exits_zero() {
    let dir = tempfile::tempdir().unwrap();
    let config = simulate_world(dir.path(), &[]);

    // Drop the tail of the judgment log: planned comparisons are now missing.
    let log = dir.path().join("world/work/judgments.jsonl");
    let text = std::fs::read_to_string(&log).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    std::fs::write(&log, format!("{}\n", lines[..lines.len() / 2].join("\n"))).unwrap();

    let output = anchorbench(dir.path(), &["score", "--config", config.to_str().unwrap(), "--json"]);
    assert_exit(&output, 0);
    assert!(stderr_of(&output).contains("incomplete"), "{}", stderr_of(&output));
    let stdout = stdout_of(&output);
    let summary: serde_json::Value = serde_json::from_str(stdout.lines().last().unwrap()).unwrap();
    assert_eq!(summary["complete"], false);
}

#[test]
fn scoring_under_a_mismatched_seed_is_a_configuration_error() {
    let dir = tempfile::tempdir().unwrap();
    let config = simulate_world(dir.path(), &[]);
    let text = std::fs::read_to_string(&config).unwrap();
    std::fs::write(&config, text.replace("seed = 7", "seed = 8")).unwrap();

    let output = anchorbench(dir.path(), &["score", "--config", config.to_str().unwrap()]);
    assert_exit(&output, 2);
    assert!(stderr_of(&output).contains("does not match this config"), "{}", stderr_of(&output));
}

#[test]
fn an_anchor_id_candidate_is_a_configuration_error() {
    let dir = tempfile::tempdir().unwrap();
    let (base_url, _hits) = serve_chat(canned_chat_handler);
    let config = canned_world(dir.path(), &base_url, "anchor-00", "candidate");
    let output = anchorbench(dir.path(), &["generate", "--config", config.to_str().unwrap()]);
    assert_exit(&output, 2);
    assert!(stderr_of(&output).contains("already an anchor"), "{}", stderr_of(&output));
}

// ---------------------------------------------------------------------------
// generate / judge / score against canned HTTP endpoints
// ---------------------------------------------------------------------------

#[test]
fn full_pipeline_runs_against_canned_endpoints() {
    let dir = tempfile::tempdir().unwrap();
    let (base_url, hits) = serve_chat(canned_chat_handler);
    let config_path = canned_world(dir.path(), &base_url, "cand-live", "candidate");
    let config = config_path.to_str().unwrap();
    let baseline = dir_snapshot(&dir.path().join("baseset"));

    // generate: 6 items, one endpoint call each.
    let generate = anchorbench(dir.path(), &["generate", "--config", config]);
    assert_exit(&generate, 0);
    assert!(stdout_of(&generate).contains("generated 6 translations, reused 0 cached, 0 failed"));
    assert_eq!(hits.load(Ordering::SeqCst), 6);

    // rerun: fully cached, no further endpoint traffic.
    let rerun = anchorbench(dir.path(), &["generate", "--config", config]);
    assert_exit(&rerun, 0);
    assert!(stdout_of(&rerun).contains("generated 0 translations, reused 6 cached, 0 failed"));
    assert_eq!(hits.load(Ordering::SeqCst), 6);

    // judge: 6 items x 2 anchors = 12 pairs.
    let judge = anchorbench(dir.path(), &["judge", "--config", config]);
    assert_exit(&judge, 0);
    assert!(stdout_of(&judge).contains("judged 12 pairs (0 already in log), 0 refused"));
    assert_eq!(hits.load(Ordering::SeqCst), 18);

    // rejudging resumes from the log without calling the endpoint again.
    let rejudge = anchorbench(dir.path(), &["judge", "--config", config]);
    assert_exit(&rejudge, 0);
    assert!(stdout_of(&rejudge).contains("judged 0 pairs (12 already in log), 0 refused"));
    assert_eq!(hits.load(Ordering::SeqCst), 18);

    // score: complete report, exit 0, checklist filled in.
    let score = anchorbench(dir.path(), &["score", "--config", config]);
    assert_exit(&score, 0);
    assert!(stdout_of(&score).contains("overall win rate"));

    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("work/report.json")).unwrap())
            .unwrap();
    assert_eq!(report["complete"], true);
    assert_eq!(report["candidate"], "cand-live");
    assert_eq!(report["per_slice"]["overall"]["matches"], 12);
    assert_eq!(report["checklist"]["generation_prompt_hash"], translate_prompt_id());
    let logs = report["checklist"]["logs"].as_array().unwrap();
    let log_names: Vec<&str> = logs.iter().map(|l| l["path"].as_str().unwrap()).collect();
    assert_eq!(log_names, ["judgments.jsonl", "translations.jsonl"]);

    // The frozen base set directory was never written to.
    assert_eq!(dir_snapshot(&dir.path().join("baseset")), baseline, "base set must stay read-only");
}

#[test]
fn frozen_candidates_are_verified_not_generated() {
    let dir = tempfile::tempdir().unwrap();
    let (base_url, hits) = serve_chat(canned_chat_handler);
    let config_path = canned_world(dir.path(), &base_url, "cand-frozen", "frozen");
    let config = config_path.to_str().unwrap();

    // Without pre-recorded translations the run cannot proceed.
    let missing = anchorbench(dir.path(), &["generate", "--config", config]);
    assert_exit(&missing, 1);
    assert!(stderr_of(&missing).contains("frozen"), "{}", stderr_of(&missing));

    // Pre-record a translation of every item, then generate only verifies.
    let items = small_item_set();
    std::fs::create_dir_all(dir.path().join("work")).unwrap();
    let mut store = TranslationStore::open(&dir.path().join("work/translations.jsonl")).unwrap();
    for item in &items.items {
        store
            .insert_persist(Translation {
                item_id: item.id.clone(),
                model_id: "cand-frozen".into(),
                text: format!("pre-recorded rendering of {}", item.id),
                generated_at: EPOCH_TIMESTAMP.into(),
                generation_meta: Default::default(),
            })
            .unwrap();
    }
    let verified = anchorbench(dir.path(), &["generate", "--config", config]);
    assert_exit(&verified, 0);
    assert!(stdout_of(&verified).contains("6 pre-recorded translations verified"));
    assert_eq!(hits.load(Ordering::SeqCst), 0, "frozen candidates must never hit the endpoint");
}

#[test]
fn judge_endpoint_outage_degrades_to_recorded_refusals() {
    let dir = tempfile::tempdir().unwrap();

    // A port that is bound and immediately released: connections are refused.
    let dead_port = {
        let listener = TcpListener::bind("127.0.0.1:0").unwrap();
        listener.local_addr().unwrap().port()
    };
    let dead_url = format!("http://127.0.0.1:{dead_port}");
    let config_path = canned_world(dir.path(), &dead_url, "cand-frozen", "frozen");
    let config = config_path.to_str().unwrap();

    // Tighten the retry budget so the outage is cheap to observe.
    let text = std::fs::read_to_string(&config_path).unwrap();
    let text = text.replace("retry_backoff_ms = 1", "retry_backoff_ms = 1\nmax_retries = 0");
    std::fs::write(&config_path, text).unwrap();

    let items = small_item_set();
    std::fs::create_dir_all(dir.path().join("work")).unwrap();
    let mut store = TranslationStore::open(&dir.path().join("work/translations.jsonl")).unwrap();
    for item in &items.items {
        store
            .insert_persist(Translation {
                item_id: item.id.clone(),
                model_id: "cand-frozen".into(),
                text: format!("pre-recorded rendering of {}", item.id),
                generated_at: EPOCH_TIMESTAMP.into(),
                generation_meta: Default::default(),
            })
            .unwrap();
    }
    assert_exit(&anchorbench(dir.path(), &["generate", "--config", config]), 0);

    // The outage is a protocol-level outcome, not a tool failure: every pair
    // is recorded as refused and the command still exits 0 with a warning.
    let judge = anchorbench(dir.path(), &["judge", "--config", config]);
    assert_exit(&judge, 0);
    assert!(stdout_of(&judge).contains("judged 12 pairs (0 already in log), 12 refused"));
    assert!(stderr_of(&judge).contains("warning:"), "{}", stderr_of(&judge));

    // All pairs have records, so the report is complete; with zero decided
    // matches there is no win rate to print.
    let score = anchorbench(dir.path(), &["score", "--config", config]);
    assert_exit(&score, 0);
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("work/report.json")).unwrap())
            .unwrap();
    assert_eq!(report["complete"], true);
    assert_eq!(report["per_slice"]["overall"]["matches"], 0);
    assert!(report["per_slice"]["overall"]["win_rate"].is_null());
}
