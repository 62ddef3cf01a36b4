//! Read-only judgment browser: a two-pane TUI over a judgment log, and a
//! `--dump` mode that prints the same detail text for every (filtered)
//! record so runs can be reviewed or diffed without a terminal.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anchorbench::datamodel::{Item, ItemSet, Judgment, Slice, Verdict};
use anchorbench::pairing::slice_of;
use anchorbench::store::read_judgments;
use anyhow::Context;
use crossterm::event::{self, Event, KeyCode, KeyEventKind};
use ratatui::layout::{Constraint, Direction, Layout};
use ratatui::style::{Modifier, Style};
use ratatui::text::Line;
use ratatui::widgets::{Block, Borders, List, ListItem, ListState, Paragraph, Wrap};

use crate::config::{config_error, RunConfig};

pub struct InspectArgs {
    pub config: PathBuf,
    /// Explicit log path; overrides the workdir default.
    pub log: Option<PathBuf>,
    /// Browse the base set's frozen judgment log instead of the run's.
    pub frozen: bool,
    pub item: Option<String>,
    pub model: Option<String>,
    pub verdict: Option<String>,
    pub slice: Option<String>,
    pub dump: bool,
}

/// One browsable record: a one-line list label plus the full detail text.
struct Entry {
    label: String,
    detail: String,
}

fn verdict_name(verdict: Verdict) -> &'static str {
    match verdict {
        Verdict::A => "A",
        Verdict::B => "B",
        Verdict::JudgeRefused => "refused",
    }
}

fn list_label(judgment: &Judgment) -> String {
    let outcome = match &judgment.winner_model {
        Some(winner) => format!("{} wins", winner),
        None => "refused".to_string(),
    };
    format!(
        "{}  {} vs {}  [{}]",
        judgment.pair.item_id, judgment.pair.left_model, judgment.pair.right_model, outcome
    )
}

/// Full detail text of one judgment. The slot lines are derived from the
/// recorded `a_side`, so what reads as "Translation A" here is exactly what
/// the judge saw in slot A.
fn detail_text(judgment: &Judgment, item: Option<&Item>) -> String {
    let pair = &judgment.pair;
    let mut out = String::new();
    match item {
        Some(item) => {
            out.push_str(&format!(
                "Item: {} ({}, {})\n",
                item.id,
                serde_plain_name(&item.direction),
                serde_plain_name(&item.tier)
            ));
            out.push_str(&format!("Source: {}\n", item.source_text));
        }
        None => out.push_str(&format!("Item: {} (not in the loaded item set)\n", pair.item_id)),
    }
    out.push_str(&format!(
        "Pair: left={} right={} (seed {})\n",
        pair.left_model, pair.right_model, pair.seed_used
    ));
    out.push_str(&format!(
        "Slot A: {}   Slot B: {}\n",
        pair.model_in_slot_a(),
        pair.model_in_slot_b()
    ));
    out.push_str(&format!("Verdict: {}", verdict_name(judgment.verdict)));
    match &judgment.winner_model {
        Some(winner) => out.push_str(&format!("  ->  {winner} wins\n")),
        None => out.push_str("  (excluded from aggregation)\n"),
    }
    out.push_str(&format!(
        "Judge: {} (prompt {}, temperature {})\n",
        judgment.judge.model, judgment.judge.prompt_id, judgment.judge.temperature
    ));
    out.push_str(&format!(
        "Tokens: {} in / {} out{}\n",
        judgment.input_tokens,
        judgment.output_tokens,
        if judgment.tokens_estimated { " (estimated)" } else { "" }
    ));
    out.push_str(&format!("Judged at: {}\n", judgment.judged_at));
    out.push_str("Analysis:\n");
    out.push_str(&judgment.analysis_text);
    if !judgment.analysis_text.ends_with('\n') {
        out.push('\n');
    }
    out
}

/// Render an enum's serde name (kebab/lowercase) without exposing Debug.
fn serde_plain_name<T: serde::Serialize>(value: &T) -> String {
    serde_json::to_value(value)
        .ok()
        .and_then(|v| v.as_str().map(str::to_string))
        .unwrap_or_else(|| "?".into())
}

struct Filters {
    item: Option<String>,
    model: Option<String>,
    verdict: Option<Verdict>,
    slice: Option<Slice>,
}

impl Filters {
    fn parse(args: &InspectArgs) -> anyhow::Result<Self> {
        let verdict = match args.verdict.as_deref() {
            None => None,
            Some(raw) => Some(match raw.to_ascii_lowercase().as_str() {
                "a" => Verdict::A,
                "b" => Verdict::B,
                "refused" => Verdict::JudgeRefused,
                other => {
                    return Err(config_error(format!(
                        "unknown verdict filter `{other}` (expected a, b, or refused)"
                    )))
                }
            }),
        };
        let slice = match args.slice.as_deref() {
            None => None,
            Some(raw) => Some(
                raw.parse::<Slice>()
                    .map_err(|e| config_error(format!("bad slice filter: {e}")))?,
            ),
        };
        Ok(Filters { item: args.item.clone(), model: args.model.clone(), verdict, slice })
    }

    fn keeps(&self, judgment: &Judgment, item: Option<&Item>) -> bool {
        if let Some(needle) = &self.item {
            if !judgment.pair.item_id.contains(needle.as_str()) {
                return false;
            }
        }
        if let Some(needle) = &self.model {
            if !judgment.pair.left_model.contains(needle.as_str())
                && !judgment.pair.right_model.contains(needle.as_str())
            {
                return false;
            }
        }
        if let Some(verdict) = self.verdict {
            if judgment.verdict != verdict {
                return false;
            }
        }
        if let Some(slice) = self.slice {
            match item {
                Some(item) => {
                    if !slice_of(item).contains(&slice) {
                        return false;
                    }
                }
                None => return false,
            }
        }
        true
    }
}

fn build_entries(judgments: &[Judgment], items: &ItemSet, filters: &Filters) -> Vec<Entry> {
    judgments
        .iter()
        .filter(|j| filters.keeps(j, items.get(&j.pair.item_id)))
        .map(|j| Entry {
            label: list_label(j),
            detail: detail_text(j, items.get(&j.pair.item_id)),
        })
        .collect()
}

fn resolve_log_path(args: &InspectArgs, config: &RunConfig) -> PathBuf {
    if let Some(log) = &args.log {
        return log.clone();
    }
    if args.frozen {
        return config.baseset.join("judgments.jsonl");
    }
    config.judgments_path()
}

pub fn inspect(args: &InspectArgs) -> anyhow::Result<ExitCode> {
    let config = RunConfig::load(&args.config)?;
    let items = config.load_items()?;
    let log_path = resolve_log_path(args, &config);
    let judgments = read_judgments(&log_path)
        .with_context(|| format!("reading judgment log `{}`", log_path.display()))?;
    let filters = Filters::parse(args)?;
    let entries = build_entries(&judgments, &items, &filters);

    if args.dump {
        // Dumps are routinely piped into `head` or `less`; a closed pipe means
        // the reader has seen enough, not that anything went wrong.
        let stdout = std::io::stdout();
        let mut out = std::io::BufWriter::new(stdout.lock());
        return match dump_entries(&mut out, &entries, judgments.len(), &log_path) {
            Err(err) if err.kind() == std::io::ErrorKind::BrokenPipe => Ok(ExitCode::SUCCESS),
            result => {
                result.context("writing dump to stdout")?;
                Ok(ExitCode::SUCCESS)
            }
        };
    }

    if entries.is_empty() {
        println!("no judgments match the given filters in {}", log_path.display());
        return Ok(ExitCode::SUCCESS);
    }
    run_tui(&entries, &log_path)?;
    Ok(ExitCode::SUCCESS)
}

fn dump_entries(
    out: &mut impl Write,
    entries: &[Entry],
    total: usize,
    log_path: &Path,
) -> std::io::Result<()> {
    writeln!(out, "{} of {} judgments from {}", entries.len(), total, log_path.display())?;
    for (i, entry) in entries.iter().enumerate() {
        writeln!(out, "=== {}/{} {}", i + 1, entries.len(), entry.label)?;
        write!(out, "{}", entry.detail)?;
    }
    out.flush()
}

// ---------------------------------------------------------------------------
// TUI
// ---------------------------------------------------------------------------

struct App<'a> {
    entries: &'a [Entry],
    selected: usize,
    detail_scroll: u16,
}

impl App<'_> {
    fn select(&mut self, index: usize) {
        self.selected = index.min(self.entries.len().saturating_sub(1));
        self.detail_scroll = 0;
    }
}

fn run_tui(entries: &[Entry], log_path: &Path) -> anyhow::Result<()> {
    let mut terminal = ratatui::init();
    let result = event_loop(&mut terminal, entries, log_path);
    ratatui::restore();
    result
}

fn event_loop(
    terminal: &mut ratatui::DefaultTerminal,
    entries: &[Entry],
    log_path: &Path,
) -> anyhow::Result<()> {
    let mut app = App { entries, selected: 0, detail_scroll: 0 };
    let mut list_state = ListState::default();
    loop {
        list_state.select(Some(app.selected));
        terminal.draw(|frame| draw(frame, &app, &mut list_state, log_path))?;
        if let Event::Key(key) = event::read()? {
            if key.kind != KeyEventKind::Press {
                continue;
            }
            match key.code {
                KeyCode::Char('q') | KeyCode::Esc => return Ok(()),
                KeyCode::Down | KeyCode::Char('j') => app.select(app.selected + 1),
                KeyCode::Up | KeyCode::Char('k') => app.select(app.selected.saturating_sub(1)),
                KeyCode::PageDown => app.select(app.selected + 10),
                KeyCode::PageUp => app.select(app.selected.saturating_sub(10)),
                KeyCode::Home | KeyCode::Char('g') => app.select(0),
                KeyCode::End | KeyCode::Char('G') => app.select(usize::MAX),
                KeyCode::Char('d') => app.detail_scroll = app.detail_scroll.saturating_add(5),
                KeyCode::Char('u') => app.detail_scroll = app.detail_scroll.saturating_sub(5),
                _ => {}
            }
        }
    }
}

fn draw(frame: &mut ratatui::Frame, app: &App, list_state: &mut ListState, log_path: &Path) {
    let outer = Layout::default()
        .direction(Direction::Vertical)
        .constraints([Constraint::Min(3), Constraint::Length(1)])
        .split(frame.area());
    let panes = Layout::default()
        .direction(Direction::Horizontal)
        .constraints([Constraint::Percentage(40), Constraint::Percentage(60)])
        .split(outer[0]);

    let items: Vec<ListItem> =
        app.entries.iter().map(|e| ListItem::new(e.label.clone())).collect();
    let list = List::new(items)
        .block(Block::default().borders(Borders::ALL).title(format!(
            " {} ({} judgments) ",
            log_path.display(),
            app.entries.len()
        )))
        .highlight_style(Style::default().add_modifier(Modifier::REVERSED));
    frame.render_stateful_widget(list, panes[0], list_state);

    let detail = app.entries.get(app.selected).map(|e| e.detail.as_str()).unwrap_or("");
    let paragraph = Paragraph::new(detail.to_string())
        .wrap(Wrap { trim: false })
        .scroll((app.detail_scroll, 0))
        .block(Block::default().borders(Borders::ALL).title(" judgment "));
    frame.render_widget(paragraph, panes[1]);

    let footer = Line::from(format!(
        " {}/{}  ·  j/k move  ·  u/d scroll detail  ·  g/G ends  ·  q quit",
        app.selected + 1,
        app.entries.len()
    ));
    frame.render_widget(Paragraph::new(footer), outer[1]);
}
