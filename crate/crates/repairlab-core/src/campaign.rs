//! Plans and executes the tool × bug cartesian product with bounded
//! parallelism, an append-only completion index, and crash-safe resume.

use std::collections::{BTreeMap, VecDeque};
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicBool, AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::benchmark::{self, BenchmarkDescriptor};
use crate::model::{
    AttemptConfig, AttemptKey, AttemptRecord, BugCoordinate, ModelError, Outcome, ResultSet,
    SCHEMA_VERSION,
};
use crate::runner::{self, RunnerError, ATTEMPT_RECORD_FILE, RESULTS_FILE};
use crate::tool::ToolDescriptor;

/// Newline-delimited JSON file holding one completed-attempt record per
/// line, appended after each completion.
pub const CAMPAIGN_INDEX_FILE: &str = "campaign-index.ndjson";
/// Summary written when a campaign run finishes.
pub const CAMPAIGN_SUMMARY_FILE: &str = "campaign.json";

#[derive(Debug, thiserror::Error)]
pub enum CampaignError {
    #[error("the bug filter eliminates every bug; the plan would be empty")]
    EmptyPlan,
    #[error("tool {name:?} appears more than once")]
    DuplicateTool { name: String },
    #[error("benchmark {name:?} appears more than once")]
    DuplicateBenchmark { name: String },
    #[error("parallelism must be at least 1")]
    InvalidParallelism,
    #[error(transparent)]
    Config(#[from] ModelError),
    #[error("campaign root I/O failure: {0}")]
    Io(#[from] std::io::Error),
}

/// One planned attempt: a tool name plus the bug it will run on. The
/// shared [`AttemptConfig`] lives on the plan.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CampaignEntry {
    pub tool: String,
    pub bug: BugCoordinate,
    pub seed: u64,
}

impl CampaignEntry {
    pub fn key(&self) -> AttemptKey {
        AttemptKey {
            tool: self.tool.clone(),
            benchmark: self.bug.benchmark.clone(),
            bug_id: self.bug.bug_id.clone(),
            seed: self.seed,
        }
    }
}

/// The full cartesian product of selected tools × selected bugs, in
/// deterministic (tool, benchmark, bug id) order.
#[derive(Debug)]
pub struct CampaignPlan {
    pub entries: Vec<CampaignEntry>,
    pub root: PathBuf,
    pub config: AttemptConfig,
    tools: BTreeMap<String, ToolDescriptor>,
    benchmarks: BTreeMap<String, BenchmarkDescriptor>,
}

impl CampaignPlan {
    pub fn tool(&self, name: &str) -> Option<&ToolDescriptor> {
        self.tools.get(name)
    }

    pub fn benchmark(&self, name: &str) -> Option<&BenchmarkDescriptor> {
        self.benchmarks.get(name)
    }
}

/// Builds the plan: every selected tool on every bug that survives the
/// optional glob filter, at the config's seed.
pub fn plan_campaign(
    tools: &[ToolDescriptor],
    benchmarks: &[BenchmarkDescriptor],
    bug_filter: Option<&str>,
    config: &AttemptConfig,
    root: &Path,
) -> Result<CampaignPlan, CampaignError> {
    config.validate()?;
    let mut tool_map = BTreeMap::new();
    for tool in tools {
        if tool_map.insert(tool.name.clone(), tool.clone()).is_some() {
            return Err(CampaignError::DuplicateTool {
                name: tool.name.clone(),
            });
        }
    }
    let mut benchmark_map = BTreeMap::new();
    let mut bugs: Vec<BugCoordinate> = Vec::new();
    for benchmark in benchmarks {
        if benchmark_map
            .insert(benchmark.name.clone(), benchmark.clone())
            .is_some()
        {
            return Err(CampaignError::DuplicateBenchmark {
                name: benchmark.name.clone(),
            });
        }
        bugs.extend(benchmark::list_bugs(benchmark, bug_filter));
    }

    let mut entries = Vec::with_capacity(tool_map.len() * bugs.len());
    for tool_name in tool_map.keys() {
        for bug in &bugs {
            entries.push(CampaignEntry {
                tool: tool_name.clone(),
                bug: bug.clone(),
                seed: config.seed,
            });
        }
    }
    entries.sort_by(|a, b| {
        (&a.tool, &a.bug.benchmark, &a.bug.bug_id)
            .cmp(&(&b.tool, &b.bug.benchmark, &b.bug.bug_id))
    });
    if entries.is_empty() {
        return Err(CampaignError::EmptyPlan);
    }
    Ok(CampaignPlan {
        entries,
        root: root.to_path_buf(),
        config: config.clone(),
        tools: tool_map,
        benchmarks: benchmark_map,
    })
}

/// Per-outcome attempt tallies.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct OutcomeCounts {
    pub patched: usize,
    pub no_patch: usize,
    pub error: usize,
    pub timeout: usize,
}

impl OutcomeCounts {
    pub fn record(&mut self, outcome: Outcome) {
        match outcome {
            Outcome::Patched => self.patched += 1,
            Outcome::NoPatch => self.no_patch += 1,
            Outcome::Error => self.error += 1,
            Outcome::Timeout => self.timeout += 1,
        }
    }

    pub fn get(&self, outcome: Outcome) -> usize {
        match outcome {
            Outcome::Patched => self.patched,
            Outcome::NoPatch => self.no_patch,
            Outcome::Error => self.error,
            Outcome::Timeout => self.timeout,
        }
    }

    pub fn total(&self) -> usize {
        self.patched + self.no_patch + self.error + self.timeout
    }
}

/// An entry the framework itself could not run (as opposed to an
/// attempt that ran and failed, which is an ERROR outcome).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FrameworkFailure {
    pub key: AttemptKey,
    pub reason: String,
}

/// What a campaign run did: executed-attempt outcome tallies, the
/// per-(tool, benchmark) matrix, and how many entries resume skipped.
///
/// Invariant: `counts.total() + skipped + framework_failures.len()`
/// equals the number of plan entries processed.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct CampaignSummary {
    pub counts: OutcomeCounts,
    pub total_wall_seconds: f64,
    /// tool → benchmark → outcome tallies, executed attempts only.
    pub matrix: BTreeMap<String, BTreeMap<String, OutcomeCounts>>,
    pub skipped: usize,
    pub framework_failures: Vec<FrameworkFailure>,
}

/// Execution switches beyond parallelism.
#[derive(Debug, Clone, Default)]
pub struct ExecuteOptions {
    /// Skip entries whose `attempt.json` already exists and is valid.
    pub resume: bool,
    /// Stop handing out work after this many executed attempts; used by
    /// tests to simulate an interrupted campaign. In-flight attempts
    /// still finish.
    pub stop_after: Option<usize>,
}

/// Half the logical CPUs (floor, minimum 1): repair attempts are
/// themselves multi-process, so full-width pools oversubscribe and skew
/// timeout behavior.
pub fn default_parallelism() -> usize {
    std::thread::available_parallelism()
        .map(|n| (n.get() / 2).max(1))
        .unwrap_or(1)
}

/// True when `dir` holds a finished attempt for `key`: a parseable,
/// self-consistent `attempt.json` with the current schema version and
/// the matching key, alongside its `results.json`.
fn attempt_is_complete(dir: &Path, key: &AttemptKey) -> bool {
    let Ok(text) = std::fs::read_to_string(dir.join(ATTEMPT_RECORD_FILE)) else {
        return false;
    };
    let Ok(record) = serde_json::from_str::<AttemptRecord>(&text) else {
        return false;
    };
    record.schema_version == SCHEMA_VERSION
        && record.key() == *key
        && record.validate().is_ok()
        && dir.join(RESULTS_FILE).exists()
}

/// Runs every plan entry with at most `parallelism` attempts in flight.
///
/// Entries are handed out bug-major (all tools for one bug before the
/// next bug) so an interrupted campaign still has balanced per-tool
/// samples. One attempt's failure never aborts the rest; only
/// root-level I/O problems (index, summary) are errors.
pub fn execute_campaign(
    plan: &CampaignPlan,
    parallelism: usize,
    options: &ExecuteOptions,
) -> Result<CampaignSummary, CampaignError> {
    if parallelism == 0 {
        return Err(CampaignError::InvalidParallelism);
    }
    std::fs::create_dir_all(&plan.root)?;
    let index = Mutex::new(
        std::fs::OpenOptions::new()
            .create(true)
            .append(true)
            .open(plan.root.join(CAMPAIGN_INDEX_FILE))?,
    );

    // Bug-major hand-out order.
    let mut order: Vec<usize> = (0..plan.entries.len()).collect();
    order.sort_by(|&a, &b| {
        let (ea, eb) = (&plan.entries[a], &plan.entries[b]);
        (&ea.bug.benchmark, &ea.bug.bug_id, &ea.tool)
            .cmp(&(&eb.bug.benchmark, &eb.bug.bug_id, &eb.tool))
    });
    let queue: Mutex<VecDeque<usize>> = Mutex::new(order.into());

    let state: Mutex<CampaignSummary> = Mutex::new(CampaignSummary::default());
    let executed = AtomicUsize::new(0);
    let stop = AtomicBool::new(false);
    let started = Instant::now();

    std::thread::scope(|scope| {
        for _ in 0..parallelism.min(plan.entries.len()) {
            scope.spawn(|| loop {
                if stop.load(Ordering::SeqCst) {
                    break;
                }
                let Some(index_in_plan) = queue.lock().unwrap().pop_front() else {
                    break;
                };
                let entry = &plan.entries[index_in_plan];
                let key = entry.key();
                let dir = runner::attempt_dir(
                    &plan.root,
                    &entry.tool,
                    &entry.bug.benchmark,
                    &entry.bug.bug_id,
                    entry.seed,
                );
                if options.resume && attempt_is_complete(&dir, &key) {
                    state.lock().unwrap().skipped += 1;
                    continue;
                }
                // Tool and benchmark lookups cannot fail for entries the
                // planner built, but a hand-assembled plan could be
                // inconsistent; treat that as a framework failure.
                let run = match (plan.tool(&entry.tool), plan.benchmark(&entry.bug.benchmark)) {
                    (Some(tool), Some(benchmark)) => {
                        runner::run_attempt(tool, benchmark, &entry.bug, &plan.config, &dir)
                    }
                    _ => Err(RunnerError::Config(ModelError::InvalidConfig(format!(
                        "plan references unknown tool or benchmark: {}/{}",
                        entry.tool, entry.bug.benchmark
                    )))),
                };
                match run {
                    Ok(record) => {
                        let line = serde_json::to_string(&record).expect("record serializes");
                        {
                            let mut file = index.lock().unwrap();
                            let _ = writeln!(file, "{line}");
                        }
                        let mut state = state.lock().unwrap();
                        state.counts.record(record.outcome);
                        state
                            .matrix
                            .entry(entry.tool.clone())
                            .or_default()
                            .entry(entry.bug.benchmark.clone())
                            .or_default()
                            .record(record.outcome);
                    }
                    Err(err) => {
                        state.lock().unwrap().framework_failures.push(FrameworkFailure {
                            key,
                            reason: err.to_string(),
                        });
                    }
                }
                let done = executed.fetch_add(1, Ordering::SeqCst) + 1;
                if let Some(limit) = options.stop_after {
                    if done >= limit {
                        stop.store(true, Ordering::SeqCst);
                    }
                }
            });
        }
    });

    let mut summary = state.into_inner().unwrap();
    summary.total_wall_seconds = started.elapsed().as_secs_f64();
    std::fs::write(
        plan.root.join(CAMPAIGN_SUMMARY_FILE),
        serde_json::to_string_pretty(&summary).expect("summary serializes"),
    )?;
    Ok(summary)
}

/// Loads every valid `attempt.json` under `root` into a [`ResultSet`].
/// Unreadable, unparseable, inconsistent, wrong-schema, or duplicate
/// records are returned as malformed paths instead of failing the load.
pub fn load_results(root: &Path) -> (ResultSet, Vec<PathBuf>) {
    let mut set = ResultSet::new();
    let mut malformed = Vec::new();
    if !root.exists() {
        return (set, malformed);
    }
    for entry in walkdir::WalkDir::new(root)
        .sort_by_file_name()
        .into_iter()
        .flatten()
    {
        if !entry.file_type().is_file() || entry.file_name() != ATTEMPT_RECORD_FILE {
            continue;
        }
        let path = entry.path().to_path_buf();
        let parsed: Option<AttemptRecord> = std::fs::read_to_string(&path)
            .ok()
            .and_then(|text| serde_json::from_str(&text).ok());
        match parsed {
            Some(record)
                if record.schema_version == SCHEMA_VERSION && record.validate().is_ok() =>
            {
                if set.insert(record).is_err() {
                    malformed.push(path);
                }
            }
            _ => malformed.push(path),
        }
    }
    (set, malformed)
}

/// Reads the append-only index, keeping the latest record per key (a
/// resumed campaign may re-append entries whose directories were
/// re-run). Records come back in key order.
pub fn load_index(root: &Path) -> Result<Vec<AttemptRecord>, CampaignError> {
    let path = root.join(CAMPAIGN_INDEX_FILE);
    let text = std::fs::read_to_string(path)?;
    let mut latest: BTreeMap<AttemptKey, AttemptRecord> = BTreeMap::new();
    for line in text.lines().filter(|l| !l.trim().is_empty()) {
        let record: AttemptRecord = serde_json::from_str(line)
            .map_err(|e| CampaignError::Io(std::io::Error::other(e)))?;
        latest.insert(record.key(), record);
    }
    Ok(latest.into_values().collect())
}
