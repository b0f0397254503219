//! Core domain types shared by every module: bug identity, attempt
//! outcomes, the failure-cause taxonomy, per-attempt provenance records,
//! and the deduplicated result-set container that feeds all statistics.

use std::collections::BTreeMap;
use std::collections::BTreeSet;
use std::fmt;
use std::path::PathBuf;
use std::time::Duration;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

/// Version tag written into `results.json` and `attempt.json`. Bumping it
/// invalidates campaign resume, so readers never mix records produced by
/// incompatible layouts.
pub const SCHEMA_VERSION: u32 = 1;

/// Workspace-root file through which a tool reports the files it
/// patched, as a JSON array of workspace-relative paths in emission
/// order. Tools that skip it fall back to modified-file detection.
pub const PATCH_MANIFEST_FILE: &str = "patches.json";

/// Errors produced by the model layer.
#[derive(Debug, thiserror::Error)]
pub enum ModelError {
    /// A bug-coordinate string (or one of its segments) is not usable.
    #[error("malformed id {text:?}: {reason}")]
    MalformedId { text: String, reason: String },
    /// An attempt with the same (tool, benchmark, bug, seed) key is
    /// already present in the result set.
    #[error("duplicate attempt key {0}")]
    DuplicateKey(AttemptKey),
    /// A record violates one of the attempt invariants (e.g. a TIMEOUT
    /// outcome without the watchdog flag).
    #[error("inconsistent attempt record {key}: {reason}")]
    InconsistentRecord { key: AttemptKey, reason: String },
    /// A configuration value is out of its documented range.
    #[error("invalid attempt config: {0}")]
    InvalidConfig(String),
}

/// Checks that a string can safely name a directory component: non-empty,
/// no path separators, and not a relative-path special name.
pub(crate) fn validate_path_component(what: &str, value: &str) -> Result<(), ModelError> {
    let reason = if value.is_empty() {
        Some("empty segment".to_string())
    } else if value.contains('/') || value.contains('\\') {
        Some("contains a path separator".to_string())
    } else if value == "." || value == ".." {
        Some("reserved directory name".to_string())
    } else {
        None
    };
    match reason {
        Some(reason) => Err(ModelError::MalformedId {
            text: format!("{what} {value:?}"),
            reason,
        }),
        None => Ok(()),
    }
}

/// Identity of one bug inside one benchmark.
///
/// `bug_id` is treated as an opaque string: benchmarks disagree about id
/// shape (project-number pairs, plain program names, ...), so nothing here
/// assumes structure beyond "usable as a directory name". Equality,
/// ordering, and hashing use only `(benchmark, bug_id)` — `project` is
/// descriptive metadata and two coordinates naming the same bug must
/// compare equal even when one side lacks the project name.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BugCoordinate {
    /// Benchmark that owns the bug (e.g. `toy`).
    pub benchmark: String,
    /// Project inside the benchmark; empty when the manifest does not
    /// record one.
    #[serde(default)]
    pub project: String,
    /// Bug identifier, unique within its benchmark.
    pub bug_id: String,
}

impl BugCoordinate {
    /// Builds a validated coordinate.
    pub fn new(
        benchmark: impl Into<String>,
        project: impl Into<String>,
        bug_id: impl Into<String>,
    ) -> Result<Self, ModelError> {
        let coordinate = BugCoordinate {
            benchmark: benchmark.into(),
            project: project.into(),
            bug_id: bug_id.into(),
        };
        validate_path_component("benchmark", &coordinate.benchmark)?;
        validate_path_component("bug id", &coordinate.bug_id)?;
        Ok(coordinate)
    }

    /// Renders the canonical `<benchmark>:<bug_id>` form accepted by
    /// [`parse_bug_coordinate`].
    pub fn render(&self) -> String {
        format!("{}:{}", self.benchmark, self.bug_id)
    }
}

impl PartialEq for BugCoordinate {
    fn eq(&self, other: &Self) -> bool {
        self.benchmark == other.benchmark && self.bug_id == other.bug_id
    }
}

impl Eq for BugCoordinate {}

impl PartialOrd for BugCoordinate {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for BugCoordinate {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        (&self.benchmark, &self.bug_id).cmp(&(&other.benchmark, &other.bug_id))
    }
}

impl std::hash::Hash for BugCoordinate {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        self.benchmark.hash(state);
        self.bug_id.hash(state);
    }
}

impl fmt::Display for BugCoordinate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.render())
    }
}

/// Parses `<benchmark>:<bug_id>`.
///
/// When only a bare bug id is available and the benchmark is known from
/// context, use [`parse_bug_in_benchmark`] instead.
pub fn parse_bug_coordinate(text: &str) -> Result<BugCoordinate, ModelError> {
    let Some((benchmark, bug_id)) = text.split_once(':') else {
        return Err(ModelError::MalformedId {
            text: text.to_string(),
            reason: "expected <benchmark>:<bug_id>".to_string(),
        });
    };
    BugCoordinate::new(benchmark, "", bug_id)
}

/// Parses a bare bug id with the benchmark supplied separately.
pub fn parse_bug_in_benchmark(benchmark: &str, bug_id: &str) -> Result<BugCoordinate, ModelError> {
    BugCoordinate::new(benchmark, "", bug_id)
}

/// Four-way outcome of one repair attempt. The values are mutually
/// exclusive and exhaustive: every attempt gets exactly one.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Outcome {
    /// The tool produced at least one test-suite adequate patch (by its
    /// own validation; correctness is out of scope).
    #[serde(rename = "PATCHED")]
    Patched,
    /// The tool finished cleanly without producing a patch.
    #[serde(rename = "NO_PATCH")]
    NoPatch,
    /// Some phase failed: checkout/compile/info hook failure, a tool
    /// crash, or unusable tool output.
    #[serde(rename = "ERROR")]
    Error,
    /// The watchdog terminated the tool at the wall-clock budget.
    #[serde(rename = "TIMEOUT")]
    Timeout,
}

impl Outcome {
    /// All outcomes in display order.
    pub const ALL: [Outcome; 4] = [
        Outcome::Patched,
        Outcome::NoPatch,
        Outcome::Error,
        Outcome::Timeout,
    ];

    /// The canonical upper-case name (same spelling as the serialized
    /// form).
    pub fn as_str(self) -> &'static str {
        match self {
            Outcome::Patched => "PATCHED",
            Outcome::NoPatch => "NO_PATCH",
            Outcome::Error => "ERROR",
            Outcome::Timeout => "TIMEOUT",
        }
    }
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Outcome {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Outcome::ALL
            .into_iter()
            .find(|o| o.as_str() == s)
            .ok_or_else(|| format!("unknown outcome {s:?}"))
    }
}

/// Why a non-patched attempt produced no patch. Assigned by the
/// classifier, never by the runner; `PATCHED` attempts carry no cause.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum FailureCause {
    /// The fix lies outside the tool's search space.
    #[serde(rename = "SEARCH_SPACE_MISS")]
    SearchSpaceMiss,
    /// Fault localization never surfaced the buggy statement.
    #[serde(rename = "FAULT_LOCALIZATION")]
    FaultLocalization,
    /// The fix needs coordinated edits at several locations.
    #[serde(rename = "MULTI_LOCATION")]
    MultiLocation,
    /// The wall-clock budget expired first.
    #[serde(rename = "TIME_BUDGET")]
    TimeBudget,
    /// The attempt was misconfigured (unbuildable workspace, broken
    /// classpath, ...).
    #[serde(rename = "CONFIGURATION")]
    Configuration,
    /// An environmental/technical fault (e.g. the assembled command line
    /// exceeding the OS argument-size limit).
    #[serde(rename = "TECHNICAL")]
    Technical,
    /// No catalog rule matched.
    #[serde(rename = "UNKNOWN")]
    Unknown,
}

impl FailureCause {
    /// All causes in display order.
    pub const ALL: [FailureCause; 7] = [
        FailureCause::SearchSpaceMiss,
        FailureCause::FaultLocalization,
        FailureCause::MultiLocation,
        FailureCause::TimeBudget,
        FailureCause::Configuration,
        FailureCause::Technical,
        FailureCause::Unknown,
    ];

    /// The canonical upper-case name (same spelling as the serialized
    /// form).
    pub fn as_str(self) -> &'static str {
        match self {
            FailureCause::SearchSpaceMiss => "SEARCH_SPACE_MISS",
            FailureCause::FaultLocalization => "FAULT_LOCALIZATION",
            FailureCause::MultiLocation => "MULTI_LOCATION",
            FailureCause::TimeBudget => "TIME_BUDGET",
            FailureCause::Configuration => "CONFIGURATION",
            FailureCause::Technical => "TECHNICAL",
            FailureCause::Unknown => "UNKNOWN",
        }
    }
}

impl fmt::Display for FailureCause {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for FailureCause {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        FailureCause::ALL
            .into_iter()
            .find(|c| c.as_str() == s)
            .ok_or_else(|| format!("unknown failure cause {s:?}"))
    }
}

/// Phases of one attempt, in execution order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Phase {
    Checkout,
    Compile,
    Info,
    Tool,
}

impl Phase {
    /// The lower-case name used in log-line prefixes and rule patterns.
    pub fn as_str(self) -> &'static str {
        match self {
            Phase::Checkout => "checkout",
            Phase::Compile => "compile",
            Phase::Info => "info",
            Phase::Tool => "tool",
        }
    }
}

impl fmt::Display for Phase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// How the repair-tool process ended.
///
/// `terminated_by_watchdog` refers to the tool process only: a setup hook
/// killed at its allowance is reported as a plain phase failure, because
/// the TIMEOUT outcome is reserved for the repair budget.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExitInfo {
    /// Exit code when the process exited normally.
    pub code: Option<i32>,
    /// Signal number when the process was signal-terminated.
    pub signal: Option<i32>,
    /// True iff the budget watchdog terminated the tool.
    pub terminated_by_watchdog: bool,
}

/// Per-attempt execution settings.
///
/// Durations are stored as whole seconds with fractional part so the
/// config serializes naturally; accessor methods expose [`Duration`]s.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AttemptConfig {
    /// Wall-clock budget for the tool phase only (setup phases have their
    /// own allowance). Default: two hours.
    pub budget_seconds: f64,
    /// Maximum number of patches kept in `results.json`; 1 requests
    /// stop-on-first-patch from tools that support it.
    pub patch_limit: u32,
    /// Random seed forwarded to tools (one predefined value per
    /// campaign).
    pub seed: u64,
    /// Delay between the polite stop signal and the forced kill of the
    /// process tree.
    pub grace_seconds: f64,
    /// Wall-clock allowance for each setup phase (checkout, compile,
    /// info). Default: fifteen minutes.
    pub setup_allowance_seconds: f64,
    /// Upper bound on the rendered command-line length; longer commands
    /// fail pre-flight instead of hitting the OS limit mid-launch.
    pub command_length_limit: usize,
    /// Keep the workspace directory even for PATCHED/NO_PATCH attempts.
    pub keep_workspace: bool,
}

impl Default for AttemptConfig {
    fn default() -> Self {
        AttemptConfig {
            budget_seconds: 7200.0,
            patch_limit: 1,
            seed: 1,
            grace_seconds: 10.0,
            setup_allowance_seconds: 900.0,
            command_length_limit: 128 * 1024,
            keep_workspace: false,
        }
    }
}

impl AttemptConfig {
    /// Checks the documented value ranges.
    pub fn validate(&self) -> Result<(), ModelError> {
        if !(self.budget_seconds > 0.0) {
            return Err(ModelError::InvalidConfig(
                "budget_seconds must be > 0".to_string(),
            ));
        }
        if self.patch_limit < 1 {
            return Err(ModelError::InvalidConfig(
                "patch_limit must be >= 1".to_string(),
            ));
        }
        if !(self.grace_seconds >= 0.0) {
            return Err(ModelError::InvalidConfig(
                "grace_seconds must be >= 0".to_string(),
            ));
        }
        if !(self.setup_allowance_seconds > 0.0) {
            return Err(ModelError::InvalidConfig(
                "setup_allowance_seconds must be > 0".to_string(),
            ));
        }
        Ok(())
    }

    /// Tool-phase budget as a [`Duration`].
    pub fn budget(&self) -> Duration {
        Duration::from_secs_f64(self.budget_seconds)
    }

    /// Termination grace period as a [`Duration`].
    pub fn grace(&self) -> Duration {
        Duration::from_secs_f64(self.grace_seconds)
    }

    /// Setup-phase allowance as a [`Duration`].
    pub fn setup_allowance(&self) -> Duration {
        Duration::from_secs_f64(self.setup_allowance_seconds)
    }
}

/// The unique key of one attempt within a campaign.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct AttemptKey {
    pub tool: String,
    pub benchmark: String,
    pub bug_id: String,
    pub seed: u64,
}

impl fmt::Display for AttemptKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}/{}/{}/{}",
            self.tool, self.benchmark, self.bug_id, self.seed
        )
    }
}

/// Wall-clock durations of the three executed phases, in seconds. Phases
/// that never ran stay at zero.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct PhaseDurations {
    pub checkout_seconds: f64,
    pub compile_seconds: f64,
    pub repair_seconds: f64,
}

/// Full provenance of one repair attempt, persisted as `attempt.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttemptRecord {
    /// Record layout version; readers reject other versions.
    pub schema_version: u32,
    /// Tool name from the tool manifest.
    pub tool: String,
    /// The bug the attempt ran on.
    pub bug: BugCoordinate,
    /// Seed forwarded to the tool.
    pub seed: u64,
    /// Attempt start (first phase).
    pub started_at: DateTime<Utc>,
    /// Attempt end (record written).
    pub ended_at: DateTime<Utc>,
    /// Outcome per the runner's decision table.
    pub outcome: Outcome,
    /// How the tool process ended (zeroed when it never launched).
    pub exit: ExitInfo,
    /// Phase that failed, for ERROR outcomes caused by setup hooks or
    /// command assembly.
    pub failed_phase: Option<Phase>,
    /// Number of patches recorded in `results.json`.
    pub patch_count: usize,
    /// Location of `repair.log`.
    pub log_path: PathBuf,
    /// Location of `results.json`.
    pub result_path: PathBuf,
    /// Per-phase wall-clock durations.
    pub durations: PhaseDurations,
}

impl AttemptRecord {
    /// The record's result-set key.
    pub fn key(&self) -> AttemptKey {
        AttemptKey {
            tool: self.tool.clone(),
            benchmark: self.bug.benchmark.clone(),
            bug_id: self.bug.bug_id.clone(),
            seed: self.seed,
        }
    }

    /// Checks the cross-field invariants every well-formed record obeys.
    pub fn validate(&self) -> Result<(), ModelError> {
        let fail = |reason: &str| {
            Err(ModelError::InconsistentRecord {
                key: self.key(),
                reason: reason.to_string(),
            })
        };
        if self.schema_version != SCHEMA_VERSION {
            return fail(&format!(
                "schema_version {} (expected {SCHEMA_VERSION})",
                self.schema_version
            ));
        }
        if (self.outcome == Outcome::Timeout) != self.exit.terminated_by_watchdog {
            return fail("TIMEOUT outcome and watchdog flag must agree");
        }
        if self.outcome == Outcome::Patched && self.patch_count == 0 {
            return fail("PATCHED outcome requires at least one patch");
        }
        if self.ended_at < self.started_at {
            return fail("ended_at precedes started_at");
        }
        Ok(())
    }
}

/// Immutable collection of attempts, indexed by [`AttemptKey`] with
/// duplicate keys rejected at insertion.
#[derive(Debug, Clone, Default)]
pub struct ResultSet {
    attempts: Vec<AttemptRecord>,
    index: BTreeMap<AttemptKey, usize>,
}

impl ResultSet {
    pub fn new() -> Self {
        ResultSet::default()
    }

    /// Builds a set from records, rejecting the first duplicate key.
    pub fn from_records(
        records: impl IntoIterator<Item = AttemptRecord>,
    ) -> Result<Self, ModelError> {
        let mut set = ResultSet::new();
        for record in records {
            set.insert(record)?;
        }
        Ok(set)
    }

    /// Inserts one record; duplicate keys are rejected deterministically
    /// (the earlier record wins, the error names the key).
    pub fn insert(&mut self, record: AttemptRecord) -> Result<(), ModelError> {
        let key = record.key();
        if self.index.contains_key(&key) {
            return Err(ModelError::DuplicateKey(key));
        }
        self.index.insert(key, self.attempts.len());
        self.attempts.push(record);
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.attempts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.attempts.is_empty()
    }

    pub fn get(&self, key: &AttemptKey) -> Option<&AttemptRecord> {
        self.index.get(key).map(|&i| &self.attempts[i])
    }

    /// Records in insertion order.
    pub fn iter(&self) -> impl Iterator<Item = &AttemptRecord> {
        self.attempts.iter()
    }

    /// Records in key order (deterministic regardless of insertion
    /// order).
    pub fn iter_sorted(&self) -> impl Iterator<Item = &AttemptRecord> {
        self.index.values().map(|&i| &self.attempts[i])
    }

    /// Distinct tool names, sorted.
    pub fn tools(&self) -> BTreeSet<String> {
        self.attempts.iter().map(|a| a.tool.clone()).collect()
    }

    /// Distinct benchmark names, sorted.
    pub fn benchmarks(&self) -> BTreeSet<String> {
        self.attempts.iter().map(|a| a.bug.benchmark.clone()).collect()
    }
}

/// Builds a minimal valid record; shared across this crate's unit tests.
#[cfg(test)]
pub(crate) fn sample_record(tool: &str, benchmark: &str, bug_id: &str, seed: u64) -> AttemptRecord {
    let now = Utc::now();
    AttemptRecord {
        schema_version: SCHEMA_VERSION,
        tool: tool.to_string(),
        bug: BugCoordinate::new(benchmark, "", bug_id).unwrap(),
        seed,
        started_at: now,
        ended_at: now,
        outcome: Outcome::NoPatch,
        exit: ExitInfo {
            code: Some(0),
            signal: None,
            terminated_by_watchdog: false,
        },
        failed_phase: None,
        patch_count: 0,
        log_path: PathBuf::from("repair.log"),
        result_path: PathBuf::from("results.json"),
        durations: PhaseDurations::default(),
    }
}
