//! Executes one repair attempt end to end: checkout → compile → bug
//! metadata → tool launch under a budget → output normalization.
//!
//! The runner never lets tool or benchmark misbehavior escape as an
//! error: every failure folds into an `ERROR` outcome with diagnostics
//! in `repair.log`. Only framework-level faults (an unusable attempt
//! directory) surface as [`RunnerError`].

use std::collections::{BTreeMap, BTreeSet};
use std::io::Write as _;
use std::path::{Component, Path, PathBuf};
use std::time::{Duration, Instant};

use chrono::{SecondsFormat, Utc};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::benchmark::{self, BenchmarkDescriptor, BenchmarkError, HookOptions, HookReport};
use crate::diff;
use crate::model::{
    AttemptConfig, AttemptRecord, BugCoordinate, ExitInfo, ModelError, Outcome, Phase,
    PhaseDurations, PATCH_MANIFEST_FILE, SCHEMA_VERSION,
};
use crate::tool::{self, RenderContext, ToolDescriptor, ToolError};
use crate::watchdog::{self, CommandRequest};

/// File names inside an attempt directory.
pub const REPAIR_LOG_FILE: &str = "repair.log";
pub const RESULTS_FILE: &str = "results.json";
pub const ATTEMPT_RECORD_FILE: &str = "attempt.json";
pub const WORKSPACE_DIR: &str = "workspace";

/// Workspace-root files tools may create that are tool output plumbing,
/// not patches.
const DETECTION_EXCLUDES: [&str; 3] = [PATCH_MANIFEST_FILE, "tool_stdout.log", "tool_stderr.log"];

/// Framework-level faults; everything else becomes an ERROR outcome.
#[derive(Debug, thiserror::Error)]
pub enum RunnerError {
    #[error("attempt directory {0:?} exists and is not empty")]
    DirNotEmpty(PathBuf),
    #[error("invalid attempt configuration: {0}")]
    Config(#[from] ModelError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// The canonical attempt directory: `<root>/<tool>/<benchmark>/<bug>/<seed>`.
pub fn attempt_dir(root: &Path, tool: &str, benchmark: &str, bug_id: &str, seed: u64) -> PathBuf {
    root.join(tool)
        .join(benchmark)
        .join(bug_id)
        .join(seed.to_string())
}

/// One normalized patch: a workspace-relative path (forward slashes)
/// and a unified diff against the checked-out buggy version.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PatchEntry {
    pub file: String,
    pub diff: String,
}

/// The `results.json` payload, written for every attempt.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormalizedResult {
    pub schema_version: u32,
    pub tool: String,
    pub benchmark: String,
    pub bug_id: String,
    pub seed: u64,
    /// Tool-phase wall time; zero when the tool never launched.
    pub wall_time_seconds: f64,
    pub patches: Vec<PatchEntry>,
}

/// Why tool output could not be normalized (the attempt is downgraded
/// to ERROR, with the reason logged).
#[derive(Debug, thiserror::Error)]
pub enum NormalizeError {
    #[error("patch for {file:?} cannot be reconstructed: {reason}")]
    PatchDoesNotApply { file: String, reason: String },
    #[error("tool output is unusable: {reason}")]
    UnparseableToolOutput { reason: String },
}

impl NormalizeError {
    /// Stable token for logs and triage rules.
    pub fn name(&self) -> &'static str {
        match self {
            NormalizeError::PatchDoesNotApply { .. } => "PATCH_DOES_NOT_APPLY",
            NormalizeError::UnparseableToolOutput { .. } => "UNPARSEABLE_TOOL_OUTPUT",
        }
    }
}

/// Content snapshot of a workspace, taken right before the tool runs,
/// so in-place modifications can be turned back into diffs.
#[derive(Debug, Clone, Default)]
pub struct WorkspaceSnapshot {
    files: BTreeMap<String, SnapshotEntry>,
}

#[derive(Debug, Clone)]
struct SnapshotEntry {
    digest: [u8; 32],
    content: Vec<u8>,
}

fn relative_slash_path(path: &Path, base: &Path) -> Option<String> {
    let rel = path.strip_prefix(base).ok()?;
    let parts: Vec<&str> = rel
        .components()
        .map(|c| c.as_os_str().to_str())
        .collect::<Option<_>>()?;
    Some(parts.join("/"))
}

/// Records the digest and content of every file under `workspace`.
pub fn snapshot_workspace(workspace: &Path) -> std::io::Result<WorkspaceSnapshot> {
    let mut files = BTreeMap::new();
    for entry in walkdir::WalkDir::new(workspace).sort_by_file_name() {
        let entry = entry.map_err(std::io::Error::from)?;
        if !entry.file_type().is_file() {
            continue;
        }
        let Some(rel) = relative_slash_path(entry.path(), workspace) else {
            continue;
        };
        let content = std::fs::read(entry.path())?;
        files.insert(
            rel,
            SnapshotEntry {
                digest: Sha256::digest(&content).into(),
                content,
            },
        );
    }
    Ok(WorkspaceSnapshot { files })
}

/// Patches plus non-fatal observations worth logging.
#[derive(Debug, Default)]
pub struct NormalizedPatches {
    pub patches: Vec<PatchEntry>,
    pub notes: Vec<String>,
}

/// Validates one manifest-reported path and returns its canonical
/// workspace-relative form.
fn canonical_relative(entry: &str) -> Result<String, NormalizeError> {
    if entry.is_empty() {
        return Err(NormalizeError::UnparseableToolOutput {
            reason: "patch manifest contains an empty path".to_string(),
        });
    }
    let mut parts = Vec::new();
    for component in Path::new(entry).components() {
        match component {
            Component::Normal(part) => match part.to_str() {
                Some(part) => parts.push(part),
                None => {
                    return Err(NormalizeError::UnparseableToolOutput {
                        reason: format!("patch path {entry:?} is not valid UTF-8"),
                    })
                }
            },
            Component::CurDir => {}
            Component::ParentDir | Component::RootDir | Component::Prefix(_) => {
                return Err(NormalizeError::UnparseableToolOutput {
                    reason: format!("patch path {entry:?} escapes the workspace"),
                })
            }
        }
    }
    if parts.is_empty() {
        return Err(NormalizeError::UnparseableToolOutput {
            reason: format!("patch path {entry:?} names no file"),
        });
    }
    Ok(parts.join("/"))
}

/// Converts tool output into normalized patch entries.
///
/// If the tool wrote a patch manifest (`patches.json`, a JSON array of
/// workspace-relative paths), that list and order win; otherwise every
/// file whose content differs from the snapshot counts, in path order.
/// Diffs are verified by re-applying them to the snapshot content.
pub fn normalize_output(
    workspace: &Path,
    snapshot: &WorkspaceSnapshot,
    patch_limit: usize,
) -> Result<NormalizedPatches, NormalizeError> {
    let manifest_path = workspace.join(PATCH_MANIFEST_FILE);
    let reported: Option<Vec<String>> = if manifest_path.exists() {
        let text = std::fs::read_to_string(&manifest_path).map_err(|e| {
            NormalizeError::UnparseableToolOutput {
                reason: format!("cannot read patch manifest: {e}"),
            }
        })?;
        Some(serde_json::from_str(&text).map_err(|e| {
            NormalizeError::UnparseableToolOutput {
                reason: format!("patch manifest is not a JSON array of paths: {e}"),
            }
        })?)
    } else {
        None
    };

    let mut notes = Vec::new();
    let candidates: Vec<String> = match reported {
        Some(entries) => {
            let mut seen = BTreeSet::new();
            let mut ordered = Vec::new();
            for entry in entries {
                let rel = canonical_relative(&entry)?;
                if seen.insert(rel.clone()) {
                    ordered.push(rel);
                } else {
                    notes.push(format!("manifest repeats {rel:?}; keeping first mention"));
                }
            }
            ordered
        }
        None => {
            let mut all: BTreeSet<String> = snapshot.files.keys().cloned().collect();
            for entry in walkdir::WalkDir::new(workspace).sort_by_file_name() {
                let entry = entry.map_err(|e| NormalizeError::UnparseableToolOutput {
                    reason: format!("cannot scan workspace: {e}"),
                })?;
                if entry.file_type().is_file() {
                    if let Some(rel) = relative_slash_path(entry.path(), workspace) {
                        all.insert(rel);
                    }
                }
            }
            all.into_iter()
                .filter(|rel| !DETECTION_EXCLUDES.contains(&rel.as_str()))
                .collect()
        }
    };

    let mut patches = Vec::new();
    for rel in candidates {
        let baseline = snapshot.files.get(&rel);
        let current = match std::fs::read(workspace.join(&rel)) {
            Ok(bytes) => Some(bytes),
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => None,
            Err(e) => {
                return Err(NormalizeError::PatchDoesNotApply {
                    file: rel,
                    reason: format!("cannot read patched file: {e}"),
                })
            }
        };
        // Unchanged content is only reachable via the manifest (the
        // detector compares digests first); skip it quietly.
        if let (Some(entry), Some(bytes)) = (baseline, &current) {
            if entry.digest == <[u8; 32]>::from(Sha256::digest(bytes)) {
                notes.push(format!("reported file {rel:?} is unchanged; ignored"));
                continue;
            }
        }
        if baseline.is_none() && current.is_none() {
            return Err(NormalizeError::PatchDoesNotApply {
                file: rel,
                reason: "file does not exist and has no baseline".to_string(),
            });
        }
        let old = match baseline {
            Some(entry) => String::from_utf8(entry.content.clone()).map_err(|_| {
                NormalizeError::PatchDoesNotApply {
                    file: rel.clone(),
                    reason: "baseline content is not UTF-8 text".to_string(),
                }
            })?,
            None => String::new(),
        };
        let new = match current {
            Some(bytes) => String::from_utf8(bytes).map_err(|_| {
                NormalizeError::PatchDoesNotApply {
                    file: rel.clone(),
                    reason: "patched content is not UTF-8 text".to_string(),
                }
            })?,
            None => String::new(),
        };
        let diff_text = diff::unified_diff(&old, &new, &format!("a/{rel}"), &format!("b/{rel}"), 3);
        match diff::apply_unified(&old, &diff_text) {
            Ok(applied) if applied == new => {}
            Ok(_) => {
                return Err(NormalizeError::PatchDoesNotApply {
                    file: rel,
                    reason: "reconstructed diff does not reproduce the patched content"
                        .to_string(),
                })
            }
            Err(e) => {
                return Err(NormalizeError::PatchDoesNotApply {
                    file: rel,
                    reason: format!("reconstructed diff does not re-apply: {e}"),
                })
            }
        }
        patches.push(PatchEntry {
            file: rel,
            diff: diff_text,
        });
    }

    if patches.len() > patch_limit {
        notes.push(format!(
            "patch list truncated from {} to {} entries",
            patches.len(),
            patch_limit
        ));
        patches.truncate(patch_limit);
    }
    Ok(NormalizedPatches { patches, notes })
}

/// Timestamped, phase-attributed attempt log.
struct AttemptLog {
    file: std::fs::File,
}

impl AttemptLog {
    fn open(path: &Path) -> std::io::Result<AttemptLog> {
        Ok(AttemptLog {
            file: std::fs::File::create(path)?,
        })
    }

    fn line(&mut self, phase: Phase, stream: &str, text: &str) {
        let ts = Utc::now().to_rfc3339_opts(SecondsFormat::Millis, true);
        for part in text.split('\n') {
            let _ = writeln!(self.file, "{ts} | {} | {stream} | {part}", phase.as_str());
        }
    }

    fn hook_report(&mut self, phase: Phase, report: &HookReport) {
        for (stream, line) in &report.lines {
            self.line(phase, stream.label(), line);
        }
    }

    fn benchmark_error(&mut self, phase: Phase, err: &BenchmarkError) {
        self.line(phase, "runner", &format!("{} failed: {err}", phase.as_str()));
        let report = match err {
            BenchmarkError::HookFailed { report, .. } => Some(report.as_ref()),
            BenchmarkError::InfoHookFailed {
                report: Some(report),
                ..
            } => Some(report.as_ref()),
            _ => None,
        };
        if let Some(report) = report {
            self.hook_report(phase, report);
        }
    }
}

/// Runs one attempt into `dir` (which must not exist or be empty) and
/// returns its record. Tool and benchmark failures never error — they
/// produce an ERROR outcome with the cause in `repair.log`.
pub fn run_attempt(
    tool: &ToolDescriptor,
    benchmark: &BenchmarkDescriptor,
    bug: &BugCoordinate,
    config: &AttemptConfig,
    dir: &Path,
) -> Result<AttemptRecord, RunnerError> {
    config.validate()?;
    // Hooks run from the benchmark's own directory and the tool runs from
    // the workspace, so every path handed to them must be absolute.
    let dir = &std::path::absolute(dir)?;
    if dir.exists() && std::fs::read_dir(dir)?.next().is_some() {
        return Err(RunnerError::DirNotEmpty(dir.to_path_buf()));
    }
    std::fs::create_dir_all(dir)?;
    let log_path = dir.join(REPAIR_LOG_FILE);
    let result_path = dir.join(RESULTS_FILE);
    // The log is opened before anything can fail, so even a broken
    // checkout leaves diagnostics behind.
    let mut log = AttemptLog::open(&log_path)?;
    let started_at = Utc::now();
    let workspace = dir.join(WORKSPACE_DIR);

    let setup_options = HookOptions {
        budget: Some(Duration::from_secs_f64(config.setup_allowance_seconds)),
        grace: Duration::from_secs_f64(config.grace_seconds),
    };
    let mut durations = PhaseDurations::default();
    let mut exit = ExitInfo::default();
    let mut failed_phase = None;
    let mut patches: Vec<PatchEntry> = Vec::new();

    log.line(
        Phase::Checkout,
        "runner",
        &format!(
            "attempt starting: tool {} on {} (seed {}, budget {}s)",
            tool.name,
            bug.render(),
            config.seed,
            config.budget_seconds
        ),
    );

    let outcome: Outcome = 'attempt: {
        // Checkout.
        let phase_start = Instant::now();
        if let Err(e) = std::fs::create_dir_all(&workspace) {
            log.line(Phase::Checkout, "runner", &format!("cannot create workspace: {e}"));
            failed_phase = Some(Phase::Checkout);
            break 'attempt Outcome::Error;
        }
        match benchmark::checkout(benchmark, bug, &workspace, &setup_options) {
            Ok(report) => log.hook_report(Phase::Checkout, &report),
            Err(err) => {
                log.benchmark_error(Phase::Checkout, &err);
                failed_phase = Some(Phase::Checkout);
                break 'attempt Outcome::Error;
            }
        }
        durations.checkout_seconds = phase_start.elapsed().as_secs_f64();
        log.line(
            Phase::Checkout,
            "runner",
            &format!("checkout finished in {:.2}s", durations.checkout_seconds),
        );

        // Compile.
        let phase_start = Instant::now();
        match benchmark::compile(benchmark, &workspace, &setup_options) {
            Ok(report) => log.hook_report(Phase::Compile, &report),
            Err(err) => {
                log.benchmark_error(Phase::Compile, &err);
                failed_phase = Some(Phase::Compile);
                break 'attempt Outcome::Error;
            }
        }
        durations.compile_seconds = phase_start.elapsed().as_secs_f64();
        log.line(
            Phase::Compile,
            "runner",
            &format!("compile finished in {:.2}s", durations.compile_seconds),
        );

        // Bug metadata.
        let params = match benchmark::bug_info(benchmark, bug, &workspace, &setup_options) {
            Ok((params, report)) => {
                if let Some(report) = report {
                    log.hook_report(Phase::Info, &report);
                }
                log.line(Phase::Info, "runner", "bug metadata resolved");
                params
            }
            Err(err) => {
                log.benchmark_error(Phase::Info, &err);
                failed_phase = Some(Phase::Info);
                break 'attempt Outcome::Error;
            }
        };

        // Ground state for diff reconstruction.
        let snapshot = match snapshot_workspace(&workspace) {
            Ok(snapshot) => snapshot,
            Err(e) => {
                log.line(Phase::Tool, "runner", &format!("cannot snapshot workspace: {e}"));
                failed_phase = Some(Phase::Tool);
                break 'attempt Outcome::Error;
            }
        };

        // Command synthesis.
        let ctx = RenderContext {
            overrides: BTreeMap::new(),
            seed: config.seed,
            patch_limit: config.patch_limit,
        };
        let args = match tool::map_parameters(tool, &params, &ctx) {
            Ok(args) => args,
            Err(err) => {
                log.line(Phase::Tool, "runner", &format!("cannot render command: {err}"));
                failed_phase = Some(Phase::Tool);
                break 'attempt Outcome::Error;
            }
        };
        let command = match tool::build_command(tool, &args, &workspace, config.command_length_limit)
        {
            Ok(command) => command,
            Err(ToolError::CommandTooLong { length, limit }) => {
                log.line(
                    Phase::Tool,
                    "runner",
                    &format!(
                        "Argument list too long: rendered command is {length} characters (limit {limit})"
                    ),
                );
                failed_phase = Some(Phase::Tool);
                break 'attempt Outcome::Error;
            }
            Err(err) => {
                log.line(Phase::Tool, "runner", &format!("cannot build command: {err}"));
                failed_phase = Some(Phase::Tool);
                break 'attempt Outcome::Error;
            }
        };

        let mut shown = command.argv.join(" ");
        if shown.len() > 500 {
            shown.truncate(500);
            shown.push_str("… (truncated)");
        }
        log.line(Phase::Tool, "runner", &format!("launching: {shown}"));

        // Launch under the budget watchdog.
        let request = CommandRequest {
            argv: command.argv.clone(),
            env: command.environment.clone(),
            cwd: workspace.clone(),
            budget: Some(Duration::from_secs_f64(config.budget_seconds)),
            grace: Duration::from_secs_f64(config.grace_seconds),
        };
        let phase_start = Instant::now();
        let termination =
            match watchdog::run_supervised(&request, |stream, text| {
                log.line(Phase::Tool, stream.label(), text)
            }) {
                Ok(termination) => termination,
                Err(err) => {
                    log.line(Phase::Tool, "runner", &format!("cannot launch tool: {err}"));
                    failed_phase = Some(Phase::Tool);
                    break 'attempt Outcome::Error;
                }
            };
        durations.repair_seconds = phase_start.elapsed().as_secs_f64();
        exit = termination.exit;
        log.line(
            Phase::Tool,
            "runner",
            &format!(
                "tool finished: code {:?}, signal {:?}, watchdog {}",
                exit.code, exit.signal, exit.terminated_by_watchdog
            ),
        );
        if !termination.orphan_pids.is_empty() {
            log.line(
                Phase::Tool,
                "runner",
                &format!(
                    "ORPHAN_SURVIVOR: pids {:?} survived the force-kill sweep",
                    termination.orphan_pids
                ),
            );
        }

        // Output normalization.
        match normalize_output(&workspace, &snapshot, config.patch_limit as usize) {
            Ok(normalized) => {
                for note in &normalized.notes {
                    log.line(Phase::Tool, "runner", note);
                }
                for patch in &normalized.patches {
                    log.line(Phase::Tool, "runner", &format!("patch recorded for {}", patch.file));
                }
                patches = normalized.patches;
            }
            Err(err) => {
                log.line(Phase::Tool, "runner", &format!("{}: {err}", err.name()));
                failed_phase = Some(Phase::Tool);
                break 'attempt Outcome::Error;
            }
        }

        // Outcome decision: persisted patches outrank the exit path.
        if !patches.is_empty() {
            if exit.terminated_by_watchdog {
                // The record-level flag attributes the attempt's ending;
                // a patch that landed before the budget expired wins, so
                // the kill stays visible only via the log and signal.
                log.line(
                    Phase::Tool,
                    "runner",
                    "budget expired after a patch was already persisted; outcome is PATCHED",
                );
                exit.terminated_by_watchdog = false;
            }
            Outcome::Patched
        } else if exit.terminated_by_watchdog {
            Outcome::Timeout
        } else if exit.code == Some(0) {
            Outcome::NoPatch
        } else {
            Outcome::Error
        }
    };

    // results.json is written for every attempt, failed ones included.
    let normalized = NormalizedResult {
        schema_version: SCHEMA_VERSION,
        tool: tool.name.clone(),
        benchmark: bug.benchmark.clone(),
        bug_id: bug.bug_id.clone(),
        seed: config.seed,
        wall_time_seconds: durations.repair_seconds,
        patches: patches.clone(),
    };
    std::fs::write(
        &result_path,
        serde_json::to_string_pretty(&normalized).expect("result serializes"),
    )?;

    let record = AttemptRecord {
        schema_version: SCHEMA_VERSION,
        tool: tool.name.clone(),
        bug: bug.clone(),
        seed: config.seed,
        started_at,
        ended_at: Utc::now(),
        outcome,
        exit,
        failed_phase,
        patch_count: patches.len(),
        log_path: log_path.clone(),
        result_path: result_path.clone(),
        durations,
    };
    // The record is written last: a valid attempt.json therefore
    // implies the log and results files are already in place (resume
    // relies on this ordering).
    std::fs::write(
        dir.join(ATTEMPT_RECORD_FILE),
        serde_json::to_string_pretty(&record).expect("record serializes"),
    )?;
    log.line(
        Phase::Tool,
        "runner",
        &format!("attempt finished: outcome {outcome} ({} patches)", patches.len()),
    );

    if matches!(outcome, Outcome::Patched | Outcome::NoPatch) && !config.keep_workspace {
        match std::fs::remove_dir_all(&workspace) {
            Ok(()) => {}
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => {}
            Err(e) => log.line(Phase::Tool, "runner", &format!("workspace cleanup failed: {e}")),
        }
    }
    Ok(record)
}
