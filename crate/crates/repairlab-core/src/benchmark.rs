//! Declarative abstraction over bug benchmarks.
//!
//! A benchmark is described by a JSON manifest naming its bugs and three
//! hook commands — checkout, compile, and bug info — that the framework
//! invokes with `{bug_id}` / `{workspace}` placeholders substituted. The
//! info hook reports the benchmark-side subset of the abstract parameter
//! set as a `bug_info.json` file in the workspace, which is also used as
//! a cache on repeated calls.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::Duration;

use serde::{Deserialize, Serialize};

use crate::model::{BugCoordinate, ExitInfo, Phase};
use crate::watchdog::{self, CommandRequest, Stream, WatchdogError};

/// One hook command template: argv fragments that may contain the
/// placeholders `{bug_id}` and `{workspace}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HookTemplate {
    pub cmd: Vec<String>,
}

/// Informational benchmark metadata (not used by any algorithm).
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BenchmarkMetadata {
    #[serde(default)]
    pub project_count: Option<u64>,
    #[serde(default)]
    pub mean_lines_of_code: Option<f64>,
}

/// A validated benchmark: its bug list and the three required hooks.
#[derive(Debug, Clone, PartialEq)]
pub struct BenchmarkDescriptor {
    pub name: String,
    /// Sorted by bug id, duplicate-free.
    pub bugs: Vec<BugCoordinate>,
    pub checkout_hook: HookTemplate,
    pub compile_hook: HookTemplate,
    pub info_hook: HookTemplate,
    pub metadata: BenchmarkMetadata,
    /// Directory containing the manifest; hooks run with this as their
    /// working directory so they can use manifest-relative paths.
    pub root: PathBuf,
}

/// The eight abstract input parameters every repair tool receives. The
/// first seven come from the benchmark's info hook; `workspace` is
/// supplied by the runner.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct AbstractParameterSet {
    pub source_path: PathBuf,
    pub test_path: PathBuf,
    pub source_binary_path: PathBuf,
    pub test_binary_path: PathBuf,
    pub classpath: Vec<PathBuf>,
    pub language_level: String,
    pub failing_test_identifiers: Vec<String>,
    pub workspace: PathBuf,
}

/// Outcome of one hook invocation.
#[derive(Debug, Clone)]
pub struct HookReport {
    pub phase: Phase,
    pub exit: ExitInfo,
    pub duration: Duration,
    /// Output lines in arrival order, tagged by stream.
    pub lines: Vec<(Stream, String)>,
}

impl HookReport {
    pub fn succeeded(&self) -> bool {
        self.exit.code == Some(0) && !self.exit.terminated_by_watchdog
    }

    /// Lines from one stream, joined with newlines.
    pub fn stream_text(&self, stream: Stream) -> String {
        self.lines
            .iter()
            .filter(|(s, _)| *s == stream)
            .map(|(_, l)| l.as_str())
            .collect::<Vec<_>>()
            .join("\n")
    }
}

/// Time limits applied to hook execution.
#[derive(Debug, Clone)]
pub struct HookOptions {
    /// Wall-clock allowance for one hook; `None` waits indefinitely.
    pub budget: Option<Duration>,
    /// Grace between the polite stop and the force kill on overrun.
    pub grace: Duration,
}

impl Default for HookOptions {
    fn default() -> Self {
        HookOptions {
            budget: None,
            grace: Duration::from_secs(10),
        }
    }
}

/// Errors from benchmark loading and hook execution.
#[derive(Debug, thiserror::Error)]
pub enum BenchmarkError {
    #[error("failed to parse benchmark manifest {path:?}: {reason}")]
    ManifestParse { path: PathBuf, reason: String },
    #[error("benchmark manifest is missing the required {name:?} hook")]
    MissingHook { name: &'static str },
    #[error("benchmark manifest declares no bugs")]
    EmptyBugList,
    #[error("benchmark manifest declares bug {bug} more than once")]
    DuplicateBug { bug: BugCoordinate },
    #[error("bug {bug} is not part of benchmark {benchmark:?}")]
    UnknownBug { bug: BugCoordinate, benchmark: String },
    #[error("checkout destination {dest:?} is not empty")]
    DestNotEmpty { dest: PathBuf },
    #[error("{phase} hook failed ({exit_description})")]
    HookFailed {
        phase: Phase,
        exit_description: String,
        report: Box<HookReport>,
    },
    #[error("info hook failed: {reason}")]
    InfoHookFailed {
        reason: String,
        report: Option<Box<HookReport>>,
    },
    #[error("bug {bug} reports no failing tests")]
    MissingFailingTests { bug: BugCoordinate },
    #[error("{role} path {path:?} does not exist")]
    PathNotFound { role: String, path: PathBuf },
    #[error(transparent)]
    Watchdog(#[from] WatchdogError),
    #[error("i/o failure: {0}")]
    Io(#[from] std::io::Error),
}

/// Raw manifest shape (see the format notes in this module's docs).
#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawManifest {
    name: String,
    bugs: Vec<RawBug>,
    hooks: BTreeMap<String, HookTemplate>,
    #[serde(default)]
    metadata: BenchmarkMetadata,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawBug {
    #[serde(default)]
    project: String,
    id: String,
}

const HOOK_NAMES: [&str; 3] = ["checkout", "compile", "info"];

/// Placeholders each hook may use: the compile hook runs on an existing
/// workspace whose bug identity it need not know.
fn allowed_placeholders(hook: &str) -> &'static [&'static str] {
    match hook {
        "compile" => &["workspace"],
        _ => &["bug_id", "workspace"],
    }
}

fn validate_placeholders(
    hook: &str,
    template: &HookTemplate,
    path: &Path,
) -> Result<(), BenchmarkError> {
    let token = regex::Regex::new(r"\{([a-zA-Z_]+)\}").expect("static regex");
    for fragment in &template.cmd {
        for capture in token.captures_iter(fragment) {
            let name = &capture[1];
            if !allowed_placeholders(hook).contains(&name) {
                return Err(BenchmarkError::ManifestParse {
                    path: path.to_path_buf(),
                    reason: format!(
                        "{hook} hook references unsupported placeholder {{{name}}}"
                    ),
                });
            }
        }
    }
    if template.cmd.is_empty() {
        return Err(BenchmarkError::ManifestParse {
            path: path.to_path_buf(),
            reason: format!("{hook} hook command is empty"),
        });
    }
    Ok(())
}

/// Loads and validates a benchmark manifest.
pub fn load_benchmark_manifest(path: &Path) -> Result<BenchmarkDescriptor, BenchmarkError> {
    let text = std::fs::read_to_string(path).map_err(|e| BenchmarkError::ManifestParse {
        path: path.to_path_buf(),
        reason: e.to_string(),
    })?;
    let raw: RawManifest =
        serde_json::from_str(&text).map_err(|e| BenchmarkError::ManifestParse {
            path: path.to_path_buf(),
            reason: e.to_string(),
        })?;

    for name in HOOK_NAMES {
        if !raw.hooks.contains_key(name) {
            return Err(BenchmarkError::MissingHook { name });
        }
    }
    if let Some(unknown) = raw.hooks.keys().find(|k| !HOOK_NAMES.contains(&k.as_str())) {
        return Err(BenchmarkError::ManifestParse {
            path: path.to_path_buf(),
            reason: format!("unknown hook {unknown:?}"),
        });
    }
    for name in HOOK_NAMES {
        validate_placeholders(name, &raw.hooks[name], path)?;
    }

    if raw.bugs.is_empty() {
        return Err(BenchmarkError::EmptyBugList);
    }
    let mut bugs = Vec::with_capacity(raw.bugs.len());
    for raw_bug in &raw.bugs {
        let bug = BugCoordinate::new(&raw.name, &raw_bug.project, &raw_bug.id).map_err(|e| {
            BenchmarkError::ManifestParse {
                path: path.to_path_buf(),
                reason: e.to_string(),
            }
        })?;
        if bugs.contains(&bug) {
            return Err(BenchmarkError::DuplicateBug { bug });
        }
        bugs.push(bug);
    }
    bugs.sort();

    let root = path
        .parent()
        .map(Path::to_path_buf)
        .filter(|p| !p.as_os_str().is_empty())
        .unwrap_or_else(|| PathBuf::from("."));

    Ok(BenchmarkDescriptor {
        name: raw.name,
        bugs,
        checkout_hook: raw.hooks["checkout"].clone(),
        compile_hook: raw.hooks["compile"].clone(),
        info_hook: raw.hooks["info"].clone(),
        metadata: raw.metadata,
        root,
    })
}

fn substitute(template: &HookTemplate, subs: &[(&str, &str)]) -> Vec<String> {
    template
        .cmd
        .iter()
        .map(|fragment| {
            let mut out = fragment.clone();
            for (name, value) in subs {
                out = out.replace(&format!("{{{name}}}"), value);
            }
            out
        })
        .collect()
}

fn exec_hook(
    benchmark: &BenchmarkDescriptor,
    phase: Phase,
    template: &HookTemplate,
    subs: &[(&str, &str)],
    options: &HookOptions,
) -> Result<HookReport, BenchmarkError> {
    let request = CommandRequest {
        argv: substitute(template, subs),
        env: BTreeMap::new(),
        cwd: benchmark.root.clone(),
        budget: options.budget,
        grace: options.grace,
    };
    let mut lines = Vec::new();
    let info = watchdog::run_supervised(&request, |stream, line| {
        lines.push((stream, line.to_string()));
    })?;
    Ok(HookReport {
        phase,
        exit: info.exit,
        duration: info.duration,
        lines,
    })
}

fn hook_failure(report: HookReport) -> BenchmarkError {
    let exit_description = if report.exit.terminated_by_watchdog {
        "terminated by watchdog".to_string()
    } else {
        match (report.exit.code, report.exit.signal) {
            (Some(code), _) => format!("exit code {code}"),
            (None, Some(sig)) => format!("signal {sig}"),
            (None, None) => "unknown exit".to_string(),
        }
    };
    BenchmarkError::HookFailed {
        phase: report.phase,
        exit_description,
        report: Box::new(report),
    }
}

fn require_known_bug(
    benchmark: &BenchmarkDescriptor,
    bug: &BugCoordinate,
) -> Result<(), BenchmarkError> {
    if benchmark.bugs.contains(bug) {
        Ok(())
    } else {
        Err(BenchmarkError::UnknownBug {
            bug: bug.clone(),
            benchmark: benchmark.name.clone(),
        })
    }
}

/// Checks out `bug` into `dest` (created if absent; must be empty).
pub fn checkout(
    benchmark: &BenchmarkDescriptor,
    bug: &BugCoordinate,
    dest: &Path,
    options: &HookOptions,
) -> Result<HookReport, BenchmarkError> {
    require_known_bug(benchmark, bug)?;
    if dest.exists() && std::fs::read_dir(dest)?.next().is_some() {
        return Err(BenchmarkError::DestNotEmpty {
            dest: dest.to_path_buf(),
        });
    }
    std::fs::create_dir_all(dest)?;
    let dest_str = dest.to_string_lossy();
    let report = exec_hook(
        benchmark,
        Phase::Checkout,
        &benchmark.checkout_hook,
        &[("bug_id", &bug.bug_id), ("workspace", &dest_str)],
        options,
    )?;
    if report.succeeded() {
        Ok(report)
    } else {
        Err(hook_failure(report))
    }
}

/// Compiles the checked-out program in `workspace`.
pub fn compile(
    benchmark: &BenchmarkDescriptor,
    workspace: &Path,
    options: &HookOptions,
) -> Result<HookReport, BenchmarkError> {
    let ws = workspace.to_string_lossy();
    let report = exec_hook(
        benchmark,
        Phase::Compile,
        &benchmark.compile_hook,
        &[("workspace", &ws)],
        options,
    )?;
    if report.succeeded() {
        Ok(report)
    } else {
        Err(hook_failure(report))
    }
}

/// The seven benchmark-side parameters as stored in `bug_info.json`.
#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawParams {
    source_path: String,
    test_path: String,
    source_binary_path: String,
    test_binary_path: String,
    classpath: Vec<String>,
    language_level: String,
    failing_test_identifiers: Vec<String>,
}

const BUG_INFO_FILE: &str = "bug_info.json";

fn resolve_and_check(
    role: &str,
    raw: &str,
    workspace: &Path,
) -> Result<PathBuf, BenchmarkError> {
    let candidate = PathBuf::from(raw);
    let resolved = if candidate.is_absolute() {
        candidate
    } else {
        workspace.join(candidate)
    };
    if resolved.exists() {
        Ok(resolved)
    } else {
        Err(BenchmarkError::PathNotFound {
            role: role.to_string(),
            path: resolved,
        })
    }
}

fn parse_params(
    text: &str,
    workspace: &Path,
    bug: &BugCoordinate,
) -> Result<AbstractParameterSet, BenchmarkError> {
    let raw: RawParams =
        serde_json::from_str(text).map_err(|e| BenchmarkError::InfoHookFailed {
            reason: format!("malformed {BUG_INFO_FILE}: {e}"),
            report: None,
        })?;
    if raw.failing_test_identifiers.is_empty() {
        return Err(BenchmarkError::MissingFailingTests { bug: bug.clone() });
    }
    let classpath = raw
        .classpath
        .iter()
        .map(|entry| resolve_and_check("classpath entry", entry, workspace))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(AbstractParameterSet {
        source_path: resolve_and_check("source_path", &raw.source_path, workspace)?,
        test_path: resolve_and_check("test_path", &raw.test_path, workspace)?,
        source_binary_path: resolve_and_check(
            "source_binary_path",
            &raw.source_binary_path,
            workspace,
        )?,
        test_binary_path: resolve_and_check(
            "test_binary_path",
            &raw.test_binary_path,
            workspace,
        )?,
        classpath,
        language_level: raw.language_level,
        failing_test_identifiers: raw.failing_test_identifiers,
        workspace: workspace.to_path_buf(),
    })
}

/// Returns the abstract parameters for `bug` in `workspace`, running the
/// info hook unless a valid `bug_info.json` cache is already present.
/// The report is `None` on a cache hit.
pub fn bug_info(
    benchmark: &BenchmarkDescriptor,
    bug: &BugCoordinate,
    workspace: &Path,
    options: &HookOptions,
) -> Result<(AbstractParameterSet, Option<HookReport>), BenchmarkError> {
    require_known_bug(benchmark, bug)?;
    let cache = workspace.join(BUG_INFO_FILE);
    if let Ok(text) = std::fs::read_to_string(&cache) {
        if let Ok(params) = parse_params(&text, workspace, bug) {
            return Ok((params, None));
        }
        // Stale or malformed cache: fall through and rerun the hook.
    }

    let ws = workspace.to_string_lossy();
    let report = exec_hook(
        benchmark,
        Phase::Info,
        &benchmark.info_hook,
        &[("bug_id", &bug.bug_id), ("workspace", &ws)],
        options,
    )?;
    if !report.succeeded() {
        let reason = format!(
            "hook exited with {:?} (watchdog: {})",
            report.exit.code, report.exit.terminated_by_watchdog
        );
        return Err(BenchmarkError::InfoHookFailed {
            reason,
            report: Some(Box::new(report)),
        });
    }
    let text = std::fs::read_to_string(&cache).map_err(|_| BenchmarkError::InfoHookFailed {
        reason: format!("hook did not produce {BUG_INFO_FILE}"),
        report: Some(Box::new(report.clone())),
    })?;
    let params = parse_params(&text, workspace, bug)?;
    Ok((params, Some(report)))
}

/// Matches `pattern` (with `*` and `?` wildcards) against `text`.
fn glob_match(pattern: &str, text: &str) -> bool {
    fn inner(p: &[u8], t: &[u8]) -> bool {
        match (p.first(), t.first()) {
            (None, None) => true,
            (Some(b'*'), _) => inner(&p[1..], t) || (!t.is_empty() && inner(p, &t[1..])),
            (Some(b'?'), Some(_)) => inner(&p[1..], &t[1..]),
            (Some(a), Some(b)) if a == b => inner(&p[1..], &t[1..]),
            _ => false,
        }
    }
    inner(pattern.as_bytes(), text.as_bytes())
}

/// Lists the benchmark's bugs in lexicographic order, optionally
/// filtered by a glob. A pattern containing `/` matches against
/// `project/bug_id`; otherwise it matches the bug id alone.
pub fn list_bugs(benchmark: &BenchmarkDescriptor, filter: Option<&str>) -> Vec<BugCoordinate> {
    benchmark
        .bugs
        .iter()
        .filter(|bug| match filter {
            None => true,
            Some(pattern) if pattern.contains('/') => {
                glob_match(pattern, &format!("{}/{}", bug.project, bug.bug_id))
            }
            Some(pattern) => glob_match(pattern, &bug.bug_id),
        })
        .cloned()
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::parse_bug_in_benchmark;
    use std::fmt::Write as _;

    /// Writes a benchmark rooted at `dir` with sh-script hooks: checkout
    /// copies `bugs/<id>/` into the workspace, compile "builds" a
    /// binaries directory, info emits bug_info.json.
    fn write_fixture_benchmark(dir: &Path, bug_ids: &[&str]) -> PathBuf {
        for id in bug_ids {
            let bug_dir = dir.join("bugs").join(id);
            std::fs::create_dir_all(bug_dir.join("src")).unwrap();
            std::fs::create_dir_all(bug_dir.join("tests")).unwrap();
            std::fs::write(
                bug_dir.join("src/program.src"),
                format!("program for {id}\n"),
            )
            .unwrap();
            std::fs::write(bug_dir.join("tests/suite.txt"), "1 -> 2\n").unwrap();
        }

        std::fs::write(
            dir.join("checkout.sh"),
            "#!/bin/sh\nset -e\ncp -r \"bugs/$1/.\" \"$2/\"\n",
        )
        .unwrap();
        std::fs::write(
            dir.join("compile.sh"),
            concat!(
                "#!/bin/sh\n",
                "if [ ! -d \"$1/src\" ]; then echo 'workspace missing sources' >&2; exit 1; fi\n",
                "mkdir -p \"$1/bin\" \"$1/test-bin\"\n",
                "echo compiled > \"$1/bin/program.bin\"\n",
            ),
        )
        .unwrap();
        std::fs::write(
            dir.join("info.sh"),
            concat!(
                "#!/bin/sh\n",
                "echo ran >> \"$2/info_invocations\"\n",
                "cat > \"$2/bug_info.json\" <<'JSON'\n",
                "{\n",
                "  \"source_path\": \"src\",\n",
                "  \"test_path\": \"tests\",\n",
                "  \"source_binary_path\": \"bin\",\n",
                "  \"test_binary_path\": \"test-bin\",\n",
                "  \"classpath\": [\"bin\"],\n",
                "  \"language_level\": \"1\",\n",
                "  \"failing_test_identifiers\": [\"t3\"]\n",
                "}\n",
                "JSON\n",
            ),
        )
        .unwrap();

        let mut bugs = String::new();
        for (i, id) in bug_ids.iter().enumerate() {
            if i > 0 {
                bugs.push(',');
            }
            write!(bugs, "{{\"id\": \"{id}\"}}").unwrap();
        }
        let manifest = dir.join("benchmark.json");
        std::fs::write(
            &manifest,
            format!(
                concat!(
                    "{{\n",
                    "  \"name\": \"minibench\",\n",
                    "  \"bugs\": [{bugs}],\n",
                    "  \"hooks\": {{\n",
                    "    \"checkout\": {{\"cmd\": [\"sh\", \"checkout.sh\", \"{{bug_id}}\", \"{{workspace}}\"]}},\n",
                    "    \"compile\": {{\"cmd\": [\"sh\", \"compile.sh\", \"{{workspace}}\"]}},\n",
                    "    \"info\": {{\"cmd\": [\"sh\", \"info.sh\", \"{{bug_id}}\", \"{{workspace}}\"]}}\n",
                    "  }},\n",
                    "  \"metadata\": {{\"project_count\": 1}}\n",
                    "}}\n"
                ),
                bugs = bugs
            ),
        )
        .unwrap();
        manifest
    }

    fn load_fixture(dir: &Path, bug_ids: &[&str]) -> BenchmarkDescriptor {
        load_benchmark_manifest(&write_fixture_benchmark(dir, bug_ids)).unwrap()
    }

    fn bug(desc: &BenchmarkDescriptor, id: &str) -> BugCoordinate {
        parse_bug_in_benchmark(&desc.name, id).unwrap()
    }

    #[test]
    fn loads_a_valid_manifest() {
        let dir = tempfile::tempdir().unwrap();
        let desc = load_fixture(dir.path(), &["bug_01", "bug_02"]);
        assert_eq!(desc.name, "minibench");
        assert_eq!(desc.bugs.len(), 2);
        assert_eq!(desc.metadata.project_count, Some(1));
        assert_eq!(desc.root, dir.path());
    }

    /// One scenario per validation path, in a single table.
    #[test]
    fn manifest_validation_paths() {
        let hooks_all = r#""checkout": {"cmd": ["sh", "c.sh", "{bug_id}", "{workspace}"]},
                           "compile": {"cmd": ["sh", "m.sh", "{workspace}"]},
                           "info": {"cmd": ["sh", "i.sh", "{bug_id}", "{workspace}"]}"#;
        let cases: Vec<(String, fn(&BenchmarkError) -> bool)> = vec![
            (
                // Missing compile hook.
                r#"{"name": "b", "bugs": [{"id": "x"}], "hooks": {
                    "checkout": {"cmd": ["sh"]}, "info": {"cmd": ["sh"]}}}"#
                    .to_string(),
                |e| matches!(e, BenchmarkError::MissingHook { name: "compile" }),
            ),
            (
                // Empty bug list.
                format!(r#"{{"name": "b", "bugs": [], "hooks": {{{hooks_all}}}}}"#),
                |e| matches!(e, BenchmarkError::EmptyBugList),
            ),
            (
                // Duplicate bugs beat the empty-list check (they are a
                // distinct validation failure, not an empty list).
                format!(
                    r#"{{"name": "b", "bugs": [{{"id": "x"}}, {{"id": "x"}}],
                        "hooks": {{{hooks_all}}}}}"#
                ),
                |e| matches!(e, BenchmarkError::DuplicateBug { .. }),
            ),
            (
                // Unknown placeholder.
                r#"{"name": "b", "bugs": [{"id": "x"}], "hooks": {
                    "checkout": {"cmd": ["sh", "{bogus}"]},
                    "compile": {"cmd": ["sh"]}, "info": {"cmd": ["sh"]}}}"#
                    .to_string(),
                |e| matches!(e, BenchmarkError::ManifestParse { .. }),
            ),
            (
                // Compile hook may not reference {bug_id}.
                r#"{"name": "b", "bugs": [{"id": "x"}], "hooks": {
                    "checkout": {"cmd": ["sh"]},
                    "compile": {"cmd": ["sh", "{bug_id}"]}, "info": {"cmd": ["sh"]}}}"#
                    .to_string(),
                |e| matches!(e, BenchmarkError::ManifestParse { .. }),
            ),
            (
                // Unknown hook name.
                format!(
                    r#"{{"name": "b", "bugs": [{{"id": "x"}}],
                        "hooks": {{{hooks_all}, "deploy": {{"cmd": ["sh"]}}}}}}"#
                ),
                |e| matches!(e, BenchmarkError::ManifestParse { .. }),
            ),
            (
                // Not JSON at all.
                "not json".to_string(),
                |e| matches!(e, BenchmarkError::ManifestParse { .. }),
            ),
        ];
        for (i, (manifest, check)) in cases.iter().enumerate() {
            let dir = tempfile::tempdir().unwrap();
            let path = dir.path().join("benchmark.json");
            std::fs::write(&path, manifest).unwrap();
            let err = load_benchmark_manifest(&path).unwrap_err();
            assert!(check(&err), "case {i}: unexpected error {err:?}");
        }
    }

    #[test]
    fn checkout_populates_an_empty_destination() {
        let dir = tempfile::tempdir().unwrap();
        let desc = load_fixture(dir.path(), &["bug_01"]);
        let dest = dir.path().join("ws");
        let report = checkout(&desc, &bug(&desc, "bug_01"), &dest, &HookOptions::default())
            .unwrap();
        assert!(report.succeeded());
        assert!(dest.join("src/program.src").exists());
        assert!(dest.join("tests/suite.txt").exists());
    }

    #[test]
    fn checkout_rejects_unknown_bugs_and_nonempty_destinations() {
        let dir = tempfile::tempdir().unwrap();
        let desc = load_fixture(dir.path(), &["bug_01"]);
        let dest = dir.path().join("ws");

        let ghost = parse_bug_in_benchmark(&desc.name, "bug_99").unwrap();
        assert!(matches!(
            checkout(&desc, &ghost, &dest, &HookOptions::default()),
            Err(BenchmarkError::UnknownBug { .. })
        ));

        checkout(&desc, &bug(&desc, "bug_01"), &dest, &HookOptions::default()).unwrap();
        assert!(matches!(
            checkout(&desc, &bug(&desc, "bug_01"), &dest, &HookOptions::default()),
            Err(BenchmarkError::DestNotEmpty { .. })
        ));
    }

    #[test]
    fn checkout_accepts_an_existing_empty_directory() {
        let dir = tempfile::tempdir().unwrap();
        let desc = load_fixture(dir.path(), &["bug_01"]);
        let dest = dir.path().join("ws");
        std::fs::create_dir_all(&dest).unwrap();
        checkout(&desc, &bug(&desc, "bug_01"), &dest, &HookOptions::default()).unwrap();
    }

    #[test]
    fn failing_hooks_surface_exit_and_stderr() {
        let dir = tempfile::tempdir().unwrap();
        let manifest = write_fixture_benchmark(dir.path(), &["bug_01"]);
        std::fs::write(
            dir.path().join("checkout.sh"),
            "#!/bin/sh\necho 'disk on fire' >&2\nexit 9\n",
        )
        .unwrap();
        let desc = load_benchmark_manifest(&manifest).unwrap();
        let err = checkout(
            &desc,
            &bug(&desc, "bug_01"),
            &dir.path().join("ws"),
            &HookOptions::default(),
        )
        .unwrap_err();
        match err {
            BenchmarkError::HookFailed { phase, report, .. } => {
                assert_eq!(phase, Phase::Checkout);
                assert_eq!(report.exit.code, Some(9));
                assert_eq!(report.stream_text(Stream::Stderr), "disk on fire");
            }
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn hung_hooks_are_cut_off_by_the_allowance() {
        let dir = tempfile::tempdir().unwrap();
        let manifest = write_fixture_benchmark(dir.path(), &["bug_01"]);
        std::fs::write(dir.path().join("checkout.sh"), "#!/bin/sh\nsleep 60\n").unwrap();
        let desc = load_benchmark_manifest(&manifest).unwrap();
        let options = HookOptions {
            budget: Some(Duration::from_millis(200)),
            grace: Duration::from_millis(200),
        };
        let err = checkout(&desc, &bug(&desc, "bug_01"), &dir.path().join("ws"), &options)
            .unwrap_err();
        match err {
            BenchmarkError::HookFailed { report, .. } => {
                assert!(report.exit.terminated_by_watchdog);
            }
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn compile_builds_binaries_and_fails_without_sources() {
        let dir = tempfile::tempdir().unwrap();
        let desc = load_fixture(dir.path(), &["bug_01"]);
        let ws = dir.path().join("ws");

        // Before checkout: the hook diagnoses the missing sources.
        std::fs::create_dir_all(&ws).unwrap();
        let err = compile(&desc, &ws, &HookOptions::default()).unwrap_err();
        match err {
            BenchmarkError::HookFailed { report, .. } => {
                assert!(report
                    .stream_text(Stream::Stderr)
                    .contains("workspace missing sources"));
            }
            other => panic!("unexpected error {other:?}"),
        }

        std::fs::remove_dir_all(&ws).unwrap();
        checkout(&desc, &bug(&desc, "bug_01"), &ws, &HookOptions::default()).unwrap();
        compile(&desc, &ws, &HookOptions::default()).unwrap();
        assert!(ws.join("bin/program.bin").exists());
    }

    fn checked_out_workspace(dir: &Path, desc: &BenchmarkDescriptor) -> PathBuf {
        let ws = dir.join("ws");
        checkout(desc, &bug(desc, "bug_01"), &ws, &HookOptions::default()).unwrap();
        compile(desc, &ws, &HookOptions::default()).unwrap();
        ws
    }

    #[test]
    fn bug_info_resolves_paths_and_caches() {
        let dir = tempfile::tempdir().unwrap();
        let desc = load_fixture(dir.path(), &["bug_01"]);
        let ws = checked_out_workspace(dir.path(), &desc);

        let (params, report) =
            bug_info(&desc, &bug(&desc, "bug_01"), &ws, &HookOptions::default()).unwrap();
        assert!(report.is_some());
        assert_eq!(params.source_path, ws.join("src"));
        assert_eq!(params.test_path, ws.join("tests"));
        assert_eq!(params.classpath, [ws.join("bin")]);
        assert_eq!(params.failing_test_identifiers, ["t3"]);
        assert_eq!(params.workspace, ws);
        assert!(params.source_path.exists());

        // Second call: served from bug_info.json, hook not re-run.
        let (cached, report) =
            bug_info(&desc, &bug(&desc, "bug_01"), &ws, &HookOptions::default()).unwrap();
        assert!(report.is_none());
        assert_eq!(cached, params);
        let invocations = std::fs::read_to_string(ws.join("info_invocations")).unwrap();
        assert_eq!(invocations.lines().count(), 1);
    }

    fn with_info_json(dir: &Path, json: &str) -> (BenchmarkDescriptor, PathBuf) {
        let manifest = write_fixture_benchmark(dir, &["bug_01"]);
        let script = format!("#!/bin/sh\ncat > \"$2/bug_info.json\" <<'JSON'\n{json}\nJSON\n");
        std::fs::write(dir.join("info.sh"), script).unwrap();
        let desc = load_benchmark_manifest(&manifest).unwrap();
        let ws = checked_out_workspace(dir, &desc);
        (desc, ws)
    }

    #[test]
    fn bug_info_rejects_empty_failing_tests() {
        let dir = tempfile::tempdir().unwrap();
        let (desc, ws) = with_info_json(
            dir.path(),
            r#"{"source_path": "src", "test_path": "tests",
                "source_binary_path": "bin", "test_binary_path": "test-bin",
                "classpath": [], "language_level": "1",
                "failing_test_identifiers": []}"#,
        );
        assert!(matches!(
            bug_info(&desc, &bug(&desc, "bug_01"), &ws, &HookOptions::default()),
            Err(BenchmarkError::MissingFailingTests { .. })
        ));
    }

    #[test]
    fn bug_info_names_missing_classpath_entries() {
        let dir = tempfile::tempdir().unwrap();
        let (desc, ws) = with_info_json(
            dir.path(),
            r#"{"source_path": "src", "test_path": "tests",
                "source_binary_path": "bin", "test_binary_path": "test-bin",
                "classpath": ["no-such-jar"], "language_level": "1",
                "failing_test_identifiers": ["t1"]}"#,
        );
        let err = bug_info(&desc, &bug(&desc, "bug_01"), &ws, &HookOptions::default())
            .unwrap_err();
        match err {
            BenchmarkError::PathNotFound { role, path } => {
                assert_eq!(role, "classpath entry");
                assert!(path.ends_with("no-such-jar"));
            }
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn bug_info_requires_the_hook_to_write_the_file() {
        let dir = tempfile::tempdir().unwrap();
        let manifest = write_fixture_benchmark(dir.path(), &["bug_01"]);
        std::fs::write(dir.path().join("info.sh"), "#!/bin/sh\ntrue\n").unwrap();
        let desc = load_benchmark_manifest(&manifest).unwrap();
        let ws = checked_out_workspace(dir.path(), &desc);
        let err = bug_info(&desc, &bug(&desc, "bug_01"), &ws, &HookOptions::default())
            .unwrap_err();
        assert!(matches!(err, BenchmarkError::InfoHookFailed { .. }), "{err:?}");
    }

    #[test]
    fn bug_info_propagates_hook_failure() {
        let dir = tempfile::tempdir().unwrap();
        let manifest = write_fixture_benchmark(dir.path(), &["bug_01"]);
        std::fs::write(dir.path().join("info.sh"), "#!/bin/sh\nexit 4\n").unwrap();
        let desc = load_benchmark_manifest(&manifest).unwrap();
        let ws = checked_out_workspace(dir.path(), &desc);
        assert!(matches!(
            bug_info(&desc, &bug(&desc, "bug_01"), &ws, &HookOptions::default()),
            Err(BenchmarkError::InfoHookFailed { .. })
        ));
    }

    fn tree_digest(root: &Path) -> Vec<(PathBuf, Vec<u8>)> {
        let mut entries: Vec<(PathBuf, Vec<u8>)> = walkdir::WalkDir::new(root)
            .into_iter()
            .map(|e| e.unwrap())
            .filter(|e| e.file_type().is_file())
            .map(|e| {
                (
                    e.path().strip_prefix(root).unwrap().to_path_buf(),
                    std::fs::read(e.path()).unwrap(),
                )
            })
            .collect();
        entries.sort();
        entries
    }

    #[test]
    fn checkout_is_reproducible_and_does_not_touch_the_benchmark_tree() {
        let dir = tempfile::tempdir().unwrap();
        let desc = load_fixture(dir.path(), &["bug_01", "bug_02"]);
        let before = tree_digest(&dir.path().join("bugs"));

        let ws1 = dir.path().join("ws1");
        let ws2 = dir.path().join("ws2");
        checkout(&desc, &bug(&desc, "bug_02"), &ws1, &HookOptions::default()).unwrap();
        checkout(&desc, &bug(&desc, "bug_02"), &ws2, &HookOptions::default()).unwrap();
        assert_eq!(tree_digest(&ws1), tree_digest(&ws2));

        compile(&desc, &ws1, &HookOptions::default()).unwrap();
        assert_eq!(tree_digest(&dir.path().join("bugs")), before);
    }

    #[test]
    fn list_bugs_orders_and_filters() {
        let dir = tempfile::tempdir().unwrap();
        let ids: Vec<String> = (1..=10).map(|i| format!("bug_{i:02}")).collect();
        let id_refs: Vec<&str> = ids.iter().map(String::as_str).collect();
        let desc = load_fixture(dir.path(), &id_refs);

        let all = list_bugs(&desc, None);
        assert_eq!(all.len(), 10);
        assert!(all.windows(2).all(|w| w[0] < w[1]));

        let single_digit = list_bugs(&desc, Some("bug_0?"));
        assert_eq!(single_digit.len(), 9);
        assert!(single_digit.iter().all(|b| b.bug_id != "bug_10"));

        assert!(list_bugs(&desc, Some("zzz*")).is_empty());
    }

    #[test]
    fn project_qualified_filters_match_project_and_id() {
        let dir = tempfile::tempdir().unwrap();
        let manifest = dir.path().join("benchmark.json");
        std::fs::write(
            &manifest,
            r#"{"name": "b",
                "bugs": [{"project": "math", "id": "M-1"},
                         {"project": "math", "id": "M-2"},
                         {"project": "lang", "id": "L-1"}],
                "hooks": {"checkout": {"cmd": ["sh", "-c", "true"]},
                          "compile": {"cmd": ["sh", "-c", "true"]},
                          "info": {"cmd": ["sh", "-c", "true"]}}}"#,
        )
        .unwrap();
        let desc = load_benchmark_manifest(&manifest).unwrap();
        let math = list_bugs(&desc, Some("math/*"));
        assert_eq!(math.len(), 2);
        assert!(math.iter().all(|b| b.project == "math"));
        // Without a slash the pattern applies to ids only.
        assert_eq!(list_bugs(&desc, Some("?-1")).len(), 2);
    }

    #[test]
    fn glob_matching_basics() {
        assert!(glob_match("bug_0?", "bug_01"));
        assert!(!glob_match("bug_0?", "bug_10"));
        assert!(glob_match("*", "anything"));
        assert!(glob_match("a*c", "abc"));
        assert!(glob_match("a*c", "ac"));
        assert!(!glob_match("a*c", "ab"));
        assert!(glob_match("", ""));
        assert!(!glob_match("", "x"));
    }
}
