//! End-to-end tests of the `repairlab` binary: exit-code contract,
//! setting precedence, machine-readable output, and the full
//! campaign → analyze → classify pipeline over the bundled fixtures.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

fn repairlab() -> &'static str {
    env!("CARGO_BIN_EXE_repairlab")
}

/// A scratch directory with the toy benchmark and fixture tool
/// manifests installed.
struct Fixture {
    dir: TempDir,
}

impl Fixture {
    fn new() -> Fixture {
        let dir = TempDir::new().expect("create fixture dir");
        let install = Command::new(env!("CARGO_BIN_EXE_toy-bench"))
            .args(["init", "--dir"])
            .arg(dir.path().join("benchmarks/toybench"))
            .output()
            .expect("run toy-bench init");
        assert!(install.status.success(), "toy-bench init failed");
        let tools = Command::new(env!("CARGO_BIN_EXE_toy-bench"))
            .args(["tools", "--dir"])
            .arg(dir.path().join("tools"))
            .output()
            .expect("run toy-bench tools");
        assert!(tools.status.success(), "toy-bench tools failed");
        Fixture { dir }
    }

    fn path(&self) -> &Path {
        self.dir.path()
    }

    fn root(&self) -> PathBuf {
        self.path().join("results")
    }

    /// Runs `repairlab` with this fixture as the working directory.
    fn run(&self, args: &[&str]) -> Output {
        self.run_with_env(args, &[])
    }

    fn run_with_env(&self, args: &[&str], envs: &[(&str, &str)]) -> Output {
        let mut cmd = Command::new(repairlab());
        cmd.args(args).current_dir(self.path());
        for (key, value) in envs {
            cmd.env(key, value);
        }
        cmd.output().expect("run repairlab")
    }
}

fn stdout(output: &Output) -> String {
    String::from_utf8_lossy(&output.stdout).into_owned()
}

fn stderr(output: &Output) -> String {
    String::from_utf8_lossy(&output.stderr).into_owned()
}

/// Extracts the decoded JSON line carrying the given event type.
fn json_event(output: &Output, event: &str) -> serde_json::Value {
    for line in stdout(output).lines() {
        let value: serde_json::Value = serde_json::from_str(line)
            .unwrap_or_else(|e| panic!("non-JSON line in --json mode: {line:?} ({e})"));
        if value["event"] == event {
            return value;
        }
    }
    panic!("no {event:?} event in output:\n{}", stdout(output));
}

#[test]
fn repair_reports_patched_and_exits_zero() {
    let fx = Fixture::new();
    let out = fx.run(&[
        "repair",
        "toy-repair",
        "--benchmark",
        "toybench",
        "--id",
        "bug_01",
        "--budget",
        "60",
    ]);
    assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr(&out));
    assert!(stdout(&out).contains("PATCHED"), "stdout: {}", stdout(&out));
    let attempt = fx.root().join("toy-repair/toybench/bug_01/1");
    assert!(attempt.join("repair.log").is_file());
    assert!(attempt.join("results.json").is_file());
    assert!(attempt.join("attempt.json").is_file());
}

#[test]
fn failed_attempt_is_data_not_an_error_exit() {
    let fx = Fixture::new();
    let out = fx.run(&[
        "repair",
        "stub-crash",
        "--benchmark",
        "toybench",
        "--id",
        "bug_01",
        "--budget",
        "60",
    ]);
    assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr(&out));
    assert!(stdout(&out).contains("ERROR"), "stdout: {}", stdout(&out));
}

#[test]
fn unknown_tool_is_a_usage_error() {
    let fx = Fixture::new();
    let out = fx.run(&[
        "repair",
        "no-such-tool",
        "--benchmark",
        "toybench",
        "--id",
        "bug_01",
    ]);
    assert_eq!(out.status.code(), Some(1));
    let err = stderr(&out);
    assert!(err.contains("unknown tool"), "stderr: {err}");
    assert!(err.contains("toy-repair"), "should list available: {err}");
}

#[test]
fn unknown_bug_is_a_usage_error() {
    let fx = Fixture::new();
    let out = fx.run(&[
        "repair",
        "toy-repair",
        "--benchmark",
        "toybench",
        "--id",
        "bug_99",
    ]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("no bug"), "stderr: {}", stderr(&out));
}

#[test]
fn unknown_flag_prints_usage_and_exits_one() {
    let fx = Fixture::new();
    let out = fx.run(&["repair", "toy-repair", "--frobnicate"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("Usage"), "stderr: {}", stderr(&out));
}

#[test]
fn help_and_version_exit_zero() {
    let fx = Fixture::new();
    let help = fx.run(&["--help"]);
    assert_eq!(help.status.code(), Some(0));
    let text = stdout(&help);
    for sub in ["repair", "campaign", "analyze", "classify", "list"] {
        assert!(text.contains(sub), "--help misses {sub}");
    }
    let version = fx.run(&["--version"]);
    assert_eq!(version.status.code(), Some(0));
    assert!(stdout(&version).contains("repairlab"));
}

#[test]
fn missing_results_are_an_input_error() {
    let fx = Fixture::new();
    let out = fx.run(&["analyze"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(
        stderr(&out).contains("no completed attempts"),
        "stderr: {}",
        stderr(&out)
    );
}

#[test]
fn campaign_analyze_classify_pipeline_round_trips() {
    let fx = Fixture::new();
    let campaign = fx.run(&[
        "campaign",
        "--tools",
        "stub-patch,toy-repair",
        "--filter",
        "bug_0*",
        "--budget",
        "60",
        "--parallelism",
        "4",
    ]);
    assert_eq!(
        campaign.status.code(),
        Some(0),
        "stderr: {}",
        stderr(&campaign)
    );
    let text = stdout(&campaign);
    assert!(
        text.contains("executed 18 attempts: 14 patched, 2 no-patch, 2 error, 0 timeout"),
        "stdout: {text}"
    );
    assert!(fx.root().join("campaign.json").is_file());
    assert!(fx.root().join("campaign-index.ndjson").is_file());

    let analyze = fx.run(&["analyze", "--format", "csv"]);
    assert_eq!(
        analyze.status.code(),
        Some(0),
        "stderr: {}",
        stderr(&analyze)
    );
    let reports = fx.root().join("reports");
    for name in [
        "repairability.csv",
        "overlap_matrix.csv",
        "benchmark_table.csv",
        "overfit_test.csv",
        "error_rates.csv",
        "timeout_rates.csv",
    ] {
        assert!(reports.join(name).is_file(), "missing report {name}");
    }
    let repairability = std::fs::read_to_string(reports.join("repairability.csv")).unwrap();
    assert!(
        repairability.contains("stub-patch") && repairability.contains("toy-repair"),
        "repairability table lists both tools: {repairability}"
    );

    let classify = fx.run(&["classify"]);
    assert_eq!(
        classify.status.code(),
        Some(0),
        "stderr: {}",
        stderr(&classify)
    );
    assert!(reports.join("causes.csv").is_file());
    assert!(reports.join("cause-percentages.md").is_file());
    let text = stdout(&classify);
    assert!(
        text.contains("CONFIGURATION: 2") && text.contains("SEARCH_SPACE_MISS: 2"),
        "stdout: {text}"
    );
}

#[test]
fn campaign_resume_skips_completed_attempts() {
    let fx = Fixture::new();
    let first = fx.run(&[
        "campaign",
        "--tools",
        "toy-repair",
        "--filter",
        "bug_01",
        "--budget",
        "60",
    ]);
    assert_eq!(first.status.code(), Some(0), "stderr: {}", stderr(&first));
    let again = fx.run(&[
        "campaign",
        "--tools",
        "toy-repair",
        "--filter",
        "bug_01",
        "--budget",
        "60",
        "--resume",
    ]);
    assert_eq!(again.status.code(), Some(0), "stderr: {}", stderr(&again));
    assert!(
        stdout(&again).contains("skipped (already complete): 1"),
        "stdout: {}",
        stdout(&again)
    );
}

#[test]
fn list_enumerates_tools_benchmarks_and_bugs() {
    let fx = Fixture::new();
    let out = fx.run(&["list", "--bugs"]);
    assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr(&out));
    let text = stdout(&out);
    for needle in [
        "tool stub-crash",
        "tool stub-hang",
        "tool stub-patch",
        "tool toy-repair",
        "benchmark toybench (10 bugs)",
        "toybench:bug_01",
        "toybench:bug_10",
    ] {
        assert!(text.contains(needle), "list output misses {needle}: {text}");
    }
}

#[test]
fn json_mode_emits_only_machine_readable_lines() {
    let fx = Fixture::new();
    let out = fx.run(&["--json", "list", "--bugs", "--filter", "bug_01"]);
    assert_eq!(out.status.code(), Some(0));
    for line in stdout(&out).lines() {
        let value: serde_json::Value =
            serde_json::from_str(line).unwrap_or_else(|e| panic!("bad line {line:?}: {e}"));
        assert!(value["event"].is_string(), "line lacks event: {line}");
    }
    let bug = json_event(&out, "bug");
    assert_eq!(bug["bug_id"], "bug_01");
}

#[test]
fn flag_beats_config_beats_environment_beats_default() {
    let fx = Fixture::new();
    let config_path = fx.path().join("defaults.json");
    std::fs::write(
        &config_path,
        r#"{"budget": 45.0, "seed": 7, "root": "config-root"}"#,
    )
    .unwrap();
    let config = config_path.to_str().unwrap();
    let repair = |extra: &[&str], envs: &[(&str, &str)]| {
        let mut args = vec![
            "--json",
            "repair",
            "stub-patch",
            "--benchmark",
            "toybench",
            "--id",
            "bug_01",
            "--config",
            config,
        ];
        args.extend_from_slice(extra);
        fx.run_with_env(&args, envs)
    };

    // Flag > config; config > default; untouched settings keep defaults.
    let out = repair(&["--budget", "5", "--root", "flag-root"], &[]);
    assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr(&out));
    let event = json_event(&out, "config");
    assert_eq!(event["budget"], 5.0, "flag beats config");
    assert_eq!(event["seed"], 7, "config beats default");
    assert_eq!(event["grace"], 10.0, "default fills the rest");
    assert_eq!(event["root"], "flag-root", "root flag beats config");

    // Config > environment for the results root.
    let out = repair(&["--budget", "5"], &[("REPAIR_RESULTS_ROOT", "env-root")]);
    assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr(&out));
    let event = json_event(&out, "config");
    assert_eq!(event["root"], "config-root", "config beats environment");

    // Environment > built-in default when neither flag nor config names
    // a root.
    let bare = fx.path().join("bare.json");
    std::fs::write(&bare, r#"{"budget": 45.0}"#).unwrap();
    let mut args = vec![
        "--json",
        "repair",
        "stub-patch",
        "--benchmark",
        "toybench",
        "--id",
        "bug_01",
        "--config",
        bare.to_str().unwrap(),
    ];
    args.push("--seed");
    args.push("3");
    let out = fx.run_with_env(&args, &[("REPAIR_RESULTS_ROOT", "env-root")]);
    assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr(&out));
    let event = json_event(&out, "config");
    assert_eq!(event["root"], "env-root", "environment beats default");
    assert!(fx.path().join("env-root").is_dir());
}

#[test]
fn config_root_beats_environment_root() {
    let fx = Fixture::new();
    let config_path = fx.path().join("defaults.json");
    std::fs::write(&config_path, r#"{"root": "config-root"}"#).unwrap();
    let out = fx.run_with_env(
        &[
            "--json",
            "repair",
            "stub-patch",
            "--benchmark",
            "toybench",
            "--id",
            "bug_01",
            "--budget",
            "60",
            "--config",
            config_path.to_str().unwrap(),
        ],
        &[("REPAIR_RESULTS_ROOT", "env-root")],
    );
    assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr(&out));
    let event = json_event(&out, "config");
    assert_eq!(event["root"], "config-root");
    assert!(!fx.path().join("env-root").exists());
}

#[test]
fn unknown_config_key_is_rejected() {
    let fx = Fixture::new();
    let config_path = fx.path().join("defaults.json");
    std::fs::write(&config_path, r#"{"budgt": 3.0}"#).unwrap();
    let out = fx.run(&[
        "repair",
        "toy-repair",
        "--benchmark",
        "toybench",
        "--id",
        "bug_01",
        "--config",
        config_path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(1));
    assert!(
        stderr(&out).contains("budgt"),
        "names the offender: {}",
        stderr(&out)
    );
}

#[test]
fn campaign_settings_come_from_the_config_file() {
    let fx = Fixture::new();
    let config_path = fx.path().join("campaign.json");
    std::fs::write(
        &config_path,
        r#"{
            "tools": ["toy-repair"],
            "filter": "bug_01",
            "budget": 60.0,
            "parallelism": 2,
            "json": true
        }"#,
    )
    .unwrap();
    let out = fx.run(&["campaign", "--config", config_path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr(&out));
    let event = json_event(&out, "config");
    assert_eq!(event["attempts"], 1);
    assert_eq!(event["parallelism"], 2);
    let done = json_event(&out, "campaign");
    assert_eq!(done["patched"], 1);
}

#[test]
fn malformed_benchmark_manifest_is_an_input_error() {
    let fx = Fixture::new();
    std::fs::write(
        fx.path().join("benchmarks/broken.json"),
        "{\"name\": \"broken\"",
    )
    .unwrap();
    let out = fx.run(&["list"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(
        stderr(&out).contains("broken.json"),
        "stderr: {}",
        stderr(&out)
    );
}
