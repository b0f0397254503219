//! Execution and analysis framework for test-suite-based program-repair
//! experiments.
//!
//! The crate orchestrates *repair attempts* — the execution of one repair
//! tool on one buggy program under a wall-clock budget — and turns their
//! raw outputs into normalized, analyzable records:
//!
//! * [`benchmark`] abstracts bug benchmarks behind three hook commands
//!   (checkout, compile, bug info) declared in a JSON manifest.
//! * [`tool`] abstracts repair tools behind a JSON manifest that maps the
//!   eight abstract input parameters onto each tool's actual flags.
//! * [`runner`] drives a single attempt end to end and writes `repair.log`,
//!   `results.json`, and `attempt.json` into the attempt directory, with
//!   [`watchdog`] enforcing the budget by terminating the whole process
//!   tree of a runaway tool.
//! * [`campaign`] schedules the tool × bug cartesian product with bounded
//!   parallelism, an append-only index, and crash-safe resume.
//! * [`classify`] maps non-patched attempts onto a failure-cause taxonomy
//!   via an ordered, user-editable rule catalog.
//! * [`analysis`] computes repairability, patch-overlap, per-benchmark and
//!   benchmark-overfitting (Chi-square) statistics, and error/timeout rate
//!   tables, and renders them as Markdown/CSV/JSON reports.
//! * [`fixtures`] ships a self-contained toy benchmark (a tiny interpreted
//!   expression language plus ten curated bugs) and a naive mutation-based
//!   repair tool so the whole pipeline is testable without any external
//!   repair system.

pub mod analysis;
pub mod benchmark;
pub mod campaign;
pub mod classify;
pub mod diff;
pub mod fixtures;
pub mod model;
pub mod runner;
pub mod tool;
pub mod watchdog;

pub use classify::{
    cause_counts_csv, cause_percentage_table, classify_failure_cause, classify_outcome,
    classify_result_set, default_catalog, load_catalog, validate_catalog, CauseBreakdown,
    CauseRule, ClassifyError, RuleKind,
};

pub use campaign::{
    default_parallelism, execute_campaign, load_index, load_results, plan_campaign,
    CampaignEntry, CampaignError, CampaignPlan, CampaignSummary, ExecuteOptions,
    FrameworkFailure, OutcomeCounts, CAMPAIGN_INDEX_FILE, CAMPAIGN_SUMMARY_FILE,
};

pub use runner::{
    attempt_dir, normalize_output, run_attempt, snapshot_workspace, NormalizeError,
    NormalizedPatches, NormalizedResult, PatchEntry, RunnerError, WorkspaceSnapshot,
    ATTEMPT_RECORD_FILE, REPAIR_LOG_FILE, RESULTS_FILE, WORKSPACE_DIR,
};

pub use analysis::{
    benchmark_table, chi_square_p_value, chi_square_statistic, compute_analyses, emit_report,
    overfit_test, overlap_matrix, rate_tables, repairability, Analyses, AnalysisError,
    ContingencyTable, OverfitTestResult, PatchedSets, ReportFormat,
};
pub use benchmark::{
    bug_info, checkout, compile, list_bugs, load_benchmark_manifest, AbstractParameterSet,
    BenchmarkDescriptor, BenchmarkError, BenchmarkMetadata, HookOptions, HookReport,
    HookTemplate,
};
pub use model::{
    parse_bug_coordinate, parse_bug_in_benchmark, AttemptConfig, AttemptKey, AttemptRecord,
    BugCoordinate, ExitInfo, FailureCause, ModelError, Outcome, Phase, PhaseDurations,
    ResultSet, SCHEMA_VERSION,
};
pub use tool::{
    build_command, load_tool_manifest, map_parameters, AbstractParam, CommandSpec,
    ConcreteArgumentList, FlagStyle, ParamRule, RenderContext, ToolCategory, ToolDescriptor,
    ToolError,
};
