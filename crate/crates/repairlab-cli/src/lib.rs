//! Command-line front end for the repair-experiment framework.
//!
//! Exit codes: `0` when the requested operation completed (a failed
//! repair attempt is still a completed operation — the failure is data),
//! `1` for malformed invocations (unknown flags, bad manifests, missing
//! inputs), and `2` for framework faults (I/O errors, broken harness
//! state).
//!
//! Every setting resolves in the same order: command-line flag, then the
//! `--config` JSON file, then the environment (results root only), then
//! the built-in default.

use std::ffi::OsString;
use std::fmt;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use repairlab_core::AttemptConfig;

pub mod commands;
pub mod discover;
pub mod emit;
pub mod settings;

use emit::Printer;
use settings::{resolve, ConfigFile};

/// What went wrong, for exit-code mapping.
#[derive(Debug)]
pub enum CliError {
    /// Malformed invocation or inputs; exits 1.
    Input(String),
    /// Harness fault (I/O, corrupted state); exits 2.
    Framework(String),
}

impl CliError {
    pub fn framework(err: impl fmt::Display) -> CliError {
        CliError::Framework(err.to_string())
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Input(msg) => write!(f, "{msg}"),
            CliError::Framework(msg) => write!(f, "{msg}"),
        }
    }
}

impl std::error::Error for CliError {}

#[derive(Parser, Debug)]
#[command(
    name = "repairlab",
    version,
    about = "Runs repair tools against bug benchmarks and analyzes the results",
    propagate_version = true
)]
pub struct Cli {
    /// JSON config file supplying defaults for any flag (flags win)
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,

    /// Emit one JSON object per line instead of human-readable text
    #[arg(long, global = true)]
    pub json: bool,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Run one repair attempt: one tool against one bug
    Repair(RepairArgs),
    /// Run every selected tool against every selected bug
    Campaign(CampaignArgs),
    /// Compute statistics over recorded results and write report files
    Analyze(AnalyzeArgs),
    /// Attribute failure causes to non-patched attempts
    Classify(ClassifyArgs),
    /// List available tools, benchmarks, and bugs
    List(ListArgs),
}

/// Flags shared by everything that executes attempts.
#[derive(Args, Debug, Default)]
pub struct AttemptFlags {
    /// Wall-clock budget for the tool phase, in seconds [default: 7200]
    #[arg(long, value_name = "SECONDS")]
    pub budget: Option<f64>,

    /// Grace period between SIGTERM and SIGKILL, in seconds [default: 10]
    #[arg(long, value_name = "SECONDS")]
    pub grace: Option<f64>,

    /// Budget for each setup hook, in seconds [default: 900]
    #[arg(long, value_name = "SECONDS")]
    pub setup_allowance: Option<f64>,

    /// Random seed forwarded to seedable tools [default: 1]
    #[arg(long, value_name = "N")]
    pub seed: Option<u64>,

    /// Patches kept per attempt before truncation [default: 1]
    #[arg(long, value_name = "N")]
    pub patch_limit: Option<u32>,

    /// Longest accepted rendered command line, in characters [default: 131072]
    #[arg(long, value_name = "CHARS")]
    pub command_length_limit: Option<usize>,

    /// Keep the workspace even when the attempt ends cleanly
    #[arg(long)]
    pub keep_workspace: bool,
}

/// Manifest directory flags shared by discovery-driven subcommands.
#[derive(Args, Debug, Default)]
pub struct DirFlags {
    /// Directory of tool manifests (*.json) [default: tools]
    #[arg(long, value_name = "DIR")]
    pub tool_dir: Option<PathBuf>,

    /// Directory of benchmark manifests [default: benchmarks]
    #[arg(long, value_name = "DIR")]
    pub benchmark_dir: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct RepairArgs {
    /// Tool name, as declared in its manifest
    pub tool: String,

    /// Benchmark owning the bug
    #[arg(long, value_name = "NAME")]
    pub benchmark: Option<String>,

    /// Bug id inside the benchmark
    #[arg(long, value_name = "BUG")]
    pub id: Option<String>,

    /// Results directory [default: $REPAIR_RESULTS_ROOT or ./results]
    #[arg(long, value_name = "DIR")]
    pub root: Option<PathBuf>,

    #[command(flatten)]
    pub dirs: DirFlags,

    #[command(flatten)]
    pub attempt: AttemptFlags,
}

#[derive(Args, Debug)]
pub struct CampaignArgs {
    /// Tools to run, comma-separated [default: all]
    #[arg(long, value_name = "NAMES", value_delimiter = ',')]
    pub tools: Option<Vec<String>>,

    /// Benchmarks to run, comma-separated [default: all]
    #[arg(long, value_name = "NAMES", value_delimiter = ',')]
    pub benchmarks: Option<Vec<String>>,

    /// Bug filter glob, e.g. 'bug_0*' or 'project/bug_1*'
    #[arg(long, value_name = "GLOB")]
    pub filter: Option<String>,

    /// Concurrent attempts [default: available CPUs]
    #[arg(long, value_name = "N")]
    pub parallelism: Option<usize>,

    /// Skip attempts that already have a valid record
    #[arg(long)]
    pub resume: bool,

    /// Results directory [default: $REPAIR_RESULTS_ROOT or ./results]
    #[arg(long, value_name = "DIR")]
    pub root: Option<PathBuf>,

    #[command(flatten)]
    pub dirs: DirFlags,

    #[command(flatten)]
    pub attempt: AttemptFlags,
}

#[derive(Args, Debug)]
pub struct AnalyzeArgs {
    /// Results directory to read [default: $REPAIR_RESULTS_ROOT or ./results]
    #[arg(long, value_name = "DIR")]
    pub root: Option<PathBuf>,

    /// Report format: markdown, csv, or json [default: markdown]
    #[arg(long, value_name = "FORMAT")]
    pub format: Option<String>,

    /// Directory for report files [default: ROOT/reports]
    #[arg(long, value_name = "DIR")]
    pub out: Option<PathBuf>,

    /// Reference benchmark for the benchmark-dependence test
    /// [default: the largest benchmark]
    #[arg(long, value_name = "NAME")]
    pub reference: Option<String>,

    /// Significance level for the benchmark-dependence test [default: 0.05]
    #[arg(long, value_name = "ALPHA")]
    pub alpha: Option<f64>,

    /// Benchmark manifests supplying true bug counts
    /// [default: count attempted bugs]
    #[arg(long, value_name = "DIR")]
    pub benchmark_dir: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct ClassifyArgs {
    /// Results directory to read [default: $REPAIR_RESULTS_ROOT or ./results]
    #[arg(long, value_name = "DIR")]
    pub root: Option<PathBuf>,

    /// Failure-cause rule catalog (JSON) [default: built-in catalog]
    #[arg(long, value_name = "FILE")]
    pub catalog: Option<PathBuf>,

    /// Directory for report files [default: ROOT/reports]
    #[arg(long, value_name = "DIR")]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct ListArgs {
    /// Also list every bug of every benchmark
    #[arg(long)]
    pub bugs: bool,

    /// Bug filter glob applied to --bugs output
    #[arg(long, value_name = "GLOB")]
    pub filter: Option<String>,

    #[command(flatten)]
    pub dirs: DirFlags,
}

/// Folds attempt flags, config-file values, and built-in defaults into a
/// validated attempt configuration.
pub fn attempt_config(flags: &AttemptFlags, config: &ConfigFile) -> Result<AttemptConfig, CliError> {
    let d = AttemptConfig::default();
    let cfg = AttemptConfig {
        budget_seconds: resolve(flags.budget, config.f64("budget")?, d.budget_seconds),
        grace_seconds: resolve(flags.grace, config.f64("grace")?, d.grace_seconds),
        setup_allowance_seconds: resolve(
            flags.setup_allowance,
            config.f64("setup_allowance")?,
            d.setup_allowance_seconds,
        ),
        seed: resolve(flags.seed, config.u64("seed")?, d.seed),
        patch_limit: resolve(flags.patch_limit, config.u32("patch_limit")?, d.patch_limit),
        command_length_limit: resolve(
            flags.command_length_limit,
            config.usize("command_length_limit")?,
            d.command_length_limit,
        ),
        keep_workspace: flags.keep_workspace || config.bool("keep_workspace")?.unwrap_or(false),
    };
    cfg.validate().map_err(|e| CliError::Input(e.to_string()))?;
    Ok(cfg)
}

fn dispatch(cli: Cli) -> Result<(), CliError> {
    let config = ConfigFile::load(cli.config.as_deref())?;
    let json = cli.json || config.bool("json")?.unwrap_or(false);
    let printer = Printer::new(json);
    match cli.command {
        Command::Repair(args) => commands::cmd_repair(args, &config, &printer),
        Command::Campaign(args) => commands::cmd_campaign(args, &config, &printer),
        Command::Analyze(args) => commands::cmd_analyze(args, &config, &printer),
        Command::Classify(args) => commands::cmd_classify(args, &config, &printer),
        Command::List(args) => commands::cmd_list(args, &config, &printer),
    }
}

/// Parses `argv` and runs the requested subcommand, returning the process
/// exit code. Help and version requests exit 0; parse errors exit 1 with
/// the usage text on stderr.
pub fn run_from<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(err) => {
            use clap::error::ErrorKind;
            let code = match err.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            // clap routes help to stdout and errors (with usage) to stderr.
            let _ = err.print();
            return code;
        }
    };
    match dispatch(cli) {
        Ok(()) => 0,
        Err(CliError::Input(msg)) => {
            eprintln!("error: {msg}");
            1
        }
        Err(CliError::Framework(msg)) => {
            eprintln!("framework error: {msg}");
            2
        }
    }
}
