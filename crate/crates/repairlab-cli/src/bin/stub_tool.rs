//! Scriptable fake repair tool. Its `--behavior` flag selects one of
//! four canned behaviors (emit patches after a delay, crash, hang, or
//! do nothing), which makes every runner code path reachable without a
//! real repair system. All other canonical tool flags are accepted and
//! ignored so any manifest mapping renders cleanly.

use std::path::PathBuf;

use clap::Parser;
use repairlab_core::fixtures::stub::{execute_stub, StubBehavior};

#[derive(Parser, Debug)]
#[command(name = "stub-tool", version)]
struct Args {
    /// EMIT_PATCH:<secs>:<count>, CRASH:<code>, HANG, or NOOP
    #[arg(long)]
    behavior: String,

    /// Scratch directory; emitted patches land here
    #[arg(long)]
    workspace: PathBuf,

    /// Buggy source location (ignored)
    #[arg(long)]
    source: Option<PathBuf>,

    /// Test suite location (ignored)
    #[arg(long)]
    tests: Option<PathBuf>,

    /// Compiled source location (ignored)
    #[arg(long)]
    source_bin: Option<PathBuf>,

    /// Compiled tests location (ignored)
    #[arg(long)]
    test_bin: Option<PathBuf>,

    /// Dependency classpath (ignored)
    #[arg(long)]
    classpath: Option<String>,

    /// Language level (ignored)
    #[arg(long)]
    level: Option<String>,

    /// Failing test identifiers (ignored)
    #[arg(long)]
    failing: Option<String>,

    /// Random seed (ignored)
    #[arg(long)]
    seed: Option<u64>,

    /// Patch cap (ignored)
    #[arg(long)]
    patch_limit: Option<usize>,
}

fn main() {
    let args = Args::parse();
    let behavior: StubBehavior = match args.behavior.parse() {
        Ok(behavior) => behavior,
        Err(err) => {
            eprintln!("{err}");
            std::process::exit(64);
        }
    };
    match execute_stub(&behavior, &args.workspace) {
        Ok(code) => std::process::exit(code),
        Err(err) => {
            eprintln!("stub-tool failed: {err}");
            std::process::exit(70);
        }
    }
}
