//! Naive mutation-based repair tool for the toy expression language.
//! Enumerates single-site operator mutations of the buggy source, runs
//! the test suite against each candidate, patches the source in place
//! on the first adequate mutation, and records every written file in
//! `patches.json` at the workspace root.
//!
//! Exit codes: 0 whether or not a patch was found (the patch manifest
//! is the signal), 64 for bad flags, 65 when the source or tests do not
//! parse, 66 when no source/test file is found, 74 on I/O failure.

use std::path::{Path, PathBuf};

use clap::Parser;
use repairlab_core::fixtures::mutator;
use repairlab_core::fixtures::toy;

#[derive(Parser, Debug)]
#[command(name = "toy-repair", version)]
struct Args {
    /// Buggy source: a .toy file or a directory containing one
    #[arg(long)]
    source: PathBuf,

    /// Test suite: a .tests file or a directory containing one
    #[arg(long)]
    tests: PathBuf,

    /// Workspace root; `patches.json` is written here
    #[arg(long)]
    workspace: PathBuf,

    /// Shuffle the candidate order with this seed [default: source order]
    #[arg(long)]
    seed: Option<u64>,

    /// Stop after this many adequate patches
    #[arg(long, default_value_t = 1)]
    patch_limit: usize,

    /// Compiled source location (ignored; the toy language runs from source)
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

    /// Failing test identifiers (ignored; the whole suite is the oracle)
    #[arg(long)]
    failing: Option<String>,
}

/// Accepts either the file itself or a directory to search; picks the
/// lexicographically first match for determinism.
fn find_with_extension(root: &Path, ext: &str) -> std::io::Result<Option<PathBuf>> {
    if root.is_file() {
        return Ok(Some(root.to_path_buf()));
    }
    let mut stack = vec![root.to_path_buf()];
    let mut hits = Vec::new();
    while let Some(dir) = stack.pop() {
        for entry in std::fs::read_dir(&dir)? {
            let path = entry?.path();
            if path.is_dir() {
                stack.push(path);
            } else if path.extension().and_then(|e| e.to_str()) == Some(ext) {
                hits.push(path);
            }
        }
    }
    hits.sort();
    Ok(hits.into_iter().next())
}

fn io_fail(what: &str, err: std::io::Error) -> ! {
    eprintln!("{what}: {err}");
    std::process::exit(74);
}

fn main() {
    let args = Args::parse();

    let source_path = match find_with_extension(&args.source, "toy") {
        Ok(Some(path)) => path,
        Ok(None) => {
            eprintln!("no .toy source under {}", args.source.display());
            std::process::exit(66);
        }
        Err(err) => io_fail("searching for source", err),
    };
    let tests_path = match find_with_extension(&args.tests, "tests") {
        Ok(Some(path)) => path,
        Ok(None) => {
            eprintln!("no .tests suite under {}", args.tests.display());
            std::process::exit(66);
        }
        Err(err) => io_fail("searching for tests", err),
    };

    let source = std::fs::read_to_string(&source_path)
        .unwrap_or_else(|err| io_fail("reading source", err));
    let tests_text = std::fs::read_to_string(&tests_path)
        .unwrap_or_else(|err| io_fail("reading tests", err));

    let tests = match toy::parse_tests(&tests_text) {
        Ok(tests) => tests,
        Err(err) => {
            eprintln!("test suite parse error: {err}");
            std::process::exit(65);
        }
    };

    println!(
        "repairing {} against {} tests (seed {})",
        source_path.display(),
        tests.len(),
        args.seed.map_or("none".to_string(), |s| s.to_string()),
    );

    let report = match mutator::repair(&source, &tests, args.seed, args.patch_limit.max(1)) {
        Ok(report) => report,
        Err(err) => {
            eprintln!("source parse error: {err}");
            std::process::exit(65);
        }
    };

    if report.patches.is_empty() {
        println!(
            "search space exhausted: tested {} of {} candidates, no adequate patch",
            report.candidates_tested, report.space_size
        );
        std::process::exit(0);
    }

    // First patch replaces the source in place; extras land beside it.
    let mut written: Vec<PathBuf> = Vec::new();
    for (i, patch) in report.patches.iter().enumerate() {
        let target = if i == 0 {
            source_path.clone()
        } else {
            source_path.with_extension(format!("alt{i}.toy"))
        };
        std::fs::write(&target, &patch.source)
            .unwrap_or_else(|err| io_fail("writing patch", err));
        println!("adequate patch: {}", patch.description);
        written.push(target);
    }

    let rel: Vec<String> = written
        .iter()
        .map(|path| {
            path.strip_prefix(&args.workspace)
                .unwrap_or(path)
                .to_string_lossy()
                .into_owned()
        })
        .collect();
    let manifest = serde_json::to_string_pretty(&rel).expect("paths serialize");
    std::fs::write(args.workspace.join("patches.json"), manifest)
        .unwrap_or_else(|err| io_fail("writing patches.json", err));
    println!(
        "{} patch(es) after testing {} of {} candidates",
        written.len(),
        report.candidates_tested,
        report.space_size
    );
}
