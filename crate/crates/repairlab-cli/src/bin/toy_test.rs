//! Test oracle for the toy expression language. Runs a test suite
//! against a program and reports one PASS/FAIL line per test; with
//! `--check` it only parses the program, which makes it usable as a
//! compile gate for benchmarks of toy programs.
//!
//! Exit codes: 0 all tests passed (or `--check` parse succeeded), 1 at
//! least one test failed, 64 bad flags, 65 parse error, 66 no input
//! file, 74 I/O failure.

use std::path::{Path, PathBuf};

use clap::Parser;
use repairlab_core::fixtures::toy;

#[derive(Parser, Debug)]
#[command(name = "toy-test", version)]
struct Args {
    /// Only parse the program; skip the tests
    #[arg(long)]
    check: bool,

    /// Program: a .toy file or a directory containing one
    source: PathBuf,

    /// Test suite: a .tests file or a directory containing one
    /// (required without --check)
    tests: Option<PathBuf>,
}

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

fn locate(root: &Path, ext: &str, what: &str) -> PathBuf {
    match find_with_extension(root, ext) {
        Ok(Some(path)) => path,
        Ok(None) => {
            eprintln!("no .{ext} {what} under {}", root.display());
            std::process::exit(66);
        }
        Err(err) => {
            eprintln!("searching for {what}: {err}");
            std::process::exit(74);
        }
    }
}

fn read(path: &Path) -> String {
    std::fs::read_to_string(path).unwrap_or_else(|err| {
        eprintln!("reading {}: {err}", path.display());
        std::process::exit(74);
    })
}

fn main() {
    let args = Args::parse();
    let source_path = locate(&args.source, "toy", "program");
    let source = read(&source_path);

    if args.check {
        match toy::parse_program(&source) {
            Ok(_) => {
                println!("parse ok: {}", source_path.display());
                std::process::exit(0);
            }
            Err(err) => {
                eprintln!("parse error in {}: {err}", source_path.display());
                std::process::exit(65);
            }
        }
    }

    let Some(tests_root) = args.tests else {
        eprintln!("a test suite is required without --check");
        std::process::exit(64);
    };
    let tests_path = locate(&tests_root, "tests", "suite");
    let tests_text = read(&tests_path);

    let results = match toy::run_suite(&source, &tests_text) {
        Ok(results) => results,
        Err(err) => {
            eprintln!("parse error: {err}");
            std::process::exit(65);
        }
    };
    let mut failures = 0;
    for result in &results {
        let verdict = if result.passed { "PASS" } else { "FAIL" };
        println!("{verdict} {} ({})", result.id, result.detail);
        if !result.passed {
            failures += 1;
        }
    }
    println!("{} of {} tests passed", results.len() - failures, results.len());
    std::process::exit(if failures > 0 { 1 } else { 0 });
}
