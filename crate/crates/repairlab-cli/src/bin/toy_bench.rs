//! Installer for the self-contained demo setup: `init` writes the toy
//! benchmark (ten curated bugs plus hook scripts) into a directory, and
//! `tools` writes manifests for the bundled fixture tools (three stub
//! behaviors plus the naive mutation repairer), pointing at the
//! binaries that ship beside this one.

use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use repairlab_core::fixtures::corpus::install_benchmark;
use serde_json::json;

#[derive(Parser, Debug)]
#[command(name = "toy-bench", version)]
struct Args {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Write the toy benchmark (manifest, hooks, bugs) into a directory
    Init {
        /// Target directory; the manifest lands at DIR/manifest.json
        #[arg(long)]
        dir: PathBuf,

        /// Compile-gate command words [default: sibling `toy-test --check`]
        #[arg(long, num_args = 1.., value_name = "WORD")]
        checker: Option<Vec<String>>,
    },
    /// Write fixture tool manifests (*.json) into a directory
    Tools {
        /// Target directory for the manifests
        #[arg(long)]
        dir: PathBuf,

        /// Seconds the patch-emitting stub sleeps before patching
        #[arg(long, default_value_t = 0)]
        delay: u64,
    },
}

/// Absolute path of a binary installed beside this one.
fn sibling(name: &str) -> PathBuf {
    let exe = std::env::current_exe().expect("own executable path is known");
    let dir = exe.parent().expect("executable has a parent directory");
    dir.join(format!("{name}{}", std::env::consts::EXE_SUFFIX))
}

/// Canonical flag mapping shared by every fixture tool; mapping all
/// eight parameters keeps command rendering fully exercised.
fn parameter_map() -> serde_json::Value {
    json!({
        "source_path": {"flag": "--source", "style": "separate"},
        "test_path": {"flag": "--tests", "style": "separate"},
        "source_binary_path": {"flag": "--source-bin", "style": "separate"},
        "test_binary_path": {"flag": "--test-bin", "style": "separate"},
        "classpath": {"flag": "--classpath", "style": "separate"},
        "language_level": {"flag": "--level", "style": "separate"},
        "failing_test_identifiers": {"flag": "--failing", "style": "separate"},
        "workspace": {"flag": "--workspace", "style": "separate"}
    })
}

fn stub_manifest(name: &str, behavior: String) -> serde_json::Value {
    json!({
        "name": name,
        "family": "stub",
        "category": "GENERATE_AND_VALIDATE",
        "executable": [sibling("stub-tool")],
        "parameter_map": parameter_map(),
        "extra_params": {"--behavior": behavior},
        "supports_stop_on_first_patch": false,
        "supports_seed": false,
        "version_pin": "fixture-0.1.0"
    })
}

fn write_manifests(dir: &Path, delay: u64) -> std::io::Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir)?;
    let manifests = [
        (
            "stub-patch",
            stub_manifest("stub-patch", format!("EMIT_PATCH:{delay}:1")),
        ),
        ("stub-crash", stub_manifest("stub-crash", "CRASH:1".into())),
        ("stub-hang", stub_manifest("stub-hang", "HANG".into())),
        (
            "toy-repair",
            json!({
                "name": "toy-repair",
                "category": "GENERATE_AND_VALIDATE",
                "executable": [sibling("toy-repair")],
                "parameter_map": parameter_map(),
                "extra_params": {
                    "--seed": "{seed}",
                    "--patch-limit": "{patch_limit}"
                },
                "supports_stop_on_first_patch": true,
                "supports_seed": true,
                "version_pin": "fixture-0.1.0"
            }),
        ),
    ];
    let mut written = Vec::new();
    for (name, manifest) in manifests {
        let path = dir.join(format!("{name}.json"));
        std::fs::write(
            &path,
            serde_json::to_string_pretty(&manifest).expect("static manifest serializes"),
        )?;
        written.push(path);
    }
    Ok(written)
}

fn main() {
    let args = Args::parse();
    let result = match args.command {
        Cmd::Init { dir, checker } => {
            let checker = checker.unwrap_or_else(|| {
                vec![sibling("toy-test").to_string_lossy().into_owned(), "--check".into()]
            });
            install_benchmark(&dir, &checker).map(|manifest| {
                println!("installed toy benchmark: {}", manifest.display());
            })
        }
        Cmd::Tools { dir, delay } => write_manifests(&dir, delay).map(|paths| {
            for path in paths {
                println!("wrote tool manifest: {}", path.display());
            }
        }),
    };
    if let Err(err) = result {
        eprintln!("install failed: {err}");
        std::process::exit(74);
    }
}
