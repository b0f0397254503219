//! Manifest discovery: tools and benchmarks are registered by dropping
//! their JSON manifests into a directory.

use std::path::Path;

use repairlab_core::benchmark::{load_benchmark_manifest, BenchmarkDescriptor};
use repairlab_core::tool::{load_tool_manifest, ToolDescriptor};

use crate::CliError;

fn json_files(dir: &Path) -> Result<Vec<std::path::PathBuf>, CliError> {
    let entries = std::fs::read_dir(dir)
        .map_err(|e| CliError::Input(format!("cannot read directory {dir:?}: {e}")))?;
    let mut files = Vec::new();
    for entry in entries {
        let entry = entry.map_err(|e| CliError::Input(format!("cannot scan {dir:?}: {e}")))?;
        let path = entry.path();
        if path.extension().is_some_and(|e| e == "json") && path.is_file() {
            files.push(path);
        }
    }
    files.sort();
    Ok(files)
}

/// Loads every `*.json` in `dir` as a tool manifest.
pub fn discover_tools(dir: &Path) -> Result<Vec<ToolDescriptor>, CliError> {
    let mut tools = Vec::new();
    for path in json_files(dir)? {
        let tool = load_tool_manifest(&path)
            .map_err(|e| CliError::Input(format!("invalid tool manifest {path:?}: {e}")))?;
        tools.push(tool);
    }
    if tools.is_empty() {
        return Err(CliError::Input(format!(
            "no tool manifests (*.json) found in {dir:?}"
        )));
    }
    Ok(tools)
}

/// Loads benchmark manifests from `dir`: every direct `*.json` file,
/// plus every subdirectory containing a `manifest.json`.
pub fn discover_benchmarks(dir: &Path) -> Result<Vec<BenchmarkDescriptor>, CliError> {
    let mut manifests = json_files(dir)?;
    let entries = std::fs::read_dir(dir)
        .map_err(|e| CliError::Input(format!("cannot read directory {dir:?}: {e}")))?;
    let mut subdirs: Vec<std::path::PathBuf> = entries
        .flatten()
        .map(|e| e.path().join("manifest.json"))
        .filter(|p| p.is_file())
        .collect();
    subdirs.sort();
    manifests.extend(subdirs);

    let mut benchmarks = Vec::new();
    for path in &manifests {
        let benchmark = load_benchmark_manifest(path)
            .map_err(|e| CliError::Input(format!("invalid benchmark manifest {path:?}: {e}")))?;
        benchmarks.push(benchmark);
    }
    if benchmarks.is_empty() {
        return Err(CliError::Input(format!(
            "no benchmark manifests found in {dir:?} (expected *.json files or subdirectories with a manifest.json)"
        )));
    }
    Ok(benchmarks)
}

/// Narrows a discovered list by name; `all` (or an empty selection)
/// keeps everything.
pub fn select_by_name<T>(
    items: Vec<T>,
    selection: &[String],
    name_of: impl Fn(&T) -> &str,
    what: &str,
) -> Result<Vec<T>, CliError> {
    if selection.is_empty() || selection.iter().any(|s| s == "all") {
        return Ok(items);
    }
    let mut chosen = Vec::new();
    let mut names: Vec<String> = Vec::new();
    let mut remaining: Vec<T> = Vec::new();
    for item in items {
        names.push(name_of(&item).to_string());
        remaining.push(item);
    }
    for wanted in selection {
        match names.iter().position(|n| n == wanted) {
            Some(i) => {
                names.remove(i);
                chosen.push(remaining.remove(i));
            }
            None => {
                return Err(CliError::Input(format!(
                    "unknown {what} {wanted:?}; available: {}",
                    names.join(", ")
                )))
            }
        }
    }
    Ok(chosen)
}
