//! Implementations of the five subcommands. Each takes its parsed
//! arguments plus the loaded config file, resolves effective settings
//! (flag > config file > environment > built-in default), and returns
//! `CliError::Input` for bad invocations or `CliError::Framework` for
//! harness faults. A failed repair attempt is a recorded result, not an
//! error.

use std::collections::BTreeMap;
use std::path::PathBuf;

use repairlab_core::{
    attempt_dir, cause_counts_csv, cause_percentage_table, classify_result_set, compute_analyses,
    default_catalog, default_parallelism, emit_report, execute_campaign, list_bugs, load_catalog,
    load_results, parse_bug_in_benchmark, plan_campaign, run_attempt, AttemptRecord,
    BenchmarkDescriptor, CampaignError, ExecuteOptions, FailureCause, ReportFormat, ResultSet,
    ToolCategory, ToolDescriptor,
};
use serde_json::json;

use crate::discover::{discover_benchmarks, discover_tools, select_by_name};
use crate::emit::Printer;
use crate::settings::{
    resolve, resolve_root, ConfigFile, DEFAULT_BENCHMARK_DIR, DEFAULT_TOOL_DIR,
};
use crate::{AnalyzeArgs, CampaignArgs, ClassifyArgs, CliError, ListArgs, RepairArgs};

fn category_label(category: ToolCategory) -> &'static str {
    match category {
        ToolCategory::GenerateAndValidate => "GENERATE_AND_VALIDATE",
        ToolCategory::SemanticsDriven => "SEMANTICS_DRIVEN",
        ToolCategory::Metaprogramming => "METAPROGRAMMING",
    }
}

fn resolved_tool_dir(flag: Option<PathBuf>, config: &ConfigFile) -> Result<PathBuf, CliError> {
    Ok(resolve(
        flag,
        config.path("tool_dir")?,
        PathBuf::from(DEFAULT_TOOL_DIR),
    ))
}

fn resolved_benchmark_dir(
    flag: Option<PathBuf>,
    config: &ConfigFile,
) -> Result<PathBuf, CliError> {
    Ok(resolve(
        flag,
        config.path("benchmark_dir")?,
        PathBuf::from(DEFAULT_BENCHMARK_DIR),
    ))
}

fn find_tool(tools: Vec<ToolDescriptor>, name: &str) -> Result<ToolDescriptor, CliError> {
    let available: Vec<String> = tools.iter().map(|t| t.name.clone()).collect();
    tools.into_iter().find(|t| t.name == name).ok_or_else(|| {
        CliError::Input(format!(
            "unknown tool {name:?}; available: {}",
            available.join(", ")
        ))
    })
}

fn find_benchmark(
    benchmarks: Vec<BenchmarkDescriptor>,
    name: &str,
) -> Result<BenchmarkDescriptor, CliError> {
    let available: Vec<String> = benchmarks.iter().map(|b| b.name.clone()).collect();
    benchmarks
        .into_iter()
        .find(|b| b.name == name)
        .ok_or_else(|| {
            CliError::Input(format!(
                "unknown benchmark {name:?}; available: {}",
                available.join(", ")
            ))
        })
}

fn attempt_event(record: &AttemptRecord) -> serde_json::Value {
    json!({
        "event": "attempt",
        "tool": record.tool,
        "benchmark": record.bug.benchmark,
        "bug_id": record.bug.bug_id,
        "seed": record.seed,
        "outcome": record.outcome.as_str(),
        "patch_count": record.patch_count,
        "failed_phase": record.failed_phase.map(|p| p.as_str()),
        "repair_seconds": record.durations.repair_seconds,
        "log": record.log_path,
        "results": record.result_path,
    })
}

pub fn cmd_repair(
    args: RepairArgs,
    config: &ConfigFile,
    printer: &Printer,
) -> Result<(), CliError> {
    let tool_dir = resolved_tool_dir(args.dirs.tool_dir, config)?;
    let benchmark_dir = resolved_benchmark_dir(args.dirs.benchmark_dir, config)?;
    let tool = find_tool(discover_tools(&tool_dir)?, &args.tool)?;

    let benchmark_name = resolve(args.benchmark, config.string("benchmark")?, String::new());
    if benchmark_name.is_empty() {
        return Err(CliError::Input(
            "no benchmark named; pass --benchmark or set \"benchmark\" in the config file".into(),
        ));
    }
    let benchmark = find_benchmark(discover_benchmarks(&benchmark_dir)?, &benchmark_name)?;

    let bug_id = resolve(args.id, config.string("id")?, String::new());
    if bug_id.is_empty() {
        return Err(CliError::Input(
            "no bug named; pass --id or set \"id\" in the config file".into(),
        ));
    }
    let bug = parse_bug_in_benchmark(&benchmark.name, &bug_id)
        .map_err(|e| CliError::Input(e.to_string()))?;
    if !benchmark.bugs.contains(&bug) {
        return Err(CliError::Input(format!(
            "benchmark {:?} has no bug {:?}; see `repairlab list --bugs`",
            benchmark.name, bug_id
        )));
    }

    let cfg = crate::attempt_config(&args.attempt, config)?;
    let root = resolve_root(args.root, config.path("root")?);
    let dir = attempt_dir(&root, &tool.name, &benchmark.name, &bug.bug_id, cfg.seed);

    printer.line(
        &format!(
            "running {} on {} (budget {}s, seed {})",
            tool.name,
            bug.render(),
            cfg.budget_seconds,
            cfg.seed
        ),
        json!({
            "event": "config",
            "command": "repair",
            "budget": cfg.budget_seconds,
            "grace": cfg.grace_seconds,
            "setup_allowance": cfg.setup_allowance_seconds,
            "seed": cfg.seed,
            "patch_limit": cfg.patch_limit,
            "command_length_limit": cfg.command_length_limit,
            "keep_workspace": cfg.keep_workspace,
            "root": root,
            "attempt_dir": dir,
        }),
    );

    let record =
        run_attempt(&tool, &benchmark, &bug, &cfg, &dir).map_err(CliError::framework)?;

    printer.line(
        &format!(
            "{}: {} ({} patch(es), {:.2}s in the tool phase)",
            bug.render(),
            record.outcome,
            record.patch_count,
            record.durations.repair_seconds
        ),
        attempt_event(&record),
    );
    printer.note(&format!("log: {}", record.log_path.display()));
    printer.note(&format!("results: {}", record.result_path.display()));
    Ok(())
}

pub fn cmd_campaign(
    args: CampaignArgs,
    config: &ConfigFile,
    printer: &Printer,
) -> Result<(), CliError> {
    let tool_dir = resolved_tool_dir(args.dirs.tool_dir, config)?;
    let benchmark_dir = resolved_benchmark_dir(args.dirs.benchmark_dir, config)?;

    let tool_selection = resolve(args.tools, config.list("tools")?, Vec::new());
    let benchmark_selection = resolve(args.benchmarks, config.list("benchmarks")?, Vec::new());
    let tools = select_by_name(
        discover_tools(&tool_dir)?,
        &tool_selection,
        |t| t.name.as_str(),
        "tool",
    )?;
    let benchmarks = select_by_name(
        discover_benchmarks(&benchmark_dir)?,
        &benchmark_selection,
        |b| b.name.as_str(),
        "benchmark",
    )?;

    let filter = args.filter.or(config.string("filter")?);
    let cfg = crate::attempt_config(&args.attempt, config)?;
    let root = resolve_root(args.root, config.path("root")?);
    let parallelism = resolve(
        args.parallelism,
        config.usize("parallelism")?,
        default_parallelism(),
    );
    let resume = args.resume || config.bool("resume")?.unwrap_or(false);

    let plan = plan_campaign(&tools, &benchmarks, filter.as_deref(), &cfg, &root)
        .map_err(|e| CliError::Input(e.to_string()))?;

    printer.line(
        &format!(
            "planned {} attempts ({} tools x {} benchmarks) under {}",
            plan.entries.len(),
            tools.len(),
            benchmarks.len(),
            root.display()
        ),
        json!({
            "event": "config",
            "command": "campaign",
            "attempts": plan.entries.len(),
            "tools": tools.iter().map(|t| t.name.clone()).collect::<Vec<_>>(),
            "benchmarks": benchmarks.iter().map(|b| b.name.clone()).collect::<Vec<_>>(),
            "filter": filter,
            "budget": cfg.budget_seconds,
            "seed": cfg.seed,
            "parallelism": parallelism,
            "resume": resume,
            "root": root,
        }),
    );

    let options = ExecuteOptions {
        resume,
        stop_after: None,
    };
    let summary = execute_campaign(&plan, parallelism, &options).map_err(|e| match e {
        CampaignError::Io(_) => CliError::framework(e),
        other => CliError::Input(other.to_string()),
    })?;

    printer.line(
        &format!(
            "executed {} attempts: {} patched, {} no-patch, {} error, {} timeout",
            summary.counts.total(),
            summary.counts.patched,
            summary.counts.no_patch,
            summary.counts.error,
            summary.counts.timeout
        ),
        json!({
            "event": "campaign",
            "patched": summary.counts.patched,
            "no_patch": summary.counts.no_patch,
            "error": summary.counts.error,
            "timeout": summary.counts.timeout,
            "skipped": summary.skipped,
            "framework_failures": summary.framework_failures.len(),
            "total_wall_seconds": summary.total_wall_seconds,
        }),
    );
    printer.note(&format!(
        "skipped (already complete): {}; wall time {:.1}s",
        summary.skipped, summary.total_wall_seconds
    ));
    for failure in &summary.framework_failures {
        printer.line(
            &format!(
                "framework failure on {}/{}:{}: {}",
                failure.key.tool, failure.key.benchmark, failure.key.bug_id, failure.reason
            ),
            json!({
                "event": "framework_failure",
                "tool": failure.key.tool,
                "benchmark": failure.key.benchmark,
                "bug_id": failure.key.bug_id,
                "reason": failure.reason,
            }),
        );
    }
    Ok(())
}

/// Distinct attempted bugs per benchmark; the fallback size table when no
/// benchmark manifests are supplied.
fn attempted_sizes(rs: &ResultSet) -> BTreeMap<String, u64> {
    let mut bugs: BTreeMap<String, std::collections::BTreeSet<&str>> = BTreeMap::new();
    for record in rs.iter() {
        bugs.entry(record.bug.benchmark.clone())
            .or_default()
            .insert(&record.bug.bug_id);
    }
    bugs.into_iter()
        .map(|(name, ids)| (name, ids.len() as u64))
        .collect()
}

pub fn cmd_analyze(
    args: AnalyzeArgs,
    config: &ConfigFile,
    printer: &Printer,
) -> Result<(), CliError> {
    let root = resolve_root(args.root, config.path("root")?);
    let (rs, malformed) = load_results(&root);
    for path in &malformed {
        printer.note(&format!("skipping malformed record: {}", path.display()));
    }
    if rs.is_empty() {
        return Err(CliError::Input(format!(
            "no completed attempts under {}",
            root.display()
        )));
    }

    // Benchmark sizes come from manifests when a benchmark directory is
    // given; otherwise from the set of attempted bugs.
    let mut sizes = attempted_sizes(&rs);
    let manifest_dir = args.benchmark_dir.or(config.path("benchmark_dir")?);
    if let Some(dir) = manifest_dir {
        for benchmark in discover_benchmarks(&dir)? {
            if sizes.contains_key(&benchmark.name) {
                sizes.insert(benchmark.name.clone(), benchmark.bugs.len() as u64);
            }
        }
    }

    let reference = resolve(args.reference, config.string("reference")?, String::new());
    let reference = if reference.is_empty() {
        // Default: the largest benchmark (first name on ties).
        sizes
            .iter()
            .fold(None::<(&String, u64)>, |best, (name, &n)| match best {
                Some((_, m)) if m >= n => best,
                _ => Some((name, n)),
            })
            .map(|(name, _)| name.clone())
            .expect("result set is non-empty, so sizes is non-empty")
    } else {
        reference
    };
    let alpha = resolve(args.alpha, config.f64("alpha")?, 0.05);

    let format_name = resolve(args.format, config.string("format")?, "markdown".into());
    let format: ReportFormat = format_name
        .parse()
        .map_err(|e: String| CliError::Input(e))?;
    let out = resolve(args.out, config.path("out")?, root.join("reports"));

    printer.line(
        &format!(
            "analyzing {} attempts ({} tools, {} benchmarks; reference {}, alpha {})",
            rs.len(),
            rs.tools().len(),
            rs.benchmarks().len(),
            reference,
            alpha
        ),
        json!({
            "event": "config",
            "command": "analyze",
            "root": root,
            "attempts": rs.len(),
            "sizes": sizes,
            "reference": reference,
            "alpha": alpha,
            "format": format_name,
            "out": out,
        }),
    );

    let analyses = compute_analyses(&rs, &sizes, &reference, alpha)
        .map_err(|e| CliError::Input(e.to_string()))?;
    let written = emit_report(&analyses, &out, format).map_err(CliError::framework)?;
    for path in &written {
        printer.line(
            &format!("wrote {}", path.display()),
            json!({ "event": "report", "path": path }),
        );
    }
    Ok(())
}

pub fn cmd_classify(
    args: ClassifyArgs,
    config: &ConfigFile,
    printer: &Printer,
) -> Result<(), CliError> {
    let root = resolve_root(args.root, config.path("root")?);
    let (rs, malformed) = load_results(&root);
    for path in &malformed {
        printer.note(&format!("skipping malformed record: {}", path.display()));
    }
    if rs.is_empty() {
        return Err(CliError::Input(format!(
            "no completed attempts under {}",
            root.display()
        )));
    }

    let catalog_path = args.catalog.or(config.path("catalog")?);
    let catalog = match &catalog_path {
        Some(path) => load_catalog(path).map_err(|e| CliError::Input(e.to_string()))?,
        None => default_catalog(),
    };

    let breakdown =
        classify_result_set(&rs, &catalog).map_err(|e| CliError::Input(e.to_string()))?;

    let causes: BTreeMap<&str, usize> = FailureCause::ALL
        .iter()
        .map(|&cause| (cause.as_str(), breakdown.total_for(cause)))
        .collect();
    printer.line(
        &format!(
            "classified {} non-patched attempts across {} tools",
            breakdown.non_patched_total,
            breakdown.counts.len()
        ),
        json!({
            "event": "classify",
            "non_patched": breakdown.non_patched_total,
            "causes": causes,
        }),
    );
    for (cause, count) in &causes {
        printer.note(&format!("  {cause}: {count}"));
    }

    let out = resolve(args.out, config.path("out")?, root.join("reports"));
    std::fs::create_dir_all(&out).map_err(CliError::framework)?;
    let csv_path = out.join("causes.csv");
    std::fs::write(&csv_path, cause_counts_csv(&breakdown)).map_err(CliError::framework)?;
    let table_path = out.join("cause-percentages.md");
    std::fs::write(&table_path, cause_percentage_table(&breakdown))
        .map_err(CliError::framework)?;
    for path in [&csv_path, &table_path] {
        printer.line(
            &format!("wrote {}", path.display()),
            json!({ "event": "report", "path": path }),
        );
    }
    Ok(())
}

pub fn cmd_list(args: ListArgs, config: &ConfigFile, printer: &Printer) -> Result<(), CliError> {
    let tool_dir = resolved_tool_dir(args.dirs.tool_dir, config)?;
    let benchmark_dir = resolved_benchmark_dir(args.dirs.benchmark_dir, config)?;
    let show_bugs = args.bugs || config.bool("bugs")?.unwrap_or(false);
    let filter = args.filter.or(config.string("filter")?);

    for tool in discover_tools(&tool_dir)? {
        printer.line(
            &format!(
                "tool {} ({}, version {})",
                tool.name,
                category_label(tool.category),
                tool.version_pin
            ),
            json!({
                "event": "tool",
                "name": tool.name,
                "category": category_label(tool.category),
                "version_pin": tool.version_pin,
                "seedable": tool.supports_seed,
            }),
        );
    }
    for benchmark in discover_benchmarks(&benchmark_dir)? {
        let bugs = list_bugs(&benchmark, filter.as_deref());
        printer.line(
            &format!("benchmark {} ({} bugs)", benchmark.name, bugs.len()),
            json!({
                "event": "benchmark",
                "name": benchmark.name,
                "bugs": bugs.len(),
            }),
        );
        if show_bugs {
            for bug in bugs {
                printer.line(
                    &format!("  {}", bug.render()),
                    json!({
                        "event": "bug",
                        "benchmark": bug.benchmark,
                        "bug_id": bug.bug_id,
                    }),
                );
            }
        }
    }
    Ok(())
}
