//! Maps non-patched attempts onto a failure-cause taxonomy through an
//! ordered, user-editable rule catalog evaluated over attempt records
//! and their logs.
//!
//! Causes that demand human judgment (a missed search space, wrong
//! fault localization, multi-location fixes) are only assigned when a
//! tool prints an explicit marker; guessing them from generic log noise
//! would fabricate findings, so everything unmatched stays `UNKNOWN`.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::io::BufRead;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::model::{AttemptKey, AttemptRecord, FailureCause, Outcome, Phase, ResultSet};

#[derive(Debug, thiserror::Error)]
pub enum ClassifyError {
    #[error("attempt {key} is PATCHED; failure causes apply only to non-patched attempts")]
    PatchedInput { key: AttemptKey },
    #[error("inconsistent record {key}: {reason}")]
    InconsistentRecord { key: AttemptKey, reason: String },
    #[error("cannot read cause catalog {path:?}: {reason}")]
    CatalogRead { path: std::path::PathBuf, reason: String },
    #[error("cause catalog is invalid: {reason}")]
    CatalogInvalid { reason: String },
}

/// What a rule inspects.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RuleKind {
    /// Match `repair.log` lines: a pattern starting with `^` is a
    /// regular expression, anything else a literal substring.
    #[serde(rename = "LOG_PATTERN")]
    LogPattern,
    /// Match the attempt outcome by name (`ERROR`, `TIMEOUT`, ...).
    #[serde(rename = "OUTCOME_IS")]
    OutcomeIs,
    /// Match the terminating signal number.
    #[serde(rename = "EXIT_SIGNAL")]
    ExitSignal,
    /// Match the failed phase by name (`checkout`, `compile`, ...).
    #[serde(rename = "PHASE_FAILED")]
    PhaseFailed,
}

/// One triage rule; lower priority fires first.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CauseRule {
    pub priority: u32,
    pub cause: FailureCause,
    pub kind: RuleKind,
    pub pattern: String,
}

/// Checks catalog-level invariants: unique priorities, no rule may
/// assign `UNKNOWN` (that is the absence of a match), and every pattern
/// must be well-formed for its kind.
pub fn validate_catalog(rules: &[CauseRule]) -> Result<(), ClassifyError> {
    let mut seen = BTreeMap::new();
    for rule in rules {
        if let Some(previous) = seen.insert(rule.priority, &rule.pattern) {
            return Err(ClassifyError::CatalogInvalid {
                reason: format!(
                    "priority {} is used by both {previous:?} and {:?}",
                    rule.priority, rule.pattern
                ),
            });
        }
        if rule.cause == FailureCause::Unknown {
            return Err(ClassifyError::CatalogInvalid {
                reason: format!(
                    "rule at priority {} assigns UNKNOWN; UNKNOWN is reserved for unmatched records",
                    rule.priority
                ),
            });
        }
        let bad = |reason: String| ClassifyError::CatalogInvalid {
            reason: format!("rule at priority {}: {reason}", rule.priority),
        };
        match rule.kind {
            RuleKind::LogPattern => {
                if rule.pattern.is_empty() {
                    return Err(bad("empty log pattern".to_string()));
                }
                if rule.pattern.starts_with('^') {
                    regex::Regex::new(&rule.pattern)
                        .map_err(|e| bad(format!("invalid regular expression: {e}")))?;
                }
            }
            RuleKind::OutcomeIs => {
                let outcome: Outcome = rule
                    .pattern
                    .parse()
                    .map_err(|e| bad(format!("{e}")))?;
                if outcome == Outcome::Patched {
                    return Err(bad(
                        "OUTCOME_IS PATCHED can never fire: patched attempts have no failure cause"
                            .to_string(),
                    ));
                }
            }
            RuleKind::ExitSignal => {
                rule.pattern
                    .parse::<i32>()
                    .map_err(|e| bad(format!("signal must be an integer: {e}")))?;
            }
            RuleKind::PhaseFailed => {
                parse_phase(&rule.pattern)
                    .ok_or_else(|| bad(format!("unknown phase {:?}", rule.pattern)))?;
            }
        }
    }
    Ok(())
}

fn parse_phase(name: &str) -> Option<Phase> {
    [Phase::Checkout, Phase::Compile, Phase::Info, Phase::Tool]
        .into_iter()
        .find(|p| p.as_str() == name)
}

/// Loads and validates a catalog file: a JSON array of
/// `{priority, cause, kind, pattern}` objects.
pub fn load_catalog(path: &Path) -> Result<Vec<CauseRule>, ClassifyError> {
    let text = std::fs::read_to_string(path).map_err(|e| ClassifyError::CatalogRead {
        path: path.to_path_buf(),
        reason: e.to_string(),
    })?;
    let rules: Vec<CauseRule> =
        serde_json::from_str(&text).map_err(|e| ClassifyError::CatalogRead {
            path: path.to_path_buf(),
            reason: e.to_string(),
        })?;
    validate_catalog(&rules)?;
    Ok(rules)
}

/// The shipped defaults: only explicit, unambiguous log markers.
pub fn default_catalog() -> Vec<CauseRule> {
    let rules = vec![
        CauseRule {
            priority: 10,
            cause: FailureCause::Technical,
            kind: RuleKind::LogPattern,
            pattern: "Argument list too long".to_string(),
        },
        CauseRule {
            priority: 20,
            cause: FailureCause::Configuration,
            kind: RuleKind::LogPattern,
            pattern: "InvalidClassPathException".to_string(),
        },
        CauseRule {
            priority: 30,
            cause: FailureCause::FaultLocalization,
            kind: RuleKind::LogPattern,
            pattern: "no suspicious statements found".to_string(),
        },
        CauseRule {
            priority: 40,
            cause: FailureCause::SearchSpaceMiss,
            kind: RuleKind::LogPattern,
            pattern: "search space exhausted".to_string(),
        },
        CauseRule {
            priority: 50,
            cause: FailureCause::Configuration,
            kind: RuleKind::PhaseFailed,
            pattern: "compile".to_string(),
        },
    ];
    debug_assert!(validate_catalog(&rules).is_ok());
    rules
}

/// Returns the record's outcome after re-checking that the TIMEOUT
/// outcome and the watchdog flag agree.
pub fn classify_outcome(record: &AttemptRecord) -> Result<Outcome, ClassifyError> {
    if (record.outcome == Outcome::Timeout) != record.exit.terminated_by_watchdog {
        return Err(ClassifyError::InconsistentRecord {
            key: record.key(),
            reason: format!(
                "outcome {} disagrees with terminated_by_watchdog = {}",
                record.outcome, record.exit.terminated_by_watchdog
            ),
        });
    }
    Ok(record.outcome)
}

fn rule_matches_fields(rule: &CauseRule, record: &AttemptRecord) -> bool {
    match rule.kind {
        RuleKind::LogPattern => false,
        RuleKind::OutcomeIs => rule.pattern.parse::<Outcome>() == Ok(record.outcome),
        RuleKind::ExitSignal => {
            rule.pattern.parse::<i32>().ok() == record.exit.signal && record.exit.signal.is_some()
        }
        RuleKind::PhaseFailed => parse_phase(&rule.pattern) == record.failed_phase,
    }
}

fn line_matcher(pattern: &str) -> impl Fn(&str) -> bool + '_ {
    let compiled = if pattern.starts_with('^') {
        Some(regex::Regex::new(pattern).expect("validated catalog"))
    } else {
        None
    };
    move |line: &str| match &compiled {
        Some(re) => re.is_match(line),
        None => line.contains(pattern),
    }
}

/// Assigns one failure cause to a non-patched attempt: a TIMEOUT maps
/// straight to TIME_BUDGET, otherwise the lowest-priority matching rule
/// wins, and UNKNOWN is the fallback. The log is scanned line by line
/// in a single pass, so memory stays bounded on huge logs.
pub fn classify_failure_cause(
    record: &AttemptRecord,
    catalog: &[CauseRule],
) -> Result<FailureCause, ClassifyError> {
    validate_catalog(catalog)?;
    if record.outcome == Outcome::Patched {
        return Err(ClassifyError::PatchedInput { key: record.key() });
    }
    if record.outcome == Outcome::Timeout {
        return Ok(FailureCause::TimeBudget);
    }

    let mut ordered: Vec<&CauseRule> = catalog.iter().collect();
    ordered.sort_by_key(|r| r.priority);

    fn consider(best: &mut Option<(u32, FailureCause)>, priority: u32, cause: FailureCause) {
        if best.map_or(true, |(p, _)| priority < p) {
            *best = Some((priority, cause));
        }
    }
    let mut best: Option<(u32, FailureCause)> = None;
    for rule in &ordered {
        if rule_matches_fields(rule, record) {
            consider(&mut best, rule.priority, rule.cause);
        }
    }

    let log_rules: Vec<&CauseRule> = ordered
        .iter()
        .copied()
        .filter(|r| r.kind == RuleKind::LogPattern)
        .filter(|r| best.map_or(true, |(p, _)| r.priority < p))
        .collect();
    if !log_rules.is_empty() {
        if let Ok(file) = std::fs::File::open(&record.log_path) {
            let matchers: Vec<_> = log_rules
                .iter()
                .map(|r| line_matcher(&r.pattern))
                .collect();
            let mut matched = vec![false; log_rules.len()];
            for line in std::io::BufReader::new(file).lines() {
                let Ok(line) = line else { break };
                for (i, rule) in log_rules.iter().enumerate() {
                    if !matched[i] && matchers[i](&line) {
                        matched[i] = true;
                        consider(&mut best, rule.priority, rule.cause);
                    }
                }
                // The lowest-priority log rule matched: nothing later in
                // the file can beat it.
                if matched[0] {
                    break;
                }
            }
        }
    }

    Ok(best.map_or(FailureCause::Unknown, |(_, cause)| cause))
}

/// Per-(tool, benchmark, cause) counts over the non-patched attempts of
/// a result set.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct CauseBreakdown {
    /// tool → benchmark → cause → attempt count.
    pub counts: BTreeMap<String, BTreeMap<String, BTreeMap<FailureCause, usize>>>,
    /// Number of non-patched attempts classified.
    pub non_patched_total: usize,
}

impl CauseBreakdown {
    /// Total number of attempts attributed to `cause`.
    pub fn total_for(&self, cause: FailureCause) -> usize {
        self.counts
            .values()
            .flat_map(|b| b.values())
            .filter_map(|m| m.get(&cause))
            .sum()
    }

    /// All attempts of one tool, across benchmarks and causes.
    pub fn tool_total(&self, tool: &str) -> usize {
        self.counts
            .get(tool)
            .map(|b| b.values().flat_map(|m| m.values()).sum())
            .unwrap_or(0)
    }
}

/// Classifies every non-patched attempt in the set.
pub fn classify_result_set(
    rs: &ResultSet,
    catalog: &[CauseRule],
) -> Result<CauseBreakdown, ClassifyError> {
    validate_catalog(catalog)?;
    let mut breakdown = CauseBreakdown::default();
    for record in rs.iter_sorted() {
        classify_outcome(record)?;
        if record.outcome == Outcome::Patched {
            continue;
        }
        let cause = classify_failure_cause(record, catalog)?;
        *breakdown
            .counts
            .entry(record.tool.clone())
            .or_default()
            .entry(record.bug.benchmark.clone())
            .or_default()
            .entry(cause)
            .or_default() += 1;
        breakdown.non_patched_total += 1;
    }
    Ok(breakdown)
}

/// `tool,benchmark,cause,count` rows in deterministic order, causes
/// with zero attempts omitted.
pub fn cause_counts_csv(breakdown: &CauseBreakdown) -> String {
    let mut out = String::from("tool,benchmark,cause,count\n");
    for (tool, benchmarks) in &breakdown.counts {
        for (benchmark, causes) in benchmarks {
            for cause in FailureCause::ALL {
                if let Some(count) = causes.get(&cause) {
                    let _ = writeln!(out, "{tool},{benchmark},{},{count}", cause.as_str());
                }
            }
        }
    }
    out
}

fn floor_percentage(count: usize, total: usize) -> String {
    if total == 0 {
        return "n/a".to_string();
    }
    if count == 0 {
        return "0%".to_string();
    }
    let floored = count * 100 / total;
    if floored == 0 {
        "<1%".to_string()
    } else {
        format!("{floored}%")
    }
}

/// A tools × causes percentage table (share of each tool's non-patched
/// attempts), rendered as aligned Markdown.
pub fn cause_percentage_table(breakdown: &CauseBreakdown) -> String {
    let mut header = vec!["Tool".to_string()];
    header.extend(FailureCause::ALL.iter().map(|c| c.as_str().to_string()));
    let mut rows = vec![header];
    for tool in breakdown.counts.keys() {
        let total = breakdown.tool_total(tool);
        let mut row = vec![tool.clone()];
        for cause in FailureCause::ALL {
            let count: usize = breakdown.counts[tool]
                .values()
                .filter_map(|m| m.get(&cause))
                .sum();
            row.push(floor_percentage(count, total));
        }
        rows.push(row);
    }

    let columns = rows[0].len();
    let widths: Vec<usize> = (0..columns)
        .map(|c| rows.iter().map(|r| r[c].len()).max().unwrap_or(0))
        .collect();
    let mut out = String::new();
    for (i, row) in rows.iter().enumerate() {
        let cells: Vec<String> = row
            .iter()
            .zip(&widths)
            .map(|(cell, w)| format!("{cell:<w$}"))
            .collect();
        let _ = writeln!(out, "| {} |", cells.join(" | "));
        if i == 0 {
            let dashes: Vec<String> = widths.iter().map(|w| "-".repeat(*w)).collect();
            let _ = writeln!(out, "| {} |", dashes.join(" | "));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{sample_record, ExitInfo};

    fn record_with(
        outcome: Outcome,
        watchdog: bool,
        log_lines: &[&str],
        dir: &Path,
    ) -> AttemptRecord {
        let mut record = sample_record("toolx", "benchy", "bug_1", 1);
        record.outcome = outcome;
        record.exit = ExitInfo {
            code: if watchdog { None } else { Some(1) },
            signal: if watchdog { Some(9) } else { None },
            terminated_by_watchdog: watchdog,
        };
        if outcome == Outcome::Patched {
            record.patch_count = 1;
            record.exit.code = Some(0);
        }
        static NEXT: std::sync::atomic::AtomicUsize = std::sync::atomic::AtomicUsize::new(0);
        let n = NEXT.fetch_add(1, std::sync::atomic::Ordering::Relaxed);
        let log = dir.join(format!("attempt-{n}.log"));
        std::fs::write(&log, log_lines.join("\n")).unwrap();
        record.log_path = log;
        record
    }

    #[test]
    fn outcome_passthrough_accepts_consistent_records() {
        let dir = tempfile::tempdir().unwrap();
        let timeout = record_with(Outcome::Timeout, true, &[], dir.path());
        assert_eq!(classify_outcome(&timeout).unwrap(), Outcome::Timeout);
        let patched = record_with(Outcome::Patched, false, &[], dir.path());
        assert_eq!(classify_outcome(&patched).unwrap(), Outcome::Patched);
    }

    #[test]
    fn outcome_passthrough_rejects_watchdog_disagreement() {
        let dir = tempfile::tempdir().unwrap();
        let mut broken = record_with(Outcome::Error, false, &[], dir.path());
        broken.exit.terminated_by_watchdog = true;
        assert!(matches!(
            classify_outcome(&broken),
            Err(ClassifyError::InconsistentRecord { .. })
        ));
        let mut silent = record_with(Outcome::Timeout, true, &[], dir.path());
        silent.exit.terminated_by_watchdog = false;
        assert!(classify_outcome(&silent).is_err());
    }

    #[test]
    fn verbatim_markers_map_to_their_causes() {
        let dir = tempfile::tempdir().unwrap();
        let catalog = default_catalog();
        let technical = record_with(
            Outcome::Error,
            false,
            &["2026-01-01T00:00:00Z | tool | runner | Argument list too long: 140000 characters"],
            dir.path(),
        );
        assert_eq!(
            classify_failure_cause(&technical, &catalog).unwrap(),
            FailureCause::Technical
        );

        let config = record_with(
            Outcome::Error,
            false,
            &["stack: com.example.InvalidClassPathException: missing jar"],
            dir.path(),
        );
        assert_eq!(
            classify_failure_cause(&config, &catalog).unwrap(),
            FailureCause::Configuration
        );

        let fl = record_with(
            Outcome::NoPatch,
            false,
            &["warning: no suspicious statements found"],
            dir.path(),
        );
        assert_eq!(
            classify_failure_cause(&fl, &catalog).unwrap(),
            FailureCause::FaultLocalization
        );
    }

    #[test]
    fn timeout_maps_to_time_budget_before_any_log_rule() {
        let dir = tempfile::tempdir().unwrap();
        // Even with a TECHNICAL marker in the log, a timeout is a
        // budget problem.
        let record = record_with(
            Outcome::Timeout,
            true,
            &["Argument list too long"],
            dir.path(),
        );
        assert_eq!(
            classify_failure_cause(&record, &default_catalog()).unwrap(),
            FailureCause::TimeBudget
        );
    }

    #[test]
    fn patched_input_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let record = record_with(Outcome::Patched, false, &[], dir.path());
        assert!(matches!(
            classify_failure_cause(&record, &default_catalog()),
            Err(ClassifyError::PatchedInput { .. })
        ));
    }

    #[test]
    fn unmatched_records_fall_to_unknown() {
        let dir = tempfile::tempdir().unwrap();
        let record = record_with(Outcome::Error, false, &["nothing of note"], dir.path());
        assert_eq!(
            classify_failure_cause(&record, &[]).unwrap(),
            FailureCause::Unknown
        );
        // A missing log file also falls through cleanly.
        let mut ghost = record_with(Outcome::Error, false, &[], dir.path());
        ghost.log_path = dir.path().join("does-not-exist.log");
        assert_eq!(
            classify_failure_cause(&ghost, &default_catalog()).unwrap(),
            FailureCause::Unknown
        );
    }

    #[test]
    fn priority_order_decides_between_competing_matches() {
        let dir = tempfile::tempdir().unwrap();
        let record = record_with(
            Outcome::Error,
            false,
            &["Argument list too long", "InvalidClassPathException"],
            dir.path(),
        );
        assert_eq!(
            classify_failure_cause(&record, &default_catalog()).unwrap(),
            FailureCause::Technical
        );
        // Swapping priorities flips the winner.
        let mut swapped = default_catalog();
        swapped[0].priority = 20;
        swapped[1].priority = 10;
        assert_eq!(
            classify_failure_cause(&record, &swapped).unwrap(),
            FailureCause::Configuration
        );
    }

    #[test]
    fn adding_a_later_rule_never_steals_earlier_matches() {
        let dir = tempfile::tempdir().unwrap();
        let record = record_with(Outcome::Error, false, &["Argument list too long"], dir.path());
        let base = default_catalog();
        let before = classify_failure_cause(&record, &base).unwrap();
        let mut extended = base.clone();
        extended.push(CauseRule {
            priority: 999,
            cause: FailureCause::MultiLocation,
            kind: RuleKind::LogPattern,
            pattern: "Argument".to_string(),
        });
        assert_eq!(classify_failure_cause(&record, &extended).unwrap(), before);
    }

    #[test]
    fn field_rules_match_signals_phases_and_outcomes() {
        let dir = tempfile::tempdir().unwrap();
        let catalog = vec![
            CauseRule {
                priority: 1,
                cause: FailureCause::Technical,
                kind: RuleKind::ExitSignal,
                pattern: "11".to_string(),
            },
            CauseRule {
                priority: 2,
                cause: FailureCause::Configuration,
                kind: RuleKind::PhaseFailed,
                pattern: "compile".to_string(),
            },
            CauseRule {
                priority: 3,
                cause: FailureCause::MultiLocation,
                kind: RuleKind::OutcomeIs,
                pattern: "NO_PATCH".to_string(),
            },
        ];
        let mut segfault = record_with(Outcome::Error, false, &[], dir.path());
        segfault.exit = ExitInfo {
            code: None,
            signal: Some(11),
            terminated_by_watchdog: false,
        };
        assert_eq!(
            classify_failure_cause(&segfault, &catalog).unwrap(),
            FailureCause::Technical
        );

        let mut broken_build = record_with(Outcome::Error, false, &[], dir.path());
        broken_build.failed_phase = Some(Phase::Compile);
        assert_eq!(
            classify_failure_cause(&broken_build, &catalog).unwrap(),
            FailureCause::Configuration
        );

        let empty_handed = record_with(Outcome::NoPatch, false, &[], dir.path());
        assert_eq!(
            classify_failure_cause(&empty_handed, &catalog).unwrap(),
            FailureCause::MultiLocation
        );
    }

    #[test]
    fn anchored_patterns_are_regular_expressions() {
        let dir = tempfile::tempdir().unwrap();
        let catalog = vec![CauseRule {
            priority: 1,
            cause: FailureCause::Technical,
            kind: RuleKind::LogPattern,
            pattern: "^FATAL: [0-9]+ errors$".to_string(),
        }];
        let hit = record_with(Outcome::Error, false, &["FATAL: 12 errors"], dir.path());
        assert_eq!(
            classify_failure_cause(&hit, &catalog).unwrap(),
            FailureCause::Technical
        );
        let miss = record_with(
            Outcome::Error,
            false,
            &["prefix FATAL: 12 errors"],
            dir.path(),
        );
        assert_eq!(
            classify_failure_cause(&miss, &catalog).unwrap(),
            FailureCause::Unknown
        );
    }

    #[test]
    fn catalog_validation_rejects_broken_rules() {
        let dup = vec![
            CauseRule {
                priority: 1,
                cause: FailureCause::Technical,
                kind: RuleKind::LogPattern,
                pattern: "a".to_string(),
            },
            CauseRule {
                priority: 1,
                cause: FailureCause::Configuration,
                kind: RuleKind::LogPattern,
                pattern: "b".to_string(),
            },
        ];
        assert!(validate_catalog(&dup).is_err());

        let unknown = vec![CauseRule {
            priority: 1,
            cause: FailureCause::Unknown,
            kind: RuleKind::LogPattern,
            pattern: "a".to_string(),
        }];
        assert!(validate_catalog(&unknown).is_err());

        let bad_regex = vec![CauseRule {
            priority: 1,
            cause: FailureCause::Technical,
            kind: RuleKind::LogPattern,
            pattern: "^(unclosed".to_string(),
        }];
        assert!(validate_catalog(&bad_regex).is_err());

        let bad_phase = vec![CauseRule {
            priority: 1,
            cause: FailureCause::Technical,
            kind: RuleKind::PhaseFailed,
            pattern: "linking".to_string(),
        }];
        assert!(validate_catalog(&bad_phase).is_err());

        let patched_outcome = vec![CauseRule {
            priority: 1,
            cause: FailureCause::Technical,
            kind: RuleKind::OutcomeIs,
            pattern: "PATCHED".to_string(),
        }];
        assert!(validate_catalog(&patched_outcome).is_err());
    }

    #[test]
    fn catalog_files_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("catalog.json");
        std::fs::write(
            &path,
            serde_json::to_string_pretty(&default_catalog()).unwrap(),
        )
        .unwrap();
        let loaded = load_catalog(&path).unwrap();
        assert_eq!(loaded, default_catalog());

        std::fs::write(&path, "{not json").unwrap();
        assert!(matches!(
            load_catalog(&path),
            Err(ClassifyError::CatalogRead { .. })
        ));
    }

    #[test]
    fn result_set_classification_is_total_and_conserved() {
        let dir = tempfile::tempdir().unwrap();
        let mut rs = ResultSet::new();
        let specs: Vec<(&str, Outcome, bool, Vec<&str>)> = vec![
            ("bug_1", Outcome::Patched, false, vec![]),
            ("bug_2", Outcome::Error, false, vec!["Argument list too long"]),
            ("bug_3", Outcome::Error, false, vec!["InvalidClassPathException"]),
            ("bug_4", Outcome::Timeout, true, vec![]),
            ("bug_5", Outcome::NoPatch, false, vec!["quiet run"]),
            ("bug_6", Outcome::Error, false, vec!["search space exhausted"]),
        ];
        for (bug, outcome, watchdog, lines) in &specs {
            let mut record = record_with(*outcome, *watchdog, lines, dir.path());
            record.bug = crate::model::parse_bug_in_benchmark("benchy", bug).unwrap();
            rs.insert(record).unwrap();
        }

        let breakdown = classify_result_set(&rs, &default_catalog()).unwrap();
        assert_eq!(breakdown.non_patched_total, 5);
        let total_classified: usize = FailureCause::ALL
            .iter()
            .map(|c| breakdown.total_for(*c))
            .sum();
        assert_eq!(total_classified, 5, "conservation");
        assert_eq!(breakdown.total_for(FailureCause::Technical), 1);
        assert_eq!(breakdown.total_for(FailureCause::Configuration), 1);
        assert_eq!(breakdown.total_for(FailureCause::TimeBudget), 1);
        assert_eq!(breakdown.total_for(FailureCause::SearchSpaceMiss), 1);
        assert_eq!(breakdown.total_for(FailureCause::Unknown), 1);

        let csv = cause_counts_csv(&breakdown);
        assert!(csv.starts_with("tool,benchmark,cause,count\n"));
        assert!(csv.contains("toolx,benchy,TECHNICAL,1"), "{csv}");
        assert!(csv.contains("toolx,benchy,TIME_BUDGET,1"), "{csv}");
        // CSV counts re-sum to the non-patched total.
        let csv_total: usize = csv
            .lines()
            .skip(1)
            .map(|l| l.rsplit(',').next().unwrap().parse::<usize>().unwrap())
            .sum();
        assert_eq!(csv_total, 5);

        let table = cause_percentage_table(&breakdown);
        assert!(table.contains("TECHNICAL"));
        assert!(table.contains("20%"), "{table}");
    }

    #[test]
    fn percentage_formatting_floors_and_flags_small_counts() {
        assert_eq!(floor_percentage(0, 0), "n/a");
        assert_eq!(floor_percentage(0, 50), "0%");
        assert_eq!(floor_percentage(1, 250), "<1%");
        assert_eq!(floor_percentage(2, 10), "20%");
        assert_eq!(floor_percentage(199, 200), "99%");
    }
}
