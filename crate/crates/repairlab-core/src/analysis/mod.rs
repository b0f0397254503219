//! Statistics over a [`ResultSet`]: per-tool repairability with its
//! unique/overlapped decomposition, the pairwise patch-overlap matrix,
//! per-benchmark patched counts, chi-square benchmark-overfitting tests,
//! and error/timeout rate tables — plus report rendering.

mod report;
mod stats;

pub use report::{emit_report, format_p_value, render_int_percent, render_markdown, ReportFormat};
pub use stats::{chi_square_p_value, chi_square_statistic, ContingencyTable};

use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;

use crate::model::{BugCoordinate, Outcome, ResultSet};

/// Errors from the analysis layer.
#[derive(Debug, thiserror::Error)]
pub enum AnalysisError {
    /// A contingency-table marginal is zero; the statistic is undefined.
    #[error("degenerate contingency table {0:?}: a marginal is zero")]
    DegenerateTable(ContingencyTable),
    /// Only one degree of freedom is supported (2×2 tables).
    #[error("unsupported degrees of freedom {0} (only df = 1 is supported)")]
    UnsupportedDf(u32),
    /// Malformed caller input.
    #[error("invalid input: {0}")]
    InvalidInput(String),
    /// The requested reference benchmark has no known size.
    #[error("unknown reference benchmark {0:?}")]
    UnknownReference(String),
    #[error("report i/o failed: {0}")]
    Io(#[from] std::io::Error),
}

/// For each tool, the set of bugs with at least one PATCHED attempt.
/// Every statistic in this module is a pure function of these sets plus
/// attempt counts, so synthetic set configurations can drive the same
/// code paths as real campaigns.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct PatchedSets {
    per_tool: BTreeMap<String, BTreeSet<BugCoordinate>>,
}

impl PatchedSets {
    pub fn new() -> Self {
        PatchedSets::default()
    }

    /// Derives the sets from attempt records: a bug belongs to a tool's
    /// set iff at least one of the tool's attempts on it is PATCHED.
    /// Tools that appear in the result set but patched nothing still get
    /// (empty) entries, so they participate in every statistic.
    pub fn from_result_set(rs: &ResultSet) -> Self {
        let mut sets = PatchedSets::new();
        for record in rs.iter() {
            sets.per_tool.entry(record.tool.clone()).or_default();
            if record.outcome == Outcome::Patched {
                sets.per_tool
                    .get_mut(&record.tool)
                    .expect("entry just inserted")
                    .insert(record.bug.clone());
            }
        }
        sets
    }

    /// Registers a tool (idempotent), for synthetic configurations.
    pub fn add_tool(&mut self, tool: impl Into<String>) {
        self.per_tool.entry(tool.into()).or_default();
    }

    /// Adds one patched bug to a tool's set.
    pub fn add_patched(&mut self, tool: impl Into<String>, bug: BugCoordinate) {
        self.per_tool.entry(tool.into()).or_default().insert(bug);
    }

    /// Tool names in sorted order.
    pub fn tools(&self) -> Vec<&str> {
        self.per_tool.keys().map(String::as_str).collect()
    }

    /// A tool's patched set, when the tool is known.
    pub fn set(&self, tool: &str) -> Option<&BTreeSet<BugCoordinate>> {
        self.per_tool.get(tool)
    }

    /// Union of all tools' patched sets.
    pub fn union_all(&self) -> BTreeSet<&BugCoordinate> {
        self.per_tool.values().flatten().collect()
    }
}

/// One tool's repairability: how many bugs it patched, split into bugs no
/// other tool patched (`unique`) and bugs shared with at least one other
/// tool (`overlapped`).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RepairabilityRow {
    pub tool: String,
    pub unique: u64,
    pub overlapped: u64,
    pub total: u64,
    /// `100 × total / corpus size`, when the corpus size is known.
    pub percent_of_bugs: Option<f64>,
}

/// Computes repairability rows (sorted by tool name) from attempt
/// records. `total_bugs` is the corpus size used for the percentage.
pub fn repairability(rs: &ResultSet, total_bugs: Option<u64>) -> Vec<RepairabilityRow> {
    repairability_of(&PatchedSets::from_result_set(rs), total_bugs)
}

/// Set-level implementation of [`repairability`].
pub fn repairability_of(sets: &PatchedSets, total_bugs: Option<u64>) -> Vec<RepairabilityRow> {
    sets.per_tool
        .iter()
        .map(|(tool, patched)| {
            let unique = patched
                .iter()
                .filter(|bug| {
                    sets.per_tool
                        .iter()
                        .filter(|(other, _)| *other != tool)
                        .all(|(_, other_set)| !other_set.contains(bug))
                })
                .count() as u64;
            let total = patched.len() as u64;
            RepairabilityRow {
                tool: tool.clone(),
                unique,
                overlapped: total - unique,
                total,
                percent_of_bugs: total_bugs
                    .filter(|&n| n > 0)
                    .map(|n| 100.0 * total as f64 / n as f64),
            }
        })
        .collect()
}

/// One cell of the overlap matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct OverlapCell {
    /// Off-diagonal: `|Pᵢ ∩ Pⱼ|`. Diagonal: tool i's unique count.
    pub count: u64,
    /// The count as an integer percentage of row tool i's total,
    /// truncated toward zero; `None` when the row's total is zero
    /// (division undefined).
    pub row_percent: Option<u64>,
}

/// Pairwise patch-overlap matrix. Rows and columns are tools in sorted
/// order; `cells[i][j]` relates row tool i to column tool j.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OverlapMatrix {
    pub tools: Vec<String>,
    /// Per-tool patched totals (the row-percentage denominators).
    pub totals: Vec<u64>,
    pub cells: Vec<Vec<OverlapCell>>,
}

/// Integer percentage with truncation toward zero, the rounding mode used
/// by overlap reports; `None` when the denominator is zero.
pub fn floor_percent(count: u64, total: u64) -> Option<u64> {
    (total > 0).then(|| count * 100 / total)
}

/// Computes the overlap matrix from attempt records.
pub fn overlap_matrix(rs: &ResultSet) -> OverlapMatrix {
    overlap_matrix_of(&PatchedSets::from_result_set(rs))
}

/// Set-level implementation of [`overlap_matrix`].
pub fn overlap_matrix_of(sets: &PatchedSets) -> OverlapMatrix {
    let tools: Vec<String> = sets.per_tool.keys().cloned().collect();
    let totals: Vec<u64> = tools
        .iter()
        .map(|t| sets.per_tool[t].len() as u64)
        .collect();
    let unique: BTreeMap<&String, u64> = repairability_of(sets, None)
        .into_iter()
        .map(|row| (tool_key(&tools, &row.tool), row.unique))
        .collect();

    let cells = tools
        .iter()
        .enumerate()
        .map(|(i, row_tool)| {
            tools
                .iter()
                .enumerate()
                .map(|(j, col_tool)| {
                    let count = if i == j {
                        unique[row_tool]
                    } else {
                        sets.per_tool[row_tool]
                            .intersection(&sets.per_tool[col_tool])
                            .count() as u64
                    };
                    OverlapCell {
                        count,
                        row_percent: floor_percent(count, totals[i]),
                    }
                })
                .collect()
        })
        .collect();

    OverlapMatrix { tools, totals, cells }
}

/// Maps a row's tool name back onto the canonical `tools` entry so the
/// unique-count lookup borrows from one place.
fn tool_key<'a>(tools: &'a [String], name: &str) -> &'a String {
    tools
        .iter()
        .find(|t| t.as_str() == name)
        .expect("repairability covers exactly the matrix tools")
}

/// Per-benchmark patched counts for every tool, with column totals and
/// the per-benchmark unique-bug (union over tools) row.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchmarkTable {
    /// Column names: every benchmark with a known size plus any benchmark
    /// observed in the patched sets, sorted.
    pub benchmarks: Vec<String>,
    /// Benchmark sizes (bug counts) where known.
    pub sizes: Vec<Option<u64>>,
    pub rows: Vec<BenchmarkTableRow>,
    /// Column sums over tools.
    pub column_totals: Vec<u64>,
    /// Per-benchmark size of the union of all tools' patched sets.
    pub unique_counts: Vec<u64>,
    /// `100 × unique / size` per benchmark, where the size is known.
    pub unique_percents: Vec<Option<f64>>,
    /// Size of the union over all tools and benchmarks.
    pub unique_total: u64,
    /// `100 × unique_total / Σ sizes`, when every column's size is known.
    pub unique_total_percent: Option<f64>,
}

/// One tool's row of the per-benchmark table.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchmarkTableRow {
    pub tool: String,
    /// Patched counts aligned with `BenchmarkTable::benchmarks`.
    pub per_benchmark: Vec<u64>,
    /// The tool's total patched count (always the row sum).
    pub total: u64,
}

/// Computes the per-benchmark table from attempt records; `sizes` maps
/// benchmark names to their bug counts.
pub fn benchmark_table(rs: &ResultSet, sizes: &BTreeMap<String, u64>) -> BenchmarkTable {
    benchmark_table_of(&PatchedSets::from_result_set(rs), sizes)
}

/// Set-level implementation of [`benchmark_table`].
pub fn benchmark_table_of(sets: &PatchedSets, sizes: &BTreeMap<String, u64>) -> BenchmarkTable {
    let mut benchmarks: BTreeSet<String> = sizes.keys().cloned().collect();
    for set in sets.per_tool.values() {
        benchmarks.extend(set.iter().map(|bug| bug.benchmark.clone()));
    }
    let benchmarks: Vec<String> = benchmarks.into_iter().collect();

    let rows: Vec<BenchmarkTableRow> = sets
        .per_tool
        .iter()
        .map(|(tool, patched)| {
            let per_benchmark: Vec<u64> = benchmarks
                .iter()
                .map(|b| patched.iter().filter(|bug| &bug.benchmark == b).count() as u64)
                .collect();
            BenchmarkTableRow {
                tool: tool.clone(),
                total: patched.len() as u64,
                per_benchmark,
            }
        })
        .collect();

    let column_totals: Vec<u64> = (0..benchmarks.len())
        .map(|i| rows.iter().map(|r| r.per_benchmark[i]).sum())
        .collect();

    let union = sets.union_all();
    let unique_counts: Vec<u64> = benchmarks
        .iter()
        .map(|b| union.iter().filter(|bug| &bug.benchmark == b).count() as u64)
        .collect();
    let size_list: Vec<Option<u64>> = benchmarks.iter().map(|b| sizes.get(b).copied()).collect();
    let unique_percents: Vec<Option<f64>> = unique_counts
        .iter()
        .zip(&size_list)
        .map(|(&u, size)| match size {
            Some(n) if *n > 0 => Some(100.0 * u as f64 / *n as f64),
            _ => None,
        })
        .collect();
    let unique_total = union.len() as u64;
    let unique_total_percent = size_list
        .iter()
        .copied()
        .collect::<Option<Vec<u64>>>()
        .map(|all| all.iter().sum::<u64>())
        .filter(|&n| n > 0)
        .map(|n| 100.0 * unique_total as f64 / n as f64);

    BenchmarkTable {
        benchmarks,
        sizes: size_list,
        rows,
        column_totals,
        unique_counts,
        unique_percents,
        unique_total,
        unique_total_percent,
    }
}

/// Result of one tool's benchmark-overfitting chi-square test.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OverfitTestResult {
    pub tool: String,
    pub table: ContingencyTable,
    pub statistic: f64,
    pub p_value: f64,
    pub alpha: f64,
    /// True iff `p_value < alpha`: the patched counts are not independent
    /// of the reference benchmark.
    pub reject_null: bool,
}

/// Per-tool overfit-test outcome; a degenerate table fails that tool's
/// row without affecting the others.
#[derive(Debug)]
pub struct OverfitRow {
    pub tool: String,
    pub test: Result<OverfitTestResult, AnalysisError>,
}

/// Runs the benchmark-overfitting test for every tool: does the tool
/// patch a different proportion of `reference` bugs than of all other
/// benchmarks' bugs combined? The null hypothesis is independence;
/// `reject_null` means the proportions differ at significance `alpha`.
pub fn overfit_test(
    rs: &ResultSet,
    sizes: &BTreeMap<String, u64>,
    reference: &str,
    alpha: f64,
) -> Result<Vec<OverfitRow>, AnalysisError> {
    overfit_test_of(&PatchedSets::from_result_set(rs), sizes, reference, alpha)
}

/// Set-level implementation of [`overfit_test`].
pub fn overfit_test_of(
    sets: &PatchedSets,
    sizes: &BTreeMap<String, u64>,
    reference: &str,
    alpha: f64,
) -> Result<Vec<OverfitRow>, AnalysisError> {
    let Some(&reference_size) = sizes.get(reference) else {
        return Err(AnalysisError::UnknownReference(reference.to_string()));
    };
    let elsewhere_size: u64 = sizes
        .iter()
        .filter(|(name, _)| name.as_str() != reference)
        .map(|(_, &n)| n)
        .sum();

    Ok(sets
        .per_tool
        .iter()
        .map(|(tool, patched)| {
            let a = patched
                .iter()
                .filter(|bug| bug.benchmark == reference)
                .count() as u64;
            let c = patched.len() as u64 - a;
            let test = ContingencyTable::from_patched_counts(a, reference_size, c, elsewhere_size)
                .and_then(|table| {
                    let statistic = chi_square_statistic(&table)?;
                    let p_value = chi_square_p_value(statistic, 1)?;
                    Ok(OverfitTestResult {
                        tool: tool.clone(),
                        table,
                        statistic,
                        p_value,
                        alpha,
                        reject_null: p_value < alpha,
                    })
                });
            OverfitRow {
                tool: tool.clone(),
                test,
            }
        })
        .collect())
}

/// A matrix of per-(tool, benchmark) outcome percentages with row/column
/// averages. Cells are `None` where the (tool, benchmark) pair has no
/// attempts.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RateMatrix {
    /// Which outcome the percentages count.
    pub outcome: Outcome,
    pub tools: Vec<String>,
    pub benchmarks: Vec<String>,
    /// `cells[i][j]` = 100 × matching/attempts for tool i on benchmark j.
    pub cells: Vec<Vec<Option<f64>>>,
    /// Per-tool average weighted by attempt counts (ratio of sums).
    pub row_avg_weighted: Vec<Option<f64>>,
    /// Per-tool unweighted mean of the present cells.
    pub row_avg_unweighted: Vec<Option<f64>>,
    /// Per-benchmark average weighted by attempt counts.
    pub col_avg_weighted: Vec<Option<f64>>,
    /// Per-benchmark unweighted mean of the present cells.
    pub col_avg_unweighted: Vec<Option<f64>>,
    /// Whole-matrix weighted average.
    pub overall_weighted: Option<f64>,
}

/// The ERROR-rate and TIMEOUT-rate matrices.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RateTables {
    pub error: RateMatrix,
    pub timeout: RateMatrix,
}

/// Computes outcome-rate matrices over all attempts (not just patched
/// bugs): what share of each tool's attempts on each benchmark ended in
/// ERROR, and what share in TIMEOUT.
pub fn rate_tables(rs: &ResultSet) -> RateTables {
    RateTables {
        error: rate_matrix(rs, Outcome::Error),
        timeout: rate_matrix(rs, Outcome::Timeout),
    }
}

fn rate_matrix(rs: &ResultSet, outcome: Outcome) -> RateMatrix {
    let tools: Vec<String> = rs.tools().into_iter().collect();
    let benchmarks: Vec<String> = rs.benchmarks().into_iter().collect();

    // (attempts, matching) per cell.
    let mut counts: BTreeMap<(usize, usize), (u64, u64)> = BTreeMap::new();
    for record in rs.iter() {
        let i = tools.binary_search(&record.tool).expect("known tool");
        let j = benchmarks
            .binary_search(&record.bug.benchmark)
            .expect("known benchmark");
        let entry = counts.entry((i, j)).or_insert((0, 0));
        entry.0 += 1;
        if record.outcome == outcome {
            entry.1 += 1;
        }
    }

    let percent = |matching: u64, attempts: u64| 100.0 * matching as f64 / attempts as f64;
    let cells: Vec<Vec<Option<f64>>> = (0..tools.len())
        .map(|i| {
            (0..benchmarks.len())
                .map(|j| {
                    counts
                        .get(&(i, j))
                        .map(|&(attempts, matching)| percent(matching, attempts))
                })
                .collect()
        })
        .collect();

    let weighted = |pairs: &mut dyn Iterator<Item = (u64, u64)>| -> Option<f64> {
        let (attempts, matching) = pairs.fold((0u64, 0u64), |(a, m), (pa, pm)| (a + pa, m + pm));
        (attempts > 0).then(|| percent(matching, attempts))
    };
    let unweighted = |values: &mut dyn Iterator<Item = f64>| -> Option<f64> {
        let collected: Vec<f64> = values.collect();
        (!collected.is_empty()).then(|| collected.iter().sum::<f64>() / collected.len() as f64)
    };

    let row_avg_weighted: Vec<Option<f64>> = (0..tools.len())
        .map(|i| {
            weighted(
                &mut (0..benchmarks.len()).filter_map(|j| counts.get(&(i, j)).copied()),
            )
        })
        .collect();
    let row_avg_unweighted: Vec<Option<f64>> = (0..tools.len())
        .map(|i| unweighted(&mut cells[i].iter().copied().flatten()))
        .collect();
    let col_avg_weighted: Vec<Option<f64>> = (0..benchmarks.len())
        .map(|j| {
            weighted(&mut (0..tools.len()).filter_map(|i| counts.get(&(i, j)).copied()))
        })
        .collect();
    let col_avg_unweighted: Vec<Option<f64>> = (0..benchmarks.len())
        .map(|j| unweighted(&mut cells.iter().map(|row| row[j]).flatten()))
        .collect();
    let overall_weighted = weighted(&mut counts.values().copied());

    RateMatrix {
        outcome,
        tools,
        benchmarks,
        cells,
        row_avg_weighted,
        row_avg_unweighted,
        col_avg_weighted,
        col_avg_unweighted,
        overall_weighted,
    }
}

/// Every analysis in one bundle, for report emission.
#[derive(Debug)]
pub struct Analyses {
    pub repairability: Vec<RepairabilityRow>,
    pub overlap: OverlapMatrix,
    pub benchmark_table: BenchmarkTable,
    pub overfit: Vec<OverfitRow>,
    pub rates: RateTables,
    pub reference_benchmark: String,
    pub alpha: f64,
}

/// Runs every analysis over one result set. `sizes` maps benchmark names
/// to bug counts; `reference` is the overfit-test reference benchmark.
pub fn compute_analyses(
    rs: &ResultSet,
    sizes: &BTreeMap<String, u64>,
    reference: &str,
    alpha: f64,
) -> Result<Analyses, AnalysisError> {
    let sets = PatchedSets::from_result_set(rs);
    let total_bugs: u64 = sizes.values().sum();
    Ok(Analyses {
        repairability: repairability_of(&sets, (total_bugs > 0).then_some(total_bugs)),
        overlap: overlap_matrix_of(&sets),
        benchmark_table: benchmark_table_of(&sets, sizes),
        overfit: overfit_test_of(&sets, sizes, reference, alpha)?,
        rates: rate_tables(rs),
        reference_benchmark: reference.to_string(),
        alpha,
    })
}
