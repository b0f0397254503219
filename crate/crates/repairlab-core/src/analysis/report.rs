//! Renders [`Analyses`](super::Analyses) to files in Markdown, CSV, or
//! JSON. Output is deterministic: the same analyses yield byte-identical
//! reports.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use super::{
    Analyses, AnalysisError, BenchmarkTable, OverfitRow, OverlapMatrix, RateMatrix,
    RepairabilityRow,
};

/// Output formats for [`emit_report`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Markdown,
    Csv,
    Json,
}

impl ReportFormat {
    pub fn extension(self) -> &'static str {
        match self {
            ReportFormat::Markdown => "md",
            ReportFormat::Csv => "csv",
            ReportFormat::Json => "json",
        }
    }
}

impl std::str::FromStr for ReportFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "markdown" | "md" => Ok(ReportFormat::Markdown),
            "csv" => Ok(ReportFormat::Csv),
            "json" => Ok(ReportFormat::Json),
            other => Err(format!(
                "unknown report format {other:?} (expected markdown, csv, or json)"
            )),
        }
    }
}

/// Renders an integer percentage of `count` over `total` the way the
/// overlap reports print it: truncated toward zero, with two special
/// cases — a nonzero count that truncates to zero prints as `<1%` so it
/// stays distinguishable from a true zero (`0%`), and a zero total
/// prints `n/a` because the ratio is undefined.
pub fn render_int_percent(count: u64, total: u64) -> String {
    match super::floor_percent(count, total) {
        None => "n/a".to_string(),
        Some(0) if count > 0 => "<1%".to_string(),
        Some(p) => format!("{p}%"),
    }
}

/// Formats a p-value: scientific with four significant decimals below
/// 1e-4 (where fixed notation would collapse to zeros), fixed five
/// decimals otherwise.
pub fn format_p_value(p: f64) -> String {
    if p != 0.0 && p < 1e-4 {
        format!("{p:.4e}")
    } else {
        format!("{p:.5}")
    }
}

fn fmt_2dp(value: f64) -> String {
    format!("{value:.2}")
}

fn fmt_rate(cell: Option<f64>) -> String {
    cell.map(fmt_2dp).unwrap_or_default()
}

/// Quotes a CSV field when it contains a delimiter, quote, or newline.
fn csv_field(raw: &str) -> String {
    if raw.contains([',', '"', '\n', '\r']) {
        format!("\"{}\"", raw.replace('"', "\"\""))
    } else {
        raw.to_string()
    }
}

fn csv_row(fields: &[String]) -> String {
    fields
        .iter()
        .map(|f| csv_field(f))
        .collect::<Vec<_>>()
        .join(",")
}

fn md_row(fields: &[String]) -> String {
    format!("| {} |", fields.join(" | "))
}

fn md_separator(columns: usize) -> String {
    format!("|{}", " --- |".repeat(columns))
}

/// A report table: a header row plus data rows, rendered per format.
struct Table {
    title: String,
    header: Vec<String>,
    rows: Vec<Vec<String>>,
}

impl Table {
    fn render(&self, format: ReportFormat) -> String {
        match format {
            ReportFormat::Markdown => {
                let mut out = format!("# {}\n\n", self.title);
                out.push_str(&md_row(&self.header));
                out.push('\n');
                out.push_str(&md_separator(self.header.len()));
                out.push('\n');
                for row in &self.rows {
                    out.push_str(&md_row(row));
                    out.push('\n');
                }
                out
            }
            ReportFormat::Csv => {
                let mut out = csv_row(&self.header);
                out.push('\n');
                for row in &self.rows {
                    out.push_str(&csv_row(row));
                    out.push('\n');
                }
                out
            }
            ReportFormat::Json => unreachable!("json reports serialize structures directly"),
        }
    }
}

fn owned(fields: &[&str]) -> Vec<String> {
    fields.iter().map(|s| s.to_string()).collect()
}

fn repairability_table(rows: &[RepairabilityRow]) -> Table {
    Table {
        title: "Repairability".to_string(),
        header: owned(&["tool", "unique", "overlapped", "total", "percent_of_bugs"]),
        rows: rows
            .iter()
            .map(|r| {
                vec![
                    r.tool.clone(),
                    r.unique.to_string(),
                    r.overlapped.to_string(),
                    r.total.to_string(),
                    r.percent_of_bugs.map(fmt_2dp).unwrap_or_default(),
                ]
            })
            .collect(),
    }
}

fn overlap_table(matrix: &OverlapMatrix) -> Table {
    let mut header = vec!["tool".to_string(), "total".to_string()];
    header.extend(matrix.tools.iter().cloned());
    let rows = matrix
        .tools
        .iter()
        .enumerate()
        .map(|(i, tool)| {
            let mut row = vec![tool.clone(), matrix.totals[i].to_string()];
            row.extend(matrix.cells[i].iter().map(|cell| {
                format!(
                    "{} ({})",
                    render_int_percent(cell.count, matrix.totals[i]),
                    cell.count
                )
            }));
            row
        })
        .collect();
    Table {
        title: "Patch overlap (diagonal = bugs only that tool patched)".to_string(),
        header,
        rows,
    }
}

fn benchmark_table_table(table: &BenchmarkTable) -> Table {
    let mut header = vec!["tool".to_string()];
    header.extend(table.benchmarks.iter().cloned());
    header.push("total".to_string());

    let mut rows: Vec<Vec<String>> = table
        .rows
        .iter()
        .map(|row| {
            let mut fields = vec![row.tool.clone()];
            fields.extend(row.per_benchmark.iter().map(u64::to_string));
            fields.push(row.total.to_string());
            fields
        })
        .collect();

    let mut totals = vec!["(all tools)".to_string()];
    totals.extend(table.column_totals.iter().map(u64::to_string));
    totals.push(table.column_totals.iter().sum::<u64>().to_string());
    rows.push(totals);

    let mut unique = vec!["(distinct bugs)".to_string()];
    for (count, percent) in table.unique_counts.iter().zip(&table.unique_percents) {
        unique.push(match percent {
            Some(p) => format!("{count} ({}%)", fmt_2dp(*p)),
            None => count.to_string(),
        });
    }
    unique.push(match table.unique_total_percent {
        Some(p) => format!("{} ({}%)", table.unique_total, fmt_2dp(p)),
        None => table.unique_total.to_string(),
    });
    rows.push(unique);

    Table {
        title: "Patched bugs per benchmark".to_string(),
        header,
        rows,
    }
}

fn overfit_table(rows: &[OverfitRow], reference: &str, alpha: f64) -> Table {
    Table {
        title: format!(
            "Benchmark-dependence test (reference {reference}, significance {alpha})"
        ),
        header: owned(&[
            "tool",
            "patched_reference",
            "patched_elsewhere",
            "statistic",
            "p_value",
            "distribution_differs",
        ]),
        rows: rows
            .iter()
            .map(|row| match &row.test {
                Ok(result) => vec![
                    row.tool.clone(),
                    result.table.a.to_string(),
                    result.table.c.to_string(),
                    format!("{:.4}", result.statistic),
                    format_p_value(result.p_value),
                    if result.reject_null { "yes" } else { "no" }.to_string(),
                ],
                Err(err) => vec![
                    row.tool.clone(),
                    String::new(),
                    String::new(),
                    String::new(),
                    String::new(),
                    format!("undefined: {err}"),
                ],
            })
            .collect(),
    }
}

fn rate_table(matrix: &RateMatrix, title: &str) -> Table {
    let mut header = vec!["tool".to_string()];
    header.extend(matrix.benchmarks.iter().cloned());
    header.push("avg_weighted".to_string());
    header.push("avg_unweighted".to_string());

    let mut rows: Vec<Vec<String>> = matrix
        .tools
        .iter()
        .enumerate()
        .map(|(i, tool)| {
            let mut fields = vec![tool.clone()];
            fields.extend(matrix.cells[i].iter().map(|c| fmt_rate(*c)));
            fields.push(fmt_rate(matrix.row_avg_weighted[i]));
            fields.push(fmt_rate(matrix.row_avg_unweighted[i]));
            fields
        })
        .collect();

    let mut weighted = vec!["(avg weighted)".to_string()];
    weighted.extend(matrix.col_avg_weighted.iter().map(|c| fmt_rate(*c)));
    weighted.push(fmt_rate(matrix.overall_weighted));
    weighted.push(String::new());
    rows.push(weighted);

    let mut unweighted = vec!["(avg unweighted)".to_string()];
    unweighted.extend(matrix.col_avg_unweighted.iter().map(|c| fmt_rate(*c)));
    unweighted.push(String::new());
    unweighted.push(String::new());
    rows.push(unweighted);

    Table {
        title: title.to_string(),
        header,
        rows,
    }
}

fn overfit_json(rows: &[OverfitRow], reference: &str, alpha: f64) -> serde_json::Value {
    serde_json::json!({
        "reference_benchmark": reference,
        "alpha": alpha,
        "tools": rows
            .iter()
            .map(|row| match &row.test {
                Ok(result) => serde_json::json!({
                    "tool": row.tool,
                    "table": result.table,
                    "statistic": result.statistic,
                    "p_value": result.p_value,
                    "distribution_differs": result.reject_null,
                }),
                Err(err) => serde_json::json!({
                    "tool": row.tool,
                    "error": err.to_string(),
                }),
            })
            .collect::<Vec<_>>(),
    })
}

/// Writes one file per analysis into `dir` (created if missing) and
/// returns the paths written, in a fixed order: repairability, overlap
/// matrix, benchmark table, benchmark-dependence test, error rates,
/// timeout rates.
pub fn emit_report(
    analyses: &Analyses,
    dir: &Path,
    format: ReportFormat,
) -> Result<Vec<PathBuf>, AnalysisError> {
    std::fs::create_dir_all(dir)?;
    let ext = format.extension();
    let mut written = Vec::new();

    let mut emit = |name: &str, content: String| -> Result<(), AnalysisError> {
        let path = dir.join(format!("{name}.{ext}"));
        std::fs::write(&path, content)?;
        written.push(path);
        Ok(())
    };

    match format {
        ReportFormat::Json => {
            let to_json = |value: serde_json::Value| {
                let mut text = serde_json::to_string_pretty(&value)
                    .expect("report structures serialize");
                text.push('\n');
                text
            };
            emit(
                "repairability",
                to_json(serde_json::to_value(&analyses.repairability).unwrap()),
            )?;
            emit(
                "overlap_matrix",
                to_json(serde_json::to_value(&analyses.overlap).unwrap()),
            )?;
            emit(
                "benchmark_table",
                to_json(serde_json::to_value(&analyses.benchmark_table).unwrap()),
            )?;
            emit(
                "overfit_test",
                to_json(overfit_json(
                    &analyses.overfit,
                    &analyses.reference_benchmark,
                    analyses.alpha,
                )),
            )?;
            emit(
                "error_rates",
                to_json(serde_json::to_value(&analyses.rates.error).unwrap()),
            )?;
            emit(
                "timeout_rates",
                to_json(serde_json::to_value(&analyses.rates.timeout).unwrap()),
            )?;
        }
        ReportFormat::Markdown | ReportFormat::Csv => {
            emit(
                "repairability",
                repairability_table(&analyses.repairability).render(format),
            )?;
            emit(
                "overlap_matrix",
                overlap_table(&analyses.overlap).render(format),
            )?;
            emit(
                "benchmark_table",
                benchmark_table_table(&analyses.benchmark_table).render(format),
            )?;
            emit(
                "overfit_test",
                overfit_table(
                    &analyses.overfit,
                    &analyses.reference_benchmark,
                    analyses.alpha,
                )
                .render(format),
            )?;
            emit(
                "error_rates",
                rate_table(&analyses.rates.error, "ERROR outcome rate (percent of attempts)")
                    .render(format),
            )?;
            emit(
                "timeout_rates",
                rate_table(
                    &analyses.rates.timeout,
                    "TIMEOUT outcome rate (percent of attempts)",
                )
                .render(format),
            )?;
        }
    }

    Ok(written)
}

/// Renders every table as one Markdown document (for stdout display).
pub fn render_markdown(analyses: &Analyses) -> String {
    let mut out = String::new();
    let tables = [
        repairability_table(&analyses.repairability),
        overlap_table(&analyses.overlap),
        benchmark_table_table(&analyses.benchmark_table),
        overfit_table(
            &analyses.overfit,
            &analyses.reference_benchmark,
            analyses.alpha,
        ),
        rate_table(&analyses.rates.error, "ERROR outcome rate (percent of attempts)"),
        rate_table(
            &analyses.rates.timeout,
            "TIMEOUT outcome rate (percent of attempts)",
        ),
    ];
    for table in tables {
        let _ = write!(out, "{}\n", table.render(ReportFormat::Markdown));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::{compute_analyses, OverlapCell};
    use crate::model::sample_record;
    use crate::model::{Outcome, ResultSet};
    use std::collections::BTreeMap;

    /// A published eleven-tool overlap matrix, frozen as a rendering
    /// oracle: per-tool totals, the full count matrix, and the integer
    /// percentage string each cell must render to. Covers truncation
    /// (e.g. 23/146 is 15%, not 16%), the `<1%` rule for nonzero counts
    /// under one percent, and true-zero cells.
    const TOOL_TOTALS: [u64; 11] = [146, 77, 118, 95, 46, 65, 52, 65, 213, 206, 15];

    const COUNTS: [[u64; 11]; 11] = [
        [20, 66, 82, 81, 23, 44, 40, 29, 53, 48, 4],
        [66, 3, 49, 63, 17, 31, 29, 18, 33, 31, 2],
        [82, 49, 11, 55, 20, 34, 44, 28, 56, 54, 2],
        [81, 63, 55, 5, 17, 37, 30, 20, 36, 35, 2],
        [23, 17, 20, 17, 12, 30, 21, 15, 10, 12, 2],
        [44, 31, 34, 37, 30, 6, 36, 27, 19, 24, 2],
        [40, 29, 44, 30, 21, 36, 0, 30, 28, 35, 1],
        [29, 18, 28, 20, 15, 27, 30, 10, 38, 20, 1],
        [53, 33, 56, 36, 10, 19, 28, 38, 57, 114, 2],
        [48, 31, 54, 35, 12, 24, 35, 20, 114, 75, 1],
        [4, 2, 2, 2, 2, 2, 1, 1, 2, 1, 8],
    ];

    const PERCENTS: [[&str; 11]; 11] = [
        ["13%", "45%", "56%", "55%", "15%", "30%", "27%", "19%", "36%", "32%", "2%"],
        ["85%", "3%", "63%", "81%", "22%", "40%", "37%", "23%", "42%", "40%", "2%"],
        ["69%", "41%", "9%", "46%", "16%", "28%", "37%", "23%", "47%", "45%", "1%"],
        ["85%", "66%", "57%", "5%", "17%", "38%", "31%", "21%", "37%", "36%", "2%"],
        ["50%", "36%", "43%", "36%", "26%", "65%", "45%", "32%", "21%", "26%", "4%"],
        ["67%", "47%", "52%", "56%", "46%", "9%", "55%", "41%", "29%", "36%", "3%"],
        ["76%", "55%", "84%", "57%", "40%", "69%", "0%", "57%", "53%", "67%", "1%"],
        ["44%", "27%", "43%", "30%", "23%", "41%", "46%", "15%", "58%", "30%", "1%"],
        ["24%", "15%", "26%", "16%", "4%", "8%", "13%", "17%", "26%", "53%", "<1%"],
        ["23%", "15%", "26%", "16%", "5%", "11%", "16%", "9%", "55%", "36%", "<1%"],
        ["26%", "13%", "13%", "13%", "13%", "13%", "6%", "6%", "13%", "6%", "53%"],
    ];

    #[test]
    fn published_matrix_renders_cell_for_cell() {
        for (i, row) in COUNTS.iter().enumerate() {
            for (j, &count) in row.iter().enumerate() {
                assert_eq!(
                    render_int_percent(count, TOOL_TOTALS[i]),
                    PERCENTS[i][j],
                    "cell ({i},{j}): {count}/{}",
                    TOOL_TOTALS[i]
                );
            }
        }
    }

    #[test]
    fn published_matrix_counts_are_symmetric() {
        for i in 0..11 {
            for j in 0..11 {
                if i != j {
                    assert_eq!(COUNTS[i][j], COUNTS[j][i], "({i},{j})");
                }
            }
        }
    }

    #[test]
    fn small_nonzero_shares_render_as_less_than_one() {
        assert_eq!(render_int_percent(2, 213), "<1%");
        assert_eq!(render_int_percent(1, 206), "<1%");
        assert_eq!(render_int_percent(0, 52), "0%");
        assert_eq!(render_int_percent(0, 0), "n/a");
        assert_eq!(render_int_percent(1, 100), "1%");
        assert_eq!(render_int_percent(100, 100), "100%");
    }

    #[test]
    fn p_values_format_deterministically() {
        assert_eq!(format_p_value(1.0), "1.00000");
        assert_eq!(format_p_value(0.0093091358), "0.00931");
        assert_eq!(format_p_value(0.0010702133), "0.00107");
        assert_eq!(format_p_value(3.1356574417e-5), "3.1357e-5");
        assert_eq!(format_p_value(0.0), "0.00000");
    }

    #[test]
    fn csv_fields_escape_delimiters_and_quotes() {
        assert_eq!(csv_field("plain"), "plain");
        assert_eq!(csv_field("a,b"), "\"a,b\"");
        assert_eq!(csv_field("say \"hi\""), "\"say \"\"hi\"\"\"");
        assert_eq!(csv_field("two\nlines"), "\"two\nlines\"");
    }

    fn toy_result_set() -> ResultSet {
        let mut rs = ResultSet::new();
        let spec: &[(&str, &str, Outcome)] = &[
            ("alpha", "bug_001", Outcome::Patched),
            ("alpha", "bug_002", Outcome::NoPatch),
            ("alpha", "bug_003", Outcome::Timeout),
            ("beta", "bug_001", Outcome::Patched),
            ("beta", "bug_002", Outcome::Error),
        ];
        for tool in ["fixit", "mendix"] {
            for (benchmark, bug, outcome) in spec {
                let mut record = sample_record(tool, benchmark, bug, 1);
                record.outcome = *outcome;
                if *outcome != Outcome::Patched {
                    record.patch_count = 0;
                }
                if *outcome == Outcome::Timeout {
                    record.exit.terminated_by_watchdog = true;
                    record.exit.code = None;
                    record.exit.signal = Some(9);
                }
                rs.insert(record).unwrap();
            }
        }
        rs
    }

    fn toy_analyses() -> Analyses {
        let sizes: BTreeMap<String, u64> =
            [("alpha".to_string(), 3), ("beta".to_string(), 2)].into();
        compute_analyses(&toy_result_set(), &sizes, "alpha", 0.05).unwrap()
    }

    #[test]
    fn emit_writes_all_six_reports_per_format() {
        let dir = tempfile::tempdir().unwrap();
        for format in [ReportFormat::Markdown, ReportFormat::Csv, ReportFormat::Json] {
            let out = dir.path().join(format.extension());
            let written = emit_report(&toy_analyses(), &out, format).unwrap();
            let names: Vec<String> = written
                .iter()
                .map(|p| p.file_name().unwrap().to_string_lossy().into_owned())
                .collect();
            let ext = format.extension();
            assert_eq!(
                names,
                [
                    format!("repairability.{ext}"),
                    format!("overlap_matrix.{ext}"),
                    format!("benchmark_table.{ext}"),
                    format!("overfit_test.{ext}"),
                    format!("error_rates.{ext}"),
                    format!("timeout_rates.{ext}"),
                ]
            );
            for path in &written {
                assert!(!std::fs::read_to_string(path).unwrap().is_empty());
            }
        }
    }

    #[test]
    fn reports_are_byte_identical_across_runs() {
        let dir = tempfile::tempdir().unwrap();
        let first = emit_report(&toy_analyses(), &dir.path().join("a"), ReportFormat::Csv).unwrap();
        let second =
            emit_report(&toy_analyses(), &dir.path().join("b"), ReportFormat::Csv).unwrap();
        for (a, b) in first.iter().zip(&second) {
            assert_eq!(
                std::fs::read(a).unwrap(),
                std::fs::read(b).unwrap(),
                "{a:?} vs {b:?}"
            );
        }
    }

    #[test]
    fn json_reports_parse_and_round_trip_key_numbers() {
        let dir = tempfile::tempdir().unwrap();
        let written = emit_report(&toy_analyses(), dir.path(), ReportFormat::Json).unwrap();
        let repairability: serde_json::Value =
            serde_json::from_str(&std::fs::read_to_string(&written[0]).unwrap()).unwrap();
        // Both tools patch the same two bugs out of five.
        assert_eq!(repairability[0]["total"], 2);
        assert_eq!(repairability[0]["unique"], 0);
        assert_eq!(repairability[0]["percent_of_bugs"], 40.0);

        let overlap: serde_json::Value =
            serde_json::from_str(&std::fs::read_to_string(&written[1]).unwrap()).unwrap();
        assert_eq!(overlap["cells"][0][1]["count"], 2);
        assert_eq!(overlap["cells"][0][1]["row_percent"], 100);

        let rates: serde_json::Value =
            serde_json::from_str(&std::fs::read_to_string(&written[4]).unwrap()).unwrap();
        // One ERROR in five attempts per tool.
        assert_eq!(rates["row_avg_weighted"][0], 20.0);
    }

    #[test]
    fn markdown_overlap_table_prints_percent_then_count() {
        let analyses = toy_analyses();
        let text = overlap_table(&analyses.overlap).render(ReportFormat::Markdown);
        // fixit and mendix patch identical sets: 100% (2) off-diagonal,
        // 0% (0) unique on the diagonal.
        assert!(text.contains("100% (2)"), "{text}");
        assert!(text.contains("0% (0)"), "{text}");
    }

    #[test]
    fn overlap_cells_carry_floor_percentages() {
        let analyses = toy_analyses();
        for (i, row) in analyses.overlap.cells.iter().enumerate() {
            for cell in row {
                let OverlapCell { count, row_percent } = *cell;
                assert_eq!(
                    row_percent,
                    super::super::floor_percent(count, analyses.overlap.totals[i])
                );
            }
        }
    }

    #[test]
    fn csv_rate_table_has_average_columns() {
        let analyses = toy_analyses();
        let text = rate_table(&analyses.rates.timeout, "t").render(ReportFormat::Csv);
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), "tool,alpha,beta,avg_weighted,avg_unweighted");
        // One TIMEOUT among three alpha attempts, none on beta.
        let fixit = lines.next().unwrap();
        assert_eq!(fixit, "fixit,33.33,0.00,20.00,16.67");
    }
}
