//! Measures the 2x2 contingency pipeline: table construction, the
//! chi-square statistic, and the upper-tail p-value it feeds.

use criterion::{black_box, criterion_group, criterion_main, Criterion};
use repairlab_core::{chi_square_p_value, chi_square_statistic, ContingencyTable};

/// Patched counts for eleven tools: (on the reference benchmark of 395
/// bugs, on the remaining 1746 bugs).
const TOOL_COUNTS: [(u64, u64); 11] = [
    (86, 60),
    (45, 32),
    (72, 46),
    (62, 33),
    (17, 29),
    (31, 34),
    (27, 25),
    (20, 45),
    (107, 106),
    (74, 132),
    (9, 6),
];

fn tables() -> Vec<ContingencyTable> {
    TOOL_COUNTS
        .iter()
        .map(|&(on_reference, elsewhere)| {
            ContingencyTable::from_patched_counts(on_reference, 395, elsewhere, 1746)
                .expect("counts fit their populations")
        })
        .collect()
}

fn bench_stats(c: &mut Criterion) {
    let tables = tables();
    let statistics: Vec<f64> = tables
        .iter()
        .map(|t| chi_square_statistic(t).expect("non-degenerate"))
        .collect();

    c.bench_function("chi_square_statistic/11_tools", |b| {
        b.iter(|| {
            for table in &tables {
                black_box(chi_square_statistic(black_box(table)).unwrap());
            }
        })
    });

    c.bench_function("chi_square_p_value/11_tools_df1", |b| {
        b.iter(|| {
            for &statistic in &statistics {
                black_box(chi_square_p_value(black_box(statistic), 1).unwrap());
            }
        })
    });

    c.bench_function("contingency_pipeline/one_tool", |b| {
        b.iter(|| {
            let table =
                ContingencyTable::from_patched_counts(black_box(86), 395, black_box(60), 1746)
                    .unwrap();
            let statistic = chi_square_statistic(&table).unwrap();
            black_box(chi_square_p_value(statistic, 1).unwrap())
        })
    });
}

criterion_group!(benches, bench_stats);
criterion_main!(benches);
