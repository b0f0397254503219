//! Measures unified-diff rendering, which the attempt runner uses to
//! capture every patch a tool leaves behind in its workspace.

use std::fmt::Write as _;

use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};
use repairlab_core::diff::unified_diff;

/// A synthetic source file of `lines` numbered statements.
fn source(lines: usize) -> String {
    let mut out = String::new();
    for i in 0..lines {
        let _ = writeln!(out, "    let value_{i} = compute({i}) + offset; // line {i}");
    }
    out
}

/// An edited copy: every 17th line rewritten, one block of 5 inserted
/// near the front, one block of 5 dropped near the back.
fn edited(base: &str) -> String {
    let lines: Vec<&str> = base.lines().collect();
    let mut out = String::new();
    for (i, line) in lines.iter().enumerate() {
        if i == 10 {
            for j in 0..5 {
                let _ = writeln!(out, "    guard_{j}();");
            }
        }
        if lines.len() > 30 && (lines.len() - 25..lines.len() - 20).contains(&i) {
            continue;
        }
        if i % 17 == 3 {
            let _ = writeln!(out, "    let value_{i} = recompute({i}) - offset; // line {i}");
        } else {
            let _ = writeln!(out, "{line}");
        }
    }
    out
}

fn bench_diff(c: &mut Criterion) {
    for lines in [100usize, 1_000, 5_000] {
        let old = source(lines);
        let new = edited(&old);
        c.bench_with_input(
            BenchmarkId::new("unified_diff", format!("{lines}_lines")),
            &(&old, &new),
            |b, (old, new)| {
                b.iter(|| {
                    black_box(unified_diff(
                        black_box(old),
                        black_box(new),
                        "a/src/main.toy",
                        "b/src/main.toy",
                        3,
                    ))
                })
            },
        );
    }

    let old = source(1_000);
    c.bench_function("unified_diff/identical_1000_lines", |b| {
        b.iter(|| {
            black_box(unified_diff(
                black_box(&old),
                black_box(&old),
                "a/src/main.toy",
                "b/src/main.toy",
                3,
            ))
        })
    });
}

criterion_group!(benches, bench_diff);
criterion_main!(benches);
