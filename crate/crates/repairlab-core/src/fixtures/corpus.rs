//! The shipped toy benchmark: ten small buggy programs with test
//! suites, covering the failure scenarios the harness must exercise.
//!
//! Six bugs are fixable by a single operator mutation; one needs the
//! same fix at two sites; one needs a new statement (out of any
//! mutation tool's space); one does not parse (build failure); one has
//! a classpath long enough to overflow a command-length limit.

use std::io;
use std::path::{Path, PathBuf};

/// Why a bug is in the corpus — what scenario it exercises.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BugKind {
    SingleOperator,
    MultiLocation,
    OutOfSpace,
    BrokenBuild,
    LongClasspath,
}

/// One corpus entry: buggy source, reference fix, test suite, and the
/// test ids the buggy version fails.
#[derive(Debug, Clone)]
pub struct ToyBug {
    pub id: &'static str,
    pub title: &'static str,
    pub buggy: &'static str,
    pub reference_fix: &'static str,
    pub tests: &'static str,
    pub failing_tests: &'static [&'static str],
    pub kind: BugKind,
}

/// Jar count added to the long-classpath bug beyond the shared runtime
/// jar.
pub const LONG_CLASSPATH_JARS: usize = 60;

/// Benchmark name used in the generated manifest.
pub const BENCHMARK_NAME: &str = "toybench";

pub fn corpus() -> Vec<ToyBug> {
    vec![
        ToyBug {
            id: "bug_01",
            title: "sign treats zero as negative",
            buggy: "# sign: 1 for non-negative, -1 otherwise\ninput x\nif x > 0 return 1\nreturn 0 - 1\n",
            reference_fix: "# sign: 1 for non-negative, -1 otherwise\ninput x\nif x >= 0 return 1\nreturn 0 - 1\n",
            tests: "5 -> 1\n-3 -> -1\n0 -> 1\n",
            failing_tests: &["t3"],
            kind: BugKind::SingleOperator,
        },
        ToyBug {
            id: "bug_02",
            title: "collatz step with inverted parity test",
            buggy: "# one collatz step\ninput n\nif n % 2 != 0 return n / 2\nreturn 3 * n + 1\n",
            reference_fix: "# one collatz step\ninput n\nif n % 2 == 0 return n / 2\nreturn 3 * n + 1\n",
            tests: "4 -> 2\n7 -> 22\n-3 -> -8\n10 -> 5\n",
            failing_tests: &["t1", "t2", "t3", "t4"],
            kind: BugKind::SingleOperator,
        },
        ToyBug {
            id: "bug_03",
            title: "range check accepts almost everything",
            buggy: "# is x within [lo, hi]\ninput x lo hi\nif lo <= x || x <= hi return 1\nreturn 0\n",
            reference_fix: "# is x within [lo, hi]\ninput x lo hi\nif lo <= x && x <= hi return 1\nreturn 0\n",
            tests: "5 1 10 -> 1\n0 1 10 -> 0\n11 1 10 -> 0\n1 1 10 -> 1\n",
            failing_tests: &["t2", "t3"],
            kind: BugKind::SingleOperator,
        },
        ToyBug {
            id: "bug_04",
            title: "discount applied at the boundary",
            buggy: "# 10 off for orders strictly over 100\ninput total\nif total >= 100 return total - 10\nreturn total\n",
            reference_fix: "# 10 off for orders strictly over 100\ninput total\nif total > 100 return total - 10\nreturn total\n",
            tests: "150 -> 140\n100 -> 100\n50 -> 50\n101 -> 91\n",
            failing_tests: &["t2"],
            kind: BugKind::SingleOperator,
        },
        ToyBug {
            id: "bug_05",
            title: "access check negated",
            buggy: "# grant when admin or key holder\ninput is_admin has_key\nif !is_admin return 1\nif has_key return 1\nreturn 0\n",
            reference_fix: "# grant when admin or key holder\ninput is_admin has_key\nif is_admin return 1\nif has_key return 1\nreturn 0\n",
            tests: "true false -> 1\nfalse true -> 1\nfalse false -> 0\ntrue true -> 1\n",
            failing_tests: &["t1", "t3"],
            kind: BugKind::SingleOperator,
        },
        ToyBug {
            id: "bug_06",
            title: "exactly-one check tests equality instead",
            buggy: "# exactly one flag set\ninput a b\nif a == b return 1\nreturn 0\n",
            reference_fix: "# exactly one flag set\ninput a b\nif a != b return 1\nreturn 0\n",
            tests: "true false -> 1\nfalse false -> 0\ntrue true -> 0\nfalse true -> 1\n",
            failing_tests: &["t1", "t2", "t3", "t4"],
            kind: BugKind::SingleOperator,
        },
        ToyBug {
            id: "bug_07",
            title: "both interval bounds exclusive instead of inclusive",
            buggy: "# within inclusive bounds 10..20\ninput x\nif x > 10 && x < 20 return 1\nreturn 0\n",
            reference_fix: "# within inclusive bounds 10..20\ninput x\nif x >= 10 && x <= 20 return 1\nreturn 0\n",
            tests: "10 -> 1\n20 -> 1\n15 -> 1\n5 -> 0\n25 -> 0\n",
            failing_tests: &["t1", "t2"],
            kind: BugKind::MultiLocation,
        },
        ToyBug {
            id: "bug_08",
            title: "result misses the +1 term",
            buggy: "# doubled plus one, zero for negatives\ninput n\nlet d = n * 2\nif n < 0 return 0\nreturn d\n",
            reference_fix: "# doubled plus one, zero for negatives\ninput n\nlet d = n * 2\nif n < 0 return 0\nreturn d + 1\n",
            tests: "3 -> 7\n0 -> 1\n-2 -> 0\n5 -> 11\n",
            failing_tests: &["t1", "t2", "t4"],
            kind: BugKind::OutOfSpace,
        },
        ToyBug {
            id: "bug_09",
            title: "source does not parse",
            buggy: "# doubles the input\ninput x\nlet = x * 2\nreturn y\n",
            reference_fix: "# doubles the input\ninput x\nlet y = x * 2\nreturn y\n",
            tests: "2 -> 4\n0 -> 0\n-3 -> -6\n",
            failing_tests: &["t1", "t2", "t3"],
            kind: BugKind::BrokenBuild,
        },
        ToyBug {
            id: "bug_10",
            title: "absolute value with inverted branch",
            buggy: "# absolute value\ninput x\nif x <= 0 return x\nreturn 0 - x\n",
            reference_fix: "# absolute value\ninput x\nif x >= 0 return x\nreturn 0 - x\n",
            tests: "5 -> 5\n-3 -> 3\n0 -> 0\n",
            failing_tests: &["t1", "t2"],
            kind: BugKind::LongClasspath,
        },
    ]
}

fn long_jar_name(i: usize) -> String {
    format!("dependency-artifact-{i:03}-4.13.2-SNAPSHOT-jar-with-dependencies.jar")
}

fn shell_quote(word: &str) -> String {
    format!("'{}'", word.replace('\'', r"'\''"))
}

/// Workspace-relative classpath entries a bug's metadata hook reports.
fn classpath_entries(bug: &ToyBug) -> Vec<String> {
    let mut entries = vec!["lib/toy-runtime.jar".to_string()];
    if bug.kind == BugKind::LongClasspath {
        entries.extend((0..LONG_CLASSPATH_JARS).map(|i| format!("lib/{}", long_jar_name(i))));
    }
    entries
}

/// Writes the toy benchmark to `dir`: a loadable manifest, the three
/// hook scripts, and one directory per bug (buggy source, tests,
/// libraries). `compile_checker` is the command prefix the compile
/// hook runs against the main source file — pass a parse-checking
/// executable for a real build gate. Returns the manifest path.
pub fn install_benchmark(dir: &Path, compile_checker: &[String]) -> io::Result<PathBuf> {
    let bugs = corpus();
    let hooks_dir = dir.join("hooks");
    std::fs::create_dir_all(&hooks_dir)?;

    for bug in &bugs {
        let bug_dir = dir.join("bugs").join(bug.id);
        std::fs::create_dir_all(bug_dir.join("src"))?;
        std::fs::create_dir_all(bug_dir.join("tests"))?;
        std::fs::create_dir_all(bug_dir.join("lib"))?;
        std::fs::write(bug_dir.join("src/main.toy"), bug.buggy)?;
        std::fs::write(bug_dir.join("tests/suite.tests"), bug.tests)?;
        std::fs::write(
            bug_dir.join("lib/toy-runtime.jar"),
            "toy runtime placeholder\n",
        )?;
        if bug.kind == BugKind::LongClasspath {
            for i in 0..LONG_CLASSPATH_JARS {
                std::fs::write(
                    bug_dir.join("lib").join(long_jar_name(i)),
                    format!("placeholder dependency {i}\n"),
                )?;
            }
        }
    }

    std::fs::write(
        hooks_dir.join("checkout.sh"),
        "#!/bin/sh\n\
         # Copies the pristine buggy tree for one bug into the workspace.\n\
         set -eu\n\
         bug=\"$1\"\n\
         ws=\"$2\"\n\
         cp -R \"bugs/$bug/.\" \"$ws/\"\n\
         echo \"checked out $bug\"\n",
    )?;

    let checker = if compile_checker.is_empty() {
        "true".to_string()
    } else {
        compile_checker
            .iter()
            .map(|w| shell_quote(w))
            .collect::<Vec<_>>()
            .join(" ")
    };
    std::fs::write(
        hooks_dir.join("compile.sh"),
        format!(
            "#!/bin/sh\n\
             # Build gate: the toy language has no compiler, so the sources\n\
             # are parse-checked instead.\n\
             set -eu\n\
             ws=\"$1\"\n\
             exec {checker} \"$ws/src/main.toy\"\n"
        ),
    )?;

    let mut info = String::from(
        "#!/bin/sh\n\
         # Emits the per-bug metadata file into the workspace.\n\
         set -eu\n\
         bug=\"$1\"\n\
         ws=\"$2\"\n\
         case \"$bug\" in\n",
    );
    for bug in &bugs {
        let params = serde_json::json!({
            "source_path": "src",
            "test_path": "tests",
            "source_binary_path": "src",
            "test_binary_path": "tests",
            "classpath": classpath_entries(bug),
            "language_level": "toy-1",
            "failing_test_identifiers": bug.failing_tests,
        });
        info.push_str(&format!(
            "  {})\n    cat > \"$ws/bug_info.json\" <<'JSON'\n{}\nJSON\n    ;;\n",
            bug.id,
            serde_json::to_string_pretty(&params).expect("static metadata serializes"),
        ));
    }
    info.push_str(
        "  *)\n    echo \"unknown bug $bug\" >&2\n    exit 3\n    ;;\nesac\n\
         echo \"wrote bug_info.json for $bug\"\n",
    );
    std::fs::write(hooks_dir.join("info.sh"), info)?;

    let manifest = serde_json::json!({
        "name": BENCHMARK_NAME,
        "bugs": bugs.iter().map(|b| serde_json::json!({"id": b.id})).collect::<Vec<_>>(),
        "hooks": {
            "checkout": {"cmd": ["sh", "hooks/checkout.sh", "{bug_id}", "{workspace}"]},
            "compile": {"cmd": ["sh", "hooks/compile.sh", "{workspace}"]},
            "info": {"cmd": ["sh", "hooks/info.sh", "{bug_id}", "{workspace}"]}
        },
        "metadata": {"project_count": 1, "mean_lines_of_code": 5}
    });
    let manifest_path = dir.join("manifest.json");
    std::fs::write(
        &manifest_path,
        serde_json::to_string_pretty(&manifest).expect("static manifest serializes"),
    )?;
    Ok(manifest_path)
}
