//! Line-oriented diff engine used to normalize tool output: computes a
//! shortest edit script (Myers), renders it as a unified diff, and applies
//! unified diffs back — the apply path is the write-time proof that every
//! recorded patch reconstructs the tool's file from the buggy version.

use std::fmt::Write as _;

/// Errors from parsing or applying a unified diff.
#[derive(Debug, thiserror::Error)]
pub enum DiffError {
    #[error("unparseable diff at line {line}: {reason}")]
    Parse { line: usize, reason: String },
    #[error("hunk does not apply at old line {old_line}: {reason}")]
    DoesNotApply { old_line: usize, reason: String },
}

/// One element of an edit script over old lines `a` and new lines `b`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Edit {
    /// `a[a_index]` kept as-is (equals the matching `b` line).
    Keep { a_index: usize },
    /// `a[a_index]` removed.
    Del { a_index: usize },
    /// `b[b_index]` inserted.
    Ins { b_index: usize },
}

/// Splits text into lines that keep their trailing `\n` (when present),
/// so "no newline at end of file" survives the round trip.
fn split_lines(text: &str) -> Vec<&str> {
    text.split_inclusive('\n').collect()
}

/// Myers shortest-edit-script search, O((N+M)·D) time with the full
/// furthest-reaching-point trace kept for backtracking.
fn myers(a: &[&str], b: &[&str]) -> Vec<Edit> {
    let n = a.len();
    let m = b.len();
    let max = n + m;
    if max == 0 {
        return Vec::new();
    }
    let offset = max as isize;
    let idx = |k: isize| (k + offset) as usize;

    // v[idx(k)] = furthest x on diagonal k after the current round.
    let mut v = vec![0usize; 2 * max + 1];
    let mut trace: Vec<Vec<usize>> = Vec::new();
    let mut found_d = None;

    'search: for d in 0..=(max as isize) {
        trace.push(v.clone());
        let mut k = -d;
        while k <= d {
            let mut x = if k == -d || (k != d && v[idx(k - 1)] < v[idx(k + 1)]) {
                v[idx(k + 1)] // step down: insert b line
            } else {
                v[idx(k - 1)] + 1 // step right: delete a line
            };
            let mut y = (x as isize - k) as usize;
            while x < n && y < m && a[x] == b[y] {
                x += 1;
                y += 1;
            }
            v[idx(k)] = x;
            if x >= n && y >= m {
                found_d = Some(d);
                break 'search;
            }
            k += 2;
        }
    }
    let found_d = found_d.expect("search space is exhaustive for d <= n+m");

    // Backtrack from (n, m) through the per-round snapshots.
    let mut edits = Vec::new();
    let mut x = n;
    let mut y = m;
    for d in (1..=found_d).rev() {
        let v = &trace[d as usize];
        let k = x as isize - y as isize;
        let prev_k = if k == -d || (k != d && v[idx(k - 1)] < v[idx(k + 1)]) {
            k + 1
        } else {
            k - 1
        };
        let prev_x = v[idx(prev_k)];
        let prev_y = (prev_x as isize - prev_k) as usize;
        while x > prev_x && y > prev_y {
            x -= 1;
            y -= 1;
            edits.push(Edit::Keep { a_index: x });
        }
        if prev_k == k + 1 {
            y -= 1;
            edits.push(Edit::Ins { b_index: y });
        } else {
            x -= 1;
            edits.push(Edit::Del { a_index: x });
        }
        debug_assert_eq!((x, y), (prev_x, prev_y));
    }
    while x > 0 && y > 0 {
        x -= 1;
        y -= 1;
        edits.push(Edit::Keep { a_index: x });
    }
    debug_assert_eq!((x, y), (0, 0));
    edits.reverse();
    edits
}

/// Writes one diff body line (` `/`-`/`+` prefix), adding the
/// no-trailing-newline marker when the source line is the file's last and
/// unterminated.
fn push_line(out: &mut String, prefix: char, line: &str) {
    if let Some(stripped) = line.strip_suffix('\n') {
        let _ = writeln!(out, "{prefix}{stripped}");
    } else {
        let _ = writeln!(out, "{prefix}{line}");
        out.push_str("\\ No newline at end of file\n");
    }
}

/// Renders a unified diff between `old` and `new` with `context` lines of
/// surrounding context per hunk. Returns an empty string when the inputs
/// are identical. Labels become the `---`/`+++` header names.
pub fn unified_diff(
    old: &str,
    new: &str,
    old_label: &str,
    new_label: &str,
    context: usize,
) -> String {
    if old == new {
        return String::new();
    }
    let a = split_lines(old);
    let b = split_lines(new);
    let edits = myers(&a, &b);

    let mut out = String::new();
    let _ = writeln!(out, "--- {old_label}");
    let _ = writeln!(out, "+++ {new_label}");

    // Group edits into hunk ranges: each hunk spans from `context` keeps
    // before its first change to `context` keeps after its last, and
    // changes separated by at most 2*context keeps share a hunk.
    let is_keep = |e: &Edit| matches!(e, Edit::Keep { .. });
    let mut ranges: Vec<(usize, usize)> = Vec::new();
    let mut i = 0;
    let mut prev_end = 0;
    while i < edits.len() {
        if is_keep(&edits[i]) {
            i += 1;
            continue;
        }
        let start = i.saturating_sub(context).max(prev_end);
        let mut last_change = i;
        let mut j = i + 1;
        while j < edits.len() {
            if !is_keep(&edits[j]) {
                last_change = j;
                j += 1;
                continue;
            }
            let run_start = j;
            while j < edits.len() && is_keep(&edits[j]) {
                j += 1;
            }
            if j < edits.len() && j - run_start <= 2 * context {
                continue; // the next change joins this hunk
            }
            break;
        }
        let end = (last_change + 1 + context).min(edits.len());
        ranges.push((start, end));
        prev_end = end;
        i = end;
    }

    // Render each hunk, tracking how many old/new lines precede it.
    let mut old_before = 0usize;
    let mut new_before = 0usize;
    let mut cursor = 0usize;
    for (start, end) in ranges {
        for edit in &edits[cursor..start] {
            match edit {
                Edit::Keep { .. } => {
                    old_before += 1;
                    new_before += 1;
                }
                Edit::Del { .. } => old_before += 1,
                Edit::Ins { .. } => new_before += 1,
            }
        }
        let old_count = edits[start..end].iter().filter(|e| !matches!(e, Edit::Ins { .. })).count();
        let new_count = edits[start..end].iter().filter(|e| !matches!(e, Edit::Del { .. })).count();
        // Unified convention: a range of count 0 names the line before it.
        let old_display = if old_count == 0 { old_before } else { old_before + 1 };
        let new_display = if new_count == 0 { new_before } else { new_before + 1 };
        let _ = writeln!(out, "@@ -{old_display},{old_count} +{new_display},{new_count} @@");
        for edit in &edits[start..end] {
            match *edit {
                Edit::Keep { a_index } => {
                    push_line(&mut out, ' ', a[a_index]);
                    old_before += 1;
                    new_before += 1;
                }
                Edit::Del { a_index } => {
                    push_line(&mut out, '-', a[a_index]);
                    old_before += 1;
                }
                Edit::Ins { b_index } => {
                    push_line(&mut out, '+', b[b_index]);
                    new_before += 1;
                }
            }
        }
        cursor = end;
    }
    out
}

/// One parsed hunk.
struct Hunk {
    old_start: usize, // 1-based; 0 for empty old range
    old_count: usize,
    lines: Vec<(char, String)>,
}

/// Parses `l[,c]` range syntax from a hunk header half.
fn parse_range(spec: &str, line: usize) -> Result<(usize, usize), DiffError> {
    let (start, count) = match spec.split_once(',') {
        Some((s, c)) => (s, c),
        None => (spec, "1"),
    };
    let parse = |v: &str| {
        v.parse::<usize>().map_err(|_| DiffError::Parse {
            line,
            reason: format!("bad range number {v:?}"),
        })
    };
    Ok((parse(start)?, parse(count)?))
}

/// Applies a unified diff to `old`, returning the patched text. The diff
/// must match exactly (no fuzzing): context and deleted lines are compared
/// verbatim against `old` at the positions the hunk headers claim.
pub fn apply_unified(old: &str, diff: &str) -> Result<String, DiffError> {
    if diff.is_empty() {
        return Ok(old.to_string());
    }

    // Parse: optional ---/+++ headers, then hunks.
    let mut hunks: Vec<Hunk> = Vec::new();
    let mut line_no = 0usize;
    let mut lines = diff.lines().peekable();
    while let Some(&line) = lines.peek() {
        if line.starts_with("--- ") || line.starts_with("+++ ") {
            lines.next();
            line_no += 1;
        } else {
            break;
        }
    }
    while let Some(line) = lines.next() {
        line_no += 1;
        let header = line.strip_prefix("@@ -").ok_or_else(|| DiffError::Parse {
            line: line_no,
            reason: format!("expected hunk header, found {line:?}"),
        })?;
        let header = header.split(" @@").next().unwrap_or(header);
        let (old_spec, new_spec) = header.split_once(" +").ok_or_else(|| DiffError::Parse {
            line: line_no,
            reason: "hunk header missing new range".to_string(),
        })?;
        let (old_start, old_count) = parse_range(old_spec, line_no)?;
        let (_, new_count) = parse_range(new_spec, line_no)?;

        let mut body: Vec<(char, String)> = Vec::new();
        let mut seen_old = 0usize;
        let mut seen_new = 0usize;
        while seen_old < old_count || seen_new < new_count {
            let Some(body_line) = lines.next() else {
                return Err(DiffError::Parse {
                    line: line_no,
                    reason: "truncated hunk".to_string(),
                });
            };
            line_no += 1;
            if body_line == "\\ No newline at end of file" {
                // Strip the newline we appended to the previous body line.
                if let Some((_, text)) = body.last_mut() {
                    if text.ends_with('\n') {
                        text.pop();
                    }
                }
                continue;
            }
            let (prefix, rest) = match body_line.chars().next() {
                Some(p @ (' ' | '-' | '+')) => (p, &body_line[1..]),
                // A fully blank line inside a hunk stands for an empty
                // context line (some producers trim trailing spaces).
                None => (' ', ""),
                Some(other) => {
                    return Err(DiffError::Parse {
                        line: line_no,
                        reason: format!("unexpected hunk line prefix {other:?}"),
                    })
                }
            };
            match prefix {
                ' ' => {
                    seen_old += 1;
                    seen_new += 1;
                }
                '-' => seen_old += 1,
                '+' => seen_new += 1,
                _ => unreachable!(),
            }
            body.push((prefix, format!("{rest}\n")));
        }
        // Trailing no-newline marker applying to the hunk's last line.
        if lines.peek() == Some(&"\\ No newline at end of file") {
            lines.next();
            line_no += 1;
            if let Some((_, text)) = body.last_mut() {
                if text.ends_with('\n') {
                    text.pop();
                }
            }
        }
        hunks.push(Hunk {
            old_start,
            old_count,
            lines: body,
        });
    }

    // Apply hunks in order.
    let old_lines = split_lines(old);
    let mut out = String::new();
    let mut cursor = 0usize; // index into old_lines
    for hunk in &hunks {
        let hunk_start = if hunk.old_count == 0 {
            hunk.old_start // "after line N" == index N
        } else {
            hunk.old_start.saturating_sub(1)
        };
        if hunk_start < cursor {
            return Err(DiffError::DoesNotApply {
                old_line: hunk.old_start,
                reason: "hunks overlap or are out of order".to_string(),
            });
        }
        if hunk_start > old_lines.len() {
            return Err(DiffError::DoesNotApply {
                old_line: hunk.old_start,
                reason: "hunk starts past end of file".to_string(),
            });
        }
        for line in &old_lines[cursor..hunk_start] {
            out.push_str(line);
        }
        cursor = hunk_start;
        for (prefix, text) in &hunk.lines {
            match prefix {
                ' ' | '-' => {
                    let actual = old_lines.get(cursor).copied().ok_or_else(|| {
                        DiffError::DoesNotApply {
                            old_line: cursor + 1,
                            reason: "diff expects a line past end of file".to_string(),
                        }
                    })?;
                    // The stored text is newline-normalized; compare
                    // content, tolerating the final unterminated line.
                    if actual != text && actual != text.trim_end_matches('\n') {
                        return Err(DiffError::DoesNotApply {
                            old_line: cursor + 1,
                            reason: format!(
                                "expected {:?}, found {:?}",
                                text.trim_end_matches('\n'),
                                actual.trim_end_matches('\n')
                            ),
                        });
                    }
                    if *prefix == ' ' {
                        out.push_str(actual);
                    }
                    cursor += 1;
                }
                '+' => out.push_str(text),
                _ => unreachable!(),
            }
        }
    }
    for line in &old_lines[cursor..] {
        out.push_str(line);
    }
    Ok(out)
}
