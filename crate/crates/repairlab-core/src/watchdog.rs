//! Budget-enforced execution of external commands.
//!
//! Every supervised child runs in its own process group. When the budget
//! expires the whole group first receives a polite stop (SIGTERM), then —
//! after a grace period — a force kill (SIGKILL), so runaway grandchildren
//! die with their parent. After the child is reaped (naturally or not) the
//! group is swept with a final SIGKILL and the process table is scanned;
//! any survivor is reported so callers can log it.

use std::collections::BTreeMap;
use std::io::Read;
use std::os::unix::process::{CommandExt, ExitStatusExt};
use std::path::PathBuf;
use std::process::{Command, Stdio};
use std::sync::mpsc;
use std::time::{Duration, Instant};

use crate::model::ExitInfo;

/// Which stream a captured output line came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stream {
    Stdout,
    Stderr,
}

impl Stream {
    pub fn label(self) -> &'static str {
        match self {
            Stream::Stdout => "stdout",
            Stream::Stderr => "stderr",
        }
    }
}

/// A command to run under supervision.
#[derive(Debug, Clone)]
pub struct CommandRequest {
    /// Program plus arguments; must be non-empty.
    pub argv: Vec<String>,
    /// Extra environment variables (inherited environment is kept).
    pub env: BTreeMap<String, String>,
    /// Working directory for the child.
    pub cwd: PathBuf,
    /// Wall-clock budget; `None` waits for natural exit indefinitely.
    pub budget: Option<Duration>,
    /// How long after the polite stop to wait before force-killing.
    pub grace: Duration,
}

/// How a supervised command ended.
#[derive(Debug, Clone)]
pub struct TerminationInfo {
    pub exit: ExitInfo,
    /// Wall-clock time from spawn to reap.
    pub duration: Duration,
    /// The child's process-group id (== its pid).
    pub group_id: i32,
    /// Pids still alive in the group after the final force-kill sweep.
    /// Non-empty only in pathological cases (e.g. unkillable D-state
    /// processes); callers should log each as an orphan survivor.
    pub orphan_pids: Vec<i32>,
}

impl TerminationInfo {
    /// True when the process exited on its own, without watchdog action.
    pub fn natural_exit(&self) -> bool {
        !self.exit.terminated_by_watchdog
    }
}

/// Errors raised before or while supervising a command.
#[derive(Debug, thiserror::Error)]
pub enum WatchdogError {
    #[error("empty command")]
    EmptyCommand,
    #[error("failed to spawn {program:?}: {source}")]
    Spawn {
        program: String,
        source: std::io::Error,
    },
}

/// Sends `signal` to every process in `group`. Errors (e.g. the group is
/// already empty) are intentionally ignored: signalling is best-effort
/// and the follow-up process-table scan is authoritative.
fn signal_group(group: i32, signal: i32) {
    unsafe {
        libc::kill(-group, signal);
    }
}

/// Reads the state character and process-group id from
/// `/proc/<pid>/stat`. The comm field may contain spaces and
/// parentheses, so parsing starts after the last `)`.
fn state_and_group_of(pid: i32) -> Option<(char, i32)> {
    let stat = std::fs::read_to_string(format!("/proc/{pid}/stat")).ok()?;
    let rest = &stat[stat.rfind(')')? + 1..];
    // rest = " <state> <ppid> <pgrp> ..."
    let mut fields = rest.split_whitespace();
    let state = fields.next()?.chars().next()?;
    let group = fields.nth(1)?.parse().ok()?;
    Some((state, group))
}

/// Lists runnable pids whose process group is `group`. Zombies are
/// excluded: a killed process whose exit status nobody collected yet is
/// terminated for every purpose that matters here.
pub fn group_members(group: i32) -> Vec<i32> {
    let Ok(entries) = std::fs::read_dir("/proc") else {
        return Vec::new();
    };
    entries
        .filter_map(|e| e.ok()?.file_name().to_str()?.parse::<i32>().ok())
        .filter(|&pid| {
            matches!(state_and_group_of(pid), Some((state, g)) if g == group && state != 'Z' && state != 'X')
        })
        .collect()
}

/// Polls until the group is empty or `deadline` passes; returns the
/// survivors (empty in the normal case).
fn await_group_death(group: i32, deadline: Instant) -> Vec<i32> {
    loop {
        let members = group_members(group);
        if members.is_empty() || Instant::now() >= deadline {
            return members;
        }
        std::thread::sleep(Duration::from_millis(10));
    }
}

/// Spawns a reader thread that forwards chunks of one output stream,
/// split into lines, over the channel. Invalid UTF-8 is replaced rather
/// than dropped so diagnostic bytes never vanish from logs.
fn pump(
    stream: Stream,
    mut source: impl Read + Send + 'static,
    tx: mpsc::Sender<(Stream, String)>,
) -> std::thread::JoinHandle<()> {
    std::thread::spawn(move || {
        let mut pending = Vec::new();
        let mut chunk = [0u8; 4096];
        loop {
            match source.read(&mut chunk) {
                Ok(0) | Err(_) => break,
                Ok(n) => {
                    pending.extend_from_slice(&chunk[..n]);
                    while let Some(nl) = pending.iter().position(|&b| b == b'\n') {
                        let line: Vec<u8> = pending.drain(..=nl).collect();
                        let text = String::from_utf8_lossy(&line[..line.len() - 1]);
                        if tx.send((stream, text.into_owned())).is_err() {
                            return;
                        }
                    }
                }
            }
        }
        if !pending.is_empty() {
            let _ = tx.send((stream, String::from_utf8_lossy(&pending).into_owned()));
        }
    })
}

/// Runs `request` to completion under budget supervision, invoking
/// `on_line` for every output line as it arrives (stdout and stderr
/// interleaved in arrival order).
///
/// Guarantees on return: the child is reaped; the child's process group
/// has been force-killed regardless of how the child exited (so
/// backgrounded grandchildren do not outlive the attempt); and
/// `orphan_pids` lists anything that survived even that.
pub fn run_supervised(
    request: &CommandRequest,
    mut on_line: impl FnMut(Stream, &str),
) -> Result<TerminationInfo, WatchdogError> {
    let (program, args) = request.argv.split_first().ok_or(WatchdogError::EmptyCommand)?;

    let started = Instant::now();
    let mut child = Command::new(program)
        .args(args)
        .envs(&request.env)
        .current_dir(&request.cwd)
        .process_group(0)
        .stdin(Stdio::null())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .map_err(|source| WatchdogError::Spawn {
            program: program.clone(),
            source,
        })?;
    let group = child.id() as i32;

    let (tx, rx) = mpsc::channel();
    let out_pump = pump(Stream::Stdout, child.stdout.take().expect("piped"), tx.clone());
    let err_pump = pump(Stream::Stderr, child.stderr.take().expect("piped"), tx);

    let deadline = request.budget.map(|b| started + b);
    let mut watchdog_fired = false;
    let mut force_kill_at: Option<Instant> = None;

    // Supervise: drain output while polling for exit, escalating
    // SIGTERM → SIGKILL once the deadline passes.
    let status = loop {
        while let Ok((stream, line)) = rx.try_recv() {
            on_line(stream, &line);
        }
        if let Some(status) = child.try_wait().expect("try_wait on own child") {
            break status;
        }
        let now = Instant::now();
        match (watchdog_fired, deadline, force_kill_at) {
            (false, Some(d), _) if now >= d => {
                watchdog_fired = true;
                force_kill_at = Some(now + request.grace);
                signal_group(group, libc::SIGTERM);
            }
            (true, _, Some(f)) if now >= f => {
                signal_group(group, libc::SIGKILL);
                force_kill_at = None; // escalated; just await the reap
            }
            _ => {}
        }
        std::thread::sleep(Duration::from_millis(10));
    };

    // Sweep the group even after a natural exit: a tool that exits 0
    // while leaving a background child behind must not leak it.
    signal_group(group, libc::SIGKILL);
    let orphan_pids = await_group_death(group, Instant::now() + Duration::from_millis(500));

    // Pipes close once every group member is dead, so the pumps finish;
    // afterwards both senders are gone and the channel drains to empty.
    out_pump.join().expect("stdout pump");
    err_pump.join().expect("stderr pump");
    for (stream, line) in rx {
        on_line(stream, &line);
    }

    Ok(TerminationInfo {
        exit: ExitInfo {
            code: status.code(),
            signal: status.signal(),
            terminated_by_watchdog: watchdog_fired,
        },
        duration: started.elapsed(),
        group_id: group,
        orphan_pids,
    })
}
