//! Scripted tool behaviors for deterministic harness tests.
//!
//! A stub pretends to be a repair tool: it accepts the whole abstract
//! parameter surface and then does exactly what its behavior script
//! says — emit patches after a delay, crash with a chosen code, hang
//! (with a hanging child of its own), or exit cleanly with nothing.

use std::fmt;
use std::io::Write;
use std::path::Path;
use std::time::Duration;

use crate::model::PATCH_MANIFEST_FILE;

/// What a stub tool does when launched.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StubBehavior {
    /// Sleep `delay`, then write `count` modified files plus the patch
    /// manifest, and exit 0.
    EmitPatch { delay: Duration, count: u32 },
    /// Print a diagnostic and exit with `code`.
    Crash { code: i32 },
    /// Spawn a sleeping child, then sleep forever.
    Hang,
    /// Exit 0 without touching the workspace.
    Noop,
}

/// Error for unrecognized behavior scripts.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BehaviorParseError(pub String);

impl fmt::Display for BehaviorParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "unrecognized behavior {:?} (expected EMIT_PATCH:<secs>:<count>, CRASH:<code>, HANG, or NOOP)",
            self.0
        )
    }
}

impl std::error::Error for BehaviorParseError {}

impl std::str::FromStr for StubBehavior {
    type Err = BehaviorParseError;

    fn from_str(script: &str) -> Result<Self, Self::Err> {
        let err = || BehaviorParseError(script.to_string());
        let mut parts = script.split(':');
        match parts.next() {
            Some("EMIT_PATCH") => {
                let secs: f64 = parts.next().ok_or_else(err)?.parse().map_err(|_| err())?;
                let count: u32 = parts.next().ok_or_else(err)?.parse().map_err(|_| err())?;
                if parts.next().is_some() || !secs.is_finite() || secs < 0.0 {
                    return Err(err());
                }
                Ok(StubBehavior::EmitPatch {
                    delay: Duration::from_secs_f64(secs),
                    count,
                })
            }
            Some("CRASH") => {
                let code: i32 = parts.next().ok_or_else(err)?.parse().map_err(|_| err())?;
                if parts.next().is_some() {
                    return Err(err());
                }
                Ok(StubBehavior::Crash { code })
            }
            Some("HANG") if parts.next().is_none() => Ok(StubBehavior::Hang),
            Some("NOOP") if parts.next().is_none() => Ok(StubBehavior::Noop),
            _ => Err(err()),
        }
    }
}

impl fmt::Display for StubBehavior {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StubBehavior::EmitPatch { delay, count } => {
                write!(f, "EMIT_PATCH:{}:{count}", delay.as_secs_f64())
            }
            StubBehavior::Crash { code } => write!(f, "CRASH:{code}"),
            StubBehavior::Hang => write!(f, "HANG"),
            StubBehavior::Noop => write!(f, "NOOP"),
        }
    }
}

/// Runs the scripted behavior in `workspace` and returns the process
/// exit code to use. `Hang` never returns.
pub fn execute_stub(behavior: &StubBehavior, workspace: &Path) -> std::io::Result<i32> {
    match behavior {
        StubBehavior::EmitPatch { delay, count } => {
            std::thread::sleep(*delay);
            let mut emitted = Vec::new();
            for i in 0..*count {
                let main_source = workspace.join("src/main.toy");
                let rel = if i == 0 && main_source.exists() {
                    let mut file = std::fs::OpenOptions::new().append(true).open(&main_source)?;
                    file.write_all(b"# patched by stub tool\n")?;
                    "src/main.toy".to_string()
                } else {
                    let rel = format!("stub_patch_{i}.txt");
                    std::fs::write(workspace.join(&rel), format!("stub patch body {i}\n"))?;
                    rel
                };
                println!("patch written: {rel}");
                emitted.push(rel);
            }
            std::fs::write(
                workspace.join(PATCH_MANIFEST_FILE),
                serde_json::to_string_pretty(&emitted).expect("paths serialize"),
            )?;
            Ok(0)
        }
        StubBehavior::Crash { code } => {
            eprintln!("stub tool crashing with code {code}");
            Ok(*code)
        }
        StubBehavior::Hang => {
            // The child outlives nothing: both processes share the tool's
            // process group, which the supervisor kills as a unit.
            let child = std::process::Command::new("sleep").arg("3600").spawn();
            match &child {
                Ok(c) => println!("stub hanging with child pid {}", c.id()),
                Err(e) => println!("stub hanging (no child: {e})"),
            }
            loop {
                std::thread::sleep(Duration::from_secs(3600));
            }
        }
        StubBehavior::Noop => {
            println!("no patch found");
            Ok(0)
        }
    }
}
