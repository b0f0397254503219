//! Output channel: human-readable lines by default, one JSON object
//! per line with `--json`.

/// Prints either the human text or the machine event for each step.
#[derive(Debug, Clone, Copy)]
pub struct Printer {
    pub json: bool,
}

impl Printer {
    pub fn new(json: bool) -> Printer {
        Printer { json }
    }

    /// One logical output line: `human` for people, `event` for
    /// machines. The event must be a JSON object with an `"event"` key.
    pub fn line(&self, human: &str, event: serde_json::Value) {
        if self.json {
            debug_assert!(event.get("event").is_some());
            println!("{event}");
        } else {
            println!("{human}");
        }
    }

    /// Human-only explanatory text (omitted in JSON mode).
    pub fn note(&self, human: &str) {
        if !self.json {
            println!("{human}");
        }
    }
}
