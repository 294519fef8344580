//! Reporting helpers for the acceptance suite.

use std::fmt::Display;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

/// Result of one criterion: pass flag and a one-line summary.
pub struct Outcome {
    pub pass: bool,
    pub detail: String,
}

impl Outcome {
    pub fn new(pass: bool, detail: impl Display) -> Self {
        Outcome {
            pass,
            detail: detail.to_string(),
        }
    }
}

/// Runs criteria in order and prints one `PASS`/`FAIL` line for each.
#[derive(Default)]
pub struct Suite {
    failed: Vec<u32>,
    total: usize,
}

impl Suite {
    /// Runs `check` and enforces `limit` on its wall-clock time. A panic
    /// counts as a failure.
    pub fn run(&mut self, id: u32, title: &str, limit: Duration, check: impl FnOnce() -> Outcome) {
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|payload| {
            let msg = payload
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| payload.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panicked".into());
            Outcome::new(false, format!("panic: {msg}"))
        });
        let elapsed = start.elapsed();
        let pass = outcome.pass && elapsed <= limit;
        println!(
            "{} [{id:>2}] {title}: {} (runtime {:.2?}, limit {:?})",
            if pass { "PASS" } else { "FAIL" },
            outcome.detail,
            elapsed,
            limit
        );
        self.total += 1;
        if !pass {
            self.failed.push(id);
        }
    }

    /// Prints the summary and returns the process exit code.
    pub fn finish(self) -> i32 {
        println!(
            "acceptance: {} of {} criteria passed{}",
            self.total - self.failed.len(),
            self.total,
            if self.failed.is_empty() {
                String::new()
            } else {
                format!("; failed: {:?}", self.failed)
            }
        );
        i32::from(!self.failed.is_empty())
    }
}
