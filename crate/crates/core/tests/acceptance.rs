use std::process::ExitCode;

use detlab_core::checks::{self, CheckConfig, CRITERIA};

// q comes out positive on the whole grid; see the README.
const KNOWN_FAILURES: [usize; 1] = [9];

fn main() -> ExitCode {
    let cfg = CheckConfig::default();
    let mut problems = Vec::new();
    for id in 1..=CRITERIA {
        let r = checks::run(id, &cfg);
        println!("{}", r.line());
        if KNOWN_FAILURES.contains(&id) {
            let joined = r.details.join("; ");
            if r.passed {
                problems.push(format!("criterion {id} now passes"));
            } else if !joined.contains("certainly positive everywhere: true") || !joined.contains("symmetry holds") {
                problems.push(format!("criterion {id} fails for an unexpected reason: {joined}"));
            }
        } else if !r.passed {
            problems.push(r.line());
        }
    }
    if problems.is_empty() {
        println!("acceptance: all criteria as expected (known failures: {KNOWN_FAILURES:?})");
        ExitCode::SUCCESS
    } else {
        for p in &problems {
            eprintln!("unexpected: {p}");
        }
        ExitCode::FAILURE
    }
}
