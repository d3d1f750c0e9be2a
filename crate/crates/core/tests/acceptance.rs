//! Runs every acceptance check at full fidelity and prints one line per check.
//!
//! `HALFLINE_FIDELITY=quick` selects the reduced problem sizes.

use std::process::ExitCode;

use halfline::verify::{run_all, Fidelity};

fn main() -> ExitCode {
    let fidelity = match std::env::var("HALFLINE_FIDELITY").as_deref() {
        Ok("quick") => Fidelity::Quick,
        _ => Fidelity::Full,
    };
    let report = run_all(fidelity, 1, |o| {
        println!("{}", o.line());
        for d in &o.details {
            println!("    {d}");
        }
    });
    let failed = report.failures().len();
    println!(
        "\n{} of {} checks passed",
        report.outcomes.len() - failed,
        report.outcomes.len()
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
