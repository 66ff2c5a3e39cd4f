//! One PASS/FAIL line per acceptance criterion; exits nonzero on any FAIL.

use std::process::ExitCode;

use betaplane_cli::scenarios::{run_scenario, SCENARIOS};

fn main() -> ExitCode {
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failed = 0;
    let mut ran = 0;
    for s in SCENARIOS.iter() {
        if !filter.is_empty() && !filter.iter().any(|f| s.name.contains(f.as_str())) {
            continue;
        }
        let report = run_scenario(s);
        println!("{}", report.line());
        for c in &report.checks {
            println!("       {:<40} {:>14.6e}  {}", c.name, c.value, c.limit);
        }
        ran += 1;
        if !report.pass {
            failed += 1;
        }
    }
    println!("acceptance: {} of {ran} criteria passed", ran - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
