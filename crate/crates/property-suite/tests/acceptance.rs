use std::process::ExitCode;

use cbshell_property_suite::{run_and_print, selected_criteria};

fn main() -> ExitCode {
    let ids = selected_criteria();
    println!("running {} acceptance criteria", ids.len());
    let reports = run_and_print(&ids);
    let failed = reports.iter().filter(|r| !r.passed()).count();
    println!(
        "\nacceptance result: {}. {} passed; {} failed",
        if failed == 0 { "ok" } else { "FAILED" },
        reports.len() - failed,
        failed
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
