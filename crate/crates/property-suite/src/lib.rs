//! Acceptance gates. The `acceptance` test target runs every criterion and
//! prints one verdict line each; `CBSHELL_ACCEPTANCE` narrows the set, e.g.
//! `CBSHELL_ACCEPTANCE=1,6,7`.

use cbshell::verify::{run_acceptance, CriterionReport};

/// Criterion ids selected by `CBSHELL_ACCEPTANCE`, all seven by default.
pub fn selected_criteria() -> Vec<u32> {
    match std::env::var("CBSHELL_ACCEPTANCE") {
        Ok(list) if !list.trim().is_empty() => list
            .split(',')
            .filter_map(|s| s.trim().parse().ok())
            .filter(|id| (1..=7).contains(id))
            .collect(),
        _ => (1..=7).collect(),
    }
}

/// Runs the criteria in order, printing each verdict line as it finishes
/// and the check details of failures.
pub fn run_and_print(ids: &[u32]) -> Vec<CriterionReport> {
    let mut out = Vec::with_capacity(ids.len());
    for &id in ids {
        let r = run_acceptance(id);
        println!("{}", r.summary_line());
        if !r.passed() {
            for c in &r.checks {
                println!("    {}", c.describe());
            }
        }
        out.push(r);
    }
    out
}
