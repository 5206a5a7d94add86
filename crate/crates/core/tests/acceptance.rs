//! All acceptance criteria at their stated tolerances, one line each.
//!
//! `cargo test --test acceptance -- --nocapture` shows the report.

use gsqg_core::verify::run_all;

#[test]
fn acceptance_criteria() {
    let reports = run_all(0, |r| println!("{r}")).expect("criteria ran");
    let failed: Vec<String> = reports.iter().filter(|r| !r.passed).map(|r| r.to_string()).collect();
    println!("{} of {} criteria passed", reports.len() - failed.len(), reports.len());
    assert!(failed.is_empty(), "failed criteria:\n{}", failed.join("\n"));
}
