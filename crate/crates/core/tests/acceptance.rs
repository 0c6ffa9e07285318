//! Runs the numbered acceptance suite and prints one line per criterion.

use prabhakar_core::criteria::{run_suite, Context};

#[test]
fn acceptance_suite() {
    let summary = run_suite(&Context::new());
    for o in &summary.criteria {
        println!("{}", o.line());
    }
    let failed: Vec<String> = summary.criteria.iter().filter(|o| !o.pass).map(|o| o.line()).collect();
    assert_eq!(summary.criteria.len(), 11);
    assert!(failed.is_empty(), "failing criteria:\n{}", failed.join("\n"));
}
