//! End-to-end acceptance suite. Prints one PASS/FAIL line per criterion.
//!
//! Runs the fast profile by default; set `CEL_PROFILE=full` for the full one.

use std::io::Write;

use cel_core::verify::{run_all, summary_table, Profile, VerifyConfig};

#[test]
fn acceptance_criteria() {
    let profile = std::env::var("CEL_PROFILE").ok().and_then(|p| p.parse().ok()).unwrap_or(Profile::Fast);
    let cfg = VerifyConfig { profile, ..Default::default() };
    // Writing to the handle directly keeps the lines visible under test capture.
    let mut out = std::io::stdout();
    let results = run_all(&cfg, |r| {
        let verdict = if r.passed { "PASS" } else { "FAIL" };
        let _ = writeln!(out, "{verdict} {:>2} {}: {} ({:.1}s)", r.id, r.name, r.detail, r.elapsed.as_secs_f64());
        let _ = out.flush();
    });
    let _ = writeln!(out, "\n{}", summary_table(&results));
    let failed: Vec<usize> = results.iter().filter(|r| !r.passed).map(|r| r.id).collect();
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
