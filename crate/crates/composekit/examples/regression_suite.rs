//! Drive the regression harness against the bundled suite: every case
//! runs a full command line in process and its manifest and report are
//! compared byte-for-byte with the recorded baselines.
//!
//! Re-record after an intended behavior change with:
//!     cargo run -p composekit -- test fixtures/suite/cases.suite --record

use composekit::harness::{parse_suite, run_suite, Mode};
use std::path::Path;

fn main() {
    let suite_path = Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures/suite/cases.suite");
    let spec = parse_suite(&suite_path).expect("parse suite");
    println!("{} cases from {}\n", spec.cases.len(), suite_path.display());

    let report = run_suite(&spec, Mode::Check).expect("run suite");
    println!("\n{report}");
    std::process::exit(if report.all_passed() { 0 } else { 1 });
}
