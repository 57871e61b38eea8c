//! Run every architectural check over a tree seeded with exactly one
//! violation per rule, then over the clean tree.

use composekit::tree::{scan_tree, ScanOptions};
use composekit::validator::validate_all;
use std::path::Path;

fn main() {
    let fixtures = Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures");

    let seeded = scan_tree(&fixtures.join("seeded_tree"), &ScanOptions::default()).expect("scan");
    let report = validate_all(&seeded, None);
    println!("seeded tree ({} errors, {} warnings):", report.error_count(), report.warning_count());
    print!("{}", report.to_text());

    println!("\nsame findings, machine form:");
    print!("{}", report.to_json_lines());

    let clean = scan_tree(&fixtures.join("flash_tree"), &ScanOptions::default()).expect("scan");
    let report = validate_all(&clean, None);
    println!("\nclean tree: {} findings", report.findings.len());
}
