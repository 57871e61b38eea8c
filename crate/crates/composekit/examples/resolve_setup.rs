//! Resolve the unit closure of one application: follow REQUIRES and
//! REQUESTS from its Simulation directory, settle every implementation
//! group, and report what was included, chosen, and dropped.
//!
//! Resolution runs in rounds until the group-selection map stops
//! changing, so the outcome does not depend on the order directives are
//! encountered in.

use composekit::resolver::resolve;
use composekit::tree::{scan_tree, ScanOptions};
use composekit::SetupRequest;
use std::path::Path;

fn main() {
    let root = Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures/flash_tree");
    let tree = scan_tree(&root, &ScanOptions::default()).expect("scan");

    // Plain request: no command-line adjustments.
    let request = SetupRequest::for_simulation("Sedov");
    let closure = resolve(&tree, &request).expect("resolve");

    println!("closure of {} ({} directories):", closure.setup_path, closure.included.len());
    for dir in &closure.included {
        println!("  {dir}");
    }
    println!("\nimplementation choices:");
    for (group, child) in &closure.chosen_impl {
        println!("  {group} -> {child}");
    }

    // Exclude IO: its REQUESTS edge is dropped instead of failing the
    // resolution, and the reason is recorded.
    let mut trimmed = SetupRequest::for_simulation("Sedov");
    trimmed.without_units = vec!["IO".to_string()];
    let closure = resolve(&tree, &trimmed).expect("resolve without IO");
    println!("\nwith --without-unit IO, dropped requests:");
    for (target, reason) in &closure.dropped_requests {
        println!("  {target}: {reason}");
    }
}
