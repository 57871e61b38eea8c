//! Scan the bundled component tree and print how every directory was
//! classified: unit roots, subunits, mutually exclusive implementation
//! directories, unit tests, and simulation setups.

use composekit::tree::{scan_tree, ScanOptions};
use std::path::Path;

fn main() {
    let root = Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures/flash_tree");
    let tree = scan_tree(&root, &ScanOptions::default()).expect("scan");

    print!("{}", tree.classification_listing());

    println!("\nunit roots: {:?}", tree.unit_roots);
    let files: usize = tree.nodes.values().map(|n| n.source_files.len()).sum();
    println!("{} directories, {} source files", tree.nodes.len(), files);
}
