//! Count every valid way to assemble the Particles unit. Each subunit
//! with implementation children contributes one independent choice, so
//! the total is the product of the group sizes.

use composekit::resolver::enumerate_valid_configurations;
use composekit::tree::{scan_tree, ScanOptions};
use std::path::Path;

fn main() {
    let root = Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures/flash_tree");
    let tree = scan_tree(&root, &ScanOptions::default()).expect("scan");
    let configs = enumerate_valid_configurations(&tree, "Particles").expect("enumerate");

    println!("{} valid Particles configurations; the first five:", configs.len());
    for combo in configs.iter().take(5) {
        let parts: Vec<String> = combo
            .iter()
            .map(|(group, child)| format!("{}={child}", group.rsplit('/').next().unwrap()))
            .collect();
        println!("  {}", parts.join(" "));
    }
}
