//! Order unit initialization by the REQUIRES edges between units: a unit
//! initializes after everything it requires, ties break alphabetically,
//! and finalization runs in exact reverse. The Driver itself is the
//! caller of this sequence, so it never appears in it.

use composekit::arbitrator::compute_init_order;
use composekit::resolver::resolve;
use composekit::tree::{scan_tree, ScanOptions};
use composekit::SetupRequest;
use std::path::Path;

fn main() {
    let root = Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures/flash_tree");
    let tree = scan_tree(&root, &ScanOptions::default()).expect("scan");
    let closure = resolve(&tree, &SetupRequest::for_simulation("Sedov")).expect("resolve");

    // The edges driving the order, straight from the included Configs.
    println!("unit-level REQUIRES edges:");
    for dir in &closure.included {
        let Some(cfg) = tree.nodes[dir].config.as_ref() else { continue };
        for target in cfg.requires() {
            if let Some(unit) = tree.unit_root_of(target) {
                println!("  {dir} -> {unit}");
            }
        }
    }

    let init = compute_init_order(&tree, &closure);
    println!("\ninitialization order:");
    for (k, unit) in init.order.iter().enumerate() {
        println!("  {}. {unit}", k + 1);
    }
    println!("finalization order: {:?}", init.finalize_order());
    for w in &init.warnings {
        println!("warning: {w}");
    }
}
