//! The whole pipeline in one place: scan, resolve, arbitrate, and emit
//! the deterministic build manifest. The text form is hashed over its
//! own lines, and parsing it back verifies that hash — a manifest can be
//! archived and trusted later.

use composekit::arbitrator::{
    assign_variable_indices, compute_init_order, merge_parameters, select_implementations,
};
use composekit::emitter::{emit_manifest, parse_manifest};
use composekit::resolver::resolve;
use composekit::tree::{scan_tree, ScanOptions};
use composekit::SetupRequest;
use std::path::Path;

fn main() {
    let root = Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures/flash_tree");
    let tree = scan_tree(&root, &ScanOptions::default()).expect("scan");
    let request = SetupRequest::for_simulation("SodShock");
    let closure = resolve(&tree, &request).expect("resolve");

    let files = select_implementations(&tree, &closure).expect("arbitrate");
    let params = merge_parameters(&tree, &closure, None).expect("merge");
    let vars = assign_variable_indices(&tree, &closure);
    let init = compute_init_order(&tree, &closure);
    let manifest = emit_manifest(&files, &params, &vars, &init, &closure, &request);

    print!("{}", manifest.to_text());

    let parsed = parse_manifest(&manifest.to_text()).expect("hash verifies");
    assert_eq!(parsed, manifest);
    println!("\nround-trip parse verified the content hash: {}", parsed.content_hash);
}
