//! Ask the arbitrator to justify itself: why this source file for this
//! routine, and why this value for this parameter.

use composekit::arbitrator::{merge_parameters, select_implementations};
use composekit::config::parse_parfile;
use composekit::emitter::explain;
use composekit::resolver::resolve;
use composekit::tree::{scan_tree, ScanOptions};
use composekit::SetupRequest;
use std::fs;
use std::path::Path;

fn main() {
    let root = Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures/flash_tree");
    let tree = scan_tree(&root, &ScanOptions::default()).expect("scan");
    let closure = resolve(&tree, &SetupRequest::for_simulation("Sedov")).expect("resolve");
    let files = select_implementations(&tree, &closure).expect("arbitrate");
    let par_text = fs::read_to_string(root.join("flash.par")).expect("read parfile");
    let parfile = parse_parfile(&par_text, "flash.par").expect("parse parfile");
    let params = merge_parameters(&tree, &closure, Some(&parfile)).expect("merge");

    for name in ["Grid_markRefine", "Grid_unitTest", "pt_maxPerProc"] {
        let explanation = explain(name, &files, &params).expect("known name");
        print!("{}", explanation.to_text());
        println!();
    }
}
