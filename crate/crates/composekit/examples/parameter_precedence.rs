//! Layer runtime parameter declarations: a unit declares the default,
//! a deeper directory or the application's Config may override it, and a
//! parfile has the last word. The full chain is retained so a user can
//! always see where a value came from.

use composekit::arbitrator::merge_parameters;
use composekit::config::parse_parfile;
use composekit::resolver::resolve;
use composekit::tree::{scan_tree, ScanOptions};
use composekit::SetupRequest;
use std::fs;
use std::path::Path;

fn main() {
    let root = Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures/flash_tree");
    let tree = scan_tree(&root, &ScanOptions::default()).expect("scan");
    let closure = resolve(&tree, &SetupRequest::for_simulation("Sedov")).expect("resolve");

    let without_par = merge_parameters(&tree, &closure, None).expect("merge");
    let p = &without_par["pt_maxPerProc"];
    println!("pt_maxPerProc without a parfile: {}", p.effective_value);
    println!("  declared {} in {}", p.default_value, p.defining_path);
    for (source, value) in &p.overridden_by {
        println!("  overridden to {value} by {source}");
    }

    let par_text = fs::read_to_string(root.join("flash.par")).expect("read flash.par");
    let parfile = parse_parfile(&par_text, "flash.par").expect("parse parfile");
    let with_par = merge_parameters(&tree, &closure, Some(&parfile)).expect("merge");
    let p = &with_par["pt_maxPerProc"];
    println!("\npt_maxPerProc with flash.par: {}", p.effective_value);
    for (source, value) in &p.overridden_by {
        println!("  overridden to {value} by {source}");
    }

    println!("\nall effective parameters:");
    for (name, entry) in &with_par {
        println!("  {name} = {} ({})", entry.effective_value, entry.ptype);
    }
}
