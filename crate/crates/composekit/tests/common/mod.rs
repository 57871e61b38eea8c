//! Helpers shared by the integration tests: fixture paths, tree copying,
//! and the full lib-level setup pipeline.
//!
//! Each test target compiles this module independently, so any one
//! target uses only a subset of it.
#![allow(dead_code)]

use composekit::arbitrator::{
    assign_variable_indices, compute_init_order, merge_parameters, select_implementations,
};
use composekit::config::parse_parfile;
use composekit::emitter::emit_manifest;
use composekit::resolver::resolve;
use composekit::tree::{scan_tree, ScanOptions};
use composekit::{Manifest, SetupRequest, UnitClosure};
use std::fs;
use std::path::{Path, PathBuf};

pub fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(name)
}

/// Recursively copy a fixture tree so a test can mutate it.
pub fn copy_tree(src: &Path, dst: &Path) {
    fs::create_dir_all(dst).unwrap();
    for entry in fs::read_dir(src).unwrap() {
        let entry = entry.unwrap();
        let to = dst.join(entry.file_name());
        if entry.file_type().unwrap().is_dir() {
            copy_tree(&entry.path(), &to);
        } else {
            fs::copy(entry.path(), &to).unwrap();
        }
    }
}

/// Resolve and arbitrate one request against a tree on disk, returning
/// the closure alongside the emitted manifest.
pub fn compose(tree_root: &Path, request: &SetupRequest) -> (UnitClosure, Manifest) {
    let tree = scan_tree(tree_root, &ScanOptions::default()).expect("scan");
    let closure = resolve(&tree, request).expect("resolve");
    let files = select_implementations(&tree, &closure).expect("select");
    let parfile = request.parfile.as_ref().map(|rel| {
        let text = fs::read_to_string(tree_root.join(rel)).expect("parfile");
        parse_parfile(&text, rel).expect("parfile parse")
    });
    let params = merge_parameters(&tree, &closure, parfile.as_ref()).expect("merge");
    let vars = assign_variable_indices(&tree, &closure);
    let init = compute_init_order(&tree, &closure);
    let manifest = emit_manifest(&files, &params, &vars, &init, &closure, request);
    (closure, manifest)
}

/// `compose` for the plain no-flags request.
pub fn compose_default(tree_root: &Path, sim_name: &str) -> (UnitClosure, Manifest) {
    compose(tree_root, &SetupRequest::for_simulation(sim_name))
}
