//! Golden-file checks over the committed fixture trees. Regenerate with
//! `UPDATE_GOLDEN=1 cargo test --test goldens` after an intended change
//! and review the diff like any other code change.

mod common;

use common::{compose_default, fixture};
use composekit::harness::{discover_unit_tests, render_suite};
use composekit::tree::{list_simulations, scan_tree, ScanOptions};
use composekit::validator::validate_all;
use std::fs;
use std::path::Path;

fn assert_golden(name: &str, actual: &str) {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures/golden").join(name);
    if std::env::var("UPDATE_GOLDEN").is_ok() {
        fs::create_dir_all(path.parent().unwrap()).unwrap();
        fs::write(&path, actual).expect("update golden");
        return;
    }
    let expected = fs::read_to_string(&path)
        .unwrap_or_else(|e| panic!("missing golden {} ({e}); run with UPDATE_GOLDEN=1", path.display()));
    if expected != actual {
        panic!(
            "golden {} drifted; rerun with UPDATE_GOLDEN=1 if intended\n--- expected\n{expected}\n--- actual\n{actual}",
            path.display()
        );
    }
}

#[test]
fn sedov_manifest_is_stable() {
    let (_, manifest) = compose_default(&fixture("flash_tree"), "Sedov");
    assert_golden("sedov.manifest", &manifest.to_text());
}

#[test]
fn seeded_tree_report_is_stable() {
    let tree = scan_tree(&fixture("seeded_tree"), &ScanOptions::default()).unwrap();
    assert_golden("seeded.report", &validate_all(&tree, None).to_text());
}

#[test]
fn tree_classification_is_stable() {
    let tree = scan_tree(&fixture("flash_tree"), &ScanOptions::default()).unwrap();
    assert_golden("classification.txt", &tree.classification_listing());
}

#[test]
fn simulation_listing_is_stable() {
    let tree = scan_tree(&fixture("flash_tree"), &ScanOptions::default()).unwrap();
    let mut listing = list_simulations(&tree).join("\n");
    listing.push('\n');
    assert_golden("simulations.txt", &listing);
}

#[test]
fn discovered_test_skeletons_are_stable() {
    let tree = scan_tree(&fixture("flash_tree"), &ScanOptions::default()).unwrap();
    assert_golden("skeletons.suite", &render_suite(&discover_unit_tests(&tree, "../flash_tree")));
}
