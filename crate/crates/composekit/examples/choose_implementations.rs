//! Pick exactly one source file per routine. The rule: the application's
//! own Simulation directory beats everything, otherwise the deepest
//! included directory wins, and a routine whose unit stayed out of the
//! closure falls back to the null stub at the unit root.

use composekit::arbitrator::select_implementations;
use composekit::resolver::resolve;
use composekit::tree::{scan_tree, ScanOptions};
use composekit::SetupRequest;
use std::path::Path;

fn main() {
    let root = Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures/flash_tree");
    let tree = scan_tree(&root, &ScanOptions::default()).expect("scan");
    let mut request = SetupRequest::for_simulation("Sedov");
    request.without_units = vec!["IO".to_string()];
    let closure = resolve(&tree, &request).expect("resolve");
    let files = select_implementations(&tree, &closure).expect("arbitrate");

    println!("{} routines chosen; contested ones:", files.len());
    for (routine, choice) in &files {
        if choice.candidates.len() < 2 {
            continue;
        }
        println!("{routine}:");
        for c in &choice.candidates {
            let marker = if c.path == choice.selected_path { "->" } else { "  " };
            let null = if c.is_stub { " (null stub)" } else { "" };
            println!("  {marker} {} depth {}{null}", c.path, c.depth);
        }
    }

    let nulls: Vec<&str> = files
        .iter()
        .filter(|(_, c)| c.is_stub)
        .map(|(r, _)| r.as_str())
        .collect();
    println!("\nnull fallbacks (IO excluded, unit tests unused): {nulls:?}");
}
