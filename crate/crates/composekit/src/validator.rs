//! Architectural law checking.
//!
//! Each rule walks the scanned tree and reports findings; none of them
//! aborts. Errors mark violations of the composition contract (missing
//! null stubs, broken subunit partitions, foreign data access, unpaired
//! test applications); warnings mark documentation and hygiene gaps.
//! Findings are sorted by (path, rule, message) so reports are stable
//! enough to snapshot.
//!
//! Rule inventory:
//!
//! | rule    | severity | meaning                                              |
//! |---------|----------|------------------------------------------------------|
//! | NULL-01 | error    | API routine implemented below a unit but missing its null stub at the unit root |
//! | SUB-01  | error    | API routine implemented under two different subunits  |
//! | SUB-02  | error    | subunit implementing no API routine                   |
//! | SUB-03  | error    | API routine implemented under no subunit              |
//! | MAIN-01 | error    | unit with an API but no `<Unit>Main` subunit          |
//! | DATA-01 | error    | file declaring another unit's data store              |
//! | DOC-01  | warning  | API stub without a documentation header               |
//! | DOC-02  | warning  | other source file without a documentation header      |
//! | UT-01   | error    | test application requiring no unit-side `unitTest`    |
//! | UT-02   | warning  | unit-side `unitTest` no application requires          |

use crate::resolver::UnitClosure;
use crate::tree::{NodeKind, UnitTree};
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Severity {
    Error,
    Warning,
}

impl fmt::Display for Severity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Severity::Error => "ERROR",
            Severity::Warning => "WARNING",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Finding {
    pub rule: String,
    pub severity: Severity,
    /// Directory or file the finding is anchored to, relative to the tree
    /// root.
    pub path: String,
    pub message: String,
}

impl Finding {
    fn new(rule: &str, severity: Severity, path: &str, message: String) -> Self {
        Finding { rule: rule.to_string(), severity, path: path.to_string(), message }
    }

    /// `SEVERITY RULE path: message`
    pub fn text_line(&self) -> String {
        format!("{} {} {}: {}", self.severity, self.rule, self.path, self.message)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub findings: Vec<Finding>,
}

impl ValidationReport {
    pub fn error_count(&self) -> usize {
        self.findings.iter().filter(|f| f.severity == Severity::Error).count()
    }

    pub fn warning_count(&self) -> usize {
        self.findings.len() - self.error_count()
    }

    pub fn has_errors(&self) -> bool {
        self.error_count() > 0
    }

    /// One text line per finding, sorted; empty report renders empty.
    pub fn to_text(&self) -> String {
        self.findings.iter().map(|f| f.text_line() + "\n").collect()
    }

    /// One JSON object per line, same order as the text form.
    pub fn to_json_lines(&self) -> String {
        self.findings
            .iter()
            .map(|f| serde_json::to_string(f).expect("finding serializes") + "\n")
            .collect()
    }

    fn sorted(mut findings: Vec<Finding>) -> Self {
        findings.sort_by(|a, b| {
            (&a.path, &a.rule, &a.message).cmp(&(&b.path, &b.rule, &b.message))
        });
        ValidationReport { findings }
    }
}

/// Stems of the API stubs at a unit root.
fn api_of<'a>(tree: &'a UnitTree, root: &str) -> BTreeSet<&'a str> {
    let prefix = format!("{}_", tree.unit_name(root));
    tree.nodes[root]
        .source_files
        .iter()
        .filter(|f| f.routine_name.starts_with(&prefix))
        .map(|f| f.routine_name.as_str())
        .collect()
}

/// NULL-01: every routine implemented below a unit root under the unit's
/// API naming must have a same-stem stub at the root.
pub fn check_null_coverage(tree: &UnitTree) -> Vec<Finding> {
    let mut findings = Vec::new();
    for root in &tree.unit_roots {
        let unit = tree.unit_name(root);
        let prefix = format!("{unit}_");
        let api = api_of(tree, root);
        let mut missing: BTreeMap<&str, &str> = BTreeMap::new();
        for node in tree.nodes_under(root) {
            if node.path == *root {
                continue;
            }
            for f in &node.source_files {
                if f.routine_name.starts_with(&prefix) && !api.contains(f.routine_name.as_str()) {
                    missing.entry(&f.routine_name).or_insert(&f.path);
                }
            }
        }
        for (routine, example) in missing {
            findings.push(Finding::new(
                "NULL-01",
                Severity::Error,
                root,
                format!("routine `{routine}` (implemented at {example}) has no null stub at the `{unit}` unit root"),
            ));
        }
    }
    findings
}

/// SUB-01/SUB-02/SUB-03: where a unit is organized into subunits, the
/// subunits must implement disjoint, nonempty subsets of the API whose
/// union is the whole API. Units without subunits are out of scope (a
/// missing Main subunit is MAIN-01's business).
pub fn check_subunit_partition(tree: &UnitTree, unit_path: &str) -> Vec<Finding> {
    let mut findings = Vec::new();
    let Some(node) = tree.node(unit_path).filter(|n| n.kind == NodeKind::UnitRoot) else {
        return findings;
    };
    let unit = tree.unit_name(unit_path);
    let subunits: Vec<&String> = node
        .children
        .iter()
        .filter(|c| tree.node(c).is_some_and(|n| n.kind == NodeKind::Subunit))
        .collect();
    if subunits.is_empty() {
        return findings;
    }

    let api = api_of(tree, unit_path);
    let implements = |sub: &str, routine: &str| {
        tree.nodes_under(sub)
            .any(|n| n.source_files.iter().any(|f| f.routine_name == routine))
    };

    for routine in &api {
        let homes: Vec<&str> = subunits
            .iter()
            .filter(|s| implements(s, routine))
            .map(|s| s.as_str())
            .collect();
        match homes.len() {
            0 => findings.push(Finding::new(
                "SUB-03",
                Severity::Error,
                unit_path,
                format!("API routine `{routine}` is implemented under no subunit of `{unit}`"),
            )),
            1 => {}
            _ => findings.push(Finding::new(
                "SUB-01",
                Severity::Error,
                unit_path,
                format!(
                    "API routine `{routine}` is implemented under both `{}` and `{}`",
                    homes[0], homes[1]
                ),
            )),
        }
    }
    for sub in &subunits {
        if !api.iter().any(|r| implements(sub, r)) {
            findings.push(Finding::new(
                "SUB-02",
                Severity::Error,
                sub,
                format!("subunit implements no API routine of `{unit}`"),
            ));
        }
    }
    findings
}

/// MAIN-01: a unit with a nonempty API must have a `<Unit>Main` subunit.
pub fn check_main_subunit(tree: &UnitTree, unit_path: &str) -> Vec<Finding> {
    let Some(node) = tree.node(unit_path).filter(|n| n.kind == NodeKind::UnitRoot) else {
        return Vec::new();
    };
    let unit = tree.unit_name(unit_path);
    if api_of(tree, unit_path).is_empty() {
        return Vec::new();
    }
    let main = format!("{unit_path}/{unit}Main");
    if node.children.contains(&main) {
        return Vec::new();
    }
    vec![Finding::new(
        "MAIN-01",
        Severity::Error,
        unit_path,
        format!("unit `{unit}` has an API but no `{unit}Main` subunit"),
    )]
}

/// DATA-01: a file may declare only the data store of the unit it resides
/// in; everything else must go through that unit's API.
pub fn check_data_ownership(tree: &UnitTree) -> Vec<Finding> {
    let mut findings = Vec::new();
    for node in tree.nodes.values() {
        let Some(root) = tree.unit_root_of(&node.path) else { continue };
        let owner = tree.unit_name(root);
        for f in &node.source_files {
            for decl in &f.declared_data_uses {
                let named = decl.strip_suffix("_data").unwrap_or(decl);
                if named != owner {
                    findings.push(Finding::new(
                        "DATA-01",
                        Severity::Error,
                        &f.path,
                        format!("declares `{decl}` but resides in unit `{owner}`; foreign data is reachable only through the owner's API"),
                    ));
                }
            }
        }
    }
    findings
}

/// DOC-01 for undocumented API stubs, DOC-02 for every other
/// undocumented source file.
pub fn check_doc_headers(tree: &UnitTree) -> Vec<Finding> {
    let mut findings = Vec::new();
    for node in tree.nodes.values() {
        for f in &node.source_files {
            if f.has_doc_header {
                continue;
            }
            if node.kind == NodeKind::UnitRoot {
                findings.push(Finding::new(
                    "DOC-01",
                    Severity::Warning,
                    &f.path,
                    "API stub lacks the `!!****` documentation header".to_string(),
                ));
            } else {
                findings.push(Finding::new(
                    "DOC-02",
                    Severity::Warning,
                    &f.path,
                    "source file lacks the `!!****` documentation header".to_string(),
                ));
            }
        }
    }
    findings
}

/// UT-01/UT-02: test applications and unit-side `unitTest` directories
/// must pair up — the application's Config requires the directory.
pub fn check_unittest_pairing(tree: &UnitTree) -> Vec<Finding> {
    let mut findings = Vec::new();
    let test_grouping = format!("{}/unitTest/", crate::SIMULATION_UNIT);
    let is_unit_test_dir =
        |p: &str| tree.node(p).is_some_and(|n| n.kind == NodeKind::UnitTestDir);

    let mut required_dirs: BTreeSet<&str> = BTreeSet::new();
    for node in tree.nodes.values() {
        if node.kind != NodeKind::SimulationSetup {
            continue;
        }
        let targets: Vec<&str> = node
            .config
            .as_ref()
            .map(|c| c.requires().collect())
            .unwrap_or_default();
        let reached: Vec<&str> =
            targets.iter().copied().filter(|t| is_unit_test_dir(t)).collect();
        required_dirs.extend(&reached);
        if node.path.starts_with(&test_grouping) && reached.is_empty() {
            findings.push(Finding::new(
                "UT-01",
                Severity::Error,
                &node.path,
                "test application requires no unit-side `unitTest` directory".to_string(),
            ));
        }
    }
    for node in tree.nodes.values() {
        if node.kind == NodeKind::UnitTestDir
            && tree.unit_root_of(&node.path).is_some()
            && !required_dirs.contains(node.path.as_str())
        {
            findings.push(Finding::new(
                "UT-02",
                Severity::Warning,
                &node.path,
                "no test application requires this `unitTest` directory".to_string(),
            ));
        }
    }
    findings
}

/// Run every rule. With a closure, the per-unit partition/Main checks run
/// only on units the closure touches and DOC-02 only on included
/// directories; tree-wide laws (null coverage, data ownership, stub
/// documentation, test pairing) always run in full.
pub fn validate_all(tree: &UnitTree, closure: Option<&UnitClosure>) -> ValidationReport {
    let unit_scope: Option<BTreeSet<&str>> = closure.map(|c| {
        c.included.iter().filter_map(|p| tree.unit_root_of(p)).collect()
    });

    let mut findings = check_null_coverage(tree);
    for root in &tree.unit_roots {
        if unit_scope.as_ref().is_some_and(|s| !s.contains(root.as_str())) {
            continue;
        }
        findings.extend(check_subunit_partition(tree, root));
        findings.extend(check_main_subunit(tree, root));
    }
    findings.extend(check_data_ownership(tree));
    for f in check_doc_headers(tree) {
        if f.rule == "DOC-02" {
            if let Some(c) = closure {
                let dir = f.path.rsplit_once('/').map(|(d, _)| d).unwrap_or("");
                if !c.includes(dir) {
                    continue;
                }
            }
        }
        findings.push(f);
    }
    findings.extend(check_unittest_pairing(tree));
    ValidationReport::sorted(findings)
}
