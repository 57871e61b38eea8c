//! Scanning and classifying a convention-organized source tree.
//!
//! Directory layout is the architecture: depth-1 capitalized directories
//! are unit roots (an all-lowercase depth-1 directory is an organizational
//! category such as `physics/`, holding unit roots one level down); a child
//! named `<Unit>Something` is a subunit; an all-lowercase child is an
//! implementation directory (implementation directories nest); a child
//! named exactly `unitTest` holds that unit's self-test; and the
//! distinguished `Simulation` unit contains one directory per buildable
//! application, with `Simulation/unitTest/<X>` grouping test applications.
//!
//! Classification is total: every directory must match a convention or
//! scanning fails. Dot-prefixed entries and symlinks are skipped, and
//! child lists are sorted, so a scan is deterministic regardless of
//! filesystem enumeration order.

use crate::config::{parse_config, ConfigError, ConfigFile};
use crate::{CONFIG_FILE, SIMULATION_UNIT};
use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ScanError {
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("{path}: directory name matches no tree convention ({reason})")]
    Classification { path: String, reason: String },
    #[error("tree has no {SIMULATION_UNIT} unit")]
    MissingSimulationUnit,
    #[error("{path}: not a unit root")]
    NotAUnitRoot { path: String },
    #[error("{path}: file at unit root does not follow the `{unit}_*` API naming convention")]
    NonApiFileAtRoot { path: String, unit: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum NodeKind {
    /// A unit: depth-1 capitalized directory, or capitalized child of a category.
    UnitRoot,
    /// `<Unit>Something` child of a unit root.
    Subunit,
    /// All-lowercase alternative; siblings are mutually exclusive.
    ImplementationDir,
    /// A `unitTest` directory inside a unit's hierarchy.
    UnitTestDir,
    /// All-lowercase depth-1 grouping that holds unit roots (e.g. `physics`).
    CategoryDir,
    /// The `Simulation` unit itself, or its `unitTest` grouping level.
    SimulationContainer,
    /// One buildable application directory under `Simulation`.
    SimulationSetup,
}

impl fmt::Display for NodeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            NodeKind::UnitRoot => "UnitRoot",
            NodeKind::Subunit => "Subunit",
            NodeKind::ImplementationDir => "ImplementationDir",
            NodeKind::UnitTestDir => "UnitTestDir",
            NodeKind::CategoryDir => "CategoryDir",
            NodeKind::SimulationContainer => "SimulationContainer",
            NodeKind::SimulationSetup => "SimulationSetup",
        })
    }
}

/// One registered source file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SourceFile {
    /// Tree-relative path, `/`-separated.
    pub path: String,
    /// File stem; by convention also the routine it implements.
    pub routine_name: String,
    /// Unit-data identifiers named on `!!DATA` header lines.
    pub declared_data_uses: Vec<String>,
    /// True when the first non-blank line begins with `!!****`.
    pub has_doc_header: bool,
}

/// One classified directory.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UnitNode {
    /// Tree-relative path, `/`-separated.
    pub path: String,
    /// Final path segment.
    pub name: String,
    pub kind: NodeKind,
    pub config: Option<ConfigFile>,
    /// Sorted by file name.
    pub source_files: Vec<SourceFile>,
    /// Child node paths, sorted.
    pub children: Vec<String>,
}

/// The scanned tree: every directory classified, every source file
/// registered.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UnitTree {
    pub root_path: PathBuf,
    /// All nodes keyed by tree-relative path.
    pub nodes: BTreeMap<String, UnitNode>,
    /// Paths of all unit roots, sorted.
    pub unit_roots: Vec<String>,
}

#[derive(Debug, Clone)]
pub struct ScanOptions {
    /// Source file extension allow-list, each with leading dot.
    pub source_extensions: Vec<String>,
}

impl Default for ScanOptions {
    fn default() -> Self {
        ScanOptions { source_extensions: vec![".F90".to_string()] }
    }
}

impl ScanOptions {
    /// Build options from extension strings, accepting them with or
    /// without the leading dot. An empty list means the default.
    pub fn with_extensions(exts: &[String]) -> Self {
        if exts.is_empty() {
            return ScanOptions::default();
        }
        ScanOptions {
            source_extensions: exts
                .iter()
                .map(|e| if e.starts_with('.') { e.clone() } else { format!(".{e}") })
                .collect(),
        }
    }
}

fn is_capitalized_name(s: &str) -> bool {
    s.bytes().next().is_some_and(|b| b.is_ascii_uppercase())
        && s.bytes().all(|b| b.is_ascii_alphanumeric() || b == b'_')
}

fn is_lowercase_name(s: &str) -> bool {
    s.bytes().next().is_some_and(|b| b.is_ascii_lowercase())
        && s.bytes().all(|b| b.is_ascii_lowercase() || b.is_ascii_digit() || b == b'_')
}

const UNIT_TEST_DIR: &str = "unitTest";

/// Number of directory components in a tree-relative path.
pub fn depth_of(path: &str) -> u32 {
    path.split('/').count() as u32
}

/// Parent path, if any (`a/b/c` -> `a/b`).
pub fn parent_of(path: &str) -> Option<&str> {
    path.rsplit_once('/').map(|(p, _)| p)
}

/// Is `path` equal to `ancestor` or somewhere below it?
pub fn is_under(path: &str, ancestor: &str) -> bool {
    path == ancestor || path.strip_prefix(ancestor).is_some_and(|r| r.starts_with('/'))
}

fn io_err(path: &Path, source: std::io::Error) -> ScanError {
    ScanError::Io { path: path.display().to_string(), source }
}

/// Directory entries split into (subdirectories, files), each name-sorted.
/// Symlinks and dot-prefixed names are skipped.
fn read_dir_sorted(path: &Path) -> Result<(Vec<String>, Vec<String>), ScanError> {
    let mut dirs = Vec::new();
    let mut files = Vec::new();
    for entry in std::fs::read_dir(path).map_err(|e| io_err(path, e))? {
        let entry = entry.map_err(|e| io_err(path, e))?;
        let name = match entry.file_name().into_string() {
            Ok(n) => n,
            Err(_) => continue,
        };
        if name.starts_with('.') {
            continue;
        }
        let ftype = entry.file_type().map_err(|e| io_err(path, e))?;
        if ftype.is_symlink() {
            continue;
        }
        if ftype.is_dir() {
            dirs.push(name);
        } else {
            files.push(name);
        }
    }
    dirs.sort();
    files.sort();
    Ok((dirs, files))
}

/// Parse source-file headers: doc sentinel plus `!!DATA` declarations.
fn parse_source_header(text: &str) -> (bool, Vec<String>) {
    let has_doc = text
        .lines()
        .find(|l| !l.trim().is_empty())
        .is_some_and(|l| l.starts_with("!!****"));
    let mut data = Vec::new();
    for line in text.lines() {
        if let Some(rest) = line.strip_prefix("!!DATA") {
            if rest.starts_with([' ', '\t']) {
                if let Some(ident) = rest.split_whitespace().next() {
                    data.push(ident.to_string());
                }
            }
        }
    }
    (has_doc, data)
}

struct Scanner<'a> {
    root: &'a Path,
    opts: &'a ScanOptions,
    nodes: BTreeMap<String, UnitNode>,
    unit_roots: Vec<String>,
}

impl Scanner<'_> {
    fn classify_child(
        &self,
        parent: &UnitNode,
        unit_name: Option<&str>,
        child: &str,
        child_path: &str,
    ) -> Result<NodeKind, ScanError> {
        let fail = |reason: &str| {
            Err(ScanError::Classification { path: child_path.to_string(), reason: reason.to_string() })
        };
        match parent.kind {
            NodeKind::CategoryDir => {
                if is_capitalized_name(child) {
                    Ok(NodeKind::UnitRoot)
                } else {
                    fail("category directories hold capitalized unit roots only")
                }
            }
            NodeKind::UnitRoot => {
                let unit = unit_name.expect("unit context");
                if child == UNIT_TEST_DIR {
                    Ok(NodeKind::UnitTestDir)
                } else if child.len() > unit.len()
                    && child.starts_with(unit)
                    && is_capitalized_name(child)
                {
                    Ok(NodeKind::Subunit)
                } else if is_lowercase_name(child) {
                    Ok(NodeKind::ImplementationDir)
                } else {
                    fail("not a subunit of this unit, an implementation, or unitTest")
                }
            }
            NodeKind::Subunit | NodeKind::ImplementationDir => {
                if child == UNIT_TEST_DIR {
                    Ok(NodeKind::UnitTestDir)
                } else if is_lowercase_name(child) {
                    Ok(NodeKind::ImplementationDir)
                } else {
                    fail("only lowercase implementation directories and unitTest nest here")
                }
            }
            NodeKind::UnitTestDir => fail("unitTest directories do not contain subdirectories"),
            NodeKind::SimulationContainer => {
                if parent.path == SIMULATION_UNIT && child == UNIT_TEST_DIR {
                    Ok(NodeKind::SimulationContainer)
                } else if is_capitalized_name(child) {
                    Ok(NodeKind::SimulationSetup)
                } else {
                    fail("simulation children are capitalized setups or the unitTest grouping")
                }
            }
            NodeKind::SimulationSetup => fail("setup directories do not contain subdirectories"),
        }
    }

    fn visit(
        &mut self,
        rel: String,
        kind: NodeKind,
        unit_name: Option<String>,
    ) -> Result<(), ScanError> {
        let fs_path = self.root.join(&rel);
        let (dirs, files) = read_dir_sorted(&fs_path)?;

        let name = rel.rsplit('/').next().unwrap_or(&rel).to_string();
        let mut node = UnitNode {
            path: rel.clone(),
            name: name.clone(),
            kind,
            config: None,
            source_files: Vec::new(),
            children: Vec::new(),
        };

        for file in &files {
            if file == CONFIG_FILE {
                let text = std::fs::read_to_string(fs_path.join(file))
                    .map_err(|e| io_err(&fs_path.join(file), e))?;
                node.config = Some(parse_config(&text, &rel)?);
                continue;
            }
            let Some(ext) = self.opts.source_extensions.iter().find(|e| file.ends_with(e.as_str()))
            else {
                continue;
            };
            let stem = &file[..file.len() - ext.len()];
            if stem.is_empty() {
                continue;
            }
            let text = std::fs::read_to_string(fs_path.join(file))
                .map_err(|e| io_err(&fs_path.join(file), e))?;
            let (has_doc_header, declared_data_uses) = parse_source_header(&text);
            node.source_files.push(SourceFile {
                path: format!("{rel}/{file}"),
                routine_name: stem.to_string(),
                declared_data_uses,
                has_doc_header,
            });
        }

        let mut planned = Vec::new();
        for child in &dirs {
            let child_path = format!("{rel}/{child}");
            let child_kind = self.classify_child(&node, unit_name.as_deref(), child, &child_path)?;
            node.children.push(child_path.clone());
            let child_unit = match child_kind {
                NodeKind::UnitRoot => Some(child.clone()),
                _ => unit_name.clone(),
            };
            planned.push((child_path, child_kind, child_unit));
        }

        if kind == NodeKind::UnitRoot {
            self.unit_roots.push(rel.clone());
        }
        self.nodes.insert(rel, node);

        for (child_path, child_kind, child_unit) in planned {
            self.visit(child_path, child_kind, child_unit)?;
        }
        Ok(())
    }
}

/// Scan and classify the tree rooted at `root`.
pub fn scan_tree(root: &Path, opts: &ScanOptions) -> Result<UnitTree, ScanError> {
    let (dirs, _root_files) = read_dir_sorted(root)?;
    let mut scanner = Scanner { root, opts, nodes: BTreeMap::new(), unit_roots: Vec::new() };

    let mut saw_simulation = false;
    for dir in &dirs {
        if dir == SIMULATION_UNIT {
            saw_simulation = true;
            scanner.visit(dir.clone(), NodeKind::SimulationContainer, None)?;
        } else if is_capitalized_name(dir) {
            scanner.visit(dir.clone(), NodeKind::UnitRoot, Some(dir.clone()))?;
        } else if is_lowercase_name(dir) {
            scanner.visit(dir.clone(), NodeKind::CategoryDir, None)?;
        } else {
            return Err(ScanError::Classification {
                path: dir.clone(),
                reason: "top-level entries are units, lowercase categories, or Simulation"
                    .to_string(),
            });
        }
    }
    if !saw_simulation {
        return Err(ScanError::MissingSimulationUnit);
    }

    scanner.unit_roots.sort();
    Ok(UnitTree {
        root_path: root.to_path_buf(),
        nodes: scanner.nodes,
        unit_roots: scanner.unit_roots,
    })
}

impl UnitTree {
    pub fn node(&self, path: &str) -> Option<&UnitNode> {
        self.nodes.get(path)
    }

    /// The unit root containing `path`, if it lies inside a unit.
    pub fn unit_root_of<'a>(&self, path: &'a str) -> Option<&'a str> {
        let mut end = 0;
        let bytes = path.as_bytes();
        loop {
            end = match bytes[end..].iter().position(|&b| b == b'/') {
                Some(off) => end + off,
                None => path.len(),
            };
            let prefix = &path[..end];
            if let Some(node) = self.nodes.get(prefix) {
                if node.kind == NodeKind::UnitRoot {
                    return Some(prefix);
                }
            }
            if end == path.len() {
                return None;
            }
            end += 1;
        }
    }

    /// Unit name (final segment) for a unit root path.
    pub fn unit_name<'a>(&self, root_path: &'a str) -> &'a str {
        root_path.rsplit('/').next().unwrap_or(root_path)
    }

    /// All nodes at or below `path`, in sorted path order.
    pub fn nodes_under<'a>(&'a self, path: &'a str) -> impl Iterator<Item = &'a UnitNode> {
        self.nodes
            .range(path.to_string()..)
            .take_while(move |(p, _)| is_under(p, path))
            .map(|(_, n)| n)
    }

    /// One `KIND path` line per directory, sorted by path.
    pub fn classification_listing(&self) -> String {
        let mut out = String::new();
        for (path, node) in &self.nodes {
            out.push_str(&format!("{} {}\n", node.kind, path));
        }
        out
    }
}

/// One routine of a unit's public API, discovered from the stub files at
/// the unit root.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ApiRoutine {
    pub name: String,
    /// Unit root path.
    pub owning_unit: String,
    pub stub_path: String,
    /// Lexicographically first subunit that implements the routine, if any.
    pub subunit_assignment: Option<String>,
}

/// Discover a unit's API from its root stubs, sorted by routine name.
/// A unit root with zero source files has an empty API.
pub fn discover_api(tree: &UnitTree, unit_path: &str) -> Result<Vec<ApiRoutine>, ScanError> {
    let node = tree
        .node(unit_path)
        .filter(|n| n.kind == NodeKind::UnitRoot)
        .ok_or_else(|| ScanError::NotAUnitRoot { path: unit_path.to_string() })?;
    let unit = tree.unit_name(unit_path);
    let prefix = format!("{unit}_");

    let mut routines = Vec::new();
    for file in &node.source_files {
        if !file.routine_name.starts_with(&prefix) {
            return Err(ScanError::NonApiFileAtRoot {
                path: file.path.clone(),
                unit: unit.to_string(),
            });
        }
        let subunit_assignment = node
            .children
            .iter()
            .filter(|c| tree.node(c).is_some_and(|n| n.kind == NodeKind::Subunit))
            .find(|sub| {
                tree.nodes_under(sub)
                    .any(|n| n.path != *unit_path && n.source_files.iter().any(|f| f.routine_name == file.routine_name))
            })
            .cloned();
        routines.push(ApiRoutine {
            name: file.routine_name.clone(),
            owning_unit: unit_path.to_string(),
            stub_path: file.path.clone(),
            subunit_assignment,
        });
    }
    routines.sort_by(|a, b| a.name.cmp(&b.name));
    Ok(routines)
}

/// Names of all buildable applications, sorted; nested test applications
/// appear under their grouping (`unitTest/<X>`).
pub fn list_simulations(tree: &UnitTree) -> Vec<String> {
    let prefix = format!("{SIMULATION_UNIT}/");
    tree.nodes
        .values()
        .filter(|n| n.kind == NodeKind::SimulationSetup)
        .map(|n| n.path.strip_prefix(&prefix).unwrap_or(&n.path).to_string())
        .collect()
}
