//! Arbitration: turning a resolved closure into concrete picks.
//!
//! Four independent decisions are made here. For every routine, one
//! source file is selected from the candidate set (unit-root stub,
//! same-stem files in included directories, files in the application's
//! own directory): the application directory always wins, otherwise the
//! deepest directory wins, and an unresolvable tie is an error rather
//! than a silent pick. Runtime parameters are layered in ascending
//! precedence unit Config < deeper Configs < application Config <
//! parfile, keeping the full override chain. Grid variables get dense
//! 1-based indices in sorted name order. Unit initialization is a
//! topological sort of the require graph (ties lexicographic, cycles
//! broken lexicographically with a recorded warning); finalization is the
//! exact reverse.

use crate::config::{ParFile, ParamType};
use crate::resolver::UnitClosure;
use crate::tree::{depth_of, NodeKind, UnitTree};
use crate::DRIVER_UNIT;
use serde::Serialize;
use std::collections::{BTreeMap, BTreeSet, BinaryHeap};
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ArbitrationError {
    #[error("routine `{routine}`: ambiguous implementations at equal depth: {a} vs {b}")]
    AmbiguousImplementation { routine: String, a: String, b: String },
    #[error("routine `{routine}`: implementation {implementation} has no stub at the `{unit}` unit root")]
    MissingStub { routine: String, implementation: String, unit: String },
    #[error("parameter `{name}`: value `{value}` is not a valid {ptype} (from {origin})")]
    TypeMismatch { name: String, ptype: ParamType, value: String, origin: String },
    #[error("parameter `{name}` (from {origin}) is not declared by any included directory")]
    UnknownParameter { name: String, origin: String },
    #[error("parameter `{name}`: declared {a_type} in {a} but {b_type} in {b}")]
    ConflictingTypes { name: String, a: String, a_type: ParamType, b: String, b_type: ParamType },
}

/// One possible source for a routine.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Candidate {
    pub path: String,
    pub depth: u32,
    /// True for files in the application's own directory; these outrank
    /// any depth.
    pub is_simulation: bool,
    /// True for the null implementation at the unit root.
    pub is_stub: bool,
}

impl Candidate {
    /// Selection rank; the maximum wins.
    fn rank(&self) -> (bool, u32) {
        (self.is_simulation, self.depth)
    }
}

/// The chosen file for one routine, with the full candidate set kept for
/// explanation.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FileChoice {
    pub selected_path: String,
    pub provenance_depth: u32,
    pub is_simulation: bool,
    /// Selected file is the unit-root stub ("null" in the manifest).
    pub is_stub: bool,
    /// All candidates, sorted by (simulation flag, depth, path).
    pub candidates: Vec<Candidate>,
}

/// routine name -> choice, for every routine visible to the application.
pub type FileMap = BTreeMap<String, FileChoice>;

/// Select one source file per routine.
///
/// Every API routine of every unit gets an entry — the stub is the
/// fallback when no included directory provides an implementation — and
/// routines that exist only in the application directory are added as new
/// functionality.
pub fn select_implementations(
    tree: &UnitTree,
    closure: &UnitClosure,
) -> Result<FileMap, ArbitrationError> {
    let mut candidates: BTreeMap<String, Vec<Candidate>> = BTreeMap::new();
    let mut push = |routine: &str, c: Candidate| {
        candidates.entry(routine.to_string()).or_default().push(c);
    };

    // (a) Null stubs of every unit, included or not.
    for root in &tree.unit_roots {
        let node = &tree.nodes[root];
        for f in &node.source_files {
            push(
                &f.routine_name,
                Candidate {
                    path: f.path.clone(),
                    depth: depth_of(root),
                    is_simulation: false,
                    is_stub: true,
                },
            );
        }
    }
    // (b) Files of included directories (unit roots already covered, the
    // application directory handled below).
    for path in &closure.included {
        let node = &tree.nodes[path];
        if node.kind == NodeKind::UnitRoot || *path == closure.setup_path {
            continue;
        }
        for f in &node.source_files {
            push(
                &f.routine_name,
                Candidate {
                    path: f.path.clone(),
                    depth: depth_of(path),
                    is_simulation: false,
                    is_stub: false,
                },
            );
        }
    }
    // (c) The application directory outranks everything.
    for f in &tree.nodes[&closure.setup_path].source_files {
        push(
            &f.routine_name,
            Candidate {
                path: f.path.clone(),
                depth: depth_of(&closure.setup_path),
                is_simulation: true,
                is_stub: false,
            },
        );
    }

    let unit_by_name: BTreeMap<&str, &str> = tree
        .unit_roots
        .iter()
        .map(|r| (tree.unit_name(r), r.as_str()))
        .collect();

    let mut map = FileMap::new();
    for (routine, mut cands) in candidates {
        cands.sort_by(|a, b| a.rank().cmp(&b.rank()).then_with(|| a.path.cmp(&b.path)));
        let best = cands.last().expect("nonempty").clone();
        if !best.is_simulation {
            if let Some(tied) = cands
                .iter()
                .rev()
                .skip(1)
                .find(|c| c.rank() == best.rank())
            {
                return Err(ArbitrationError::AmbiguousImplementation {
                    routine,
                    a: tied.path.clone(),
                    b: best.path,
                });
            }
        }
        // An API-named implementation without a unit-root stub breaks the
        // null-fallback guarantee.
        if let Some(unit) = routine.split('_').next().and_then(|p| unit_by_name.get(p)) {
            if !cands.iter().any(|c| c.is_stub) {
                if let Some(imp) = cands.iter().find(|c| !c.is_simulation) {
                    return Err(ArbitrationError::MissingStub {
                        routine,
                        implementation: imp.path.clone(),
                        unit: tree.unit_name(unit).to_string(),
                    });
                }
            }
        }
        map.insert(
            routine,
            FileChoice {
                selected_path: best.path,
                provenance_depth: best.depth,
                is_simulation: best.is_simulation,
                is_stub: best.is_stub,
                candidates: cands,
            },
        );
    }
    Ok(map)
}

/// One runtime parameter after layering.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ParamEntry {
    pub ptype: ParamType,
    pub effective_value: String,
    /// Default from the lowest-precedence declaration.
    pub default_value: String,
    /// Config that introduced the parameter (lowest precedence).
    pub defining_path: String,
    /// Overrides in ascending precedence: (`<dir>/Config` or `parfile`, value).
    pub overridden_by: Vec<(String, String)>,
}

pub type ParameterTable = BTreeMap<String, ParamEntry>;

/// Layer parameter declarations of the closure under parfile overrides.
pub fn merge_parameters(
    tree: &UnitTree,
    closure: &UnitClosure,
    parfile: Option<&ParFile>,
) -> Result<ParameterTable, ArbitrationError> {
    // (is_setup, depth, config path, value) per declaration, per name.
    let mut decls: BTreeMap<String, (ParamType, Vec<(bool, u32, String, String)>)> =
        BTreeMap::new();
    for path in &closure.included {
        let node = &tree.nodes[path];
        let Some(cfg) = &node.config else { continue };
        let config_path = format!("{path}/Config");
        for (name, ptype, default) in cfg.parameters() {
            let key = (*path == closure.setup_path, depth_of(path), config_path.clone(), default.to_string());
            match decls.get_mut(name) {
                None => {
                    decls.insert(name.to_string(), (ptype, vec![key]));
                }
                Some((first_type, list)) => {
                    if *first_type != ptype {
                        return Err(ArbitrationError::ConflictingTypes {
                            name: name.to_string(),
                            a: list[0].2.clone(),
                            a_type: *first_type,
                            b: config_path.clone(),
                            b_type: ptype,
                        });
                    }
                    list.push(key);
                }
            }
        }
    }

    let mut table = ParameterTable::new();
    for (name, (ptype, mut list)) in decls {
        // Ascending precedence; depth ties break by path for determinism.
        list.sort();
        let (_, _, defining_path, default_value) = list[0].clone();
        let effective_value = list.last().unwrap().3.clone();
        let overridden_by = list[1..].iter().map(|(_, _, p, v)| (p.clone(), v.clone())).collect();
        table.insert(
            name,
            ParamEntry { ptype, effective_value, default_value, defining_path, overridden_by },
        );
    }

    if let Some(par) = parfile {
        let origin = if par.path.is_empty() { "parfile".to_string() } else { par.path.clone() };
        for (name, value) in par.effective() {
            let Some(entry) = table.get_mut(name) else {
                return Err(ArbitrationError::UnknownParameter {
                    name: name.to_string(),
                    origin: origin.clone(),
                });
            };
            if !entry.ptype.admits(value) {
                return Err(ArbitrationError::TypeMismatch {
                    name: name.to_string(),
                    ptype: entry.ptype,
                    value: value.to_string(),
                    origin: origin.clone(),
                });
            }
            entry.effective_value = value.to_string();
            entry.overridden_by.push(("parfile".to_string(), value.to_string()));
        }
    }
    Ok(table)
}

/// Dense 1-based indices for the grid variables declared by the closure,
/// in sorted name order.
pub type VariableIndex = BTreeMap<String, u32>;

pub fn assign_variable_indices(tree: &UnitTree, closure: &UnitClosure) -> VariableIndex {
    let names: BTreeSet<&str> = closure
        .included
        .iter()
        .filter_map(|p| tree.nodes[p].config.as_ref())
        .flat_map(|c| c.variables())
        .collect();
    names
        .into_iter()
        .enumerate()
        .map(|(i, n)| (n.to_string(), i as u32 + 1))
        .collect()
}

/// Unit initialization order (Driver excluded — it is the caller).
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct InitOrder {
    /// Unit names, dependencies first.
    pub order: Vec<String>,
    /// One entry per dependency cycle broken lexicographically.
    pub warnings: Vec<String>,
}

impl InitOrder {
    /// Finalization is the exact reverse of initialization.
    pub fn finalize_order(&self) -> Vec<String> {
        self.order.iter().rev().cloned().collect()
    }
}

/// Order units so that if any included Config under `A` requires a path
/// under `B`, then `B` initializes before `A`. Every non-Driver unit is
/// listed — uninitialized-but-stubbed units no-op safely — so the order
/// is stable as units come and go from the closure.
pub fn compute_init_order(tree: &UnitTree, closure: &UnitClosure) -> InitOrder {
    let mut name_of: BTreeMap<&str, &str> = BTreeMap::new();
    for root in &tree.unit_roots {
        let name = tree.unit_name(root);
        if name != DRIVER_UNIT {
            name_of.insert(root.as_str(), name);
        }
    }

    // edges[b] = units that must wait for b.
    let mut edges: BTreeMap<&str, BTreeSet<&str>> = BTreeMap::new();
    let mut indegree: BTreeMap<&str, u32> = name_of.values().map(|n| (*n, 0)).collect();
    for path in &closure.included {
        let Some(cfg) = tree.nodes[path].config.as_ref() else { continue };
        let Some(a_root) = tree.unit_root_of(path) else { continue };
        let Some(&a) = name_of.get(a_root) else { continue };
        for target in cfg.requires() {
            let Some(b_root) = tree.unit_root_of(target) else { continue };
            if b_root == a_root {
                continue;
            }
            let Some(&b) = name_of.get(b_root) else { continue };
            if edges.entry(b).or_default().insert(a) {
                *indegree.get_mut(a).unwrap() += 1;
            }
        }
    }

    // Kahn's algorithm; the ready heap yields the lexicographically
    // smallest name first.
    let mut ready: BinaryHeap<std::cmp::Reverse<&str>> = indegree
        .iter()
        .filter(|(_, d)| **d == 0)
        .map(|(n, _)| std::cmp::Reverse(*n))
        .collect();
    let mut remaining: BTreeSet<&str> = indegree.keys().copied().collect();
    let mut order = Vec::new();
    let mut warnings = Vec::new();
    while !remaining.is_empty() {
        let next = match ready.pop() {
            Some(std::cmp::Reverse(n)) if remaining.contains(n) => n,
            Some(_) => continue,
            None => {
                // Cycle: release the lexicographically smallest remaining unit.
                let n = *remaining.iter().next().unwrap();
                warnings.push(format!(
                    "initialization cycle broken by placing `{n}` first among {{{}}}",
                    remaining.iter().copied().collect::<Vec<_>>().join(", ")
                ));
                n
            }
        };
        remaining.remove(next);
        order.push(next.to_string());
        for &succ in edges.get(next).into_iter().flatten() {
            if remaining.contains(succ) {
                let d = indegree.get_mut(succ).unwrap();
                *d -= 1;
                if *d == 0 {
                    ready.push(std::cmp::Reverse(succ));
                }
            }
        }
    }
    InitOrder { order, warnings }
}
