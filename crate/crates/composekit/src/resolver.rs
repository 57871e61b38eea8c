//! Resolving the closure of directories that make up one application.
//!
//! Starting from a simulation's `Config`, `REQUIRES` edges are followed to
//! a fixpoint. `REQUESTS` edges are followed too unless the target (or an
//! ancestor) was excluded on the command line, in which case the drop is
//! recorded rather than failing. Requiring a unit root pulls in its
//! `<Unit>Main` subunit automatically. Where siblings are mutually
//! exclusive implementations, exactly one is chosen per group with
//! precedence `--unit-impl` > `REQUIRES` > `REQUESTS` > `DEFAULT`;
//! contradictory hard requirements fail loudly.
//!
//! Because a selection discovered late can invalidate directories walked
//! early, resolution runs in rounds: each round re-derives the closure
//! from the selections of the previous one, and the result is only
//! accepted once the selection map is stable. Selections only ever
//! escalate in precedence, so the loop terminates, and the final closure
//! is independent of directive order and directory enumeration order.

use crate::tree::{is_under, parent_of, NodeKind, UnitTree};
use crate::config::Directive;
use crate::SIMULATION_UNIT;
use std::collections::{BTreeMap, BTreeSet, VecDeque};
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ResolveError {
    #[error("no simulation named `{name}`")]
    UnknownSimulation { name: String },
    #[error("{required_by}: required target `{target}` does not exist")]
    MissingRequireTarget { target: String, required_by: String },
    #[error("{required_by}: required target `{target}` is not a requirable directory")]
    UnrequirableTarget { target: String, required_by: String },
    #[error("{required_by}: required target `{target}` is excluded by `--without-unit {excluded_by}`")]
    ExcludedRequireTarget { target: String, required_by: String, excluded_by: String },
    #[error("{group}: conflicting implementation choices `{a}` and `{b}` ({origin})")]
    ImplementationConflict { group: String, a: String, b: String, origin: String },
    #[error("override names no tree directory: `{path}`")]
    UnknownOverrideTarget { path: String },
    #[error("{config}: DEFAULT names `{child}`, which is not an implementation child")]
    InvalidDefaultChild { config: String, child: String },
    #[error("`--with-unit {path}` contradicts `--without-unit {excluded_by}`")]
    OverlappingRequest { path: String, excluded_by: String },
    #[error("`{path}` is not a unit root")]
    UnknownUnit { path: String },
    #[error("implementation selection did not stabilize (suspect contradictory Configs)")]
    SelectionUnstable,
}

/// What the user asked to build, before resolution.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SetupRequest {
    pub simulation_name: String,
    /// Force-included tree paths (`--with-unit`).
    pub with_units: Vec<String>,
    /// Tree paths whose soft requests are dropped (`--without-unit`).
    pub without_units: Vec<String>,
    /// Explicit implementation choices, group path -> child name
    /// (`--unit-impl group=child`).
    pub impl_choices: BTreeMap<String, String>,
    /// Runtime parameter file, as given on the command line.
    pub parfile: Option<String>,
}

impl SetupRequest {
    pub fn for_simulation(name: &str) -> SetupRequest {
        SetupRequest { simulation_name: name.to_string(), ..SetupRequest::default() }
    }

    /// Canonical one-line form recorded in manifests: sorted lists,
    /// `-` for empty fields.
    pub fn normalized(&self) -> String {
        fn csv(items: Vec<String>) -> String {
            if items.is_empty() {
                "-".to_string()
            } else {
                items.join(",")
            }
        }
        let mut with = self.with_units.clone();
        with.sort();
        with.dedup();
        let mut without = self.without_units.clone();
        without.sort();
        without.dedup();
        let impls = self.impl_choices.iter().map(|(g, c)| format!("{g}={c}")).collect();
        format!(
            "with={} without={} impl={} parfile={}",
            csv(with),
            csv(without),
            csv(impls),
            self.parfile.as_deref().unwrap_or("-")
        )
    }
}

/// The resolved closure: which directories are in, which implementation
/// won each exclusive group, and what was dropped or redirected along
/// the way.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UnitClosure {
    pub simulation_name: String,
    /// `Simulation/<name>` path of the application directory.
    pub setup_path: String,
    pub included: BTreeSet<String>,
    /// Group parent path -> included child name.
    pub chosen_impl: BTreeMap<String, String>,
    /// Soft requests that were not honored: (target, reason), sorted.
    pub dropped_requests: Vec<(String, String)>,
    /// Hard requirements of a group child that `--unit-impl` redirected
    /// to a sibling: (original target, chosen child), sorted.
    pub redirected_requires: Vec<(String, String)>,
}

impl UnitClosure {
    pub fn includes(&self, path: &str) -> bool {
        self.included.contains(path)
    }
}

/// Selection strength; higher wins a group.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
enum SelClass {
    Default,
    Requested,
    Required,
    Explicit,
}

#[derive(Debug)]
enum WalkOutcome {
    Included,
    /// The walk crossed a group whose selection went to a sibling.
    Displaced { group: String, winner: String },
}

struct Round<'t> {
    tree: &'t UnitTree,
    without_units: &'t [String],
    included: BTreeSet<String>,
    /// Group path -> (strength, child name).
    working: BTreeMap<String, (SelClass, String)>,
    queue: VecDeque<String>,
    dropped: Vec<(String, String)>,
    redirected: Vec<(String, String)>,
}

impl Round<'_> {
    fn excluded_by(&self, path: &str) -> Option<&str> {
        self.without_units.iter().find(|x| is_under(path, x)).map(|s| s.as_str())
    }

    /// Register a selection demand for `group`. Returns true when `child`
    /// holds the group after the call.
    fn demand(
        &mut self,
        group: &str,
        child: &str,
        class: SelClass,
        deep: bool,
        origin: &str,
    ) -> Result<bool, ResolveError> {
        match self.working.get(group) {
            None => {
                self.working.insert(group.to_string(), (class, child.to_string()));
                Ok(true)
            }
            Some((held_class, held)) if held == child => {
                if class > *held_class {
                    self.working.insert(group.to_string(), (class, child.to_string()));
                }
                Ok(true)
            }
            Some((held_class, held)) => {
                let held_class = *held_class;
                let held = held.clone();
                let conflict = || ResolveError::ImplementationConflict {
                    group: group.to_string(),
                    a: held.clone(),
                    b: child.to_string(),
                    origin: origin.to_string(),
                };
                use SelClass::*;
                match (class, held_class) {
                    (Explicit, Explicit) => Err(conflict()),
                    (Explicit, _) | (Required, Requested) | (Required, Default) | (Requested, Default) => {
                        self.working.insert(group.to_string(), (class, child.to_string()));
                        Ok(true)
                    }
                    (Required, Required) => Err(conflict()),
                    (Required, Explicit) if deep => Err(conflict()),
                    _ => Ok(false),
                }
            }
        }
    }

    /// Insert one node (ancestors must already be handled) and queue its
    /// Config. Including a unit root also pulls its Main subunit.
    fn include_node(&mut self, path: &str) {
        if !self.included.insert(path.to_string()) {
            return;
        }
        self.queue.push_back(path.to_string());
        let node = &self.tree.nodes[path];
        if node.kind == NodeKind::UnitRoot {
            let main = format!("{path}/{}Main", node.name);
            if self.tree.node(&main).is_some() {
                self.include_node(&main);
            }
        }
    }

    /// Walk root-to-target, including every node on the way; group
    /// crossings register demands of the given strength.
    fn try_include(
        &mut self,
        target: &str,
        class: SelClass,
        origin: &str,
    ) -> Result<WalkOutcome, ResolveError> {
        let mut end = 0;
        loop {
            end = match target[end..].find('/') {
                Some(off) => end + off,
                None => target.len(),
            };
            let prefix = &target[..end];
            let node = &self.tree.nodes[prefix];
            match node.kind {
                NodeKind::CategoryDir | NodeKind::SimulationContainer => {}
                NodeKind::ImplementationDir => {
                    let group = parent_of(prefix).expect("impl dir has parent").to_string();
                    let deep = prefix != target;
                    if self.demand(&group, &node.name, class, deep, origin)? {
                        self.include_node(prefix);
                    } else {
                        // The group stays active under whichever child won.
                        let winner = self.working[&group].1.clone();
                        self.include_node(&format!("{group}/{winner}"));
                        return Ok(WalkOutcome::Displaced { group, winner });
                    }
                }
                _ => self.include_node(prefix),
            }
            if end == target.len() {
                return Ok(WalkOutcome::Included);
            }
            end += 1;
        }
    }

    fn process_require(&mut self, config_dir: &str, target: &str) -> Result<(), ResolveError> {
        let required_by = format!("{config_dir}/Config");
        let Some(node) = self.tree.node(target) else {
            return Err(ResolveError::MissingRequireTarget {
                target: target.to_string(),
                required_by,
            });
        };
        if matches!(node.kind, NodeKind::CategoryDir | NodeKind::SimulationContainer) {
            return Err(ResolveError::UnrequirableTarget {
                target: target.to_string(),
                required_by,
            });
        }
        if let Some(ex) = self.excluded_by(target) {
            return Err(ResolveError::ExcludedRequireTarget {
                target: target.to_string(),
                required_by,
                excluded_by: ex.to_string(),
            });
        }
        match self.try_include(target, SelClass::Required, &required_by)? {
            WalkOutcome::Included => {}
            WalkOutcome::Displaced { winner, .. } => {
                self.redirected.push((target.to_string(), winner));
            }
        }
        Ok(())
    }

    fn process_request(&mut self, config_dir: &str, target: &str) -> Result<(), ResolveError> {
        if self.excluded_by(target).is_some() {
            self.dropped.push((target.to_string(), "excluded by command line".to_string()));
            return Ok(());
        }
        let Some(node) = self.tree.node(target) else {
            self.dropped.push((target.to_string(), "target not found".to_string()));
            return Ok(());
        };
        if matches!(node.kind, NodeKind::CategoryDir | NodeKind::SimulationContainer) {
            self.dropped.push((target.to_string(), "target not found".to_string()));
            return Ok(());
        }
        let origin = format!("{config_dir}/Config");
        match self.try_include(target, SelClass::Requested, &origin)? {
            WalkOutcome::Included => {}
            WalkOutcome::Displaced { group, winner } => {
                self.dropped
                    .push((target.to_string(), format!("lost `{group}` to `{winner}`")));
            }
        }
        Ok(())
    }

    fn process_default(&mut self, config_dir: &str, child: &str) -> Result<(), ResolveError> {
        let target = format!("{config_dir}/{child}");
        let config = format!("{config_dir}/Config");
        let valid = self
            .tree
            .node(&target)
            .is_some_and(|n| n.kind == NodeKind::ImplementationDir);
        if !valid {
            return Err(ResolveError::InvalidDefaultChild { config, child: child.to_string() });
        }
        if self.demand(config_dir, child, SelClass::Default, false, &config)? {
            self.include_node(&target);
        } else {
            // A stronger selection beat the default; that child carries
            // the group instead.
            let winner = self.working[config_dir].1.clone();
            self.include_node(&format!("{config_dir}/{winner}"));
        }
        Ok(())
    }
}

/// Resolve the closure for one setup request.
pub fn resolve(tree: &UnitTree, req: &SetupRequest) -> Result<UnitClosure, ResolveError> {
    // Validate the request itself before touching Configs.
    for w in &req.with_units {
        if let Some(x) = req.without_units.iter().find(|x| is_under(w, x)) {
            return Err(ResolveError::OverlappingRequest {
                path: w.clone(),
                excluded_by: x.clone(),
            });
        }
    }
    let setup_path = format!("{SIMULATION_UNIT}/{}", req.simulation_name);
    if !tree.node(&setup_path).is_some_and(|n| n.kind == NodeKind::SimulationSetup) {
        return Err(ResolveError::UnknownSimulation { name: req.simulation_name.clone() });
    }
    for w in &req.with_units {
        let ok = tree.node(w).is_some_and(|n| {
            !matches!(n.kind, NodeKind::CategoryDir | NodeKind::SimulationContainer)
        });
        if !ok {
            return Err(ResolveError::UnknownOverrideTarget { path: w.clone() });
        }
    }
    for (group, child) in &req.impl_choices {
        let target = format!("{group}/{child}");
        if !tree.node(&target).is_some_and(|n| n.kind == NodeKind::ImplementationDir) {
            return Err(ResolveError::UnknownOverrideTarget { path: target });
        }
    }

    let mut preset: BTreeMap<String, (SelClass, String)> = req
        .impl_choices
        .iter()
        .map(|(g, c)| (g.clone(), (SelClass::Explicit, c.clone())))
        .collect();

    let mut with_units = req.with_units.clone();
    with_units.sort();
    with_units.dedup();

    for _round in 0..100 {
        let mut st = Round {
            tree,
            without_units: &req.without_units,
            included: BTreeSet::new(),
            working: preset.clone(),
            queue: VecDeque::new(),
            dropped: Vec::new(),
            redirected: Vec::new(),
        };
        st.try_include(&setup_path, SelClass::Required, "command line")?;
        for w in &with_units {
            st.try_include(w, SelClass::Explicit, "command line")?;
        }
        while let Some(path) = st.queue.pop_front() {
            let Some(cfg) = tree.nodes[&path].config.clone() else { continue };
            for d in cfg.directives() {
                match d {
                    Directive::Requires { target } => st.process_require(&path, target)?,
                    Directive::Requests { target } => st.process_request(&path, target)?,
                    Directive::Default { child } => st.process_default(&path, child)?,
                    Directive::Parameter { .. } | Directive::Variable { .. } => {}
                }
            }
        }
        if st.working == preset {
            let chosen_impl = st
                .included
                .iter()
                .filter(|p| tree.nodes[*p].kind == NodeKind::ImplementationDir)
                .map(|p| (parent_of(p).unwrap().to_string(), tree.nodes[p].name.clone()))
                .collect();
            let mut dropped = st.dropped;
            dropped.sort();
            dropped.dedup();
            let mut redirected = st.redirected;
            redirected.sort();
            redirected.dedup();
            return Ok(UnitClosure {
                simulation_name: req.simulation_name.clone(),
                setup_path,
                included: st.included,
                chosen_impl,
                dropped_requests: dropped,
                redirected_requires: redirected,
            });
        }
        preset = st.working;
    }
    Err(ResolveError::SelectionUnstable)
}

/// All complete implementation choices for the exclusive groups under one
/// unit, in lexicographic group/child order. A unit with no groups has
/// exactly one (empty) configuration.
pub fn enumerate_valid_configurations(
    tree: &UnitTree,
    unit_path: &str,
) -> Result<Vec<BTreeMap<String, String>>, ResolveError> {
    if !tree.node(unit_path).is_some_and(|n| n.kind == NodeKind::UnitRoot) {
        return Err(ResolveError::UnknownUnit { path: unit_path.to_string() });
    }
    let groups: Vec<(String, Vec<String>)> = tree
        .nodes_under(unit_path)
        .filter_map(|n| {
            let children: Vec<String> = n
                .children
                .iter()
                .filter(|c| tree.nodes[*c].kind == NodeKind::ImplementationDir)
                .map(|c| tree.nodes[c].name.clone())
                .collect();
            (!children.is_empty()).then(|| (n.path.clone(), children))
        })
        .collect();

    let mut configs = vec![BTreeMap::new()];
    for (group, children) in &groups {
        let mut next = Vec::with_capacity(configs.len() * children.len());
        for base in &configs {
            for child in children {
                let mut m = base.clone();
                m.insert(group.clone(), child.clone());
                next.push(m);
            }
        }
        configs = next;
    }
    Ok(configs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tree::{scan_tree, ScanOptions};
    use std::fs;
    use std::path::Path;

    fn write(root: &Path, rel: &str, content: &str) {
        let p = root.join(rel);
        fs::create_dir_all(p.parent().unwrap()).unwrap();
        fs::write(p, content).unwrap();
    }

    fn mkdir(root: &Path, rel: &str) {
        fs::create_dir_all(root.join(rel)).unwrap();
    }

    /// Two-unit playground: A has a Main subunit with alternatives
    /// fast/slow (DEFAULT fast), B is plain, M is request fodder.
    fn playground() -> (tempfile::TempDir, UnitTree) {
        let tmp = tempfile::tempdir().unwrap();
        let r = tmp.path();
        write(r, "A/Config", "REQUIRES B\n");
        mkdir(r, "A/AMain/fast");
        mkdir(r, "A/AMain/slow");
        write(r, "A/AMain/Config", "DEFAULT fast\n");
        mkdir(r, "B");
        mkdir(r, "M");
        write(r, "Simulation/Demo/Config", "REQUIRES A\nREQUESTS M\n");
        let tree = scan_tree(r, &ScanOptions::default()).unwrap();
        (tmp, tree)
    }

    fn included(c: &UnitClosure) -> Vec<&str> {
        c.included.iter().map(|s| s.as_str()).collect()
    }

    #[test]
    fn requires_defaults_and_auto_main() {
        let (_t, tree) = playground();
        let c = resolve(&tree, &SetupRequest::for_simulation("Demo")).unwrap();
        assert_eq!(
            included(&c),
            vec!["A", "A/AMain", "A/AMain/fast", "B", "M", "Simulation/Demo"]
        );
        assert_eq!(c.chosen_impl["A/AMain"], "fast");
        assert!(c.dropped_requests.is_empty());
    }

    #[test]
    fn without_unit_drops_requests_with_recorded_reason() {
        let (_t, tree) = playground();
        let mut req = SetupRequest::for_simulation("Demo");
        req.without_units = vec!["M".into()];
        let c = resolve(&tree, &req).unwrap();
        assert!(!c.includes("M"));
        assert_eq!(
            c.dropped_requests,
            vec![("M".to_string(), "excluded by command line".to_string())]
        );
    }

    #[test]
    fn without_unit_cannot_drop_a_hard_requirement() {
        let (_t, tree) = playground();
        let mut req = SetupRequest::for_simulation("Demo");
        req.without_units = vec!["B".into()];
        let err = resolve(&tree, &req).unwrap_err();
        assert_eq!(
            err,
            ResolveError::ExcludedRequireTarget {
                target: "B".into(),
                required_by: "A/Config".into(),
                excluded_by: "B".into(),
            }
        );
    }

    #[test]
    fn missing_requires_target_fails_missing_request_is_dropped() {
        let tmp = tempfile::tempdir().unwrap();
        let r = tmp.path();
        write(r, "Simulation/Bad/Config", "REQUIRES Ghost\n");
        write(r, "Simulation/Soft/Config", "REQUESTS Ghost\n");
        let tree = scan_tree(r, &ScanOptions::default()).unwrap();
        let err = resolve(&tree, &SetupRequest::for_simulation("Bad")).unwrap_err();
        assert!(matches!(err, ResolveError::MissingRequireTarget { .. }));
        let c = resolve(&tree, &SetupRequest::for_simulation("Soft")).unwrap();
        assert_eq!(c.dropped_requests, vec![("Ghost".to_string(), "target not found".to_string())]);
    }

    #[test]
    fn unit_impl_overrides_the_default() {
        let (_t, tree) = playground();
        let mut req = SetupRequest::for_simulation("Demo");
        req.impl_choices.insert("A/AMain".into(), "slow".into());
        let c = resolve(&tree, &req).unwrap();
        assert!(c.includes("A/AMain/slow"));
        assert!(!c.includes("A/AMain/fast"));
        assert_eq!(c.chosen_impl["A/AMain"], "slow");
    }

    #[test]
    fn unknown_override_targets_are_rejected() {
        let (_t, tree) = playground();
        let mut req = SetupRequest::for_simulation("Demo");
        req.impl_choices.insert("A/AMain".into(), "warp".into());
        assert!(matches!(
            resolve(&tree, &req),
            Err(ResolveError::UnknownOverrideTarget { .. })
        ));
        let mut req = SetupRequest::for_simulation("Demo");
        req.with_units = vec!["Ghost".into()];
        assert!(matches!(
            resolve(&tree, &req),
            Err(ResolveError::UnknownOverrideTarget { .. })
        ));
    }

    #[test]
    fn unknown_simulation_is_rejected() {
        let (_t, tree) = playground();
        assert_eq!(
            resolve(&tree, &SetupRequest::for_simulation("Nope")).unwrap_err(),
            ResolveError::UnknownSimulation { name: "Nope".into() }
        );
    }

    #[test]
    fn a_late_requirement_beats_an_already_applied_default() {
        // B requires a path through the non-default alternative; the
        // default is walked first, then resolution converges on slow.
        let tmp = tempfile::tempdir().unwrap();
        let r = tmp.path();
        mkdir(r, "A/AMain/fast");
        mkdir(r, "A/AMain/slow/inner");
        write(r, "A/AMain/Config", "DEFAULT fast\n");
        write(r, "B/Config", "REQUIRES A/AMain/slow/inner\n");
        write(r, "Simulation/Demo/Config", "REQUIRES A\nREQUIRES B\n");
        let tree = scan_tree(r, &ScanOptions::default()).unwrap();
        let c = resolve(&tree, &SetupRequest::for_simulation("Demo")).unwrap();
        assert!(c.includes("A/AMain/slow"));
        assert!(c.includes("A/AMain/slow/inner"));
        assert!(!c.includes("A/AMain/fast"));
        assert_eq!(c.chosen_impl["A/AMain"], "slow");
    }

    #[test]
    fn contradictory_hard_requirements_fail() {
        let tmp = tempfile::tempdir().unwrap();
        let r = tmp.path();
        mkdir(r, "A/AMain/fast");
        mkdir(r, "A/AMain/slow");
        write(r, "B/Config", "REQUIRES A/AMain/slow\n");
        write(r, "Simulation/Demo/Config", "REQUIRES A/AMain/fast\nREQUIRES B\n");
        let tree = scan_tree(r, &ScanOptions::default()).unwrap();
        assert!(matches!(
            resolve(&tree, &SetupRequest::for_simulation("Demo")),
            Err(ResolveError::ImplementationConflict { .. })
        ));
    }

    #[test]
    fn explicit_choice_redirects_a_shallow_requirement() {
        let tmp = tempfile::tempdir().unwrap();
        let r = tmp.path();
        mkdir(r, "A/AMain/fast");
        mkdir(r, "A/AMain/slow");
        write(r, "Simulation/Demo/Config", "REQUIRES A/AMain/slow\n");
        let tree = scan_tree(r, &ScanOptions::default()).unwrap();
        let mut req = SetupRequest::for_simulation("Demo");
        req.impl_choices.insert("A/AMain".into(), "fast".into());
        let c = resolve(&tree, &req).unwrap();
        assert!(c.includes("A/AMain/fast"));
        assert!(!c.includes("A/AMain/slow"));
        assert_eq!(
            c.redirected_requires,
            vec![("A/AMain/slow".to_string(), "fast".to_string())]
        );
    }

    #[test]
    fn explicit_choice_cannot_satisfy_a_deep_requirement() {
        let tmp = tempfile::tempdir().unwrap();
        let r = tmp.path();
        mkdir(r, "A/AMain/fast");
        mkdir(r, "A/AMain/slow/inner");
        write(r, "Simulation/Demo/Config", "REQUIRES A/AMain/slow/inner\n");
        let tree = scan_tree(r, &ScanOptions::default()).unwrap();
        let mut req = SetupRequest::for_simulation("Demo");
        req.impl_choices.insert("A/AMain".into(), "fast".into());
        assert!(matches!(
            resolve(&tree, &req),
            Err(ResolveError::ImplementationConflict { .. })
        ));
    }

    #[test]
    fn mutually_requiring_units_resolve_without_divergence() {
        let tmp = tempfile::tempdir().unwrap();
        let r = tmp.path();
        write(r, "A/Config", "REQUIRES B\n");
        write(r, "B/Config", "REQUIRES A\n");
        write(r, "Simulation/Demo/Config", "REQUIRES A\n");
        let tree = scan_tree(r, &ScanOptions::default()).unwrap();
        let c = resolve(&tree, &SetupRequest::for_simulation("Demo")).unwrap();
        assert!(c.includes("A") && c.includes("B"));
    }

    #[test]
    fn resolution_is_idempotent_and_directive_order_independent() {
        let tmp = tempfile::tempdir().unwrap();
        let r = tmp.path();
        mkdir(r, "A/AMain/fast");
        mkdir(r, "A/AMain/slow");
        write(r, "A/AMain/Config", "DEFAULT fast\n");
        mkdir(r, "B");
        mkdir(r, "M");
        write(r, "Simulation/Demo/Config", "REQUIRES A\nREQUESTS M\nREQUIRES B\n");
        let tree = scan_tree(r, &ScanOptions::default()).unwrap();
        let first = resolve(&tree, &SetupRequest::for_simulation("Demo")).unwrap();
        let again = resolve(&tree, &SetupRequest::for_simulation("Demo")).unwrap();
        assert_eq!(first, again);

        write(r, "Simulation/Demo/Config", "REQUIRES B\nREQUESTS M\nREQUIRES A\n");
        let tree = scan_tree(r, &ScanOptions::default()).unwrap();
        let reordered = resolve(&tree, &SetupRequest::for_simulation("Demo")).unwrap();
        assert_eq!(first.included, reordered.included);
        assert_eq!(first.chosen_impl, reordered.chosen_impl);
    }

    #[test]
    fn with_and_without_overlap_is_a_usage_error() {
        let (_t, tree) = playground();
        let mut req = SetupRequest::for_simulation("Demo");
        req.with_units = vec!["A/AMain".into()];
        req.without_units = vec!["A".into()];
        assert!(matches!(
            resolve(&tree, &req),
            Err(ResolveError::OverlappingRequest { .. })
        ));
    }

    #[test]
    fn enumerate_counts_the_cartesian_product() {
        let tmp = tempfile::tempdir().unwrap();
        let r = tmp.path();
        mkdir(r, "Simulation");
        mkdir(r, "A/AOne/x");
        mkdir(r, "A/AOne/y");
        mkdir(r, "A/AOne/z");
        mkdir(r, "A/ATwo/p");
        mkdir(r, "A/ATwo/q");
        let tree = scan_tree(r, &ScanOptions::default()).unwrap();
        let configs = enumerate_valid_configurations(&tree, "A").unwrap();
        assert_eq!(configs.len(), 6);
        assert!(configs.iter().all(|m| m.len() == 2));
        assert_eq!(configs[0]["A/AOne"], "x");
        assert_eq!(configs[0]["A/ATwo"], "p");
    }

    #[test]
    fn enumerate_degenerate_cases() {
        let tmp = tempfile::tempdir().unwrap();
        let r = tmp.path();
        mkdir(r, "Simulation");
        mkdir(r, "A/AMain/only");
        mkdir(r, "B");
        let tree = scan_tree(r, &ScanOptions::default()).unwrap();
        assert_eq!(enumerate_valid_configurations(&tree, "A").unwrap().len(), 1);
        let empty = enumerate_valid_configurations(&tree, "B").unwrap();
        assert_eq!(empty, vec![BTreeMap::new()]);
        assert!(matches!(
            enumerate_valid_configurations(&tree, "Simulation"),
            Err(ResolveError::UnknownUnit { .. })
        ));
    }

    #[test]
    fn normalized_request_is_canonical() {
        let mut req = SetupRequest::for_simulation("Demo");
        assert_eq!(req.normalized(), "with=- without=- impl=- parfile=-");
        req.with_units = vec!["B".into(), "A".into(), "B".into()];
        req.without_units = vec!["M".into()];
        req.impl_choices.insert("A/AMain".into(), "slow".into());
        req.parfile = Some("flash.par".into());
        assert_eq!(
            req.normalized(),
            "with=A,B without=M impl=A/AMain=slow parfile=flash.par"
        );
    }
}
