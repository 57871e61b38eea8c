//! Build-manifest emission and selection explanations.
//!
//! The manifest is the deliverable of a `setup` run: one text file that
//! pins down exactly which source file serves each routine, every
//! runtime parameter with its full override chain, the variable index
//! assignment, and the unit initialization/finalization orders. The
//! format is line-oriented so regression diffs stay readable:
//!
//! ```text
//! MANIFEST 1 composekit 0.1.0
//! SETUP Sedov
//! REQUEST with=- without=- impl=- parfile=-
//! HASH sha256:<hex>
//! FILE <routine> <path> [null]
//! PARAM <name> <TYPE> <value> <source>=<value>...
//! VAR <name> <index>
//! INIT <k> <unit>
//! FINAL <k> <unit>
//! DROP <path> <reason>
//! ```
//!
//! Serialization is byte-deterministic (LF, UTF-8, sorted records); the
//! hash covers every line except the `HASH` line itself, so two
//! manifests are equal exactly when their hashes are. A JSON rendering
//! of the same content is emitted alongside for tooling.

use crate::arbitrator::{Candidate, FileMap, InitOrder, ParameterTable};
use crate::config::ParamType;
use crate::resolver::{SetupRequest, UnitClosure};
use crate::TOOL_VERSION;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

pub const MANIFEST_FORMAT_VERSION: u32 = 1;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ManifestError {
    #[error("manifest line {line}: {reason}")]
    Syntax { line: usize, reason: String },
    #[error("manifest content hash mismatch: header says {header}, content is {actual}")]
    HashMismatch { header: String, actual: String },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FileRecord {
    pub routine: String,
    pub path: String,
    /// Selected file is the unit-root null stub.
    pub null: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParamRecord {
    pub name: String,
    pub ptype: ParamType,
    pub value: String,
    /// Every layer in ascending precedence: (source, value). The first
    /// entry is the defining Config, the last matches `value`.
    pub chain: Vec<(String, String)>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Manifest {
    pub format_version: u32,
    pub tool_version: String,
    pub setup_name: String,
    /// Normalized command-line request.
    pub request: String,
    /// `sha256:<hex>` over all serialized lines except the HASH line.
    pub content_hash: String,
    pub files: Vec<FileRecord>,
    pub parameters: Vec<ParamRecord>,
    pub variables: Vec<(String, u32)>,
    pub init_order: Vec<String>,
    pub finalize_order: Vec<String>,
    pub dropped_requests: Vec<(String, String)>,
}

/// Assemble a manifest from one consistent set of arbitration results.
pub fn emit_manifest(
    files: &FileMap,
    params: &ParameterTable,
    variables: &crate::arbitrator::VariableIndex,
    init: &InitOrder,
    closure: &UnitClosure,
    request: &SetupRequest,
) -> Manifest {
    let files = files
        .iter()
        .map(|(routine, c)| FileRecord {
            routine: routine.clone(),
            path: c.selected_path.clone(),
            null: c.is_stub,
        })
        .collect();
    let parameters = params
        .iter()
        .map(|(name, e)| {
            let mut chain = vec![(e.defining_path.clone(), e.default_value.clone())];
            chain.extend(e.overridden_by.iter().cloned());
            ParamRecord {
                name: name.clone(),
                ptype: e.ptype,
                value: e.effective_value.clone(),
                chain,
            }
        })
        .collect();
    let mut manifest = Manifest {
        format_version: MANIFEST_FORMAT_VERSION,
        tool_version: TOOL_VERSION.to_string(),
        setup_name: closure.simulation_name.clone(),
        request: request.normalized(),
        content_hash: String::new(),
        files,
        parameters,
        variables: variables.iter().map(|(n, i)| (n.clone(), *i)).collect(),
        init_order: init.order.clone(),
        finalize_order: init.finalize_order(),
        dropped_requests: closure.dropped_requests.clone(),
    };
    manifest.content_hash = manifest.compute_hash();
    manifest
}

impl Manifest {
    /// All serialized lines except HASH, in file order.
    fn hashed_lines(&self) -> Vec<String> {
        let mut lines = vec![
            format!("MANIFEST {} composekit {}", self.format_version, self.tool_version),
            format!("SETUP {}", self.setup_name),
            format!("REQUEST {}", self.request),
        ];
        for f in &self.files {
            let null = if f.null { " null" } else { "" };
            lines.push(format!("FILE {} {}{null}", f.routine, f.path));
        }
        for p in &self.parameters {
            let chain: String = p
                .chain
                .iter()
                .map(|(src, val)| format!(" {src}={val}"))
                .collect();
            lines.push(format!("PARAM {} {} {}{chain}", p.name, p.ptype, p.value));
        }
        for (name, index) in &self.variables {
            lines.push(format!("VAR {name} {index}"));
        }
        for (k, unit) in self.init_order.iter().enumerate() {
            lines.push(format!("INIT {} {unit}", k + 1));
        }
        for (k, unit) in self.finalize_order.iter().enumerate() {
            lines.push(format!("FINAL {} {unit}", k + 1));
        }
        for (path, reason) in &self.dropped_requests {
            lines.push(format!("DROP {path} {reason}"));
        }
        lines
    }

    /// `sha256:<hex>` over the hashed lines, each with a LF terminator.
    pub fn compute_hash(&self) -> String {
        let mut hasher = Sha256::new();
        for line in self.hashed_lines() {
            hasher.update(line.as_bytes());
            hasher.update(b"\n");
        }
        format!("sha256:{:x}", hasher.finalize())
    }

    /// The canonical text form: header (HASH fourth), then the sorted
    /// record sections.
    pub fn to_text(&self) -> String {
        let lines = self.hashed_lines();
        let mut out = String::new();
        for (i, line) in lines.iter().enumerate() {
            out.push_str(line);
            out.push('\n');
            if i == 2 {
                out.push_str(&format!("HASH {}\n", self.content_hash));
            }
        }
        out
    }

    /// Pretty JSON rendering of the same content.
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("manifest serializes");
        s.push('\n');
        s
    }
}

/// Split a record line into fields on spaces, keeping `"`-quoted spans
/// (which may appear inside a field, as in `src="two words"`) intact.
fn split_fields(line: &str) -> Vec<String> {
    let mut fields = Vec::new();
    let mut cur = String::new();
    let mut in_quotes = false;
    for ch in line.chars() {
        match ch {
            '"' => {
                in_quotes = !in_quotes;
                cur.push(ch);
            }
            ' ' if !in_quotes => {
                if !cur.is_empty() {
                    fields.push(std::mem::take(&mut cur));
                }
            }
            _ => cur.push(ch),
        }
    }
    if !cur.is_empty() {
        fields.push(cur);
    }
    fields
}

/// Parse a serialized manifest back to its in-memory form, verifying the
/// content hash.
pub fn parse_manifest(text: &str) -> Result<Manifest, ManifestError> {
    let syntax = |line: usize, reason: &str| ManifestError::Syntax {
        line,
        reason: reason.to_string(),
    };
    let mut manifest = Manifest {
        format_version: 0,
        tool_version: String::new(),
        setup_name: String::new(),
        request: String::new(),
        content_hash: String::new(),
        files: Vec::new(),
        parameters: Vec::new(),
        variables: Vec::new(),
        init_order: Vec::new(),
        finalize_order: Vec::new(),
        dropped_requests: Vec::new(),
    };
    let mut init: Vec<(u32, String)> = Vec::new();
    let mut fin: Vec<(u32, String)> = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let n = idx + 1;
        let (tag, rest) = raw.split_once(' ').ok_or_else(|| syntax(n, "missing record tag"))?;
        match tag {
            "MANIFEST" => {
                let f = split_fields(rest);
                if f.len() != 3 || f[1] != "composekit" {
                    return Err(syntax(n, "malformed MANIFEST header"));
                }
                manifest.format_version =
                    f[0].parse().map_err(|_| syntax(n, "bad format version"))?;
                manifest.tool_version = f[2].clone();
            }
            "SETUP" => manifest.setup_name = rest.to_string(),
            "REQUEST" => manifest.request = rest.to_string(),
            "HASH" => manifest.content_hash = rest.to_string(),
            "FILE" => {
                let f = split_fields(rest);
                match f.as_slice() {
                    [routine, path] => manifest.files.push(FileRecord {
                        routine: routine.clone(),
                        path: path.clone(),
                        null: false,
                    }),
                    [routine, path, nul] if nul == "null" => manifest.files.push(FileRecord {
                        routine: routine.clone(),
                        path: path.clone(),
                        null: true,
                    }),
                    _ => return Err(syntax(n, "malformed FILE record")),
                }
            }
            "PARAM" => {
                let f = split_fields(rest);
                if f.len() < 4 {
                    return Err(syntax(n, "malformed PARAM record"));
                }
                let ptype = ParamType::parse(&f[1])
                    .ok_or_else(|| syntax(n, "unknown parameter type"))?;
                let chain = f[3..]
                    .iter()
                    .map(|link| {
                        link.split_once('=')
                            .map(|(s, v)| (s.to_string(), v.to_string()))
                            .ok_or_else(|| syntax(n, "malformed chain link"))
                    })
                    .collect::<Result<_, _>>()?;
                manifest.parameters.push(ParamRecord {
                    name: f[0].clone(),
                    ptype,
                    value: f[2].clone(),
                    chain,
                });
            }
            "VAR" => {
                let f = split_fields(rest);
                if f.len() != 2 {
                    return Err(syntax(n, "malformed VAR record"));
                }
                let index = f[1].parse().map_err(|_| syntax(n, "bad variable index"))?;
                manifest.variables.push((f[0].clone(), index));
            }
            "INIT" | "FINAL" => {
                let f = split_fields(rest);
                if f.len() != 2 {
                    return Err(syntax(n, "malformed order record"));
                }
                let pos: u32 = f[0].parse().map_err(|_| syntax(n, "bad order position"))?;
                let entry = (pos, f[1].clone());
                if tag == "INIT" {
                    init.push(entry);
                } else {
                    fin.push(entry);
                }
            }
            "DROP" => {
                let (path, reason) =
                    rest.split_once(' ').ok_or_else(|| syntax(n, "malformed DROP record"))?;
                manifest.dropped_requests.push((path.to_string(), reason.to_string()));
            }
            _ => return Err(syntax(n, "unknown record tag")),
        }
    }
    for (want, got) in init.iter().enumerate() {
        if got.0 != want as u32 + 1 {
            return Err(syntax(0, "INIT positions are not consecutive from 1"));
        }
        manifest.init_order.push(got.1.clone());
    }
    for (want, got) in fin.iter().enumerate() {
        if got.0 != want as u32 + 1 {
            return Err(syntax(0, "FINAL positions are not consecutive from 1"));
        }
        manifest.finalize_order.push(got.1.clone());
    }
    let actual = manifest.compute_hash();
    if actual != manifest.content_hash {
        return Err(ManifestError::HashMismatch {
            header: manifest.content_hash,
            actual,
        });
    }
    Ok(manifest)
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ExplainError {
    #[error("`{name}` is neither a routine nor a parameter of this setup")]
    UnknownName { name: String },
}

/// Why a manifest entry is the way it is: either the candidate ranking
/// behind a routine's file selection, or a parameter's precedence chain.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub enum Explanation {
    Routine {
        name: String,
        selected: String,
        /// Which selection rule decided: application supremacy, depth, or
        /// stub fallback.
        rule: String,
        candidates: Vec<Candidate>,
    },
    Parameter {
        name: String,
        ptype: ParamType,
        effective: String,
        /// (source, value) in ascending precedence.
        chain: Vec<(String, String)>,
    },
}

pub fn explain(
    name: &str,
    files: &FileMap,
    params: &ParameterTable,
) -> Result<Explanation, ExplainError> {
    if let Some(choice) = files.get(name) {
        let rule = if choice.is_simulation {
            "application directory overrides any depth"
        } else if choice.is_stub {
            "no included implementation; null stub fallback"
        } else {
            "deepest included directory wins"
        };
        return Ok(Explanation::Routine {
            name: name.to_string(),
            selected: choice.selected_path.clone(),
            rule: rule.to_string(),
            candidates: choice.candidates.clone(),
        });
    }
    if let Some(entry) = params.get(name) {
        let mut chain = vec![(entry.defining_path.clone(), entry.default_value.clone())];
        chain.extend(entry.overridden_by.iter().cloned());
        return Ok(Explanation::Parameter {
            name: name.to_string(),
            ptype: entry.ptype,
            effective: entry.effective_value.clone(),
            chain,
        });
    }
    Err(ExplainError::UnknownName { name: name.to_string() })
}

impl Explanation {
    /// Multi-line human-readable rendering.
    pub fn to_text(&self) -> String {
        match self {
            Explanation::Routine { name, selected, rule, candidates } => {
                let mut out = format!("routine {name}\n  selected {selected}\n  rule: {rule}\n  candidates:\n");
                for c in candidates {
                    let mut flags = String::new();
                    if c.is_simulation {
                        flags.push_str(" [application]");
                    }
                    if c.is_stub {
                        flags.push_str(" [null stub]");
                    }
                    out.push_str(&format!("    {} (depth {}){flags}\n", c.path, c.depth));
                }
                out
            }
            Explanation::Parameter { name, ptype, effective, chain } => {
                let mut out = format!("parameter {name} {ptype}\n  effective {effective}\n  chain:\n");
                for (k, (src, val)) in chain.iter().enumerate() {
                    let role = if k == 0 { "default" } else { "override" };
                    out.push_str(&format!("    {}. {src} {role} {val}\n", k + 1));
                }
                out
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arbitrator::{
        assign_variable_indices, compute_init_order, merge_parameters, select_implementations,
    };
    use crate::resolver::resolve;
    use crate::tree::{scan_tree, ScanOptions};
    use std::fs;
    use std::path::Path;

    const STUB: &str = "!!****f* s\n!!***\nsubroutine x()\nend subroutine\n";

    fn write(root: &Path, rel: &str, content: &str) {
        let p = root.join(rel);
        fs::create_dir_all(p.parent().unwrap()).unwrap();
        fs::write(p, content).unwrap();
    }

    fn demo_manifest() -> Manifest {
        let tmp = tempfile::tempdir().unwrap();
        write(tmp.path(), "Grid/Grid_init.F90", STUB);
        write(tmp.path(), "Grid/GridMain/Grid_init.F90", STUB);
        write(tmp.path(), "Grid/Config", "PARAMETER gr_refine INTEGER 2\nVARIABLE dens\n");
        write(tmp.path(), "IO/IO_write.F90", STUB);
        write(tmp.path(), "IO/IOMain/IO_write.F90", STUB);
        write(tmp.path(), "IO/Config", "REQUIRES Grid\n");
        write(
            tmp.path(),
            "Simulation/Demo/Config",
            "REQUIRES Grid\nREQUESTS IO\nPARAMETER gr_refine INTEGER 4\nPARAMETER label STRING \"two words\"\n",
        );
        let tree = scan_tree(tmp.path(), &ScanOptions::default()).unwrap();
        let request = SetupRequest::for_simulation("Demo");
        let closure = resolve(&tree, &request).unwrap();
        let files = select_implementations(&tree, &closure).unwrap();
        let par = crate::config::parse_parfile("gr_refine = 8\n", "demo.par").unwrap();
        let params = merge_parameters(&tree, &closure, Some(&par)).unwrap();
        let vars = assign_variable_indices(&tree, &closure);
        let init = compute_init_order(&tree, &closure);
        emit_manifest(&files, &params, &vars, &init, &closure, &request)
    }

    #[test]
    fn text_form_has_ordered_sections_and_verifiable_hash() {
        let m = demo_manifest();
        let text = m.to_text();
        let lines: Vec<&str> = text.lines().collect();
        assert!(lines[0].starts_with("MANIFEST 1 composekit "));
        assert_eq!(lines[1], "SETUP Demo");
        assert_eq!(lines[2], "REQUEST with=- without=- impl=- parfile=-");
        assert!(lines[3].starts_with("HASH sha256:"));
        let tags: Vec<&str> = lines.iter().map(|l| l.split(' ').next().unwrap()).collect();
        let expect = ["MANIFEST", "SETUP", "REQUEST", "HASH", "FILE", "PARAM", "VAR", "INIT", "FINAL"];
        let mut pos = 0;
        for tag in tags {
            let here = expect.iter().position(|t| *t == tag).unwrap();
            assert!(here >= pos, "sections out of order at {tag}");
            pos = here;
        }
        assert_eq!(m.content_hash, m.compute_hash());
    }

    #[test]
    fn serialized_manifest_parses_back_to_equal_content() {
        let m = demo_manifest();
        let parsed = parse_manifest(&m.to_text()).unwrap();
        assert_eq!(parsed, m);
    }

    #[test]
    fn quoted_string_values_survive_the_round_trip() {
        let m = demo_manifest();
        let p = m.parameters.iter().find(|p| p.name == "label").unwrap();
        assert_eq!(p.value, "\"two words\"");
        let parsed = parse_manifest(&m.to_text()).unwrap();
        let q = parsed.parameters.iter().find(|p| p.name == "label").unwrap();
        assert_eq!(q, p);
    }

    #[test]
    fn stub_selections_carry_the_null_flag() {
        let m = demo_manifest();
        let io = m.files.iter().find(|f| f.routine == "IO_write").unwrap();
        assert!(!io.null, "IO is included via REQUESTS, not stubbed");
        let grid = m.files.iter().find(|f| f.routine == "Grid_init").unwrap();
        assert_eq!(grid.path, "Grid/GridMain/Grid_init.F90");
    }

    #[test]
    fn tampering_with_any_record_breaks_the_hash() {
        let m = demo_manifest();
        let text = m.to_text();
        let tampered = text.replace("VAR dens 1", "VAR dens 2");
        assert_ne!(text, tampered);
        assert!(matches!(parse_manifest(&tampered), Err(ManifestError::HashMismatch { .. })));
    }

    #[test]
    fn hash_tracks_content_changes_only() {
        let m = demo_manifest();
        let mut changed = m.clone();
        changed.files[0].path = "elsewhere.F90".to_string();
        assert_ne!(changed.compute_hash(), m.compute_hash());
        let same = m.clone();
        assert_eq!(same.compute_hash(), m.compute_hash());
    }

    #[test]
    fn json_rendering_round_trips_through_serde() {
        let m = demo_manifest();
        let back: Manifest = serde_json::from_str(&m.to_json()).unwrap();
        assert_eq!(back, m);
    }

    #[test]
    fn explanations_cover_routines_parameters_and_unknowns() {
        let tmp = tempfile::tempdir().unwrap();
        write(tmp.path(), "Grid/Grid_init.F90", STUB);
        write(tmp.path(), "Grid/GridMain/Grid_init.F90", STUB);
        write(tmp.path(), "Grid/Config", "PARAMETER gr_refine INTEGER 2\n");
        write(tmp.path(), "Simulation/Demo/Config", "REQUIRES Grid\n");
        let tree = scan_tree(tmp.path(), &ScanOptions::default()).unwrap();
        let closure = resolve(&tree, &SetupRequest::for_simulation("Demo")).unwrap();
        let files = select_implementations(&tree, &closure).unwrap();
        let params = merge_parameters(&tree, &closure, None).unwrap();

        let routine = explain("Grid_init", &files, &params).unwrap();
        let text = routine.to_text();
        assert!(text.contains("selected Grid/GridMain/Grid_init.F90"));
        assert!(text.contains("deepest included directory wins"));
        assert!(text.contains("[null stub]"));

        let param = explain("gr_refine", &files, &params).unwrap();
        assert!(param.to_text().contains("1. Grid/Config default 2"));

        assert_eq!(
            explain("nope", &files, &params),
            Err(ExplainError::UnknownName { name: "nope".into() })
        );
    }
}
