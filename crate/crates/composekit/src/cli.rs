//! Command-line front end.
//!
//! Subcommands: `setup` (resolve one application and write its manifest
//! into `--objdir`), `validate` (tree-wide checks), `explain` (why a
//! routine or parameter resolved the way it did), `list` (applications),
//! `enumerate` (valid implementation combinations of a unit), and `test`
//! (regression suites). Exit codes: 0 clean, 1 validation or regression
//! failures, 2 usage/resolution errors.
//!
//! All outputs are computed before anything is written; files land in
//! the output directory via write-then-rename so a failed run never
//! leaves a partial manifest.

use crate::arbitrator::{
    assign_variable_indices, compute_init_order, merge_parameters, select_implementations,
};
use crate::config::{parse_parfile, ParFile};
use crate::emitter::{emit_manifest, explain};
use crate::harness::{parse_suite, run_suite, Mode};
use crate::resolver::{enumerate_valid_configurations, resolve, SetupRequest};
use crate::tree::{list_simulations, scan_tree, ScanOptions, UnitTree};
use crate::validator::validate_all;
use clap::{Args, Parser, Subcommand, ValueEnum};
use std::error::Error;
use std::fs;
use std::path::{Path, PathBuf};

#[derive(Debug, Parser)]
#[command(name = "composekit", version, about = "Compose applications from a convention-organized component tree")]
struct Cli {
    /// Root of the component tree.
    #[arg(long, env = "COMPOSEKIT_TREE", default_value = ".", global = true, value_name = "PATH")]
    tree: PathBuf,
    /// Source-file extension to scan, with or without the dot (repeatable;
    /// default .F90).
    #[arg(long = "src-ext", global = true, value_name = "EXT")]
    src_ext: Vec<String>,
    /// Output style for reports and listings.
    #[arg(long, value_enum, default_value_t = Format::Text, global = true)]
    format: Format,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Machine,
}

/// Closure-shaping flags shared by `setup` and `explain`.
#[derive(Debug, Default, Args)]
struct SelectionFlags {
    /// Force-include a tree path (repeatable).
    #[arg(long = "with-unit", value_name = "PATH")]
    with_unit: Vec<String>,
    /// Exclude a tree path: its soft requests are dropped (repeatable).
    #[arg(long = "without-unit", value_name = "PATH")]
    without_unit: Vec<String>,
    /// Choose the implementation of a group: <GROUP>=<CHILD> (repeatable).
    #[arg(long = "unit-impl", value_name = "GROUP=CHILD")]
    unit_impl: Vec<String>,
    /// Runtime parameter file; relative paths resolve against --tree.
    #[arg(long, value_name = "PATH")]
    parfile: Option<String>,
}

impl SelectionFlags {
    fn to_request(&self, sim_name: &str) -> Result<SetupRequest, String> {
        let mut request = SetupRequest::for_simulation(sim_name);
        request.with_units = self.with_unit.clone();
        request.without_units = self.without_unit.clone();
        for choice in &self.unit_impl {
            let Some((group, child)) = choice.split_once('=') else {
                return Err(format!("--unit-impl `{choice}`: expected <GROUP>=<CHILD>"));
            };
            if group.is_empty() || child.is_empty() {
                return Err(format!("--unit-impl `{choice}`: expected <GROUP>=<CHILD>"));
            }
            request.impl_choices.insert(group.to_string(), child.to_string());
        }
        request.parfile = self.parfile.clone();
        Ok(request)
    }
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Resolve one application and write its build manifest.
    Setup {
        /// Application name under Simulation/ (e.g. Sedov, unitTest/X).
        sim_name: String,
        /// Directory receiving manifest.txt, manifest.json and report.txt.
        #[arg(long, default_value = "object", value_name = "PATH")]
        objdir: PathBuf,
        #[command(flatten)]
        selection: SelectionFlags,
    },
    /// Run every architectural check across the whole tree.
    Validate,
    /// Show why a routine or parameter resolved the way it did.
    Explain {
        /// Application whose manifest provides the context.
        sim_name: String,
        /// Routine or parameter name.
        name: String,
        #[command(flatten)]
        selection: SelectionFlags,
    },
    /// List the buildable applications.
    List,
    /// Count and list the valid implementation combinations of a unit.
    Enumerate {
        /// Unit root path (e.g. Particles, physics/Hydro).
        unit: String,
    },
    /// Run a regression suite against its recorded baselines.
    Test {
        /// Suite file; fixtures and baselines are resolved beside it.
        suite: PathBuf,
        /// Rewrite the baselines instead of comparing against them.
        #[arg(long)]
        record: bool,
    },
}

/// Run the tool on an argument list (without the program name) and
/// return its exit status. The harness calls this in process; the binary
/// is a thin wrapper.
pub fn run(args: &[String]) -> i32 {
    let full = std::iter::once("composekit".to_string()).chain(args.iter().cloned());
    let cli = match Cli::try_parse_from(full) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.exit_code() == 0 { 0 } else { 2 };
            let _ = e.print();
            return code;
        }
    };
    match dispatch(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            let mut cause = e.source();
            while let Some(c) = cause {
                eprintln!("  caused by: {c}");
                cause = c.source();
            }
            2
        }
    }
}

type DynError = Box<dyn Error>;

fn dispatch(cli: &Cli) -> Result<i32, DynError> {
    // The regression runner resolves fixture trees relative to the suite
    // file itself, so it must not scan --tree (which defaults to `.`).
    if let Command::Test { suite, record } = &cli.command {
        let spec = parse_suite(suite)?;
        let mode = if *record { Mode::Record } else { Mode::Check };
        let report = run_suite(&spec, mode)?;
        print!("{report}");
        return Ok(if report.all_passed() { 0 } else { 1 });
    }

    let opts = ScanOptions::with_extensions(&cli.src_ext);
    let tree = scan_tree(&cli.tree, &opts)?;
    match &cli.command {
        Command::Setup { sim_name, objdir, selection } => {
            cmd_setup(cli, &tree, sim_name, objdir, selection)
        }
        Command::Validate => {
            let report = validate_all(&tree, None);
            print!(
                "{}",
                match cli.format {
                    Format::Text => report.to_text(),
                    Format::Machine => report.to_json_lines(),
                }
            );
            Ok(if report.has_errors() { 1 } else { 0 })
        }
        Command::Explain { sim_name, name, selection } => {
            let request = selection.to_request(sim_name)?;
            let closure = resolve(&tree, &request)?;
            let files = select_implementations(&tree, &closure)?;
            let parfile = load_parfile(&cli.tree, &request)?;
            let params = merge_parameters(&tree, &closure, parfile.as_ref())?;
            let explanation = explain(name, &files, &params)?;
            match cli.format {
                Format::Text => print!("{}", explanation.to_text()),
                Format::Machine => println!("{}", serde_json::to_string_pretty(&explanation)?),
            }
            Ok(0)
        }
        Command::List => {
            let sims = list_simulations(&tree);
            match cli.format {
                Format::Text => {
                    for s in &sims {
                        println!("{s}");
                    }
                }
                Format::Machine => println!("{}", serde_json::to_string_pretty(&sims)?),
            }
            Ok(0)
        }
        Command::Enumerate { unit } => {
            let configs = enumerate_valid_configurations(&tree, unit)?;
            match cli.format {
                Format::Text => {
                    println!("{}", configs.len());
                    for c in &configs {
                        let line: Vec<String> =
                            c.iter().map(|(g, child)| format!("{g}={child}")).collect();
                        println!("{}", line.join(" "));
                    }
                }
                Format::Machine => {
                    let doc = serde_json::json!({
                        "unit": unit,
                        "count": configs.len(),
                        "configurations": configs,
                    });
                    println!("{}", serde_json::to_string_pretty(&doc)?);
                }
            }
            Ok(0)
        }
        Command::Test { .. } => unreachable!("handled before the tree scan"),
    }
}

fn load_parfile(tree_root: &Path, request: &SetupRequest) -> Result<Option<ParFile>, DynError> {
    let Some(given) = &request.parfile else { return Ok(None) };
    let path = if Path::new(given).is_absolute() {
        PathBuf::from(given)
    } else {
        tree_root.join(given)
    };
    let text = fs::read_to_string(&path)
        .map_err(|e| format!("parfile {}: {e}", path.display()))?;
    Ok(Some(parse_parfile(&text, given)?))
}

fn cmd_setup(
    cli: &Cli,
    tree: &UnitTree,
    sim_name: &str,
    objdir: &Path,
    selection: &SelectionFlags,
) -> Result<i32, DynError> {
    let request = selection.to_request(sim_name)?;
    let closure = resolve(tree, &request)?;

    // Refuse to arbitrate on a tree that breaks the architectural laws:
    // the manifest would bake the violations in.
    let report = validate_all(tree, Some(&closure));
    if report.has_errors() {
        write_outputs(objdir, &[("report.txt", report.to_text())])?;
        remove_if_present(&objdir.join("manifest.txt"))?;
        remove_if_present(&objdir.join("manifest.json"))?;
        eprint!("{}", report.to_text());
        eprintln!(
            "setup {sim_name}: {} validation error(s); no manifest written",
            report.error_count()
        );
        return Ok(1);
    }

    let files = select_implementations(tree, &closure)?;
    let parfile = load_parfile(&cli.tree, &request)?;
    let params = merge_parameters(tree, &closure, parfile.as_ref())?;
    let vars = assign_variable_indices(tree, &closure);
    let init = compute_init_order(tree, &closure);
    let manifest = emit_manifest(&files, &params, &vars, &init, &closure, &request);
    for w in &init.warnings {
        eprintln!("warning: {w}");
    }

    write_outputs(
        objdir,
        &[
            ("manifest.txt", manifest.to_text()),
            ("manifest.json", manifest.to_json()),
            ("report.txt", report.to_text()),
        ],
    )?;
    let null_count = manifest.files.iter().filter(|f| f.null).count();
    match cli.format {
        Format::Text => {
            println!(
                "setup {sim_name}: {} files ({null_count} null), {} parameters, {} variables, {} warnings",
                manifest.files.len(),
                manifest.parameters.len(),
                manifest.variables.len(),
                report.warning_count(),
            );
            println!("{}", objdir.join("manifest.txt").display());
            println!("{}", manifest.content_hash);
        }
        Format::Machine => {
            let doc = serde_json::json!({
                "setup": sim_name,
                "objdir": objdir.display().to_string(),
                "hash": manifest.content_hash,
                "files": manifest.files.len(),
                "null_files": null_count,
                "warnings": report.warning_count(),
            });
            println!("{}", serde_json::to_string_pretty(&doc)?);
        }
    }
    Ok(0)
}

/// Write each file into `objdir` via a temporary sibling and rename, so
/// readers never observe partial content.
fn write_outputs(objdir: &Path, outputs: &[(&str, String)]) -> Result<(), DynError> {
    fs::create_dir_all(objdir)
        .map_err(|e| format!("creating {}: {e}", objdir.display()))?;
    for (name, content) in outputs {
        let tmp = objdir.join(format!(".{name}.tmp"));
        let dst = objdir.join(name);
        fs::write(&tmp, content).map_err(|e| format!("writing {}: {e}", tmp.display()))?;
        fs::rename(&tmp, &dst)
            .map_err(|e| format!("renaming into {}: {e}", dst.display()))?;
    }
    Ok(())
}

fn remove_if_present(path: &Path) -> Result<(), DynError> {
    match fs::remove_file(path) {
        Ok(()) => Ok(()),
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => Ok(()),
        Err(e) => Err(format!("removing {}: {e}", path.display()).into()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn write(root: &Path, rel: &str, content: &str) {
        let p = root.join(rel);
        fs::create_dir_all(p.parent().unwrap()).unwrap();
        fs::write(p, content).unwrap();
    }

    const STUB: &str = "!!****f* s\n!!***\nsubroutine x()\nend subroutine\n";

    fn demo_tree() -> tempfile::TempDir {
        let tmp = tempfile::tempdir().unwrap();
        write(tmp.path(), "Grid/Grid_init.F90", STUB);
        write(tmp.path(), "Grid/GridMain/Grid_init.F90", STUB);
        write(tmp.path(), "Grid/Config", "PARAMETER gr_refine INTEGER 2\n");
        write(tmp.path(), "Simulation/Demo/Config", "REQUIRES Grid\n");
        tmp
    }

    fn run_args(args: &[&str]) -> i32 {
        run(&args.iter().map(|s| s.to_string()).collect::<Vec<_>>())
    }

    #[test]
    fn setup_writes_manifest_report_and_json_atomically() {
        let tree = demo_tree();
        let out = tempfile::tempdir().unwrap();
        let objdir = out.path().join("object");
        let code = run_args(&[
            "setup", "Demo",
            "--tree", tree.path().to_str().unwrap(),
            "--objdir", objdir.to_str().unwrap(),
        ]);
        assert_eq!(code, 0);
        let manifest = fs::read_to_string(objdir.join("manifest.txt")).unwrap();
        assert!(manifest.contains("FILE Grid_init Grid/GridMain/Grid_init.F90"));
        assert!(objdir.join("manifest.json").is_file());
        assert_eq!(fs::read_to_string(objdir.join("report.txt")).unwrap(), "");
        assert!(!objdir.join(".manifest.txt.tmp").exists());
    }

    #[test]
    fn unknown_setup_name_exits_2_and_writes_nothing() {
        let tree = demo_tree();
        let out = tempfile::tempdir().unwrap();
        let objdir = out.path().join("object");
        let code = run_args(&[
            "setup", "Absent",
            "--tree", tree.path().to_str().unwrap(),
            "--objdir", objdir.to_str().unwrap(),
        ]);
        assert_eq!(code, 2);
        assert!(!objdir.exists());
    }

    #[test]
    fn validation_errors_exit_1_and_withhold_the_manifest() {
        let tree = demo_tree();
        // Deep implementation with no stub: NULL-01.
        write(tree.path(), "Grid/GridMain/Grid_rogue.F90", STUB);
        let out = tempfile::tempdir().unwrap();
        let objdir = out.path().join("object");
        let code = run_args(&[
            "setup", "Demo",
            "--tree", tree.path().to_str().unwrap(),
            "--objdir", objdir.to_str().unwrap(),
        ]);
        assert_eq!(code, 1);
        assert!(!objdir.join("manifest.txt").exists());
        let report = fs::read_to_string(objdir.join("report.txt")).unwrap();
        assert!(report.contains("NULL-01"));
    }

    #[test]
    fn malformed_unit_impl_flag_is_a_usage_error() {
        let tree = demo_tree();
        let code = run_args(&[
            "setup", "Demo",
            "--tree", tree.path().to_str().unwrap(),
            "--unit-impl", "GridMain",
        ]);
        assert_eq!(code, 2);
    }

    #[test]
    fn unknown_flags_are_usage_errors() {
        assert_eq!(run_args(&["setup", "Demo", "--frobnicate"]), 2);
        assert_eq!(run_args(&["no-such-subcommand"]), 2);
    }
}
