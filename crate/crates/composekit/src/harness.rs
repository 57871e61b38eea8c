//! Regression suite runner.
//!
//! A suite file lists setup invocations against fixture trees, one per
//! line:
//!
//! ```text
//! TEST <name> <fixture-dir> :: <argv...> :: <expected-exit>
//! ```
//!
//! Fixture paths are resolved relative to the suite file. Each case runs
//! the command line in process against a scratch output directory; the
//! emitted manifest and validation report are compared byte-for-byte
//! against baselines stored beside the suite file in
//! `baselines/<name>.manifest` and `baselines/<name>.report`. `record`
//! mode rewrites the baselines instead (leaving already-identical files
//! untouched); `check` mode fails cases whose exit status or outputs
//! drift, reporting a minimal line diff.

use crate::tree::{NodeKind, UnitTree};
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}:{line}: {reason}")]
    Suite { path: String, line: usize, reason: String },
    #[error("case `{case}`: fixture directory {path} does not exist")]
    MissingFixture { case: String, path: String },
    #[error("case `{case}`: baseline {path} is absent (run in record mode first)")]
    BaselineAbsent { case: String, path: String },
}

fn io_err(path: &Path, source: std::io::Error) -> HarnessError {
    HarnessError::Io { path: path.display().to_string(), source }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TestCase {
    pub name: String,
    /// Fixture tree directory, relative to the suite file.
    pub fixture: String,
    /// Command line, without `--tree`/`--objdir` (the runner adds those).
    pub argv: Vec<String>,
    pub expected_exit: i32,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SuiteSpec {
    /// The suite file itself; fixtures and baselines live beside it.
    pub path: PathBuf,
    pub cases: Vec<TestCase>,
}

/// Parse a suite file. Blank lines and `#` comments are skipped; case
/// names must be unique.
pub fn parse_suite(path: &Path) -> Result<SuiteSpec, HarnessError> {
    let text = fs::read_to_string(path).map_err(|e| io_err(path, e))?;
    let spec_path = path.display().to_string();
    let fail = |line: usize, reason: &str| HarnessError::Suite {
        path: spec_path.clone(),
        line,
        reason: reason.to_string(),
    };

    let mut cases: Vec<TestCase> = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let n = idx + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let sections: Vec<&str> = line.split("::").map(str::trim).collect();
        if sections.len() != 3 {
            return Err(fail(n, "expected `TEST <name> <fixture> :: <argv...> :: <exit>`"));
        }
        let head: Vec<&str> = sections[0].split_whitespace().collect();
        let [keyword, name, fixture] = head.as_slice() else {
            return Err(fail(n, "header must be `TEST <name> <fixture>`"));
        };
        if *keyword != "TEST" {
            return Err(fail(n, "line must start with TEST"));
        }
        if cases.iter().any(|c| c.name == *name) {
            return Err(fail(n, &format!("duplicate case name `{name}`")));
        }
        let argv: Vec<String> = sections[1].split_whitespace().map(str::to_string).collect();
        if argv.is_empty() {
            return Err(fail(n, "empty command line"));
        }
        let expected_exit = sections[2]
            .parse()
            .map_err(|_| fail(n, "exit status must be an integer"))?;
        cases.push(TestCase {
            name: name.to_string(),
            fixture: fixture.to_string(),
            argv,
            expected_exit,
        });
    }
    Ok(SuiteSpec { path: path.to_path_buf(), cases })
}

/// Render cases in the suite file format (used for discovered skeletons).
pub fn render_suite(cases: &[TestCase]) -> String {
    cases
        .iter()
        .map(|c| {
            format!("TEST {} {} :: {} :: {}\n", c.name, c.fixture, c.argv.join(" "), c.expected_exit)
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Check,
    Record,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CaseResult {
    pub name: String,
    pub passed: bool,
    /// Human-readable mismatch notes (diff lines, status mismatches).
    pub details: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SuiteReport {
    pub results: Vec<CaseResult>,
}

impl SuiteReport {
    pub fn all_passed(&self) -> bool {
        self.results.iter().all(|r| r.passed)
    }

    pub fn failed_names(&self) -> Vec<&str> {
        self.results.iter().filter(|r| !r.passed).map(|r| r.name.as_str()).collect()
    }
}

impl fmt::Display for SuiteReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for r in &self.results {
            writeln!(f, "{} {}", if r.passed { "PASS" } else { "FAIL" }, r.name)?;
            for d in &r.details {
                writeln!(f, "  {d}")?;
            }
        }
        let passed = self.results.iter().filter(|r| r.passed).count();
        writeln!(f, "{} cases: {} passed, {} failed", self.results.len(), passed, self.results.len() - passed)
    }
}

/// Minimal line diff via longest common subsequence: removals prefixed
/// `-`, additions `+`. Only genuinely changed lines appear, so an edit
/// far from the (always-drifting) hash line is still reported on its
/// own, without dragging the untouched records between them along.
fn line_diff(expected: &str, actual: &str) -> Vec<String> {
    let a: Vec<&str> = expected.lines().collect();
    let b: Vec<&str> = actual.lines().collect();
    let (n, m) = (a.len(), b.len());
    let mut lcs = vec![vec![0u32; m + 1]; n + 1];
    for i in (0..n).rev() {
        for j in (0..m).rev() {
            lcs[i][j] = if a[i] == b[j] {
                lcs[i + 1][j + 1] + 1
            } else {
                lcs[i + 1][j].max(lcs[i][j + 1])
            };
        }
    }
    let (mut i, mut j) = (0, 0);
    let mut out = Vec::new();
    while i < n && j < m {
        if a[i] == b[j] {
            i += 1;
            j += 1;
        } else if lcs[i + 1][j] >= lcs[i][j + 1] {
            out.push(format!("- {}", a[i]));
            i += 1;
        } else {
            out.push(format!("+ {}", b[j]));
            j += 1;
        }
    }
    out.extend(a[i..].iter().map(|l| format!("- {l}")));
    out.extend(b[j..].iter().map(|l| format!("+ {l}")));
    out
}

fn read_or_empty(path: &Path) -> Result<String, HarnessError> {
    match fs::read_to_string(path) {
        Ok(s) => Ok(s),
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => Ok(String::new()),
        Err(e) => Err(io_err(path, e)),
    }
}

/// Write only when content changed, so a passing record run is a no-op
/// on disk.
fn write_if_changed(path: &Path, content: &str) -> Result<(), HarnessError> {
    if fs::read_to_string(path).map(|cur| cur == content).unwrap_or(false) {
        return Ok(());
    }
    fs::write(path, content).map_err(|e| io_err(path, e))
}

/// Run every case of the suite in process, in listed order, each against
/// a fresh scratch output directory.
pub fn run_suite(spec: &SuiteSpec, mode: Mode) -> Result<SuiteReport, HarnessError> {
    let base = spec.path.parent().unwrap_or(Path::new(".")).to_path_buf();
    let baseline_dir = base.join("baselines");
    if mode == Mode::Record {
        fs::create_dir_all(&baseline_dir).map_err(|e| io_err(&baseline_dir, e))?;
    }

    let mut results = Vec::new();
    for case in &spec.cases {
        let fixture = base.join(&case.fixture);
        if !fixture.is_dir() {
            return Err(HarnessError::MissingFixture {
                case: case.name.clone(),
                path: fixture.display().to_string(),
            });
        }
        let scratch = tempfile::tempdir().map_err(|e| io_err(Path::new("tempdir"), e))?;
        let objdir = scratch.path().join("object");
        let mut argv = case.argv.clone();
        argv.push("--tree".to_string());
        argv.push(fixture.display().to_string());
        argv.push("--objdir".to_string());
        argv.push(objdir.display().to_string());
        let exit = crate::cli::run(&argv);

        let manifest = read_or_empty(&objdir.join("manifest.txt"))?;
        let report = read_or_empty(&objdir.join("report.txt"))?;
        let manifest_baseline = baseline_dir.join(format!("{}.manifest", case.name));
        let report_baseline = baseline_dir.join(format!("{}.report", case.name));

        let mut details = Vec::new();
        if exit != case.expected_exit {
            details.push(format!("exit status: expected {}, got {exit}", case.expected_exit));
        }
        match mode {
            Mode::Record => {
                if details.is_empty() {
                    write_if_changed(&manifest_baseline, &manifest)?;
                    write_if_changed(&report_baseline, &report)?;
                }
            }
            Mode::Check => {
                for (label, baseline_path, actual) in [
                    ("manifest", &manifest_baseline, &manifest),
                    ("report", &report_baseline, &report),
                ] {
                    if !baseline_path.is_file() {
                        return Err(HarnessError::BaselineAbsent {
                            case: case.name.clone(),
                            path: baseline_path.display().to_string(),
                        });
                    }
                    let expected = fs::read_to_string(baseline_path)
                        .map_err(|e| io_err(baseline_path, e))?;
                    if expected != **actual {
                        details.push(format!("{label} differs from baseline:"));
                        details.extend(line_diff(&expected, actual).into_iter().map(|l| format!("  {l}")));
                    }
                }
            }
        }
        results.push(CaseResult {
            name: case.name.clone(),
            passed: details.is_empty(),
            details,
        });
    }
    Ok(SuiteReport { results })
}

/// One ready-to-record skeleton per test application under
/// `Simulation/unitTest/`, in sorted order.
pub fn discover_unit_tests(tree: &UnitTree, fixture: &str) -> Vec<TestCase> {
    let grouping = format!("{}/unitTest/", crate::SIMULATION_UNIT);
    tree.nodes
        .values()
        .filter(|n| n.kind == NodeKind::SimulationSetup && n.path.starts_with(&grouping))
        .map(|n| {
            let setup = n.path.strip_prefix(&format!("{}/", crate::SIMULATION_UNIT)).unwrap();
            TestCase {
                name: setup.rsplit('/').next().unwrap().to_string(),
                fixture: fixture.to_string(),
                argv: vec!["setup".to_string(), setup.to_string()],
                expected_exit: 0,
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tree::{scan_tree, ScanOptions};

    fn write(root: &Path, rel: &str, content: &str) {
        let p = root.join(rel);
        fs::create_dir_all(p.parent().unwrap()).unwrap();
        fs::write(p, content).unwrap();
    }

    const STUB: &str = "!!****f* s\n!!***\nsubroutine x()\nend subroutine\n";

    /// A minimal but resolvable tree: one unit, one application.
    fn seed_fixture(dir: &Path) {
        write(dir, "Grid/Grid_init.F90", STUB);
        write(dir, "Grid/GridMain/Grid_init.F90", STUB);
        write(dir, "Grid/Config", "PARAMETER gr_refine INTEGER 2\n");
        write(dir, "Simulation/Demo/Config", "REQUIRES Grid\n");
    }

    #[test]
    fn suite_files_parse_and_reject_malformed_lines() {
        let tmp = tempfile::tempdir().unwrap();
        let suite = tmp.path().join("cases.suite");
        fs::write(
            &suite,
            "# comment\n\nTEST demo tree :: setup Demo --format text :: 0\n",
        )
        .unwrap();
        let spec = parse_suite(&suite).unwrap();
        assert_eq!(spec.cases.len(), 1);
        assert_eq!(spec.cases[0].name, "demo");
        assert_eq!(spec.cases[0].fixture, "tree");
        assert_eq!(spec.cases[0].argv, vec!["setup", "Demo", "--format", "text"]);
        assert_eq!(spec.cases[0].expected_exit, 0);
        assert_eq!(render_suite(&spec.cases), "TEST demo tree :: setup Demo --format text :: 0\n");

        for bad in [
            "TEST demo tree :: setup Demo\n",
            "CASE demo tree :: setup :: 0\n",
            "TEST demo tree :: setup :: zero\n",
            "TEST demo tree :: setup :: 0\nTEST demo tree :: setup :: 0\n",
        ] {
            fs::write(&suite, bad).unwrap();
            assert!(matches!(parse_suite(&suite), Err(HarnessError::Suite { .. })), "{bad:?}");
        }
    }

    #[test]
    fn record_then_check_is_a_fixpoint_and_mutation_is_pinpointed() {
        let tmp = tempfile::tempdir().unwrap();
        seed_fixture(&tmp.path().join("tree"));
        let suite = tmp.path().join("cases.suite");
        fs::write(&suite, "TEST demo tree :: setup Demo :: 0\n").unwrap();
        let spec = parse_suite(&suite).unwrap();

        let recorded = run_suite(&spec, Mode::Record).unwrap();
        assert!(recorded.all_passed(), "{recorded}");
        assert!(tmp.path().join("baselines/demo.manifest").is_file());
        let checked = run_suite(&spec, Mode::Check).unwrap();
        assert!(checked.all_passed(), "{checked}");

        // A passing re-record leaves baseline mtimes' content identical.
        let before = fs::read_to_string(tmp.path().join("baselines/demo.manifest")).unwrap();
        run_suite(&spec, Mode::Record).unwrap();
        let after = fs::read_to_string(tmp.path().join("baselines/demo.manifest")).unwrap();
        assert_eq!(before, after);

        // Mutate one parameter default: the case fails and the diff names
        // the PARAM line.
        write(tmp.path(), "tree/Grid/Config", "PARAMETER gr_refine INTEGER 3\n");
        let drifted = run_suite(&spec, Mode::Check).unwrap();
        assert!(!drifted.all_passed());
        assert_eq!(drifted.failed_names(), vec!["demo"]);
        let diff = drifted.results[0].details.join("\n");
        assert!(diff.contains("- PARAM gr_refine INTEGER 2"), "{diff}");
        assert!(diff.contains("+ PARAM gr_refine INTEGER 3"), "{diff}");
        // The hash drifts too, but the unchanged FILE records between the
        // hash line and the edited parameter must stay out of the diff.
        assert!(diff.contains("- HASH sha256:"), "{diff}");
        assert!(!diff.contains("FILE "), "{diff}");
    }

    #[test]
    fn unexpected_exit_status_fails_the_case() {
        let tmp = tempfile::tempdir().unwrap();
        seed_fixture(&tmp.path().join("tree"));
        let suite = tmp.path().join("cases.suite");
        fs::write(&suite, "TEST gone tree :: setup NoSuchSetup :: 0\n").unwrap();
        let spec = parse_suite(&suite).unwrap();
        let report = run_suite(&spec, Mode::Record).unwrap();
        assert!(!report.all_passed());
        assert!(report.results[0].details[0].contains("expected 0, got 2"));
    }

    #[test]
    fn check_without_baselines_is_an_error() {
        let tmp = tempfile::tempdir().unwrap();
        seed_fixture(&tmp.path().join("tree"));
        let suite = tmp.path().join("cases.suite");
        fs::write(&suite, "TEST demo tree :: setup Demo :: 0\n").unwrap();
        let spec = parse_suite(&suite).unwrap();
        assert!(matches!(
            run_suite(&spec, Mode::Check),
            Err(HarnessError::BaselineAbsent { .. })
        ));
    }

    #[test]
    fn missing_fixture_is_an_error() {
        let tmp = tempfile::tempdir().unwrap();
        let suite = tmp.path().join("cases.suite");
        fs::write(&suite, "TEST demo no_such_tree :: setup Demo :: 0\n").unwrap();
        let spec = parse_suite(&suite).unwrap();
        assert!(matches!(
            run_suite(&spec, Mode::Check),
            Err(HarnessError::MissingFixture { .. })
        ));
    }

    #[test]
    fn skeletons_cover_each_test_application() {
        let tmp = tempfile::tempdir().unwrap();
        seed_fixture(tmp.path());
        write(tmp.path(), "Simulation/unitTest/GridScale/Config", "REQUIRES Grid\n");
        write(tmp.path(), "Simulation/unitTest/GridShift/Config", "REQUIRES Grid\n");
        let tree = scan_tree(tmp.path(), &ScanOptions::default()).unwrap();
        let cases = discover_unit_tests(&tree, "flash_tree");
        assert_eq!(
            cases
                .iter()
                .map(|c| (c.name.as_str(), c.argv.join(" ")))
                .collect::<Vec<_>>(),
            vec![
                ("GridScale", "setup unitTest/GridScale".to_string()),
                ("GridShift", "setup unitTest/GridShift".to_string()),
            ]
        );
    }
}
