//! composekit assembles one application out of a tree of interchangeable
//! components.
//!
//! A source tree is organized by convention: top-level capitalized
//! directories are *units* (`Grid`, `Particles`, ...), each publishing its
//! API as `Unit_*` stub files at the unit root; children named `<Unit>Xyz`
//! are *subunits*; all-lowercase children are mutually exclusive
//! *implementation directories*; and a distinguished `Simulation` unit
//! holds one directory per buildable application. Plain-text `Config`
//! files declare what each directory requires, requests, defaults to,
//! and which runtime parameters and grid variables it owns.
//!
//! Given a simulation name plus command-line adjustments, composekit
//! resolves the closure of included directories, picks exactly one source
//! file per routine (deepest wins; the simulation directory beats
//! everything), layers parameter defaults under runtime overrides,
//! assigns grid variable indices, orders unit initialization, checks the
//! architectural laws, and writes a byte-deterministic build manifest.
//!
//! The quickest tour is the `examples/` directory — each file is runnable
//! and exercises one capability end to end:
//!
//! ```text
//! cargo run -p composekit --example parse_config
//! cargo run -p composekit --example scan_tree
//! cargo run -p composekit --example resolve_setup
//! cargo run -p composekit --example choose_implementations
//! cargo run -p composekit --example parameter_precedence
//! cargo run -p composekit --example init_order
//! cargo run -p composekit --example validate_tree
//! cargo run -p composekit --example enumerate_particles
//! cargo run -p composekit --example emit_manifest
//! cargo run -p composekit --example explain_selection
//! cargo run -p composekit --example regression_suite
//! ```
//!
//! The same operations are reachable through the thin `composekit` binary
//! (`setup`, `validate`, `explain`, `list`, `enumerate`, `test`).

pub mod arbitrator;
pub mod cli;
pub mod config;
pub mod emitter;
pub mod harness;
pub mod resolver;
pub mod tree;
pub mod validator;

pub use arbitrator::{FileChoice, FileMap, InitOrder, ParamEntry, ParameterTable, VariableIndex};
pub use config::{ConfigFile, Directive, ParFile, ParamType};
pub use emitter::{Explanation, Manifest};
pub use resolver::{SetupRequest, UnitClosure};
pub use tree::{ApiRoutine, NodeKind, SourceFile, UnitNode, UnitTree};
pub use validator::{Finding, Severity, ValidationReport};

/// The one unit that drives all the others; it is the caller of every
/// `Unit_init`, so it never appears in the computed initialization order.
pub const DRIVER_UNIT: &str = "Driver";

/// Name of the per-directory declaration file.
pub const CONFIG_FILE: &str = "Config";

/// Name of the unit that contains application directories.
pub const SIMULATION_UNIT: &str = "Simulation";

/// Tool version recorded in manifest headers.
pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");
