//! Parse a Config file and a runtime parameter file, then show what the
//! parser extracted: directives survive comments, blank lines, and
//! quoted strings; parfile assignments apply last-wins.

use composekit::config::{parse_config, parse_parfile};

fn main() {
    let config_text = r#"
# What this directory needs to function at all:
REQUIRES Grid
REQUIRES physics/Eos

REQUESTS IO          # nice to have, dropped if excluded

DEFAULT passive

PARAMETER pt_maxPerProc INTEGER 1000
PARAMETER pt_dtFactor   REAL    0.5
PARAMETER pt_label      STRING  "tracer cloud #1"
VARIABLE dens
VARIABLE pres
"#;

    let cfg = parse_config(config_text, "Particles").expect("well-formed Config");
    println!("directives in Particles/Config:");
    println!("  requires:  {:?}", cfg.requires().collect::<Vec<_>>());
    println!("  requests:  {:?}", cfg.requests().collect::<Vec<_>>());
    println!("  defaults:  {:?}", cfg.defaults().collect::<Vec<_>>());
    for (name, ptype, default) in cfg.parameters() {
        println!("  parameter: {name} ({ptype}) = {default}");
    }
    println!("  variables: {:?}", cfg.variables().collect::<Vec<_>>());

    let par_text = "pt_maxPerProc = 500\ncfl = 0.6\npt_maxPerProc = 77   # last one wins\n";
    let par = parse_parfile(par_text, "flash.par").expect("well-formed parfile");
    println!("\neffective parfile overrides:");
    for (name, value) in par.effective() {
        println!("  {name} = {value}");
    }
}
