//! The plain-text `Config` declaration grammar and the runtime parameter
//! file ("parfile") grammar.
//!
//! Both formats are line-oriented. `#` starts a comment (outside quoted
//! strings), blank lines are ignored, and tokens are separated by one or
//! more spaces or tabs. A `Config` file carries five directive forms:
//!
//! ```text
//! REQUIRES  <path>                  # hard dependency on a tree path
//! REQUESTS  <path>                  # soft dependency, droppable from the command line
//! DEFAULT   <child>                 # implementation child selected by default
//! PARAMETER <name> <TYPE> <literal> # runtime parameter owned by this directory
//! VARIABLE  <name>                  # grid-variable declaration
//! ```
//!
//! A parfile is a flat list of `name = value` assignments; when a name is
//! assigned twice the later line wins.

use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::fmt;
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ConfigError {
    #[error("{path}:{line}: {reason}")]
    Syntax { path: String, line: u32, reason: String },
    #[error("{path}:{line}: duplicate declaration of `{name}` (first declared on line {first_line})")]
    Duplicate { path: String, line: u32, name: String, first_line: u32 },
}

/// Declared type of a runtime parameter.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum ParamType {
    Integer,
    Real,
    Boolean,
    String,
}

impl ParamType {
    /// Parse the `INTEGER`/`REAL`/`BOOLEAN`/`STRING` keyword form.
    pub fn parse(tok: &str) -> Option<ParamType> {
        match tok {
            "INTEGER" => Some(ParamType::Integer),
            "REAL" => Some(ParamType::Real),
            "BOOLEAN" => Some(ParamType::Boolean),
            "STRING" => Some(ParamType::String),
            _ => None,
        }
    }

    /// Does `raw` parse as a literal of this type? `REAL` accepts both
    /// decimal and whole-number literals; the other types are exact.
    pub fn admits(&self, raw: &str) -> bool {
        match self {
            ParamType::Integer => is_integer(raw),
            ParamType::Real => is_integer(raw) || is_decimal(raw),
            ParamType::Boolean => raw == "TRUE" || raw == "FALSE",
            ParamType::String => is_quoted(raw),
        }
    }
}

impl fmt::Display for ParamType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ParamType::Integer => "INTEGER",
            ParamType::Real => "REAL",
            ParamType::Boolean => "BOOLEAN",
            ParamType::String => "STRING",
        })
    }
}

fn is_integer(s: &str) -> bool {
    let digits = s.strip_prefix(['+', '-']).unwrap_or(s);
    !digits.is_empty() && digits.bytes().all(|b| b.is_ascii_digit())
}

fn is_decimal(s: &str) -> bool {
    let body = s.strip_prefix(['+', '-']).unwrap_or(s);
    match body.split_once('.') {
        Some((int, frac)) => {
            !int.is_empty()
                && !frac.is_empty()
                && int.bytes().all(|b| b.is_ascii_digit())
                && frac.bytes().all(|b| b.is_ascii_digit())
        }
        None => false,
    }
}

fn is_quoted(s: &str) -> bool {
    s.len() >= 2 && s.starts_with('"') && s.ends_with('"') && !s[1..s.len() - 1].contains('"')
}

fn is_identifier(s: &str) -> bool {
    let mut bytes = s.bytes();
    match bytes.next() {
        Some(b) if b.is_ascii_alphabetic() || b == b'_' => {}
        _ => return false,
    }
    bytes.all(|b| b.is_ascii_alphanumeric() || b == b'_')
}

fn is_lower_identifier(s: &str) -> bool {
    s.bytes().next().is_some_and(|b| b.is_ascii_lowercase())
        && s.bytes().all(|b| b.is_ascii_lowercase() || b.is_ascii_digit() || b == b'_')
}

/// A directory path relative to the tree root: `/`-separated identifier
/// segments, no leading separator, no `.` or `..`.
pub fn is_tree_path(s: &str) -> bool {
    !s.is_empty() && s.split('/').all(is_identifier)
}

/// One declaration from a `Config` file.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Directive {
    Requires { target: String },
    Requests { target: String },
    Default { child: String },
    Parameter { name: String, ptype: ParamType, default: String },
    Variable { name: String },
}

/// A parsed `Config` file: the directives of one directory, in source
/// order, each tagged with its 1-based source line.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ConfigFile {
    /// Tree-relative path of the directory this Config belongs to.
    pub dir_path: String,
    pub entries: Vec<Entry>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Entry {
    pub line: u32,
    pub directive: Directive,
}

impl ConfigFile {
    pub fn directives(&self) -> impl Iterator<Item = &Directive> {
        self.entries.iter().map(|e| &e.directive)
    }

    pub fn requires(&self) -> impl Iterator<Item = &str> {
        self.directives().filter_map(|d| match d {
            Directive::Requires { target } => Some(target.as_str()),
            _ => None,
        })
    }

    pub fn requests(&self) -> impl Iterator<Item = &str> {
        self.directives().filter_map(|d| match d {
            Directive::Requests { target } => Some(target.as_str()),
            _ => None,
        })
    }

    pub fn defaults(&self) -> impl Iterator<Item = &str> {
        self.directives().filter_map(|d| match d {
            Directive::Default { child } => Some(child.as_str()),
            _ => None,
        })
    }

    pub fn parameters(&self) -> impl Iterator<Item = (&str, ParamType, &str)> {
        self.directives().filter_map(|d| match d {
            Directive::Parameter { name, ptype, default } => {
                Some((name.as_str(), *ptype, default.as_str()))
            }
            _ => None,
        })
    }

    pub fn variables(&self) -> impl Iterator<Item = &str> {
        self.directives().filter_map(|d| match d {
            Directive::Variable { name } => Some(name.as_str()),
            _ => None,
        })
    }
}

/// Split one logical line into tokens. Whitespace separates tokens, `#`
/// starts a comment, and a `"`-delimited string (which may contain spaces
/// and `#`) is always a single token.
fn tokenize(path: &str, line_no: u32, line: &str) -> Result<Vec<String>, ConfigError> {
    let mut tokens = Vec::new();
    let mut cur = String::new();
    let mut in_quotes = false;
    for ch in line.chars() {
        match ch {
            '"' => {
                cur.push('"');
                if in_quotes {
                    tokens.push(std::mem::take(&mut cur));
                }
                in_quotes = !in_quotes;
            }
            '#' if !in_quotes => break,
            c if c.is_whitespace() && !in_quotes => {
                if !cur.is_empty() {
                    tokens.push(std::mem::take(&mut cur));
                }
            }
            c => cur.push(c),
        }
    }
    if in_quotes {
        return Err(ConfigError::Syntax {
            path: path.to_string(),
            line: line_no,
            reason: "unterminated string literal".to_string(),
        });
    }
    if !cur.is_empty() {
        tokens.push(cur);
    }
    Ok(tokens)
}

/// Parse the text of a `Config` file belonging to `dir_path`.
pub fn parse_config(text: &str, dir_path: &str) -> Result<ConfigFile, ConfigError> {
    let path = if dir_path.is_empty() {
        "Config".to_string()
    } else {
        format!("{dir_path}/Config")
    };
    let syntax = |line: u32, reason: String| ConfigError::Syntax {
        path: path.clone(),
        line,
        reason,
    };

    let mut entries = Vec::new();
    let mut param_lines: BTreeMap<String, u32> = BTreeMap::new();
    let mut var_lines: BTreeMap<String, u32> = BTreeMap::new();

    for (idx, raw_line) in text.lines().enumerate() {
        let line_no = idx as u32 + 1;
        let tokens = tokenize(&path, line_no, raw_line)?;
        let Some(keyword) = tokens.first() else { continue };
        let operands = &tokens[1..];
        let arity = |n: usize| -> Result<(), ConfigError> {
            if operands.len() == n {
                Ok(())
            } else {
                Err(syntax(
                    line_no,
                    format!("{keyword} takes {n} operand(s), found {}", operands.len()),
                ))
            }
        };
        let directive = match keyword.as_str() {
            "REQUIRES" | "REQUESTS" => {
                arity(1)?;
                let target = operands[0].clone();
                if !is_tree_path(&target) {
                    return Err(syntax(line_no, format!("malformed tree path `{target}`")));
                }
                if keyword == "REQUIRES" {
                    Directive::Requires { target }
                } else {
                    Directive::Requests { target }
                }
            }
            "DEFAULT" => {
                arity(1)?;
                let child = operands[0].clone();
                if !is_identifier(&child) {
                    return Err(syntax(
                        line_no,
                        format!("DEFAULT expects a child directory name, found `{child}`"),
                    ));
                }
                Directive::Default { child }
            }
            "PARAMETER" => {
                arity(3)?;
                let name = operands[0].clone();
                if !is_identifier(&name) {
                    return Err(syntax(line_no, format!("malformed parameter name `{name}`")));
                }
                let Some(ptype) = ParamType::parse(&operands[1]) else {
                    return Err(syntax(
                        line_no,
                        format!("unknown parameter type `{}`", operands[1]),
                    ));
                };
                let default = operands[2].clone();
                if !ptype.admits(&default) {
                    return Err(syntax(
                        line_no,
                        format!("literal `{default}` is not a valid {ptype}"),
                    ));
                }
                if let Some(&first) = param_lines.get(&name) {
                    return Err(ConfigError::Duplicate {
                        path,
                        line: line_no,
                        name,
                        first_line: first,
                    });
                }
                param_lines.insert(name.clone(), line_no);
                Directive::Parameter { name, ptype, default }
            }
            "VARIABLE" => {
                arity(1)?;
                let name = operands[0].clone();
                if !is_lower_identifier(&name) {
                    return Err(syntax(
                        line_no,
                        format!("VARIABLE expects a lowercase identifier, found `{name}`"),
                    ));
                }
                if let Some(&first) = var_lines.get(&name) {
                    return Err(ConfigError::Duplicate {
                        path,
                        line: line_no,
                        name,
                        first_line: first,
                    });
                }
                var_lines.insert(name.clone(), line_no);
                Directive::Variable { name }
            }
            other => return Err(syntax(line_no, format!("unknown keyword `{other}`"))),
        };
        entries.push(Entry { line: line_no, directive });
    }

    Ok(ConfigFile {
        dir_path: dir_path.to_string(),
        entries,
    })
}

/// Render a `ConfigFile` back to canonical text: one directive per line,
/// single-space separated, original order, no comments. Parsing the
/// rendered text yields the same directives (line numbers renumber).
pub fn render_config(cfg: &ConfigFile) -> String {
    let mut out = String::new();
    for d in cfg.directives() {
        match d {
            Directive::Requires { target } => {
                out.push_str("REQUIRES ");
                out.push_str(target);
            }
            Directive::Requests { target } => {
                out.push_str("REQUESTS ");
                out.push_str(target);
            }
            Directive::Default { child } => {
                out.push_str("DEFAULT ");
                out.push_str(child);
            }
            Directive::Parameter { name, ptype, default } => {
                out.push_str(&format!("PARAMETER {name} {ptype} {default}"));
            }
            Directive::Variable { name } => {
                out.push_str("VARIABLE ");
                out.push_str(name);
            }
        }
        out.push('\n');
    }
    out
}

/// One `name = value` line of a parfile.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Assignment {
    pub line: u32,
    pub name: String,
    /// Raw literal text; it is typed later against the parameter table.
    pub value: String,
}

/// A parsed runtime parameter file.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ParFile {
    pub path: String,
    pub assignments: Vec<Assignment>,
}

impl ParFile {
    /// Effective value per name: the last assignment wins.
    pub fn effective(&self) -> BTreeMap<&str, &str> {
        let mut map = BTreeMap::new();
        for a in &self.assignments {
            map.insert(a.name.as_str(), a.value.as_str());
        }
        map
    }
}

/// Parse parfile text. `path` is used in diagnostics only.
pub fn parse_parfile(text: &str, path: &str) -> Result<ParFile, ConfigError> {
    let mut assignments = Vec::new();
    for (idx, raw_line) in text.lines().enumerate() {
        let line_no = idx as u32 + 1;
        let tokens = tokenize(path, line_no, raw_line)?;
        if tokens.is_empty() {
            continue;
        }
        let syntax = |reason: String| ConfigError::Syntax {
            path: path.to_string(),
            line: line_no,
            reason,
        };
        // Accept `name = value`, `name= value`, `name =value`, `name=value`.
        let joined = tokens.join(" ");
        let Some((lhs, rhs)) = joined.split_once('=') else {
            return Err(syntax(format!("expected `name = value`, found `{joined}`")));
        };
        let name = lhs.trim();
        let value = rhs.trim();
        if !is_identifier(name) {
            return Err(syntax(format!("malformed parameter name `{name}`")));
        }
        if value.is_empty() {
            return Err(syntax(format!("missing value for `{name}`")));
        }
        assignments.push(Assignment {
            line: line_no,
            name: name.to_string(),
            value: value.to_string(),
        });
    }
    Ok(ParFile {
        path: path.to_string(),
        assignments,
    })
}
