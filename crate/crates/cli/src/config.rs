//! TOML run configuration: common keys plus one command-specific body.

use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use toml::{Table, Value};

use crate::error::CliError;

const COMMON_KEYS: [&str; 5] = ["command", "suite", "seed", "workers", "output"];

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputCfg {
    pub dir: PathBuf,
    /// File stem; defaults to the command name (and suite).
    pub stem: Option<String>,
}

impl Default for OutputCfg {
    fn default() -> Self {
        Self {
            dir: PathBuf::from("out"),
            stem: None,
        }
    }
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Common {
    pub command: Option<String>,
    pub suite: Option<String>,
    pub seed: u64,
    /// Worker threads; 0 uses every available core.
    pub workers: usize,
    pub output: OutputCfg,
}

pub fn load(path: Option<&Path>) -> Result<Table, CliError> {
    let Some(path) = path else {
        return Ok(Table::new());
    };
    let text = std::fs::read_to_string(path).map_err(|e| CliError::config(format!("{}: {e}", path.display())))?;
    text.parse::<Table>()
        .map_err(|e| CliError::config(format!("{}: {e}", path.display())))
}

fn parse_value(raw: &str) -> Value {
    format!("v = {raw}")
        .parse::<Table>()
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| Value::String(raw.to_string()))
}

/// Applies `section.key=value`; the value is read as TOML, falling back to a
/// bare string.
pub fn apply_override(table: &mut Table, spec: &str) -> Result<(), CliError> {
    let (key, raw) = spec
        .split_once('=')
        .ok_or_else(|| CliError::Usage(format!("override `{spec}` is not key=value")))?;
    let parts: Vec<&str> = key.trim().split('.').collect();
    if parts.iter().any(|p| p.is_empty()) {
        return Err(CliError::Usage(format!("override key `{key}` is malformed")));
    }
    let (last, path) = parts.split_last().expect("split yields at least one part");
    let mut cur = table;
    for p in path {
        cur = match cur.entry(p.to_string()).or_insert_with(|| Value::Table(Table::new())) {
            Value::Table(t) => t,
            _ => return Err(CliError::Usage(format!("override `{key}`: `{p}` is not a section"))),
        };
    }
    cur.insert(last.to_string(), parse_value(raw.trim()));
    Ok(())
}

/// Splits the document into the common keys and the command body.
pub fn split(mut table: Table) -> Result<(Common, Table), CliError> {
    let mut common = Table::new();
    for k in COMMON_KEYS {
        if let Some(v) = table.remove(k) {
            common.insert(k.to_string(), v);
        }
    }
    let common: Common = Value::Table(common)
        .try_into()
        .map_err(|e: toml::de::Error| CliError::config(e.to_string()))?;
    Ok((common, table))
}

fn merge(base: &mut Table, over: Table) {
    for (k, v) in over {
        match (base.get_mut(&k), v) {
            (Some(Value::Table(b)), Value::Table(o)) => merge(b, o),
            (_, v) => {
                base.insert(k, v);
            }
        }
    }
}

/// The command body: user keys merged over the command's own defaults, so a
/// partial section keeps the remaining defaults of that command. Arrays are
/// replaced whole.
pub fn body<C: Serialize + DeserializeOwned + Default>(table: Table) -> Result<C, CliError> {
    let mut base = match Value::try_from(C::default()) {
        Ok(Value::Table(t)) => t,
        Ok(_) => Table::new(),
        Err(e) => return Err(CliError::config(format!("default configuration: {e}"))),
    };
    merge(&mut base, table);
    Value::Table(base)
        .try_into()
        .map_err(|e: toml::de::Error| CliError::config(e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn overrides_create_sections_and_parse_values() {
        let mut t = Table::new();
        apply_override(&mut t, "params.r=1.5").unwrap();
        apply_override(&mut t, "params.signs=[\"++\", \"+-\"]").unwrap();
        apply_override(&mut t, "equation.derivative=x1").unwrap();
        let p = t["params"].as_table().unwrap();
        assert_eq!(p["r"].as_float(), Some(1.5));
        assert_eq!(p["signs"].as_array().unwrap().len(), 2);
        assert_eq!(t["equation"]["derivative"].as_str(), Some("x1"));
        assert!(apply_override(&mut t, "params.r.x=1").is_err());
        assert!(apply_override(&mut t, "novalue").is_err());
        assert!(apply_override(&mut t, "a..b=1").is_err());
    }

    #[test]
    fn common_keys_are_split_off() {
        let t: Table = "seed = 3\nworkers = 1\n[output]\ndir = \"x\"\n[params]\nr = 2.0\n"
            .parse()
            .unwrap();
        let (c, rest) = split(t).unwrap();
        assert_eq!((c.seed, c.workers), (3, 1));
        assert_eq!(c.output.dir, PathBuf::from("x"));
        assert!(rest.contains_key("params") && !rest.contains_key("seed"));
        let bad: Table = "[output]\nfile = \"x\"\n".parse().unwrap();
        assert!(split(bad).is_err());
    }

    #[derive(Debug, Serialize, Deserialize, PartialEq)]
    #[serde(deny_unknown_fields, default)]
    struct Inner {
        a: f64,
        b: f64,
    }

    #[derive(Debug, Serialize, Deserialize, PartialEq)]
    #[serde(deny_unknown_fields, default)]
    struct Outer {
        inner: Inner,
        list: Vec<f64>,
    }

    impl Default for Inner {
        fn default() -> Self {
            Self { a: 1.0, b: 2.0 }
        }
    }

    impl Default for Outer {
        fn default() -> Self {
            Self {
                inner: Inner { a: 5.0, b: 6.0 },
                list: vec![1.0, 2.0],
            }
        }
    }

    #[test]
    fn partial_sections_keep_command_defaults() {
        let o: Outer = body("list = [3]\n[inner]\nb = 7\n".parse().unwrap()).unwrap();
        assert_eq!(
            o,
            Outer {
                inner: Inner { a: 5.0, b: 7.0 },
                list: vec![3.0]
            }
        );
        assert!(body::<Outer>("[inner]\nc = 1\n".parse().unwrap()).is_err());
        assert!(body::<Outer>("typo = 1\n".parse().unwrap()).is_err());
    }
}
