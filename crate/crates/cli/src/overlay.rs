//! JSON config files merged under command-line flags.

use std::fs;
use std::path::Path;

use anyhow::{Context, Result};
use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::{Map, Value};

use crate::Usage;

/// Reads a config file holding a JSON object.
pub fn load(path: Option<&Path>) -> Result<Map<String, Value>> {
    let Some(path) = path else {
        return Ok(Map::new());
    };
    let text = fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
    match serde_json::from_str(&text).with_context(|| format!("parsing config {}", path.display()))? {
        Value::Object(m) => Ok(m),
        _ => Err(Usage(format!("config {} is not a JSON object", path.display())).into()),
    }
}

/// Flags that were given, as JSON. Unset options and `false` switches are
/// dropped so they do not mask the config file.
pub fn given<T: Serialize>(flags: &T) -> Result<Map<String, Value>> {
    let Value::Object(m) = serde_json::to_value(flags)? else {
        unreachable!("flag structs serialize to objects")
    };
    Ok(m.into_iter()
        .filter(|(_, v)| !v.is_null() && *v != Value::Bool(false))
        .collect())
}

/// Lays `flags` over `base`. A flag from an exclusive group evicts the other
/// members of that group from the config.
pub fn merge(mut base: Map<String, Value>, flags: Map<String, Value>, exclusive: &[&[&str]]) -> Map<String, Value> {
    for group in exclusive {
        if let Some(hit) = group.iter().find(|k| flags.contains_key(**k)) {
            for k in group.iter().filter(|k| *k != hit) {
                base.remove(*k);
            }
        }
    }
    base.extend(flags);
    base
}

pub fn resolve<T: DeserializeOwned>(merged: Map<String, Value>) -> Result<T> {
    serde_json::from_value(Value::Object(merged)).map_err(|e| Usage(format!("invalid configuration: {e}")).into())
}

/// Errors unless at most one key of `group` is present.
pub fn at_most_one(m: &Map<String, Value>, group: &[&str]) -> Result<()> {
    let present: Vec<&str> = group.iter().copied().filter(|k| m.contains_key(*k)).collect();
    if present.len() > 1 {
        let names: Vec<String> = present.iter().map(|k| format!("--{}", k.replace('_', "-"))).collect();
        return Err(Usage(format!("{} cannot be used together", names.join(" and "))).into());
    }
    Ok(())
}

pub fn echo<T: Serialize>(dir: &Path, resolved: &T) -> Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let path = dir.join("config.json");
    fs::write(&path, serde_json::to_string_pretty(resolved)? + "\n")
        .with_context(|| format!("writing {}", path.display()))
}
