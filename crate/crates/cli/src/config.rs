//! Run configuration: one JSON object with flat dotted keys such as
//! `"worldgen.blur_sigma": 30` or `"bench.thetas": [0.7, 0.2]`, layered
//! under `--set key=value` overrides.

use std::fs;
use std::path::Path;

use amorph_core::bench::{BenchConfig, SimConfig};
use amorph_core::policies::PolicyConfig;
use amorph_core::simenv::VisibilityModel;
use amorph_core::worldgen::GenParams;
use amorph_core::{Error, Result};
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub worldgen: GenParams,
    pub simenv: VisibilityModel,
    pub policies: PolicyConfig,
    pub bench: BenchConfig,
}

impl RunConfig {
    pub fn sim(&self) -> SimConfig {
        SimConfig {
            worldgen: self.worldgen.clone(),
            simenv: self.simenv,
            policies: self.policies.clone(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.sim().validate()?;
        self.bench.validate()
    }
}

/// Flat key/value layers, applied in order; later layers win.
#[derive(Debug, Default)]
pub struct Layers {
    entries: Vec<(String, Value)>,
}

impl Layers {
    pub fn push_file(&mut self, path: &Path) -> Result<()> {
        let text = fs::read_to_string(path)?;
        let value: Value = serde_json::from_str(&text)
            .map_err(|e| Error::InvalidConfig(format!("{}: {e}", path.display())))?;
        let Value::Object(map) = value else {
            return Err(Error::InvalidConfig(format!(
                "{}: expected a JSON object of dotted keys",
                path.display()
            )));
        };
        for (key, value) in map {
            self.push(key, value)?;
        }
        Ok(())
    }

    /// `key=value`; the value is parsed as JSON and falls back to a plain
    /// string, so `--set bench.methods='["square"]'` and
    /// `--set worldgen.blur_sigma=20` both work.
    pub fn push_assignment(&mut self, assignment: &str) -> Result<()> {
        let (key, raw) = assignment.split_once('=').ok_or_else(|| {
            Error::InvalidConfig(format!("expected key=value, got `{assignment}`"))
        })?;
        let value = serde_json::from_str(raw).unwrap_or_else(|_| Value::String(raw.to_owned()));
        self.push(key.trim().to_owned(), value)
    }

    pub fn push(&mut self, key: String, value: Value) -> Result<()> {
        if value.is_object() {
            return Err(Error::InvalidConfig(format!(
                "`{key}`: nested objects are not allowed, use dotted keys"
            )));
        }
        if key.is_empty() || key.split('.').any(str::is_empty) {
            return Err(Error::InvalidConfig(format!("malformed key `{key}`")));
        }
        self.entries.push((key, value));
        Ok(())
    }

    pub fn resolve(&self) -> Result<RunConfig> {
        let mut root = Map::new();
        for (key, value) in &self.entries {
            insert_dotted(&mut root, key, value.clone())?;
        }
        serde_json::from_value(Value::Object(root)).map_err(|e| Error::InvalidConfig(e.to_string()))
    }
}

fn insert_dotted(root: &mut Map<String, Value>, key: &str, value: Value) -> Result<()> {
    let mut parts: Vec<&str> = key.split('.').collect();
    let leaf = parts.pop().expect("split yields at least one part");
    let mut node = root;
    for part in parts {
        let child = node
            .entry(part.to_owned())
            .or_insert_with(|| Value::Object(Map::new()));
        node = child
            .as_object_mut()
            .ok_or_else(|| Error::InvalidConfig(format!("`{key}` conflicts with a scalar key")))?;
    }
    if node.get(leaf).is_some_and(Value::is_object) {
        return Err(Error::InvalidConfig(format!(
            "`{key}` names a section, not a value"
        )));
    }
    node.insert(leaf.to_owned(), value);
    Ok(())
}
